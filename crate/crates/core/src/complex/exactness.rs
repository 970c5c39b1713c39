//! Finite exactness certificate for the truncated complex, and the check
//! that group elements keep truncated functions truncated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Character, ComplexModel, LocalFun, TruncFun, DEFAULT_GUARD};
use crate::error::Result;
use crate::orbits::enumerate_orbits;
use crate::tree::{BtTree, Simplex};

#[derive(Debug, Clone, Serialize)]
pub struct Params {
    pub p: u32,
    pub k: u32,
    pub n: u32,
    pub d: usize,
    pub prec: u32,
    pub seed: u64,
}

/// Dimensions of the truncated spaces.
#[derive(Debug, Clone, Serialize)]
pub struct Dims {
    pub c1: usize,
    pub c0: usize,
    pub nonminimal: usize,
    pub local: usize,
    pub expected_kernel: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ranks {
    pub d1: usize,
    pub d0: usize,
    pub dbar1: usize,
    pub kernel_d0: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    pub params: Params,
    pub dims: Dims,
    pub ranks: Ranks,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<LocalFun>,
}

impl ExactnessReport {
    pub fn is_exact(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn check(name: &str, ok: bool, detail: String) -> Check {
    Check { name: name.into(), ok, detail }
}

/// Runs every check of the certificate; `lifts` random targets exercise the
/// constructive surjectivity lift.
pub fn verify_exactness(model: &ComplexModel, seed: u64, lifts: usize) -> Result<ExactnessReport> {
    let reg = model.registry();
    let cfg = model.config();
    let b = model.degree() + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = Params { p: cfg.p(), k: reg.k, n: reg.n, d: model.degree(), prec: cfg.prec(), seed };
    let dims = Dims {
        c1: b * model.edge_record_ids().len(),
        c0: b * model.vertex_record_ids().len(),
        nonminimal: b * model.order().len(),
        local: b * model.minimal_record_ids().len(),
        expected_kernel: b * model.expected_rank_blocks(),
    };

    let d1 = model.d1_matrix()?;
    let d0 = model.d0_matrix()?;
    let dbar = model.assemble_dbar1()?;
    let ranks =
        Ranks { d1: d1.rank(), d0: d0.rank(), dbar1: dbar.to_dense(cfg).rank(), kernel_d0: dims.c0 - d0.rank() };

    let mut checks = vec![
        check("injective", ranks.d1 == dims.c1, format!("rank d1 = {}, dim C1 = {}", ranks.d1, dims.c1)),
        check(
            "dbar1 triangular",
            dbar.is_lower_triangular() && dbar.has_unit_diagonal() && dbar.size() == model.expected_rank_blocks(),
            format!("{} blocks, diagonal {:?}", dbar.size(), dbar.diagonal()),
        ),
        check(
            "dbar1 invertible",
            ranks.dbar1 == dims.nonminimal,
            format!("rank {} of {}", ranks.dbar1, dims.nonminimal),
        ),
        check("d0 d1 = 0", d0.mul(&d1).is_zero(), String::new()),
        check(
            "kernel dimension",
            ranks.kernel_d0 == dims.expected_kernel && dims.nonminimal == dims.expected_kernel,
            format!("dim ker d0 = {}, expected {}", ranks.kernel_d0, dims.expected_kernel),
        ),
        check(
            "image equals kernel",
            ranks.d1 == ranks.kernel_d0,
            format!("rank d1 = {}, dim ker d0 = {}", ranks.d1, ranks.kernel_d0),
        ),
    ];

    let mut counterexample = None;
    let mut lifted = 0;
    for _ in 0..lifts {
        let f = model.random_local(&mut rng);
        let ok = match model.surjective_lift(&f) {
            Ok(c) => model.partial0(&c)?.agrees(&f),
            Err(_) => false,
        };
        if ok {
            lifted += 1;
        } else if counterexample.is_none() {
            counterexample = Some(f);
        }
    }
    checks.push(check("surjective lift", lifted == lifts, format!("{lifted} of {lifts} lifts")));

    let x = model.random_nonmin(&mut rng);
    let lift = model.kernel_lift(&x)?;
    let round = model.kernel_project(&lift).is_ok_and(|y| y.iter().zip(&x).all(|(a, b)| a.agrees(b)));
    checks.push(check("kernel lift/project", round, String::new()));

    let mut warnings = Vec::new();
    if cfg.p() == 2 && reg.k == 1 {
        warnings.push("p = 2 with k = 1: the congruence subgroups are not uniform".into());
    }
    let verdict = if checks.iter().all(|c| c.ok) { "exact" } else { "not exact" }.to_string();
    Ok(ExactnessReport { params, dims, ranks, checks, warnings, verdict, counterexample })
}

/// One sampled action whose discarded coefficients were not negligible.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityFailure {
    pub simplex: Simplex,
    pub k: u32,
    pub character: (i32, i32),
    pub fun: TruncFun,
    /// Absent when the composite has no expansion in the disc's frame.
    pub guard_valuation: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub samples: usize,
    pub passed: usize,
    pub needed: i64,
    pub failures: Vec<StabilityFailure>,
}

/// Samples `g` in the level-`k` congruence subgroup of a simplex within
/// `depth` of the root and applies it to a random truncated function on one
/// of the simplex's own orbits.
pub fn check_action_stability(
    tree: &BtTree,
    ks: &[u32],
    depth: u32,
    degrees: &[usize],
    samples: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let cfg = tree.config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut simplices: Vec<Simplex> = tree.ball(depth).into_iter().map(Simplex::Vertex).collect();
    simplices.extend(tree.edges(depth).into_iter().map(Simplex::Edge));
    let needed = cfg.prec() as i64;
    let bound = (cfg.p() as i64).pow(3);
    let mut passed = 0;
    let mut failures = Vec::new();
    for _ in 0..samples {
        let s = simplices[rng.random_range(0..simplices.len())];
        let k = ks[rng.random_range(0..ks.len())];
        let orbits = enumerate_orbits(tree, &s, k)?;
        let ball = orbits[rng.random_range(0..orbits.len())].ball;
        let g = tree.sample_group_element(&mut rng, &s, k)?;
        let d = degrees[rng.random_range(0..degrees.len())];
        let chi = Character::new(rng.random_range(-3..=3), rng.random_range(-3..=3));
        let fun = TruncFun { ball, coeffs: (0..=d).map(|_| cfg.int(rng.random_range(-bound..=bound))).collect() };
        let guard_valuation = fun.act(&g, &chi, DEFAULT_GUARD).ok().map(|r| r.guard_valuation);
        if guard_valuation.is_some_and(|v| v >= needed) {
            passed += 1;
        } else if failures.len() < 10 {
            failures.push(StabilityFailure { simplex: s, k, character: (chi.m1, chi.m2), fun, guard_valuation });
        }
    }
    Ok(StabilityReport { samples, passed, needed, failures })
}
