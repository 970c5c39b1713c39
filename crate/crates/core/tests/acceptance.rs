//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::{BTreeSet, VecDeque};
use std::panic;
use std::time::Instant;

use bt_coeff::cli::compare_example;
use bt_coeff::complex::{check_action_stability, verify_exactness, ComplexModel};
use bt_coeff::orbits::{check_partition, enumerate_orbits, orbit_of_point};
use bt_coeff::projline::{class_of, class_representative, residue_classes, ResidueClass};
use bt_coeff::tree::{Simplex, Vertex};
use bt_coeff::{BtTree, OrbitRegistry, PadicConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn tree(p: u32) -> BtTree {
    let prec = PadicConfig::max_precision(p).min(40);
    BtTree::new(PadicConfig::new(p, prec).unwrap())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn simplices(t: &BtTree, depth: u32) -> Vec<Simplex> {
    let mut out: Vec<Simplex> = t.ball(depth).into_iter().map(Simplex::Vertex).collect();
    out.extend(t.edges(depth).into_iter().map(Simplex::Edge));
    out
}

fn orbit_counts() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for p in [2u32, 3, 5] {
        let t = tree(p);
        let q = p as usize;
        for k in 1..=3u32 {
            for s in simplices(&t, 3) {
                let got = enumerate_orbits(&t, &s, k).map_err(|e| e.to_string())?.len();
                let want = match s {
                    Simplex::Vertex(_) => (q + 1) * q.pow(k - 1),
                    Simplex::Edge(_) => 2 * q.pow(k - 1),
                };
                ensure(got == want, || format!("p={p} k={k} {s:?}: {got} orbits, expected {want}"))?;
                checked += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{checked} (simplex, k) pairs"))
}

fn registries() -> impl Iterator<Item = (u32, u32, u32)> {
    [2u32, 3].into_iter().flat_map(|p| (1..=2u32).flat_map(move |k| (1..=3u32).map(move |n| (p, k, n))))
}

fn build(p: u32, k: u32, n: u32) -> Result<OrbitRegistry, String> {
    OrbitRegistry::build(&tree(p), n, k).map_err(|e| e.to_string())
}

fn minimal_counts() -> Outcome {
    for (p, k, n) in registries() {
        let reg = build(p, k, n)?;
        for v in &reg.vertices {
            let got = reg.records_of(&Simplex::Vertex(*v)).iter().filter(|&&i| reg.records[i].minimal).count();
            let want = if v.n == n { (p as usize).pow(k) } else { 0 };
            ensure(got == want, || format!("p={p} k={k} n={n} {v}: {got} minimal, expected {want}"))?;
        }
    }
    Ok("12 registries".into())
}

fn nonminimal_equals_edges() -> Outcome {
    for (p, k, n) in registries() {
        let reg = build(p, k, n)?;
        let q = p as usize;
        let r = 2 * q.pow(k - 1) * (q + 1) * (q.pow(n) - 1) / (q - 1);
        let nonmin: BTreeSet<usize> = reg.vertex_records().filter(|x| !x.minimal).map(|x| x.id).collect();
        let mut owners = BTreeSet::new();
        for e in reg.edge_records() {
            let owner = e.owner.ok_or_else(|| format!("edge record {} has no owner", e.id))?;
            ensure(reg.records[owner].ball == e.ball, || format!("owner of {} has another disc", e.id))?;
            ensure(owners.insert(owner), || format!("record {owner} owns two edge orbits"))?;
        }
        ensure(owners == nonmin, || format!("p={p} k={k} n={n}: owners differ from non-minimal records"))?;
        ensure(nonmin.len() == r, || format!("p={p} k={k} n={n}: {} non-minimal, expected {r}", nonmin.len()))?;
    }
    Ok("12 registries".into())
}

fn minimal_partition() -> Outcome {
    let mut classes_checked = 0;
    for (p, k, n) in registries() {
        let reg = build(p, k, n)?;
        let balls: Vec<_> = reg.minimal_orbits().iter().map(|r| r.ball).collect();
        let depth = k + n + 1;
        ensure(balls.iter().all(|b| b.residue_depth() <= depth), || "minimal disc finer than the grid".into())?;
        for cl in residue_classes(reg.config(), depth) {
            let pt = class_representative(reg.config(), cl);
            let hits = balls.iter().filter(|b| b.contains(&pt).unwrap()).count();
            ensure(hits == 1, || format!("p={p} k={k} n={n}: class {cl:?} lies in {hits} minimal discs"))?;
            classes_checked += 1;
        }
        ensure(check_partition(&balls).map_err(|e| e.to_string())?, || "library partition check disagrees".into())?;
    }
    Ok(format!("{classes_checked} residue classes"))
}

fn closure(
    t: &BtTree,
    s: &Simplex,
    k: u32,
    start: ResidueClass,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> BTreeSet<ResidueClass> {
    let mut gens = Vec::new();
    for _ in 0..30 {
        let g = t.sample_group_element(rng, s, k).unwrap();
        gens.push(g.adjugate());
        gens.push(g);
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(cl) = queue.pop_front() {
        let pt = class_representative(t.config(), cl);
        for g in &gens {
            let next = class_of(&pt.act(g), depth).unwrap();
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen
}

fn orbit_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trees = [tree(2), tree(3)];
    for i in 0..200 {
        let t = &trees[rng.random_range(0..2)];
        let k = rng.random_range(1..=2u32);
        let all = simplices(t, 2);
        let s = all[rng.random_range(0..all.len())];
        let depth = k + 3;
        let classes = residue_classes(t.config(), depth);
        let start = classes[rng.random_range(0..classes.len())];
        let pt = class_representative(t.config(), start);
        let o = orbit_of_point(t, &s, k, &pt).map_err(|e| e.to_string())?;
        let want: BTreeSet<_> = o.ball.classes(depth).map_err(|e| e.to_string())?.into_iter().collect();
        let got = closure(t, &s, k, start, depth, &mut rng);
        ensure(got == want, || {
            format!("sample {i}: p={} k={k} {s:?} disc {} vs closure of {} classes", t.p(), o.ball, got.len())
        })?;
    }
    Ok("200 samples".into())
}

fn random_geodesic(t: &BtTree, rng: &mut ChaCha8Rng, len: usize) -> Vec<Vertex> {
    let start = t.ball(3);
    let mut path = vec![start[rng.random_range(0..start.len())]];
    while path.len() <= len {
        let last = *path.last().unwrap();
        let prev = if path.len() > 1 { Some(path[path.len() - 2]) } else { None };
        let next: Vec<_> = t.neighbors(&last).into_iter().filter(|w| Some(*w) != prev).collect();
        path.push(next[rng.random_range(0..next.len())]);
    }
    path
}

fn path_transitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trees = [tree(2), tree(3)];
    for i in 0..200 {
        let t = &trees[i % 2];
        let len = rng.random_range(0..=4usize);
        let from = random_geodesic(t, &mut rng, len);
        let to = random_geodesic(t, &mut rng, len);
        let g = t.map_path(&from, &to).map_err(|e| e.to_string())?;
        for (x, y) in from.iter().zip(&to) {
            let img = t.act(&g, x).map_err(|e| e.to_string())?;
            ensure(img == *y, || format!("pair {i}: {x} goes to {img}, expected {y}"))?;
        }
    }
    Ok("200 geodesic pairs".into())
}

fn example_matrix() -> Outcome {
    let report = compare_example(40).map_err(|e| e.to_string())?;
    ensure(report.matches, || format!("missing {:?}, unexpected {:?}", report.missing, report.unexpected))?;
    Ok("12 blocks match".into())
}

fn exactness_grid() -> Outcome {
    let mut slowest = 0.0f64;
    for p in [2u32, 3] {
        for k in 1..=2u32 {
            for n in 1..=2u32 {
                for d in 0..=2usize {
                    let start = Instant::now();
                    let model = ComplexModel::new(build(p, k, n)?, d).map_err(|e| e.to_string())?;
                    let report = verify_exactness(&model, 11, 50).map_err(|e| e.to_string())?;
                    let failed: Vec<_> = report.checks.iter().filter(|c| !c.ok).map(|c| c.name.clone()).collect();
                    ensure(failed.is_empty(), || format!("p={p} k={k} n={n} d={d}: failed {failed:?}"))?;
                    let secs = start.elapsed().as_secs_f64();
                    ensure(secs < 60.0, || format!("p={p} k={k} n={n} d={d} took {secs:.1}s"))?;
                    slowest = slowest.max(secs);
                }
            }
        }
    }
    Ok(format!("24 grid points, slowest {slowest:.2}s"))
}

fn action_stability() -> Outcome {
    let mut passed = 0;
    let mut samples = 0;
    let mut worst = None;
    for (i, p) in [2u32, 3].into_iter().enumerate() {
        let report =
            check_action_stability(&tree(p), &[1, 2], 2, &[0, 1, 2], 50, 9 + i as u64).map_err(|e| e.to_string())?;
        passed += report.passed;
        samples += report.samples;
        if worst.is_none() {
            worst = report.failures.first().cloned();
        }
    }
    match worst {
        None => Ok(format!("{samples} samples")),
        Some(f) => Err(format!(
            "{passed} of {samples} samples within precision; e.g. weights {:?} on {} degree {} gives guard valuation {:?}",
            f.character,
            f.fun.ball,
            f.fun.coeffs.len() - 1,
            f.guard_valuation
        )),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("orbit counts", orbit_counts),
        ("minimal counts", minimal_counts),
        ("non-minimal vertex orbits = edge orbits", nonminimal_equals_edges),
        ("minimal discs partition the line", minimal_partition),
        ("orbit discs match generated closures", orbit_oracle),
        ("path transitivity", path_transitivity),
        ("worked example matrix", example_matrix),
        ("exactness certificate", exactness_grid),
        ("action stability", action_stability),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.2}s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name} ({detail}; {secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
