//! Command-line driver.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::complex::{check_action_stability, verify_exactness, BlockKind, ComplexModel};
use crate::error::{Error, Result};
use crate::orbits::{OrbitRecord, OrbitRegistry};
use crate::padic::PadicConfig;
use crate::tree::BtTree;

/// The boundary matrix of the worked example, transcribed as ball labels.
pub const EXAMPLE_FIXTURE: &str = include_str!("../fixtures/example_p2_k1_n1.json");

#[derive(Debug, Parser)]
#[command(name = "bt-coeff", version, about = "Orbit registries and exactness checks on the Bruhat-Tits tree")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tree ball of radius n (DOT by default)
    Tree(RunConfig),
    /// Every orbit record of the registry
    Orbits(RunConfig),
    /// Minimal orbit records only
    Minimal(RunConfig),
    /// Orbit counting report
    Counts(RunConfig),
    /// Block structure of the boundary matrix on non-minimal records
    Matrix(RunConfig),
    /// Full exactness certificate
    Verify(RunConfig),
    /// Compare the p = 2, k = 1, n = 1 boundary matrix with the stored example
    Example(RunConfig),
    /// Sample group elements and check the truncated action is closed
    Stability(RunConfig),
}

impl Command {
    pub fn config(&self) -> &RunConfig {
        match self {
            Command::Tree(c)
            | Command::Orbits(c)
            | Command::Minimal(c)
            | Command::Counts(c)
            | Command::Matrix(c)
            | Command::Verify(c)
            | Command::Example(c)
            | Command::Stability(c) => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Truncation degree
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// p-adic precision; defaults to min(40, largest supported)
    #[arg(long)]
    pub prec: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn padic(&self) -> Result<PadicConfig> {
        let max = PadicConfig::max_precision(self.p);
        let needed = self.k + self.n + self.d as u32 + 4;
        let prec = self.prec.unwrap_or(max.min(40));
        if self.k == 0 {
            return Err(Error::BadLevel);
        }
        if prec < needed {
            return Err(Error::Invalid(format!("precision {prec} is below k + n + d + 4 = {needed}")));
        }
        Ok(PadicConfig::new(self.p, prec)?)
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Usage = 2,
}

#[derive(Debug, Serialize)]
struct RegistryDump<'a> {
    p: u32,
    k: u32,
    n: u32,
    records: Vec<&'a OrbitRecord>,
}

/// Outcome of comparing the assembled matrix with the stored example.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub matches: bool,
    pub missing: Vec<FixtureBlock>,
    pub unexpected: Vec<FixtureBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, serde::Deserialize)]
pub struct FixtureBlock {
    pub row: String,
    pub col: String,
    pub kind: String,
    pub sign: i32,
}

#[derive(Debug, serde::Deserialize)]
struct Fixture {
    discs: std::collections::BTreeMap<String, String>,
    blocks: Vec<FixtureBlock>,
}

/// Block structure of the boundary matrix at `(2, 1, 1)` against the fixture,
/// compared as a set of (row disc, column disc, kind, sign).
pub fn compare_example(prec: u32) -> Result<ExampleReport> {
    let cfg = PadicConfig::new(2, prec)?;
    let reg = OrbitRegistry::build(&BtTree::new(cfg), 1, 1)?;
    let model = ComplexModel::new(reg, 0)?;
    let m = model.assemble_dbar1()?;
    let label = |pos: usize| model.registry().records[m.order[pos]].ball.to_string();
    let actual: BTreeSet<FixtureBlock> = m
        .blocks
        .iter()
        .map(|b| FixtureBlock {
            row: label(b.row),
            col: label(b.col),
            kind: match b.kind {
                BlockKind::Identity => "id".into(),
                BlockKind::Restriction => "res".into(),
            },
            sign: b.sign,
        })
        .collect();
    let fixture: Fixture =
        serde_json::from_str(EXAMPLE_FIXTURE).map_err(|e| Error::Invalid(format!("bad fixture: {e}")))?;
    let disc = |name: &str| {
        fixture.discs.get(name).cloned().ok_or_else(|| Error::Invalid(format!("fixture names no disc {name}")))
    };
    let expected = fixture
        .blocks
        .iter()
        .map(|b| Ok(FixtureBlock { row: disc(&b.row)?, col: disc(&b.col)?, kind: b.kind.clone(), sign: b.sign }))
        .collect::<Result<BTreeSet<_>>>()?;
    let missing: Vec<_> = expected.difference(&actual).cloned().collect();
    let unexpected: Vec<_> = actual.difference(&expected).cloned().collect();
    Ok(ExampleReport { matches: missing.is_empty() && unexpected.is_empty(), missing, unexpected })
}

fn json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}

/// Runs one command, returning the artifact text and whether its checks passed.
pub fn execute(cmd: &Command) -> Result<(String, bool)> {
    let rc = cmd.config();
    let cfg = rc.padic()?;
    let tree = BtTree::new(cfg);
    let registry = || OrbitRegistry::build(&tree, rc.n, rc.k);
    Ok(match cmd {
        Command::Tree(_) => match rc.format.unwrap_or(Format::Dot) {
            Format::Dot => (tree.to_dot(rc.n), true),
            Format::Json => {
                #[derive(Serialize)]
                struct Dump {
                    vertices: Vec<crate::tree::Vertex>,
                    edges: Vec<crate::tree::OrientedEdge>,
                }
                (json(&Dump { vertices: tree.ball(rc.n), edges: tree.edges(rc.n) }), true)
            }
        },
        Command::Orbits(_) | Command::Minimal(_) => {
            let reg = registry()?;
            let minimal_only = matches!(cmd, Command::Minimal(_));
            let records = reg.records.iter().filter(|r| !minimal_only || r.minimal).collect();
            (json(&RegistryDump { p: rc.p, k: rc.k, n: rc.n, records }), true)
        }
        Command::Counts(_) => {
            let report = registry()?.verify_counts()?;
            (json(&report), report.ok)
        }
        Command::Matrix(_) => {
            let model = ComplexModel::new(registry()?, rc.d)?;
            let m = model.assemble_dbar1()?;
            let ok = m.is_lower_triangular() && m.has_unit_diagonal();
            (json(&m), ok)
        }
        Command::Verify(_) => {
            let model = ComplexModel::new(registry()?, rc.d)?;
            let report = verify_exactness(&model, rc.seed, 50)?;
            let ok = report.is_exact();
            (json(&report), ok)
        }
        Command::Example(_) => {
            let report = compare_example(cfg.prec())?;
            (json(&report), report.matches)
        }
        Command::Stability(_) => {
            let report = check_action_stability(&tree, &[rc.k], rc.n, &[rc.d], 100, rc.seed)?;
            let ok = report.passed == report.samples;
            (json(&report), ok)
        }
    })
}

/// Parses arguments, runs the command and writes the artifact.
pub fn run<I, T>(args: I) -> Status
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Usage } else { Status::Pass };
        }
    };
    let rc = cli.command.config();
    if let Err(e) = rc.padic() {
        eprintln!("error: {e}");
        return Status::Usage;
    }
    let (text, ok) = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::Fail;
        }
    };
    match &rc.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return Status::Usage;
            }
        }
        None => print!("{text}"),
    }
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("bt-coeff").chain(s.split_whitespace()).map(String::from).collect()
    }

    fn output(s: &str) -> (String, bool) {
        let cli = Cli::try_parse_from(args(s)).unwrap();
        execute(&cli.command).unwrap()
    }

    #[test]
    fn counts_report_matches() {
        let (text, ok) = output("counts --p 3 --k 1 --n 1");
        assert!(ok);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["rows"].as_array().unwrap().iter().all(|r| r["expected"] == r["actual"]));
    }

    #[test]
    fn verify_small_case() {
        let (text, ok) = output("verify --p 2 --k 1 --n 1 --d 0");
        assert!(ok);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdict"], "exact");
        assert_eq!((v["dims"]["c1"].as_u64(), v["dims"]["nonminimal"].as_u64()), (Some(6), Some(6)));
    }

    #[test]
    fn output_is_deterministic() {
        for cmd in ["matrix --p 3 --k 2 --n 1 --d 2", "verify --seed 4", "orbits --n 2", "tree --n 2"] {
            assert_eq!(output(cmd), output(cmd));
        }
        let (dot, _) = output("tree --p 2 --n 1");
        assert!(dot.starts_with("digraph") && dot.contains("\"(0; *)\" -> \"(1; 1:0)\""));
        let (json, _) = output("tree --p 2 --n 1 --format json");
        assert_eq!(serde_json::from_str::<serde_json::Value>(&json).unwrap()["vertices"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn matrix_json_shape() {
        let (text, ok) = output("matrix --p 2 --k 1 --n 1 --d 0");
        assert!(ok);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["order"].as_array().unwrap().len(), 6);
        let blocks = v["blocks"].as_array().unwrap();
        assert_eq!(blocks.len(), 12);
        assert!(blocks.iter().all(|b| b["row"].as_u64() >= b["col"].as_u64()));
        assert_eq!(blocks.iter().filter(|b| b["kind"] == "res").count(), 6);
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("example.json");
        let status = run(args(&format!("example --out {}", out.display())));
        assert_eq!(status, Status::Pass);
        assert!(fs::read_to_string(&out).unwrap().contains("\"matches\": true"));
        assert_eq!(run(args("counts --p 4")), Status::Usage);
        assert_eq!(run(args("verify --prec 5")), Status::Usage);
        assert_eq!(run(args("verify --k 0")), Status::Usage);
        assert_eq!(run(args("frobnicate")), Status::Usage);
        let quiet = dir.path().join("stability.json");
        assert_eq!(run(args(&format!("stability --p 3 --d 1 --out {}", quiet.display()))), Status::Fail);
    }
}
