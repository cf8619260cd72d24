#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const TAU_STAR: &str = "12121211212221121212";

pub struct Case {
    pub name: &'static str,
    pub args: Vec<String>,
    /// Output schema under `docs/schemas`, for JSON cases.
    pub schema: Option<&'static str>,
}

fn case(name: &'static str, args: &str, schema: Option<&'static str>) -> Case {
    let args = args.replace("TAU3", &TAU_STAR.repeat(3)).replace("TAU", TAU_STAR);
    Case { name, args: args.split_whitespace().map(String::from).collect(), schema }
}

pub fn cases() -> Vec<Case> {
    vec![
        case("orbit_boundary", "orbit --algorithm cs --point 1/3,1/3,1/3 --steps 5 --mode exact", None),
        case("orbit_brun_float", "orbit --algorithm brun --point 1/10,1/5,3/10,2/5 --steps 12 --mode float", None),
        case("certify_tau_star", "certify --blocks TAU3 --horizon 60", Some("certify")),
        case("certify_none", "certify --blocks 111111111111 --horizon 12", Some("certify")),
        case("words_level", "words --blocks TAU --level 12", None),
        case("words_stats", "words --blocks TAU3 --level 40 --letter 2 --stats", Some("words-stats")),
        case("potential", "potential --blocks TAU --level 12 --values 1=0,2=1,3=-1 --coupling 1.5", None),
        case("spectrum_point", "spectrum --levels 2,4,6 --values 1=0,2=1,3=-1 --coupling 1 --point 1/2,1/4,1/4", None),
        case(
            "spectrum_point_letter2",
            "spectrum --levels 2,4,6 --letter 2 --values 1=0,2=1,3=-1 --coupling 1 --point 1/2,1/4,1/4",
            None,
        ),
        case("spectrum_tau_star", "spectrum --blocks TAU3 --levels 8,10,11,12,15,17,19,21 --values 1=0,2=1,3=-1 --coupling 3", None),
        case("lyapunov_cs", "lyapunov --algorithm cs --steps 20000 --trials 4 --seed 7", Some("lyapunov")),
        case("lyapunov_brun_transpose", "lyapunov --algorithm brun --steps 20000 --trials 4 --seed 7 --transpose", Some("lyapunov")),
        case("complexity", "complexity --blocks TAU3 --level 28 --max-n 40", None),
    ]
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sadic")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

pub fn run(args: &[String], threads: usize) -> Output {
    Command::new(bin())
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .expect("failed to start the sadic binary")
}

/// Equal up to numeric tokens differing by at most `tol` relative.
pub fn equal_within(a: &str, b: &str, tol: f64) -> bool {
    let split = |s: &str| s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).map(String::from).collect::<Vec<_>>();
    let (ta, tb) = (split(a), split(b));
    ta.len() == tb.len()
        && ta.iter().zip(&tb).all(|(x, y)| {
            if x == y {
                return true;
            }
            let clean = |t: &str| t.trim_matches(|c| c == '[' || c == ']' || c == '"').parse::<f64>();
            match (clean(x), clean(y)) {
                (Ok(p), Ok(q)) => (p - q).abs() <= tol * p.abs().max(q.abs()).max(1.0),
                _ => false,
            }
        })
}

/// Runs every case at one worker against its golden file and at eight
/// workers against the one-worker output. Returns a description per failure.
pub fn check_goldens() -> Vec<String> {
    let update = std::env::var_os("SADIC_UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for c in cases() {
        let one = run(&c.args, 1);
        if !one.status.success() {
            failures.push(format!("{}: exit {:?}: {}", c.name, one.status.code(), String::from_utf8_lossy(&one.stderr)));
            continue;
        }
        let path = golden_dir().join(format!("{}.out", c.name));
        if update {
            std::fs::write(&path, &one.stdout).unwrap();
        }
        match std::fs::read(&path) {
            Ok(expected) if expected == one.stdout => {}
            Ok(_) => failures.push(format!("{}: output differs from {}", c.name, path.display())),
            Err(e) => failures.push(format!("{}: cannot read {}: {}", c.name, path.display(), e)),
        }
        let eight = run(&c.args, 8);
        let (a, b) = (String::from_utf8_lossy(&one.stdout), String::from_utf8_lossy(&eight.stdout));
        if !eight.status.success() || !equal_within(&a, &b, 1e-12) {
            failures.push(format!("{}: --threads 8 disagrees with --threads 1", c.name));
        }
    }
    failures
}
