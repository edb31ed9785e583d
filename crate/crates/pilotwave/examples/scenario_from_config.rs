//! Driving a full scenario from a TOML config through the library API —
//! the same plumbing the `pilotwave` binary uses: parse, run, inspect the
//! manifest and the diagnostics summary, then re-verify the stored artifacts.

use pilotwave::config::{config_hash, parse_config};
use pilotwave::run::{diagnose, run_scenario, Pipeline};

const CONFIG: &str = r#"
name = "example_scenario"
diagnostics = ["norm-drift", "energy-drift", "chetaev", "continuity"]

[grid]
lower = [-10.0]
upper = [10.0]
points = [256]
boundary = "periodic"

[potential]
kind = "harmonic"
omega = 1.0

[initial_state]
kind = "gaussian"
center = [1.0]
sigma = [0.7071067811865476]
momentum = [0.0]

[evolution]
method = "split-spectral"
dt = 0.0025
steps = 80
snapshot_stride = 8

[tolerances]
chetaev = 1.0e-5
"#;

fn main() {
    let cfg = parse_config(CONFIG).unwrap();
    println!("parsed `{}` (config hash {})", cfg.name, config_hash(&cfg));

    let out = std::env::temp_dir().join(format!("pilotwave-example-{}", std::process::id()));
    let outcome = run_scenario(&cfg, &out, Pipeline::Full).unwrap();
    println!("{}", outcome.summary);
    println!("artifacts in {}:", outcome.out_dir.display());
    for artifact in &outcome.manifest.artifacts {
        println!("  {artifact}");
    }
    println!("pass = {}, exit code = {}", outcome.manifest.pass, outcome.exit_code);

    let check = diagnose(&outcome.out_dir).unwrap();
    println!("recomputed diagnostics match stored report: {}", check.matches);

    std::fs::remove_dir_all(&out).unwrap();
}
