//! Drives the `solve`, `curvature` and `verify` commands from in-memory
//! configs and lists the files they write.
//!
//! Usage: cargo run --example export_run -- [out_dir]

use std::path::{Path, PathBuf};

use nilcmc::io::{cmd_curvature, cmd_solve, cmd_verify, RunConfig};

const SOLVE: &str = r#"
[ambient]
tau = 0.2

[data]
kind = "harmonic"
amplitude = 0.1
mode = 2

[solver]
mean_curvature = 0.3
h = 0.0625

[output]
vtk = true
"#;

const CONE: &str = r#"
[ambient]
tau = 1.0

[curvature]
surface = "cone"
vertex_height = 1000.0
s_samples = 4
t = [0.5, 1.0]
"#;

fn main() -> nilcmc::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("nilcmc_export"));
    let here = Path::new(".");
    let verify = RunConfig {
        verify: nilcmc::io::VerifyConfig {
            points: 200,
            ..Default::default()
        },
        ..Default::default()
    };
    for (name, outcome) in [
        (
            "solve",
            cmd_solve(&RunConfig::from_toml_str(SOLVE)?, here, &out.join("solve")),
        ),
        (
            "curvature",
            cmd_curvature(&RunConfig::from_toml_str(CONE)?, here, &out.join("curvature")),
        ),
        ("verify", cmd_verify(&verify, here, &out.join("verify"))),
    ] {
        println!("{name}: exit {} ({})", outcome.code, outcome.message);
        for a in &outcome.report.artifacts {
            let p = out.join(name).join(a);
            let size = std::fs::metadata(&p).map(|m| m.len()).unwrap_or(0);
            println!("  {} ({size} bytes)", p.display());
        }
    }
    Ok(())
}
