use std::path::Path;
use std::process::{Command, Output};

use nilcmc::domain::BoundaryData;
use nilcmc::io::{DomainConfig, RunConfig};
use proptest::prelude::*;
use tempfile::TempDir;

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_nilcmc"))
        .args([sub, "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("NILCMC_THREADS")
        .output()
        .unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn solve_writes_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = run(
        "solve",
        "[ambient]\ntau = 0.2\n[solver]\nmean_curvature = 0.3\nh = 0.125\n[output]\nvtk = true\n",
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/solution.csv")).unwrap();
    assert!(csv.starts_with("x,y,u\n"));
    let vtk = std::fs::read_to_string(dir.path().join("out/solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
    let r = report(dir.path());
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["schema_version"], 1);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn verify_and_curvature_succeed() {
    let dir = TempDir::new().unwrap();
    let out = run("verify", "[verify]\npoints = 50\ntaus = [0.0, 1.0]\n", dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("out/checks.csv"))
        .unwrap()
        .starts_with("name,passed"));

    let dir = TempDir::new().unwrap();
    let cfg = "[curvature]\nsurface = \"cone\"\nvertex_height = 10.0\ns_samples = 4\nt = [0.2, 1.0]\n";
    let out = run("curvature", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let table = std::fs::read_to_string(dir.path().join("out/curvature.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("s,t,closed_form,oracle,difference,status"));
    assert_eq!(table.lines().count(), 1 + 8);
}

#[test]
fn invalid_input_exits_with_2() {
    for (sub, cfg) in [
        ("solve", "[solver]\nmean_curvture = 0.3\n"),
        ("solve", "[solver]\nmean_curvature = 0.6\n"),
        (
            "solve",
            "[ambient]\ntau = 1.0\n[solver]\nmean_curvature = 0.5\nmethod = \"exhaustion\"\n",
        ),
        ("solve", "[solver\n"),
        ("curvature", "command = \"curvature\"\n"),
        ("verify", "command = \"solve\"\n"),
        ("solve", "[domain]\nkind = \"csv\"\npath = \"missing.csv\"\n"),
    ] {
        let dir = TempDir::new().unwrap();
        let out = run(sub, cfg, dir.path());
        assert_eq!(
            out.status.code(),
            Some(2),
            "{sub} with {cfg:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn missing_config_file_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nilcmc"))
        .args(["solve", "--config"])
        .arg(dir.path().join("nope.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_exits_with_2() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("run.toml"), "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nilcmc"))
        .args(["verify", "--config"])
        .arg(dir.path().join("run.toml"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("NILCMC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stalled_solve_exits_with_3_and_keeps_the_iterate() {
    let dir = TempDir::new().unwrap();
    let cfg = "[solver]\nmean_curvature = 0.3\nh = 0.0625\nmax_iterations = 1\nmax_bisections = 0\n";
    let out = run("solve", cfg, dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("out/partial.csv").exists());
    assert_eq!(report(dir.path())["exit_code"], 3);
}

#[test]
fn csv_domain_is_read_relative_to_the_config() {
    let dir = TempDir::new().unwrap();
    let mut pts = String::from("s,x,y\n");
    for i in 0..64 {
        let a = std::f64::consts::TAU * i as f64 / 64.0;
        pts.push_str(&format!("{a},{},{}\n", 1.2 * a.cos(), 0.9 * a.sin()));
    }
    std::fs::write(dir.path().join("boundary.csv"), pts).unwrap();
    let cfg = "[domain]\nkind = \"csv\"\npath = \"boundary.csv\"\n[solver]\nmean_curvature = 0.2\nh = 0.125\n";
    let out = run("solve", cfg, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serializing a parsed config and parsing it again changes nothing.
    #[test]
    fn config_round_trip(
        tau in -3.0..3.0f64,
        h_mc in 0.0..0.49f64,
        spacing in 0.01..0.5f64,
        radius in 0.5..4.0f64,
        amplitude in -1.0..1.0f64,
        mode in 0u32..6,
        seed in any::<u64>(),
        use_ellipse in any::<bool>(),
    ) {
        let mut cfg = RunConfig {
            seed,
            domain: if use_ellipse {
                DomainConfig::Ellipse { center: [0.1, -0.2], semi_axes: [radius, 0.5 * radius] }
            } else {
                DomainConfig::Circle { center: [0.0, 0.0], radius }
            },
            data: BoundaryData::Harmonic { offset: 0.0, amplitude, mode, phase: 0.3 },
            ..RunConfig::default()
        };
        cfg.ambient.tau = tau;
        cfg.solver.mean_curvature = h_mc;
        cfg.solver.h = spacing;
        let text = cfg.to_toml_string().unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml_string().unwrap(), text);
    }
}
