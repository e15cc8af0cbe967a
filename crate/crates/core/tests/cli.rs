//! End-to-end runs of the command-line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bisim_ot::harness::{read_distance, Table};

fn bisim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bisim-ot"))
        .args(args)
        .output()
        .unwrap()
}

const PAIR: &str = r#"
[chain_x]
kind = "walk"
n = 3
theta = 0.3
[chain_y]
kind = "walk"
n = 3
theta = 0.6
[solver]
gamma = 0.8
snapshot_every = 250
"#;

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, format!("{extra}\n{PAIR}")).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn missing_config_names_the_path() {
    let out = bisim(&["solve", "--config", "/nonexistent/run.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.toml"));
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = bisim(&["solve", "--config", &cfg, "--preset", "fastest"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fastest"));
}

#[test]
fn solve_against_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dump_tensors = true\n");
    let oracle_dir = dir.path().join("oracle");
    let out = bisim(&[
        "oracle",
        "--config",
        &cfg,
        "--out",
        oracle_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let oracle_csv = oracle_dir.join("oracle.csv");
    let truth = read_distance(&oracle_csv).unwrap();
    assert!(
        Table::read(oracle_dir.join("mu_star.csv"))
            .unwrap()
            .rows
            .len()
            == 81
    );

    let solve_dir = dir.path().join("solve");
    let out = bisim(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        solve_dir.to_str().unwrap(),
        "--seed",
        "4",
        "--iters",
        "2000",
        "--gamma",
        "0.8",
        "--preset",
        "model-select",
        "--compare-oracle",
        oracle_csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let trace = Table::read(solve_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.rows.len(), 8);
    let errors = trace.floats("abs_error").unwrap();
    let estimates = trace.floats("distance_estimate").unwrap();
    assert!((estimates.last().unwrap() - truth).abs() - errors.last().unwrap() < 1e-15);
    for name in ["summary.csv", "mu_bar.csv", "lambda_x.csv", "lambda_y.csv"] {
        assert!(solve_dir.join(name).exists(), "{name}");
    }
}

#[test]
fn sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sweep]\niterations = [200, 400]\nseeds = 3\n");
    let out_dir = dir.path().join("sweep");
    let out = bisim(&[
        "sweep",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        Table::read(out_dir.join("sweep.csv")).unwrap().rows.len(),
        6
    );
    let summary = Table::read(out_dir.join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.floats("iterations").unwrap(), vec![200.0, 400.0]);
}

#[test]
fn grid_commands_use_their_sections() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#"
[model_select]
n = 3
blocks = 2
thetas = [0.3, 0.5]
iterations = [50, 100]
oracle = true
[enc_dec]
n = 3
blocks = 2
sample_sizes = [80]
[dist_matrix]
n = 3
thetas = [0.2, 0.8]
initial_states = [1]
"#;
    let cfg = write_config(dir.path(), extra);
    let out_dir = dir.path().join("grids");
    let out_str = out_dir.to_str().unwrap();
    for cmd in ["model-select", "enc-dec", "dist-matrix"] {
        let out = bisim(&[cmd, "--config", &cfg, "--out", out_str, "--iters", "60"]);
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ms = Table::read(out_dir.join("model_select.csv")).unwrap();
    assert_eq!(ms.rows.len(), 4);
    assert!(ms.floats("oracle").unwrap().iter().all(|v| *v >= 0.0));
    assert!(out_dir.join("lambda_x_80.csv").exists());
    assert_eq!(
        Table::read(out_dir.join("dist_matrix.csv"))
            .unwrap()
            .rows
            .len(),
        4
    );
}
