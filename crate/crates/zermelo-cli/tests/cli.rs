//! End-to-end runs of the subcommands against scenario files in temp
//! directories.

use std::path::{Path, PathBuf};
use zermelo_cli::{run, Cli, Command, CommonArgs};

fn write_config(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn args(config: &Path, out: &Path) -> CommonArgs {
    CommonArgs {
        config: config.to_path_buf(),
        out: out.to_path_buf(),
        seed: None,
        quiet: true,
    }
}

const ZERO_WIND: &str = r#"{
  "x_O": [0.0, 0.0],
  "x_D": [3.0, 4.0],
  "airspeed": 2.0,
  "wind": { "kind": "constant", "vector": [0.0, 0.0] },
  "N": 16,
  "seed": 7
}"#;

const VORTEX: &str = r#"{
  "x_O": [0.0, 0.0],
  "x_D": [1.0, 0.0],
  "airspeed": 1.0,
  "wind": { "kind": "gaussian-vortex", "center": [0.5, 0.0], "amplitude": 5.0, "width": 0.12 },
  "N": 16,
  "solver": { "damping": "armijo-halving" },
  "graph": { "h": 0.3, "ell": 0.45, "K": 8 },
  "seed": 42
}"#;

#[test]
fn solve_zero_wind_reports_direct_time() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.json", ZERO_WIND);
    let out = dir.path().join("out");
    let code = run(Cli {
        command: Command::Solve(args(&config, &out)),
    });
    assert_eq!(code, 0);

    let report = std::fs::read_to_string(out.join("solve_report.csv")).unwrap();
    let last = report.lines().last().unwrap();
    let t: f64 = last.split(',').nth(4).unwrap().parse().unwrap();
    assert!((t - 2.5).abs() < 1e-9, "T = {t}");

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "solve");
    assert_eq!(manifest["seed"], 7);
    assert!(manifest["config_sha256"].as_str().unwrap().len() == 64);

    let traj: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("trajectory.json")).unwrap()).unwrap();
    assert_eq!(traj["N"], 16);
    assert!((traj["L"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}

#[test]
fn infeasible_wind_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "constant", "vector": [1.5, 0.0] }, "N": 8 }"#,
    );
    let out = dir.path().join("out");
    let code = run(Cli {
        command: Command::Solve(args(&config, &out)),
    });
    assert_eq!(code, 3);
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "constant", "vector": [0, 0] }, "N": 8, "extra": 1 }"#,
    );
    let out = dir.path().join("out");
    let code = run(Cli {
        command: Command::Solve(args(&config, &out)),
    });
    assert_eq!(code, 2);
    let code = run(Cli {
        command: Command::Solve(args(Path::new("/nonexistent/config.json"), &out)),
    });
    assert_eq!(code, 2);
}

#[test]
fn global_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.json", VORTEX);
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");
    assert_eq!(
        run(Cli {
            command: Command::Global(args(&config, &out1))
        }),
        0
    );
    assert_eq!(
        run(Cli {
            command: Command::Global(args(&config, &out2))
        }),
        0
    );
    for name in ["candidates.csv", "best_trajectory.csv", "graph_stats.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // The ranked table contains the two route families.
    let table = std::fs::read_to_string(out1.join("candidates.csv")).unwrap();
    let ts: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let spread =
        ts.iter().cloned().fold(f64::MIN, f64::max) - ts.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-4, "expected distinct optima, spread {spread}");
}

#[test]
fn study_ratios_contract_within_basin() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario.json", VORTEX);
    let out = dir.path().join("out");
    assert_eq!(
        run(Cli {
            command: Command::Study(args(&config, &out))
        }),
        0
    );
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("study_summary.json")).unwrap()).unwrap();
    let r_emp = summary["r_empirical"].as_f64().unwrap();
    assert!(r_emp > 0.0);
    let table = std::fs::read_to_string(out.join("study.csv")).unwrap();
    for line in table.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let radius: f64 = cols[0].parse().unwrap();
        let ratio: f64 = cols[3].parse().unwrap();
        if radius <= r_emp {
            assert!(ratio < 1.0, "radius {radius}: ratio {ratio}");
        }
    }
}

#[test]
fn bounds_reports_constants_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "gaussian-vortex", "center": [0.5, 0.0], "amplitude": 0.35, "width": 0.35 },
             "N": 16, "seed": 1 }"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        run(Cli {
            command: Command::Bounds(args(&config, &out))
        }),
        0
    );
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("bounds.json")).unwrap()).unwrap();
    assert_eq!(doc["constants"]["gamma5"]["provenance"], "formula");
    assert_eq!(doc["constants"]["b_lower_est"]["provenance"], "estimated");
    assert!(doc["constants"]["kappa"]["value"].as_f64().unwrap() > 0.0);
    assert!(doc["constants"]["r_c"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["formulas_valid"], true);
}

#[test]
fn verify_passes_on_bundled_vortex() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "scenario.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "gaussian-vortex", "center": [0.5, 0.0], "amplitude": 0.35, "width": 0.35 },
             "N": 16, "seed": 5 }"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        run(Cli {
            command: Command::Verify(args(&config, &out))
        }),
        0
    );
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("verify_report.json")).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["bound_violations"]["total_violations"], 0);
}

#[test]
fn shear_and_superposition_scenarios_solve() {
    let dir = tempfile::tempdir().unwrap();
    // Horizontal wind growing with altitude: the optimum bows upward into
    // the tailwind and beats the still-air time.
    let shear = write_config(
        dir.path(),
        "shear.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "linear-shear", "matrix": [[0.0, 0.35], [0.0, 0.0]] },
             "N": 16, "seed": 3 }"#,
    );
    let out = dir.path().join("out_shear");
    assert_eq!(run(Cli { command: Command::Solve(args(&shear, &out)) }), 0);
    let report = std::fs::read_to_string(out.join("solve_report.csv")).unwrap();
    let t: f64 = report
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert!(t < 1.0, "shear tailwind not exploited: T = {t}");
    let traj: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("trajectory.json")).unwrap()).unwrap();
    let max_y = traj["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[1].as_f64().unwrap())
        .fold(f64::MIN, f64::max);
    assert!(max_y > 0.01, "path did not bow into the tailwind: max y {max_y}");

    let superpos = write_config(
        dir.path(),
        "superpos.json",
        r#"{ "x_O": [0,0], "x_D": [1,0], "airspeed": 1.0,
             "wind": { "kind": "superposition", "components": [
                 { "kind": "constant", "vector": [0.1, 0.0] },
                 { "kind": "gaussian-vortex", "center": [0.5, 0.1], "amplitude": 0.3, "width": 0.3 }
             ] },
             "N": 16, "seed": 3 }"#,
    );
    let out = dir.path().join("out_superpos");
    assert_eq!(run(Cli { command: Command::Solve(args(&superpos, &out)) }), 0);
}
