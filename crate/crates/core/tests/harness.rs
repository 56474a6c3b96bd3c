use std::path::Path;
use std::process::Command;

use polycd::harness::{run_experiment, ExperimentConfig, Method, Preset, SolverSpec, TRACE_HEADER};
use polycd::polycd::SolveConfig;
use polycd::problems::{LassoSpec, QuadraticSpec};
use serde_json::Value;

struct Row {
    t: usize,
    f_value: f64,
    gap: f64,
    nnz: usize,
}

fn read_trace(path: &Path) -> Vec<Row> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 7);
            Row {
                t: f[2].parse().unwrap(),
                f_value: f[4].parse().unwrap(),
                gap: f[5].parse().unwrap(),
                nnz: f[6].parse().unwrap(),
            }
        })
        .collect()
}

fn small_quadratic(dir: &Path, solvers: Vec<SolverSpec>, reps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Preset::CustomSimplexQuadratic, solvers);
    cfg.quadratic = Some(QuadraticSpec { dim: 8, rows: 5, seed: 3 });
    cfg.output_dir = dir.to_path_buf();
    cfg.repetitions = reps;
    cfg
}

fn summary_json(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn a_lone_solver_defines_the_optimum() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_quadratic(tmp.path(), vec![SolverSpec::new(Method::Polycd)], 1);
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.solvers.len(), 1);
    assert_eq!(summary.solvers[0].mean_gap, 0.0);
    let rows = read_trace(&tmp.path().join("trace_polycd_rep0.csv"));
    assert_eq!(rows.last().unwrap().gap, 0.0);
}

#[test]
fn repetitions_write_one_trace_per_solver_and_means_match_the_files() {
    let tmp = tempfile::tempdir().unwrap();
    let solvers = vec![SolverSpec::new(Method::Polycdwa), SolverSpec::new(Method::Fw), SolverSpec::new(Method::Twocd)];
    let cfg = small_quadratic(tmp.path(), solvers, 5);
    let summary = run_experiment(&cfg).unwrap();
    let json = summary_json(tmp.path());
    assert_eq!(json["solvers"].as_array().unwrap().len(), 3);
    assert!(json["rng"].as_str().is_some() && json["version"].as_str().is_some());
    assert_eq!(json["config"]["repetitions"], 5);

    for s in &summary.solvers {
        let (mut gap, mut nnz) = (0.0, 0.0);
        for rep in 0..5 {
            let rows = read_trace(&tmp.path().join(format!("trace_{}_rep{rep}.csv", s.label)));
            for w in rows.windows(2) {
                assert!(
                    w[1].t > w[0].t && w[1].gap <= w[0].gap + 1e-12,
                    "{} rep {rep} t {}: {} -> {}",
                    s.label,
                    w[1].t,
                    w[0].gap,
                    w[1].gap
                );
            }
            assert!(rows.iter().all(|r| r.gap >= -1e-12));
            let last = rows.last().unwrap();
            gap += last.gap;
            nnz += last.nnz as f64;
        }
        assert_eq!(s.runs, 5);
        assert_eq!(s.failures, 0);
        assert!((s.mean_gap - gap / 5.0).abs() <= 1e-15 + 1e-12 * s.mean_gap.abs(), "{}", s.label);
        assert_eq!(s.mean_nnz, nnz / 5.0);
    }
    for rep in 0..5 {
        let plot = std::fs::read_to_string(tmp.path().join(format!("plot_rep{rep}.csv"))).unwrap();
        assert!(plot.starts_with("solver,t,seconds,gap\n"));
    }
}

#[test]
fn a_config_round_trip_reproduces_the_traces() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut cfg =
        small_quadratic(first.path(), vec![SolverSpec::new(Method::Polycd), SolverSpec::new(Method::Fista)], 2);
    run_experiment(&cfg).unwrap();

    cfg.output_dir = second.path().to_path_buf();
    let written = second.path().join("config.json");
    std::fs::write(&written, cfg.to_json()).unwrap();
    let reread = ExperimentConfig::load(&written).unwrap();
    assert_eq!(reread, cfg);
    run_experiment(&reread).unwrap();

    for name in ["trace_polycd_rep0.csv", "trace_polycd_rep1.csv", "trace_fista_rep0.csv", "trace_fista_rep1.csv"] {
        let a = read_trace(&first.path().join(name));
        let b = read_trace(&second.path().join(name));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.f_value.to_bits(), y.f_value.to_bits(), "{name}");
        }
    }
}

#[test]
fn lasso_preset_away_steps_match_fista() {
    let tmp = tempfile::tempdir().unwrap();
    let mut away = SolverSpec::new(Method::Polycdwa);
    away.solve = Some(SolveConfig { max_outer: 200, ..Default::default() });
    let mut cfg = ExperimentConfig::new(Preset::Lasso, vec![away, SolverSpec::new(Method::Fista)]);
    cfg.lasso = Some(LassoSpec { n: 200, d: 200, r: 20, snr: 1.0, ..Default::default() });
    cfg.output_dir = tmp.path().to_path_buf();
    cfg.repetitions = 1;
    let summary = run_experiment(&cfg).unwrap();
    let gap = summary.solvers.iter().find(|s| s.method == Method::Polycdwa).unwrap().mean_gap;
    assert!(gap <= 1e-7, "gap {gap}");
}

#[test]
fn configs_reject_unknown_keys_and_bad_shapes() {
    let ok = r#"{"preset": "lasso", "solvers": [{"method": "fw"}]}"#;
    assert!(ExperimentConfig::from_json(ok).is_ok());
    let unknown = r#"{"preset": "lasso", "solvers": [{"method": "fw"}], "colour": 1}"#;
    assert!(ExperimentConfig::from_json(unknown).is_err());
    let nested = r#"{"preset": "lasso", "lasso": {"n": 10, "size": 3}, "solvers": [{"method": "fw"}]}"#;
    assert!(ExperimentConfig::from_json(nested).is_err());
    let empty = r#"{"preset": "kde", "solvers": []}"#;
    assert!(ExperimentConfig::from_json(empty).is_err());
    let wrong_block = r#"{"preset": "kde", "solvers": [{"method": "fista", "solve": {}}]}"#;
    assert!(ExperimentConfig::from_json(wrong_block).is_err());
    let seeds = r#"{"preset": "kde", "repetitions": 2, "seeds": [1], "solvers": [{"method": "fw"}]}"#;
    assert!(ExperimentConfig::from_json(seeds).is_err());
    let duplicate = r#"{"preset": "kde", "solvers": [{"method": "fw"}, {"method": "fw"}]}"#;
    assert!(ExperimentConfig::from_json(duplicate).is_err());
}

#[test]
fn shipped_example_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/lasso.json");
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.preset, Preset::Lasso);
}

#[test]
fn cli_solve_and_gen() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_polycd");
    let out = Command::new(bin)
        .args(["solve", "--preset", "lasso", "--n", "40", "--d", "30", "--r", "5", "--solver", "polycdwa", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_trace(&tmp.path().join("trace_polycdwa_rep0.csv"));
    assert_eq!(rows[0].t, 0);
    assert!(tmp.path().join("summary.json").exists());

    let data = tmp.path().join("data.tsv");
    let out = Command::new(bin)
        .args(["gen", "--preset", "custom-simplex-quadratic", "--d", "4", "--n", "3", "--out"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.split('\t').count() == 5));

    let out = Command::new(bin).args(["solve", "--solver", "simplex-method"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
