//! CLI acceptance: determinism of scalar outputs across thread counts
//! (criterion 15), schema round-trips, and sweep/run consistency.

use std::collections::BTreeMap;

use qlock_cli::config::{ExperimentConfig, ExperimentKind, SubsetKind};
use qlock_cli::report::Report;
use qlock_cli::{runner, sweep};
use qlock_core::randomness::Seed;

fn config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        experiment: kind,
        d_a: 4,
        d_b: 4,
        t: 2,
        eps: 0.1,
        trials: 200,
        seed: Seed::new(4242),
        subset: SubsetKind::FullSphere,
        n_effects: 40,
        restarts: 4,
        max_iters: 200,
        support_size: 2,
        memory_cap_gib: 4.0,
        export_map: false,
            trial_table_path: None,
        output_path: None,
    }
}

fn run_with_threads(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let report = pool.install(|| runner::run(cfg)).unwrap();
    report.results_bytes().unwrap()
}

#[test]
fn c15_determinism_across_thread_counts() {
    // Monte Carlo, search, and locking experiments must all produce
    // bit-identical scalar results for 1, 2 and 4 workers.
    for kind in [
        ExperimentKind::Uncertainty,
        ExperimentKind::WorstCase,
        ExperimentKind::Locking,
        ExperimentKind::Moments,
    ] {
        let cfg = config(kind);
        let one = run_with_threads(&cfg, 1);
        let two = run_with_threads(&cfg, 2);
        let four = run_with_threads(&cfg, 4);
        assert_eq!(one, two, "{kind:?}: 1 vs 2 workers");
        assert_eq!(two, four, "{kind:?}: 2 vs 4 workers");

        // Re-run with the same pool size: byte-identical again.
        let again = run_with_threads(&cfg, 2);
        assert_eq!(two, again, "{kind:?}: rerun");
    }
    println!("[acceptance] criterion 15: PASS - bit-identical scalars across 1/2/4 workers");
}

#[test]
fn report_schema_round_trip() {
    let cfg = config(ExperimentKind::Moments);
    let report = runner::run(&cfg).unwrap();
    let text = report.to_json_pretty().unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(report.config, back.config);
    assert_eq!(report.results, back.results);

    // Config echo is verbatim.
    assert_eq!(back.config, cfg);
}

#[test]
fn moments_experiment_reports_closed_forms() {
    let mut cfg = config(ExperimentKind::Moments);
    cfg.d_a = 4;
    cfg.d_b = 1;
    let report = runner::run(&cfg).unwrap();
    let var = report.results.get("variance_closed").unwrap();
    assert!((var.value - 0.0375).abs() < 1e-15);
    let cov = report.results.get("covariance_closed").unwrap();
    assert!((cov.value + 1.0 / 80.0).abs() < 1e-15);
}

#[test]
fn sweep_matches_individual_runs() {
    let mut configs = Vec::new();
    for d_b in [2usize, 4, 8] {
        let mut cfg = config(ExperimentKind::Uncertainty);
        cfg.d_b = d_b;
        cfg.trials = 100;
        configs.push(cfg);
    }
    let csv = sweep::sweep(&configs).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines.len(), 4, "header + 3 rows");

    let header: Vec<&str> = lines[0].split(',').collect();
    let r_mean_col = header.iter().position(|h| *h == "r_mean").unwrap();
    for (row, cfg) in lines[1..].iter().zip(&configs) {
        let cells: Vec<&str> = row.split(',').collect();
        let individual = runner::run(cfg).unwrap();
        let expected = individual.results.get("r_mean").unwrap().value;
        let got: f64 = cells[r_mean_col].parse().unwrap();
        assert_eq!(got, expected, "sweep row differs from individual run");
    }
}

#[test]
fn sweep_rejects_mixed_kinds() {
    let a = config(ExperimentKind::Uncertainty);
    let b = config(ExperimentKind::Moments);
    assert!(sweep::sweep(&[a, b]).is_err());
}

#[test]
fn binary_runs_and_writes_report() {
    let bin = env!("CARGO_BIN_EXE_qlock");
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out_path = dir.path().join("report.json");
    std::fs::write(
        &cfg_path,
        r#"{
            "experiment": "moments",
            "d_a": 4, "d_b": 1,
            "trials": 500,
            "seed": { "value": 11 }
        }"#,
    )
    .unwrap();
    let status = std::process::Command::new(bin)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--threads",
            "2",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report: Report =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(report.results.contains_key("variance_mc"));

    // Flag overrides beat file values.
    let out2 = dir.path().join("report2.json");
    let status = std::process::Command::new(bin)
        .args([
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--d-a",
            "2",
            "--out",
            out2.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report2: Report =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    assert_eq!(report2.config.d_a, 2);

    // Invalid config: nonzero exit and a machine-readable error object.
    let bad_out = std::process::Command::new(bin)
        .args(["run", "--experiment", "moments", "--d-a", "0", "--d-b", "1", "--seed", "3"])
        .output()
        .unwrap();
    assert!(!bad_out.status.success());
    let err: serde_json::Value =
        serde_json::from_slice(&bad_out.stderr).expect("stderr is a JSON error object");
    assert!(err["error"]["kind"].is_string());
}

#[test]
fn binary_sweep_writes_csv() {
    let bin = env!("CARGO_BIN_EXE_qlock");
    let dir = tempfile::tempdir().unwrap();
    let cfg_dir = dir.path().join("configs");
    std::fs::create_dir(&cfg_dir).unwrap();
    for (i, d_b) in [2usize, 4].iter().enumerate() {
        std::fs::write(
            cfg_dir.join(format!("{i:02}.json")),
            format!(
                r#"{{"experiment": "uncertainty", "d_a": 4, "d_b": {d_b},
                    "t": 2, "trials": 50, "seed": {{ "value": 5 }}}}"#
            ),
        )
        .unwrap();
    }
    let out = dir.path().join("table.csv");
    let status = std::process::Command::new(bin)
        .args([
            "sweep",
            "--configs",
            cfg_dir.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let table = std::fs::read_to_string(&out).unwrap();
    assert_eq!(table.trim_end().lines().count(), 3);
    assert!(!table.contains("NaN"));
}

#[test]
fn deterministic_scalar_map_is_ordered() {
    let cfg = config(ExperimentKind::Uncertainty);
    let report = runner::run(&cfg).unwrap();
    let keys: Vec<&String> = report.results.keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let _map: BTreeMap<String, f64> = report
        .results
        .iter()
        .map(|(k, v)| (k.clone(), v.value))
        .collect();
}
