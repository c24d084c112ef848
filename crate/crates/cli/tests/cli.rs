use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hotelcluster::data::{load_destinations, load_events, EventSchema};

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hotelcluster"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap()
}

fn out_dir(dir: &Path) -> String {
    dir.join("out").display().to_string()
}

#[test]
fn invalid_config_lists_every_problem_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"input": {{"events": "/missing/events.csv"}},
            "grid": {{"cells": [{{"algorithm": {{"name": "knn", "k": 0}},
                                  "protocol": {{"kind": "cross_validation", "folds": 1}}}}]}},
            "output_dir": "{}"}}"#,
        out_dir(dir.path())
    );
    let out = run(&["experiment"], &config, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["input.events", "input.destinations", "knn.k", "folds"] {
        assert!(err.contains(needle), "missing `{needle}` in:\n{err}");
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn malformed_json_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["experiment"], r#"{"synthetic": {"n_events": 10}, "bogus": 1}"#, dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_events_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(r#"{{"synthetic": {{"n_events": 0}}, "output_dir": "{}"}}"#, out_dir(dir.path()));
    let out = run(&["synthesize"], &config, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn single_cell_writes_one_row_and_one_model() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"synthetic": {{"n_events": 800, "n_hotel_clusters": 20}},
            "grid": {{"cells": [{{"algorithm": {{"name": "naive_bayes"}}, "coarsening": 5,
                                  "protocol": {{"kind": "cross_validation", "folds": 3}}}}]}},
            "output_dir": "{}", "seed": 3}}"#,
        out_dir(dir.path())
    );
    let out = run(&["experiment"], &config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert!(report.lines().nth(1).unwrap().starts_with("naive_bayes,"));
    let models: Vec<_> = fs::read_dir(dir.path().join("out/models")).unwrap().collect();
    assert_eq!(models.len(), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Accuracy"));
}

#[test]
fn synthesized_tables_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"synthetic": {{"n_events": 300, "n_destinations": 40}}, "output_dir": "{}"}}"#,
        out_dir(dir.path())
    );
    let out = run(&["synthesize"], &config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events = load_events(dir.path().join("out/events.csv"), &EventSchema::default()).unwrap();
    let dest = load_destinations(dir.path().join("out/destinations.csv")).unwrap();
    assert_eq!(events.n_rows(), 300);
    assert_eq!(dest.n_rows(), 40);
}

#[test]
fn analyze_writes_plot_data_for_each_level() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"synthetic": {{"n_events": 1000, "n_hotel_clusters": 30}},
            "analysis": {{"coarsening": [10, 5]}}, "output_dir": "{}"}}"#,
        out_dir(dir.path())
    );
    let out = run(&["analyze"], &config, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "correlation.csv",
        "histogram.csv",
        "kmeans_k5.json",
        "kmeans_k10.json",
        "crosstab_raw_vs_5.csv",
        "crosstab_10_vs_5.csv",
    ] {
        assert!(dir.path().join("out").join(f).is_file(), "missing {f}");
    }
}

#[test]
fn seed_flag_overrides_the_file_and_runs_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"synthetic": {"n_events": 600, "n_hotel_clusters": 20},
        "grid": {"cells": [{"algorithm": {"name": "decision_tree", "max_depth": 4}, "coarsening": 5,
                            "protocol": {"kind": "holdout", "test_fraction": 0.2}}]}, "seed": 1}"#;
    let report = |seed: &str, name: &str| {
        let out_path = dir.path().join(name);
        let out = run(
            &["experiment", "--seed", seed, "--out", out_path.to_str().unwrap()],
            config,
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_path.join("report.csv")).unwrap()
    };
    let a = report("8", "a");
    assert_eq!(a, report("8", "b"));
    assert!(String::from_utf8_lossy(&a).contains(",8,"));
}
