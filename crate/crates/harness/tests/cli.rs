use std::fs;
use std::path::Path;
use std::process::Command;

use ptf_lab::learner::iterative::query_bound;
use ptf_lab::Backend;
use ptf_lab_harness::entropy::{compare_rows, QueryRow};
use ptf_lab_harness::experiment::CSV_HEADER;
use ptf_lab_harness::{print_bounds, run, ExperimentConfig, Learner, ModelKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ptf-lab"))
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn iterative_run_writes_one_row_per_trial_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("it.csv");
    let status = bin()
        .args(["run", "--learner", "iterative", "--d", "3", "--n", "4096", "--trials", "100", "--seed", "9"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER.to_vec());
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert_eq!(&r[16], "true");
        assert!(r[7].parse::<u64>().unwrap() <= 98);
        assert_eq!(&r[11], "", "order 3 is never asked when d = 3");
    }
    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(agg["aggregates"][0]["trials"], 100);
    assert!(agg["aggregates"][0]["queries"]["max"].as_f64().unwrap() <= 98.0);
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Learner::Batch, vec![1, 2, 5], vec![300, 2000]);
    cfg.alpha = vec![0.4, 0.9];
    cfg.trials = 7;
    cfg.master_seed = 77;
    cfg.timing = false;
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    cfg.out = Some(a.clone());
    let first = run(&cfg).unwrap();
    cfg.out = Some(b.clone());
    std::env::set_var("PTF_LAB_THREADS", "3");
    run(&cfg).unwrap();
    std::env::remove_var("PTF_LAB_THREADS");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(first.records.len(), 3 * 2 * 2 * 7);
    let trials: Vec<usize> = first.records.iter().map(|r| r.trial).collect();
    assert_eq!(trials[..7], [0, 1, 2, 3, 4, 5, 6]);
    // d = 5 spills per-order counts past order 3 into the JSON column once
    // the coverage loop runs, i.e. when m = ceil(66 n^alpha) < n
    let extra = read_rows(&a)
        .into_iter()
        .find(|r| &r[2] == "5" && &r[3] == "2000" && &r[4] == "0.4")
        .unwrap()[12]
        .to_string();
    let parsed: std::collections::BTreeMap<String, u64> = serde_json::from_str(&extra).unwrap();
    assert!(parsed.contains_key("4"));
}

#[test]
fn exact_backend_and_dirichlet_model() {
    let mut cfg = ExperimentConfig::new(Learner::SampleSearch, vec![2, 3], vec![64]);
    cfg.model = ModelKind::Dirichlet;
    cfg.dirichlet_alpha = vec![0.5, 3.0];
    cfg.backend = Backend::Exact;
    cfg.trials = 20;
    cfg.random_leading = true;
    let res = run(&cfg).unwrap();
    assert!(res.ok());
    assert_eq!(res.aggregates.len(), 4);
    assert!(res.records.iter().all(|r| r.z.is_some() && r.backend == Backend::Exact));
    assert!(res.records.iter().all(|r| r.case == "all_flips" || r.case == "exhausted"));
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = ExperimentConfig::new(Learner::Batch, vec![2], vec![100]);
    assert!(run(&cfg).is_err(), "batch without alpha");
    cfg.alpha = vec![0.5];
    cfg.trials = 0;
    assert!(run(&cfg).is_err());
    let status = bin().args(["run", "--learner", "nope", "--d", "1", "--n", "10"]).output().unwrap();
    assert!(!status.status.success());
}

#[test]
fn batch_alpha_outside_range_fails_every_trial_and_the_exit_code() {
    // 1/log2(1024) = 0.1, so alpha = 0.05 is rejected by the learner
    let out = bin()
        .args(["run", "--learner", "batch", "--d", "2", "--n", "1024", "--alpha", "0.05", "--trials", "3"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn print_bounds_matches_formula() {
    let rows = print_bounds(&[1, 2, 3], &[1024, 4096]);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0].queries, 12);
    assert_eq!(rows[5].queries, 98);
    assert!(rows.iter().all(|r| r.queries == query_bound(r.d, r.n)));
    let out = bin().args(["print-bounds", "--d", "2", "--n", "1024"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("36"));
}

#[test]
fn verify_lower_bounds_cli_writes_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    fs::write(&grid, r#"[{"construction":"interval","n":5},{"construction":"linear","roots":[-2,-1]},{"construction":"multivariate","n":4}]"#).unwrap();
    let fx = dir.path().join("fx");
    let out = bin().arg("verify-lower-bounds").arg("--grid").arg(&grid).arg("--fixtures").arg(&fx).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(fs::read_dir(&fx).unwrap().count(), 3);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"[{"construction":"missing_derivative","d":2,"n":3}]"#).unwrap();
    let out = bin().arg("verify-lower-bounds").arg("--grid").arg(&bad).output().unwrap();
    assert!(!out.status.success());
}

fn row(model: &str, d: u64, n: u64, alpha: Option<f64>, q: u64) -> QueryRow {
    QueryRow { learner: "sample_search".into(), d, n, alpha, model: model.into(), queries_total: q, correct: true }
}

#[test]
fn entropy_comparison_flags_cells_below_the_floor() {
    // log2 C(12, 2) = log2 66 ~ 6.04
    let ok: Vec<QueryRow> = (0..50).map(|i| row("uniform", 2, 10, None, 7 + i % 3)).collect();
    let low: Vec<QueryRow> = (0..50).map(|i| row("uniform", 2, 10, None, 3 + i % 2)).collect();
    assert!(compare_rows(&ok).unwrap().passed());
    let report = compare_rows(&low).unwrap();
    assert_eq!(report.offending().len(), 1);
    assert!((report.cells[0].bound - 66f64.log2()).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(Learner::SampleSearch, vec![1], vec![100]);
    cfg.trials = 200;
    cfg.out = Some(dir.path().join("ss.csv"));
    run(&cfg).unwrap();
    let out = bin().arg("compare-entropy").arg(dir.path().join("ss.csv")).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("6.658"));
}
