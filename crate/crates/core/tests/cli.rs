use std::fs;
use std::path::Path;

use reconstruct::benchmarks::{simulate, BenchmarkReport, Dataset, TestFunction};
use reconstruct::cli::run;
use reconstruct::estimators::{predict, FittedModel};

fn write_data(dir: &Path, name: &str, data: &Dataset) -> String {
    let path = dir.join(name);
    data.to_csv(&path).unwrap();
    path.to_str().unwrap().to_string()
}

fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["reconstruct"];
    argv.extend_from_slice(args);
    run(argv)
}

#[test]
fn fit_then_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let train = simulate(TestFunction::III, 2, 150, 0.1, 3).unwrap();
    let data = write_data(dir.path(), "train.csv", &train);
    let model = dir.path().join("model.json");
    let preds = dir.path().join("pred.csv");
    let m = model.to_str().unwrap();
    assert_eq!(cli(&["fit", "--data", &data, "--m", "12", "--trials", "200", "--seed", "4", "--out", m]), 0);

    let text = fs::read_to_string(&model).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["config"]["m"], 12);
    assert_eq!(json["config"]["knot_indices"].as_array().unwrap().len(), 12);
    assert_eq!(json["config"]["lambda"]["policy"], "none");

    assert_eq!(cli(&["predict", "--model", m, "--data", &data, "--out", preds.to_str().unwrap()]), 0);
    let fitted = FittedModel::from_json(&text).unwrap();
    let direct = predict(&fitted, &train.x).unwrap();
    let mut reader = csv::Reader::from_path(&preds).unwrap();
    let yhat: Vec<f64> = reader.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(yhat.len(), train.len());
    for (a, b) in yhat.iter().zip(direct.iter()) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn every_method_fits_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let train = simulate(TestFunction::I, 2, 80, 0.5, 5).unwrap();
    let data = write_data(dir.path(), "train.csv", &train);
    for method in ["gprr", "krr", "gpr", "nystrom", "spgp", "eb"] {
        let out = dir.path().join(format!("{method}.json"));
        let code = cli(&["fit", "--data", &data, "--method", method, "--m", "10", "--trials", "100", "--gcv", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{method}");
        assert_eq!(cli(&["inspect", "--model", out.to_str().unwrap()]), 0, "{method}");
    }
}

#[test]
fn fdp_uses_rows_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("line.csv");
    let mut text = String::from("x,y\n");
    for i in 0..50 {
        text.push_str(&format!("{},{}\n", i as f64 / 49.0, 1.0 + 2.0 * i as f64));
    }
    fs::write(&path, text).unwrap();
    let out = dir.path().join("fdp.json");
    assert_eq!(cli(&["fit", "--data", path.to_str().unwrap(), "--method", "fdp", "--gcv", "--out", out.to_str().unwrap()]), 0);
    let model = FittedModel::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    for (i, g) in model.gamma_hat.iter().enumerate() {
        assert!((g - (1.0 + 2.0 * i as f64)).abs() < 1e-8);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["--help"]), 0);
    assert_eq!(cli(&["fit", "--help"]), 0);
    assert_eq!(cli(&["fit", "--data", "x.csv", "--unknown-flag"]), 1);
    assert_eq!(cli(&["bench", "table1"]), 1);
    assert_eq!(cli(&["fit", "--data", "x.csv", "--method", "nonsense"]), 1);
    assert_eq!(cli(&["bench", "table1", "--model", "IV", "--seed", "1"]), 1);
    let missing = dir.path().join("missing.csv");
    assert_eq!(cli(&["fit", "--data", missing.to_str().unwrap()]), 2);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y\n0.1,abc\n").unwrap();
    assert_eq!(cli(&["fit", "--data", bad.to_str().unwrap()]), 2);
}

#[test]
fn gcv_scan_reports_the_curve() {
    let dir = tempfile::tempdir().unwrap();
    let train = simulate(TestFunction::I, 2, 120, 1.0, 8).unwrap();
    let data = write_data(dir.path(), "train.csv", &train);
    let out = dir.path().join("scan.json");
    let code = cli(&["gcv-scan", "--data", &data, "--method", "krr", "--grid", "1e-6,1e-4,1e-2,1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let scan: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(scan["gcv"].as_array().unwrap().len(), 4);
    assert!(scan["best"].is_f64());
}

#[test]
fn knot_commands() {
    let dir = tempfile::tempdir().unwrap();
    let train = simulate(TestFunction::III, 2, 200, 0.2, 9).unwrap();
    let test = simulate(TestFunction::III, 2, 200, 0.0, 10).unwrap();
    let data = write_data(dir.path(), "train.csv", &train);
    let held = write_data(dir.path(), "test.csv", &test);
    let sel = dir.path().join("sel.json");
    assert_eq!(cli(&["knots", "select", "--data", &data, "--m", "8", "--trials", "300", "--seed", "2", "--out", sel.to_str().unwrap()]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sel).unwrap()).unwrap();
    assert_eq!(v["indices"].as_array().unwrap().len(), 8);

    let seq = dir.path().join("seq.json");
    let code = cli(&[
        "knots", "sequential", "--data", &data, "--test", &held, "--m", "6", "--trials", "100", "--iterations", "4",
        "--out", seq.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&seq).unwrap()).unwrap();
    let steps = v["steps"].as_array().unwrap();
    assert!(!steps.is_empty() && steps.len() <= 5);
    assert_eq!(steps[0]["m"], 6);
    assert!(steps[0]["test_error"].is_f64());
}

#[test]
fn bench_reports_round_trip_and_honour_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["bench", "replication", "--reps", "5", "--seed", "3", "--sigmas", "0.1,0.3"];
    let mut first = vec!["--jobs", "1"];
    first.extend_from_slice(&args);
    first.extend_from_slice(&["--out", a.to_str().unwrap()]);
    let mut second = vec!["--jobs", "3"];
    second.extend_from_slice(&args);
    second.extend_from_slice(&["--out", b.to_str().unwrap()]);
    assert_eq!(cli(&first), 0);
    assert_eq!(cli(&second), 0);
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let report = BenchmarkReport::from_json(&ta).unwrap();
    assert_eq!(report.seed, 3);
    assert_eq!(report.summary.len(), 4);
}

#[test]
fn bench_config_file_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reconstruct::benchmarks::ExperimentConfig::table1(TestFunction::III, 2, 60, 0);
    let mut cfg = cfg;
    cfg.repetitions = 2;
    cfg.test_size = 50;
    let cfg_path = dir.path().join("cfg.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = dir.path().join("r.json");
    let code = cli(&["bench", "table1", "--config", cfg_path.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let report = BenchmarkReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.config.n, 60);
    assert_eq!(report.config.repetitions, 2);
    assert_eq!(report.seed, 5);
}
