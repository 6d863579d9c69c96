use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ksu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksu")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ksu(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn fit_then_predict_on_csv() {
    let dir = tempfile::tempdir().unwrap();
    let train = p(dir.path(), "train.csv");
    let mut rows = String::new();
    for i in 0..40 {
        let x = i as f64 / 40.0;
        rows.push_str(&format!("{x},{}\n", u32::from(x >= 0.5)));
    }
    fs::write(&train, &rows).unwrap();
    let model = p(dir.path(), "model.json");
    ok(&["fit", "--input", &train, "--delta", "auto", "--scales", "full", "--bound-c1", "2", "--bound-c2", "2", "--out", &model]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(json["space"], "euclidean");
    assert_eq!(json["model"]["alpha_star"], 0.0);
    let query = p(dir.path(), "q.csv");
    fs::write(&query, "0.1\n0.9\n0.45\n").unwrap();
    assert_eq!(ok(&["predict", "--model", &model, "--input", &query]), "0\n1\n0\n");
    let out = ksu(&["predict", "--model", &model, "--input", &train]);
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "error: 0");
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 40);
}

#[test]
fn knn_reports_labels_and_error() {
    let dir = tempfile::tempdir().unwrap();
    let train = p(dir.path(), "train.csv");
    fs::write(&train, "0,0,0\n0,1,0\n1,0,1\n1,1,1\n").unwrap();
    let test = p(dir.path(), "test.csv");
    fs::write(&test, "0.1,0.5,0\n0.9,0.5,0\n").unwrap();
    let out = ksu(&["knn", "--input", &train, "--k", "1", "--test", &test]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0\n1\n");
    assert_eq!(String::from_utf8(out.stderr).unwrap().trim(), "error: 0.5");
    assert!(!ksu(&["knn", "--input", &train, "--k", "9", "--test", &test]).status.success());
}

#[test]
fn bound_table() {
    let text = ok(&["bound", "--n", "100,1000", "--alpha", "0", "--m", "2,200", "--delta", "0.05"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,alpha,m,delta,q");
    assert_eq!(lines.len(), 1 + 3, "m = 200 is skipped for n = 100");
}

#[test]
fn preiss_sample_is_reproducible_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.jsonl");
    let b = p(dir.path(), "b.jsonl");
    ok(&["preiss-sample", "--alpha", "0.3", "--n", "200", "--seed", "42", "--out", &a]);
    ok(&["preiss-sample", "--alpha", "0.3", "--n", "200", "--seed", "42", "--out", &b]);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 200);
    assert!(text.lines().all(|l| l.contains(r#""kind":"finite","coords":["#) || l.contains(r#""kind":"infinite","seed":"#)));
    let model = p(dir.path(), "m.json");
    ok(&["fit", "--input", &a, "--out", &model]);
    assert_eq!(ok(&["predict", "--model", &model, "--input", &a]).lines().count(), 200);
    assert_eq!(ok(&["knn", "--input", &a, "--test", &a]).lines().count(), 200);
    assert!(!ksu(&["preiss-sample", "--alpha", "1.5", "--n", "5", "--out", &a]).status.success());
}

#[test]
fn oracle_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "t.csv");
    ok(&["oracle", "--task", "net-error", "--alpha", "0.3", "--k", "12", "--out", &out]);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "task,k,l,alpha,value,numerator,denominator");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "12");
    assert!(row[4].starts_with("0.000170898"));
    assert_eq!((row[5], row[6]), ("43589157881", "255058771968000"));
    ok(&["oracle", "--task", "inconsistent", "--k", "3", "--l", "1..2", "--out", &out]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("inconsistent,3,1,0.3,0.175000000000000000000000000000,7,40"));
    ok(&["oracle", "--task", "besicovitch", "--l", "2..12", "--out", &out]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 12);
}

#[test]
fn experiment_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(dir.path(), "exp.toml");
    let base = r#"
scenario = "preiss"
n_grid = [30, 60]
trials = 2
seed = 9
test_size = 200
[preiss]
alpha = 0.3
"#;
    fs::write(&cfg, base).unwrap();
    let out = p(dir.path(), "r.csv");
    ok(&["experiment", "--config", &cfg, "--out", &out]);
    let first = fs::read_to_string(&out).unwrap();
    assert_eq!(first.lines().count(), 1 + 2 * 2 * 2);
    ok(&["--sequential", "experiment", "--config", &cfg, "--out", &out]);
    assert_eq!(fs::read_to_string(&out).unwrap(), first);
    // k larger than the smaller sample fails those trials.
    fs::write(&cfg, format!("{base}[learner]\nk = \"40\"\n")).unwrap();
    let res = ksu(&["experiment", "--config", &cfg, "--out", &out]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("n = 30"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 2 * 2);
}
