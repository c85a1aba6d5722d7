use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
n = 3
preprocess_width = 16
preprocess_height = 16

[workload]
total_tasks = 45
total_mb = 900.0
num_classes = 5
image_width = 32
image_height = 32
";

fn satreuse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satreuse")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_writes_three_files_with_fixed_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let o = satreuse(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        first_line(&out.join("metrics.csv")),
        "scenario,n,seed,completion_time_s,reuse_rate,cpu_occupancy,reuse_accuracy,data_transfer_mb,total_cost_s"
    );
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 2);
    assert!(metrics.lines().nth(1).unwrap().starts_with("sccr,3,1,"));

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "sccr");
    assert_eq!(report["tasks"].as_array().unwrap().len(), 45);

    let log = fs::read_to_string(out.join("events.log")).unwrap();
    let first = log.lines().next().unwrap();
    let fields: Vec<&str> = first.split('\t').collect();
    assert_eq!(fields.len(), 5);
    assert_eq!(fields[1], "task_arrival");
    assert_eq!(fields[4].len(), 16);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert!(satreuse(&["run", &cfg, "--out", out.to_str().unwrap()]).status.success());
    }
    for name in ["events.log", "metrics.csv", "report.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = satreuse(&["sweep", &cfg, "--param", "th_co", "--values", "0.3,0.5,0.7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "param,value,scenario,n,seed,completion_time_s,reuse_rate,cpu_occupancy,reuse_accuracy,data_transfer_mb,total_cost_s"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("th_co,0.3,sccr,"));
    assert!(lines[3].starts_with("th_co,0.7,sccr,"));
}

#[test]
fn compare_covers_all_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("cmp");
    assert!(satreuse(&["compare", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let text = fs::read_to_string(out.join("compare.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(
        rows[0],
        ["scenario", "completion_time_s", "reuse_rate", "cpu_occupancy", "reuse_accuracy", "data_transfer_mb"]
    );
    let names: Vec<&str> = rows[1..].iter().map(|r| r[0]).collect();
    assert_eq!(names, ["without_cr", "srs_priority", "slcr", "sccr_init", "sccr"]);
    assert!(rows.iter().all(|r| r.len() == 6));
    // local reuse moves no data
    assert_eq!(rows[1][5], "0");
    assert_eq!(rows[3][5], "0");
}

#[test]
fn validate_normalizes_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "th_sim = 0.8\n");
    let o = satreuse(&["validate", &cfg]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("th_sim = 0.8"));
    assert!(text.contains("[workload]"));
    assert!(text.contains("[channel]"));

    let bad = write_config(dir.path(), "beta = 1.5\n");
    let o = satreuse(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));

    let typo = write_config(dir.path(), "thsim = 0.8\n");
    assert_eq!(satreuse(&["validate", &typo]).status.code(), Some(1));
}

#[test]
fn io_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert_eq!(satreuse(&["run", missing.to_str().unwrap()]).status.code(), Some(2));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let cfg = write_config(dir.path(), &format!("[workload]\ndataset_dir = {:?}\n", empty.to_str().unwrap()));
    let out = dir.path().join("o");
    let o = satreuse(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn shipped_config_is_the_default() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let text = fs::read_to_string(&path).unwrap();
    let cfg = satreuse::domain::ScenarioConfig::from_toml_str(&text).unwrap();
    assert_eq!(cfg, satreuse::domain::ScenarioConfig::default());
}
