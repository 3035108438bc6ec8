use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    root.to_str().unwrap().to_string()
}

fn crysect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crysect")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn crystal_picks_the_least_nonresidue() {
    let v = json(&crysect(&["crystal"]));
    assert_eq!(v["eps"], 2);
    assert_eq!(v["degree_bound"], 14);
    let v = json(&crysect(&["--p", "7", "crystal"]));
    assert_eq!(v["eps"], 3);
}

#[test]
fn decay_of_the_beta_one_curve() {
    let v = json(&crysect(&["decay", "--curve", &data("beta1.json"), "--nmax", "2"]));
    assert_eq!(v["profile"]["a"]["Exact"], 4);
    assert_eq!(v["profile"]["d"]["Exact"], 1);
    assert_eq!(v["multiplicities"][1]["computed"]["Exact"], 13);
    assert_eq!(v["multiplicities"][1]["agreement"], "agree");
}

#[test]
fn intersect_writes_csv() {
    let out = crysect(&["intersect", "--curve", &data("case_one.json"), "--m-set", "1..20/3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,lP,gP,ratio,flags"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.ends_with(",within")));
}

#[test]
fn hanke_agrees_with_stabilized_density() {
    let a = json(&crysect(&["density", "--l", "3", "--m", "7"]));
    let b = json(&crysect(&["density", "--l", "3", "--m", "7", "--hanke"]));
    assert_eq!(b["method"], "hanke");
    let ratio = |s: &Value| {
        let s = s.as_str().unwrap();
        let (n, d) = s.split_once('/').unwrap();
        n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
    };
    assert!((a["value"].as_f64().unwrap_or_else(|| ratio(&a["value"])) - ratio(&b["value"])).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(crysect(&["--p", "9", "crystal"]).status.code(), Some(2));
    assert_eq!(crysect(&["--precision", "2", "crystal"]).status.code(), Some(2));
    assert_eq!(crysect(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(crysect(&["density", "--l", "3", "--m", "5", "--point-budget", "10"]).status.code(), Some(3));
    assert_eq!(crysect(&["verify", "--suite", "strata"]).status.code(), Some(0));
}

#[test]
fn config_file_and_flags() {
    let dir = std::env::temp_dir().join(format!("crysect-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "p = 5\nseed = 7\n").unwrap();
    let text = String::from_utf8(crysect(&["--config", path.to_str().unwrap(), "--seed", "8", "config"]).stdout).unwrap();
    assert!(text.contains("p = 5"));
    assert!(text.contains("seed = 8"));
    std::fs::write(&path, "prime = 5\n").unwrap();
    assert_eq!(crysect(&["--config", path.to_str().unwrap(), "config"]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_report_is_deterministic() {
    let a = crysect(&["verify", "--suite", "admissible"]);
    let b = crysect(&["verify", "--suite", "admissible"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["passed"], true);
}
