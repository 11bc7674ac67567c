use std::process::{Command, Output};

use serde_json::Value;

fn zsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zsl")).args(args).env_remove("ZSL_CACHE").output().expect("run zsl")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let o = zsl(&all);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn davenport_of_rank_two_group() {
    let o = zsl(&["davenport", "--group", "C3xC6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "8");
    assert_eq!(json(&["davenport", "--group", "C2xC2xC2"])["davenport"], 4);
}

#[test]
fn classify_amp() {
    let v = json(&["classify", "--set", "[2,4,5]", "--d", "3"]);
    assert_eq!(v["bound"], 0);
    assert_eq!(v["shift"], 2);
    assert_eq!(v["period"], serde_json::json!([0, 2, 3]));
    assert_eq!(v["length"], 1);
    let forced = json(&["classify", "--set", "[4,5,8,9]", "--d", "4", "--period", "0,1,4"]);
    assert_eq!(forced["bound"], 0);
}

#[test]
fn lengths_and_factorizations() {
    let v = json(&["lengths", "--group", "C3", "--seq", "(1)^3 (2)^3"]);
    assert_eq!(v["lengths"], serde_json::json!([2, 3]));
    let f = json(&["factorizations", "--group", "C3", "--seq", "(1)^3 (2)^3"]);
    assert_eq!(f["factorizations"].as_array().unwrap().len(), 2);
    assert_eq!(f["truncated"], false);
    let c = json(&["catenary", "--group", "C3", "--seq", "(1)^3 (2)^3"]);
    assert_eq!(c["catenary"], 3);
    let r = json(&["rho", "--group", "C3", "--seq", "(1)^3 (2)^3"]);
    assert_eq!(r["rho"], serde_json::json!([3, 2]));
    assert_eq!(json(&["rho", "--group", "C4", "--k", "3"])["rho_k"], 5);
}

#[test]
fn sequence_json_is_accepted() {
    let v = json(&["lengths", "--seq", r#"{"group":{"invariants":[3]},"terms":[{"elem":[1],"mult":3},{"elem":[2],"mult":3}]}"#]);
    assert_eq!(v["lengths"], serde_json::json!([2, 3]));
}

#[test]
fn mindelta_and_deltastar() {
    let m = json(&["mindelta", "--group", "C5", "--support", "(1) (4)"]);
    assert_eq!(m["mindelta"]["kind"], "gcd");
    assert_eq!(m["mindelta"]["value"], 3);
    let d = json(&["deltastar", "--group", "C5"]);
    assert_eq!(d["values"], serde_json::json!([1, 3]));
}

#[test]
fn contains_and_build() {
    assert_eq!(json(&["contains", "--group", "C4", "--set", "[2,4,5]"])["answer"], "no");
    assert_eq!(json(&["contains", "--group", "C2xC4", "--set", "[2,4,5]"])["answer"], "yes");
    let b = json(&["build", "--id", "p3.6.1", "--params", "n=5,d=3,k=1", "--check"]);
    assert_eq!(b["matches"], true);
    assert_eq!(b["group"], "C5");
}

#[test]
fn maxatoms_lists_and_classifies() {
    let v = json(&["maxatoms", "--group", "C2xC4"]);
    let atoms = v["atoms"].as_array().unwrap();
    assert!(!atoms.is_empty());
    let first = atoms[0].as_str().unwrap();
    let c = json(&["maxatoms", "--group", "C2xC4", "--classify", first]);
    assert!(!c["realizations"].as_array().unwrap().is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(zsl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(zsl(&["davenport", "--bogus"]).status.code(), Some(2));
    assert_eq!(zsl(&["davenport"]).status.code(), Some(2));
    assert_eq!(zsl(&["davenport", "--group", "C0"]).status.code(), Some(2));
    assert_eq!(zsl(&["build", "--id", "p3.6.1", "--params", "n=5,d=9,k=1"]).status.code(), Some(2));
    // a set of lengths needs a zero-sum sequence
    assert_eq!(zsl(&["lengths", "--group", "C3", "--seq", "(1)"]).status.code(), Some(1));
    assert_eq!(zsl(&["lengths", "--group", "C3", "--seq", "(1)^3", "--budget-states", "0"]).status.code(), Some(1));
    assert_eq!(zsl(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_reports_and_filters() {
    let o = zsl(&["verify", "--suite", "quick", "--filter", "davenport", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "quick");
    assert_eq!(v["pass"], true);
    let cases = v["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 15);
    assert!(cases.iter().all(|c| c["status"] == "pass" && c["id"].as_str().unwrap().starts_with("davenport/")));

    let o = zsl(&["verify", "--filter", "prop3.6", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["cases"].as_array().unwrap().iter().all(|c| c["id"].as_str().unwrap().starts_with("prop3.6")));

    // a documented counterexample makes the run fail
    let o = zsl(&["verify", "--filter", "lemma4.4/k=1", "--json"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["cases"][0]["status"], "fail");
}

#[test]
fn jobs_do_not_change_results() {
    let strip = |mut v: Value| {
        for c in v["cases"].as_array_mut().unwrap() {
            c["runtime_ms"] = Value::Null;
        }
        v
    };
    let args = ["verify", "--filter", "lemma5.2", "--filter", "props/sumset", "--seed", "5", "--json"];
    let one = zsl(&[&args[..], &["--jobs", "1"]].concat());
    let four = zsl(&[&args[..], &["--jobs", "4"]].concat());
    let a: Value = serde_json::from_slice(&one.stdout).unwrap();
    let b: Value = serde_json::from_slice(&four.stdout).unwrap();
    assert_eq!(strip(a), strip(b));
    assert_eq!(zsl(&["davenport", "--group", "C3", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn cache_directory_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let a = json(&["atoms", "--group", "C2xC4", "--cache", path]);
    let group_dir = dir.path().join("C2xC4");
    let files: Vec<_> = std::fs::read_dir(&group_dir).unwrap().collect();
    assert!(!files.is_empty());
    // a warm cache gives the same answer
    let b = json(&["atoms", "--group", "C2xC4", "--cache", path]);
    assert_eq!(a, b);

    let env_dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_zsl"))
        .args(["atoms", "--group", "C3", "--cache", path])
        .env("ZSL_CACHE", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.path().join("C3").is_dir());
    assert!(!dir.path().join("C3").exists());
}
