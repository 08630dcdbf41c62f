use std::process::{Command, Output};

const EXAMPLE: &str = "1 - x1^2 - x1^3 + x1^4";

fn jcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcert")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn certify_example_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let p = path.to_str().unwrap();
    let o = jcert(&["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "7", "--out", p, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["num_vars"], 1);
    assert_eq!(doc["r"], 7);
    assert_eq!(doc["eta"], 0.1);
    let stored = doc["residual"].as_f64().unwrap();
    assert!(stored <= 1e-8);
    let terms = doc["terms"].as_array().unwrap();
    assert!(terms.iter().all(|t| t["J"].is_array() && t["squares"].is_array()));
    let sq = &terms[0]["squares"][0];
    assert!(sq["scale"].as_f64().unwrap() > 0.0);
    assert!(sq["coeffs"].as_object().unwrap().contains_key("0"));

    let v = jcert(&["verify", "--poly", EXAMPLE, "--cert", p]);
    assert_eq!(v.status.code(), Some(0));
    let rep: serde_json::Value = serde_json::from_str(&stdout(&v)).unwrap();
    assert_eq!(rep["valid"], true);
    assert!((rep["residual"].as_f64().unwrap() - stored).abs() <= 1e-12);
}

#[test]
fn tampered_file_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let p = path.to_str().unwrap();
    assert_eq!(jcert(&["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "7", "--out", p]).status.code(), Some(0));
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let s = doc["terms"][0]["squares"][0]["scale"].as_f64().unwrap();
    doc["terms"][0]["squares"][0]["scale"] = serde_json::json!(-s);
    std::fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(jcert(&["verify", "--poly", EXAMPLE, "--cert", p]).status.code(), Some(3));
}

#[test]
fn certify_exit_codes() {
    assert_eq!(jcert(&["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "5"]).status.code(), Some(2));
    assert_eq!(jcert(&["certify", "--poly", "1 - x1^^2", "--eta", "0.1", "--r", "7"]).status.code(), Some(64));
    assert_eq!(jcert(&["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "3"]).status.code(), Some(64));
    assert_eq!(jcert(&["certify", "--eta", "0.1"]).status.code(), Some(64));
    assert_eq!(jcert(&["nonsense"]).status.code(), Some(64));
    let o = jcert(&["certify", "--poly", "1 + x1^-2", "--eta", "0.1", "--r", "7"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("column"));
}

#[test]
fn poly_file_and_nvars() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    std::fs::write(&path, "x1*x2 - 1/2\n").unwrap();
    let o = jcert(&["certify", "--poly-file", path.to_str().unwrap(), "--nvars", "2", "--eta", "2", "--r", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["num_vars"], 2);
}

#[test]
fn bound_sweep() {
    let o = jcert(&["bound", "--poly", EXAMPLE, "--r-sweep", "18:98:8"]);
    assert_eq!(o.status.code(), Some(0));
    let head = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(head, "r,lambda_star,fmin_est,gap,C,threshold,bound,ok");
    let rows = csv(&o);
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[7] == "true"));
    assert_eq!(stdout(&o), stdout(&jcert(&["bound", "--poly", EXAMPLE, "--r-sweep", "18:98:8"])));

    let c = jcert(&["bound", "--poly", "3", "--r-sweep", "2:10:4"]);
    assert!(csv(&c).iter().all(|r| r[3].parse::<f64>().unwrap() == 0.0));
    assert_eq!(jcert(&["bound", "--poly", EXAMPLE, "--r", "3"]).status.code(), Some(64));
    assert_eq!(jcert(&["bound", "--poly", EXAMPLE, "--r-sweep", "1:x"]).status.code(), Some(64));
}

#[test]
fn figure_one_data() {
    let o = jcert(&["figure1", "--samples", "201"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv(&o);
    assert_eq!(rows.len(), 201);
    let mid = rows.iter().find(|r| r[0] == "0").unwrap();
    assert!((mid[2].parse::<f64>().unwrap() - 1.61985).abs() < 1e-4);
    assert!((mid[3].parse::<f64>().unwrap() - 1.28978).abs() < 1e-4);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "1");
    assert!((last[1].parse::<f64>().unwrap() - 0.1).abs() < 1e-12);
    assert_eq!(csv(&jcert(&["figure1"])).len(), 200);
}

#[test]
fn inspect_kernel_table() {
    let o = jcert(&["inspect-kernel", "--r", "5"]);
    let rows = csv(&o);
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], vec!["0", "1"]);
    assert!((rows[4][1].parse::<f64>().unwrap() - 0.1938434).abs() < 2e-6);
}

#[test]
fn selftest_quick_is_deterministic() {
    let a = jcert(&["selftest", "--level", "quick", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let summary: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["checks"].as_array().unwrap().len(), 4);
    let b = jcert(&["selftest", "--level", "quick", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_cap() {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_jcert"));
    cmd.env("JC_THREADS", "1").args(["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "7"]);
    let one = cmd.output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    let many = jcert(&["certify", "--poly", EXAMPLE, "--eta", "0.1", "--r", "7"]);
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_jcert")).env("JC_THREADS", "zero").args(["inspect-kernel", "--r", "2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}
