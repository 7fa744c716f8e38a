use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forestwalk")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn decode_cherry() {
    let v = stdout_json(&run(&["codec", "decode", "--bridge", "[0,1,0,-1]"]));
    assert_eq!(v["tree"], serde_json::json!([2, 0, 0]));
}

#[test]
fn encode_then_decode_marked_tree() {
    let v = stdout_json(&run(&["codec", "encode", "--tree", "[2,1,0,0]", "--mark", "3"]));
    let bridge = v["bridge"].to_string();
    let back = stdout_json(&run(&["codec", "decode", "--bridge", &bridge]));
    assert_eq!(back["tree"], serde_json::json!([2, 1, 0, 0]));
    assert_eq!(back["mark"], 3);
}

#[test]
fn split_walk() {
    let v = stdout_json(&run(&["codec", "split", "--walk", "[0,-1,0,-1,-2]"]));
    assert_eq!(v["trees"], serde_json::json!([[0, -1]]));
    assert_eq!(v["last"], serde_json::json!([0, 1, 0, -1]));
}

#[test]
fn degseq_check() {
    let v = stdout_json(&run(&["degseq", "check", "--counts", r#"{"0":4,"2":2}"#]));
    assert_eq!((v["n"].as_u64(), v["c"].as_u64()), (Some(6), Some(2)));
    // One node of degree two and no leaves: c = -1.
    assert_eq!(run(&["degseq", "check", "--counts", r#"{"2":1}"#]).status.code(), Some(1));
}

#[test]
fn degseq_make_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let out = run(&[
        "degseq", "make", "--p", "geometric:0.5", "--n", "1000", "--cn", "5", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let arg = format!("@{}", path.display());
    let v = stdout_json(&run(&["degseq", "check", "--counts", &arg]));
    assert_eq!((v["n"].as_u64(), v["c"].as_u64()), (Some(1000), Some(5)));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["codec", "decode", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["codec", "decode", "--bridge", "[0,1,1]"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sample_formats() {
    let counts = r#"{"0":4,"2":2}"#;
    let out = run(&["sample", "forest", "--counts", counts, "--seed", "3", "--count", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["replicate"], i);
        let sizes: usize = l["trees"].as_array().unwrap().iter().map(|t| t.as_array().unwrap().len()).sum();
        assert_eq!(sizes, 6);
    }
    let mcf = run(&["sample", "mcf", "--counts", counts, "--seed", "3", "--count", "1"]);
    let first: Value = serde_json::from_slice(mcf.stdout.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert!(first.get("mark").is_some());

    let csv = run(&["sample", "forest", "--counts", counts, "--seed", "3", "--count", "4", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# seed=3"));
    assert!(lines.next().unwrap().starts_with("replicate,tau_n"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn sample_tau_is_reproducible() {
    let args = ["limit", "sample-tau", "--sigma", "1", "--count", "50", "--seed", "9"];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("sample,tau"));
    assert!(text.lines().skip(2).all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() > 0.0));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let report = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = run(&[
            "verify", "walk", "--n", "5000", "--reps", "40", "--seed", "7", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        // 0 when the criteria hold, 2 when they do not; both write a report.
        assert!(matches!(out.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = report("a.json", "1");
    assert_eq!(a, report("b.json", "1"));
    assert_eq!(a, report("c.json", "4"));
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["experiment"], "walk");
    assert!(v["criteria"].as_array().is_some_and(|c| !c.is_empty()));
}
