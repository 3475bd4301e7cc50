use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

use tensor_lrpc::analysis::CSV_HEADER;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tensor-lrpc"));
    c.env_remove("TENSOR_LRPC_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &[&str] = &["--q", "2", "--m", "8", "--n", "8", "--k", "4", "--d", "2", "--r", "1"];

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&[&["gen"], SMALL, &["--seed", "5", "--out", p(out)]].concat());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let summary = json(&o);
        let exp = summary["expansion_dim"].as_u64().unwrap();
        assert_eq!(summary["code_dim"].as_u64().unwrap(), 64 - exp);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let other = dir.path().join("c.json");
    run(&[&["gen"], SMALL, &["--seed", "6", "--out", p(&other)]].concat());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn gen_rejects_bad_params() {
    let o = run(&["gen", "--m", "4", "--n", "4", "--k", "2", "--d", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = run(&["gen", "--m", "4", "--n", "4", "--k", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["gen", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn roundtrip_exit_codes() {
    let o = run(&[&["roundtrip"], &SMALL[..10], &["--r", "0"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["correct"], Value::Bool(true));
    assert_eq!(v["outcome"]["status"]["kind"], "unique");

    let o = run(&["roundtrip", "--r", "6", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["outcome"]["status"]["kind"], "support_failure");
}

#[test]
fn roundtrip_from_instance_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let args = ["--q", "2", "--m", "14", "--n", "10", "--k", "5", "--d", "2", "--r", "1"];
    assert_eq!(run(&[&["gen"], &args[..], &["--seed", "3", "--out", p(&inst)]].concat()).status.code(), Some(0));
    let mut ok = 0;
    for seed in 0..5 {
        let s = seed.to_string();
        let o = run(&["roundtrip", "--instance", p(&inst), "--seed", &s]);
        let code = o.status.code().unwrap();
        assert!(code == 0 || code == 3);
        if code == 0 {
            ok += 1;
        }
    }
    assert!(ok >= 3, "{ok} of 5 round trips");

    let text = fs::read_to_string(&inst).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    let first = v["mu"][0].as_u64().unwrap();
    v["mu"][0] = Value::from(1 - first);
    fs::write(&inst, v.to_string()).unwrap();
    assert_eq!(run(&["roundtrip", "--instance", p(&inst)]).status.code(), Some(4));
}

#[test]
fn missing_files_are_io_errors() {
    assert_eq!(run(&["roundtrip", "--instance", "/nonexistent/x.json"]).status.code(), Some(4));
    assert_eq!(run(&["--config", "/nonexistent/c.json", "gen"]).status.code(), Some(4));
    assert_eq!(run(&["check-tensor", "--tensor", "/nonexistent/t.json"]).status.code(), Some(4));
}

#[test]
fn dfr_smoke_and_sweep() {
    let start = Instant::now();
    let o = run(&["dfr", "--trials", "10", "--seed", "1"]);
    assert!(start.elapsed() < Duration::from_secs(5));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 1);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dfr.csv");
    let js = dir.path().join("dfr.json");
    let o = run(&[
        "dfr", "--m", "12", "--n", "10", "--k", "5", "--r", "1,2,3", "--trials", "5", "--out", p(&csv), "--json", p(&js),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    let rows: Vec<Value> = serde_json::from_str(&fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    let rs: Vec<u64> = rows.iter().map(|r| r["r"].as_u64().unwrap()).collect();
    assert_eq!(rs, vec![1, 2, 3]);

    assert_eq!(run(&["dfr", "--trials", "0"]).status.code(), Some(2));
    let bad = bin().args(["dfr", "--trials", "2"]).env("TENSOR_LRPC_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn check_tensor_reports() {
    let dir = tempfile::tempdir().unwrap();
    let tensor = dir.path().join("t.json");
    // third-axis slices [[1,0,3],[3,4,0],[0,1,0]], [[2,2,2],[1,3,3],[0,2,1]], [[1,5,6],[3,2,2],[1,2,2]]
    let data = [1, 2, 1, 0, 2, 5, 3, 2, 6, 3, 1, 3, 4, 3, 2, 0, 3, 2, 0, 0, 1, 1, 2, 2, 0, 1, 2];
    fs::write(&tensor, serde_json::json!({"q": 7, "dims": [3, 3, 3], "data": data}).to_string()).unwrap();
    let basis = dir.path().join("b.json");
    fs::write(&basis, serde_json::json!({"q": 7, "rows": 2, "cols": 3, "data": [1, 1, 1, 1, 0, 0]}).to_string()).unwrap();
    let o = run(&["check-tensor", "--tensor", p(&tensor), "--basis", p(&basis)]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["compatibility"]["compatible"], Value::Bool(false));
    assert_eq!(v["compatibility"]["ranks"][0], 2);
    assert_eq!(v["presemifield"]["holds"], Value::Bool(false));
    assert!(v["presemifield"]["witness"].is_array());

    let o = run(&["check-tensor", "--q", "2", "--m", "5"]);
    let v = json(&o);
    assert_eq!(v["presemifield"]["holds"], Value::Bool(true));
    assert_eq!(v["presemifield"]["exhaustive"], Value::Bool(true));
    assert_eq!(v["presemifield"]["checked"], 31);

    let zero = dir.path().join("z.json");
    fs::write(&zero, serde_json::json!({"q": 2, "dims": [3, 3, 3], "data": vec![0; 27]}).to_string()).unwrap();
    let v = json(&run(&["check-tensor", "--tensor", p(&zero)]));
    assert_eq!(v["presemifield"]["witness"], serde_json::json!([1, 0, 0]));

    let sampled = json(&run(&["check-tensor", "--q", "2", "--m", "6", "--samples", "50", "--seed", "4"]));
    assert_eq!(sampled["presemifield"]["exhaustive"], Value::Bool(false));
}

#[test]
fn dist_outputs() {
    let o = run(&["dist", "--kind", "sum", "--m", "2", "--a", "1", "--b", "1", "--trials", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let one = rows.iter().find(|x| &x[1] == "1").unwrap();
    assert_eq!(&one[2], "2/3");
    let count: u64 = rows.iter().map(|x| x[4].parse::<u64>().unwrap()).sum();
    assert_eq!(count, 300);

    let o = run(&["dist", "--kind", "preimage", "--m", "8", "--a", "8", "--rd", "3", "--trials", "50"]);
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][2], "1");
    assert_eq!(&rows[0][4], "50");

    assert_eq!(run(&["dist", "--kind", "sum", "--m", "4", "--a", "1"]).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"m": 12, "n": 10, "k": 5, "r": [1, 2], "trials": 3, "tensor_mode": "random", "algorithm": "improved"}"#).unwrap();
    let o = run(&["--config", p(&cfg), "dfr"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().contains(",random,improved,"));

    let o = run(&["--config", p(&cfg), "dfr", "--r", "1", "--trials", "2"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);

    fs::write(&cfg, r#"{"m": 12, "bogus": 1}"#).unwrap();
    assert_eq!(run(&["--config", p(&cfg), "gen"]).status.code(), Some(2));
}
