use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const MEDIUM: &str = r#"{"r":0.05,"c":1,"prize_win":10,"hazard_lead":0.2,"pi":0.05,"sigma":0.5}"#;
const LOW: &str = r#"{"r":0.05,"c":1,"prize_win":10,"hazard_lead":0.2,"pi":0,"sigma":0.5}"#;
const DESIGN: &str =
    r#"{"budget":10,"hazard_lead":0.3,"hazard_follow":0.05,"cost":2,"r":0.05,"pi":-0.1,"sigma":0.5}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn contest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contest"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_reports_benchmark() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "m.json", MEDIUM);
    let v = json_stdout(&contest(&["solve", s(&params), "--verify", "--no-timestamp"]));
    let sol = &v["solution"];
    assert!((sol["k_star"].as_f64().unwrap() - 0.7394875850514698).abs() < 1e-10);
    assert!((sol["k_star_star"].as_f64().unwrap() - 0.315838654857868).abs() < 1e-10);
    assert_eq!(sol["regime"]["kind"], "medium");
    assert_eq!(v["verification"]["passed"], true);
    assert!(v["manifest"]["started_unix"].is_null());
    assert_eq!(v["manifest"]["params_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "m.json", MEDIUM);
    for args in [
        vec!["solve", s(&params)],
        vec!["classify", s(&params)],
        vec!["simulate", s(&params), "--paths", "2000", "--seed", "7", "--theta", "0.2"],
        vec!["sweep", s(&params), "--vary", "pi", "--from", "-0.1", "--to", "0.2", "--n", "7"],
        vec!["regions", s(&params), "--n", "51"],
        vec!["dump", s(&params)],
    ] {
        let mut args = args.clone();
        args.push("--no-timestamp");
        let a = contest(&args);
        let b = contest(&args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn timestamps_present_by_default() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "l.json", LOW);
    let v = json_stdout(&contest(&["classify", s(&params)]));
    assert!(v["manifest"]["started_unix"].as_u64().is_some());
    assert_eq!(v["regime"]["kind"], "low");
}

#[test]
fn output_file_and_csv_manifest() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "l.json", LOW);
    let out = dir.path().join("regions.csv");
    let run = contest(&["regions", s(&params), "--n", "5", "-o", s(&out), "--no-timestamp"]);
    assert!(run.status.success());
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next().unwrap(), "dk,region");
    let labels: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(labels, ["i_drops", "i_risky", "both_risky", "j_risky", "j_drops"]);
}

#[test]
fn sweep_csv_rows() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "l.json", LOW);
    let run = contest(&["sweep", s(&params), "--vary", "c", "--from", "1", "--to", "30", "--n", "3"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with(",low,"));
    assert!(rows[2].contains("not profitable"));
}

#[test]
fn trace_file_is_written() {
    let dir = TempDir::new().unwrap();
    let params = write(&dir, "l.json", LOW);
    let trace = dir.path().join("t.csv");
    let run = contest(&["simulate", s(&params), "--paths", "100", "--trace", s(&trace)]);
    assert!(run.status.success());
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "t,dk,action_i,action_j");
    assert!(text.lines().count() <= 10_002);
}

#[test]
fn design_reports_allocation() {
    let dir = TempDir::new().unwrap();
    let problem = write(&dir, "d.json", DESIGN);
    let v = json_stdout(&contest(&["design", s(&problem)]));
    assert_eq!(v["allocation"]["case"], "winner-takes-all");
    assert!(v["objectives"]["k_star"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &str, Vec<&str>, i32); 6] = [
        ("unknown.json", r#"{"r":0.05,"bogus":1}"#, vec!["solve"], 2),
        ("unprofitable.json", r#"{"r":0.05,"c":5,"prize_win":10,"hazard_lead":0.2,"pi":0,"sigma":0.5}"#, vec!["solve"], 2),
        ("malformed.json", r#"{"r":0.05,"c":"#, vec!["classify"], 2),
        ("flat.json", r#"{"r":0.05,"c":1,"prize_win":10,"hazard_lead":0.2,"pi":0,"sigma":1e-9}"#, vec!["solve"], 3),
        ("coarse.json", LOW, vec!["simulate", "--dt", "0.5", "--paths", "10"], 4),
        ("design.json", r#"{"budget":10,"hazard_lead":0.2,"cost":3,"r":0.05,"pi":0,"sigma":0.5}"#, vec!["design"], 5),
    ];
    for (name, text, args, code) in cases {
        let path = write(&dir, name, text);
        let out_file = dir.path().join(format!("{name}.out"));
        let mut argv = vec![args[0], s(&path)];
        argv.extend(&args[1..]);
        argv.extend(["-o", s(&out_file)]);
        let run = contest(&argv);
        assert_eq!(run.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&run.stderr));
        assert!(!run.stderr.is_empty(), "{name}");
        assert!(!out_file.exists(), "{name}: partial output written");
    }
    let missing = contest(&["solve", "/nonexistent/params.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(contest(&["solve"]).status.code(), Some(2));
    assert_eq!(contest(&["--help"]).status.code(), Some(0));
}
