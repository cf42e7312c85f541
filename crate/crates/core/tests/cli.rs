use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const PARIS: &str = "p1=7,p2=11,p3=1";
const FOUR_NODE: &str = "w11=1,w12=2,w14=7,w22=3,w23=5,w32=4,w34=3,w42=2,w43=8";

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

struct Run {
    status: i32,
    stdout: String,
    stderr: String,
}

fn polypol(args: &[&str]) -> Run {
    polypol_env(args, &[])
}

fn polypol_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_polypol"));
    cmd.args(args).env_remove("POLYPOL_ORACLE_CAP");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        status: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn inequality_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()).collect()
}

const SINGLE_ACTION: &str = r#"{
  "type": "pmdp",
  "parameters": ["c"],
  "states": ["A", "Z"],
  "absorbing": "Z",
  "actions": ["go", "stay"],
  "transitions": [
    {"from": "A", "action": "go", "weight": "c", "to": [{"state": "Z", "prob": "1"}]},
    {"from": "Z", "action": "stay", "weight": "0", "to": [{"state": "Z", "prob": "1"}]}
  ]
}"#;

#[test]
fn solve_paris_bologna() {
    let m = model("paris_bologna.pmdp.json");
    let run = polypol(&["solve", m.to_str().unwrap(), "--pi", PARIS]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    assert!(run.stdout.contains("policy: {P->TGV, M->Train}"));
    assert!(run.stdout.contains("value P = 39/4\n"));
    let run = polypol(&["solve", m.to_str().unwrap(), "--pi", PARIS, "--decimal", "--verify"]);
    assert!(run.stdout.contains("value P = 39/4 (~9.75)"));
    assert!(run.stdout.contains("verified"));
}

#[test]
fn solve_max_plus_reference() {
    let m = model("four_node.pdwg.json");
    let run = polypol(&["solve", m.to_str().unwrap(), "--pi", FOUR_NODE, "--verify"]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    assert!(run.stdout.contains("policy: 1->4, 2->3, 3->4, 4->3"));
    assert!(run.stdout.contains("state 1: eta = 11/2, x = 4"));
    assert!(run.stdout.contains("state 4: eta = 11/2, x = 5/2"));
}

#[test]
fn solve_and_inverse_single_action() {
    let dir = TempDir::new().unwrap();
    let m = write(&dir, "one.json", SINGLE_ACTION);
    let run = polypol(&["solve", &m, "--pi", "c=3"]);
    assert_eq!(run.stdout, "policy: {A->go}\nvalue A = 3\nvalue Z = 0\n");
    let run = polypol(&["inverse", &m, "--pi0", "c=3"]);
    assert_eq!(run.status, 0);
    assert!(inequality_lines(&run.stdout).is_empty());
}

#[test]
fn inverse_paris_bologna_pipeline() {
    let dir = TempDir::new().unwrap();
    let m = model("paris_bologna.pmdp.json");
    let k = dir.path().join("k.txt");
    let run = polypol(&[
        "inverse",
        m.to_str().unwrap(),
        "--pi0",
        PARIS,
        "--output",
        k.to_str().unwrap(),
    ]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&k).unwrap();
    assert_eq!(inequality_lines(&text), ["5*p1 - 4*p2 + 4*p3 <= 0"]);

    let k = k.to_str().unwrap();
    assert_eq!(polypol(&["check", k, "--pi", PARIS]).status, 0);
    assert_eq!(polypol(&["check", k, "--pi", "p1=7,p2=11,p3=3"]).status, 1);
    let run = polypol(&["instantiate", k, "--pi", "p1=7,p2=11"]);
    assert_eq!(run.stdout, "# parameters: p3\n4*p3 - 9 <= 0\n");
}

#[test]
fn inverse_max_plus_reference() {
    let dir = TempDir::new().unwrap();
    let m = model("four_node.pdwg.json");
    let pi0 = write(&dir, "pi0.txt", &FOUR_NODE.replace(',', "\n"));
    let run = polypol(&["inverse", m.to_str().unwrap(), "--pi0", &format!("@{pi0}"), "--raw"]);
    assert_eq!(run.status, 0, "{}", run.stderr);
    assert_eq!(run.stdout.lines().filter(|l| l.starts_with("# raw")).count(), 18);
    assert_eq!(
        inequality_lines(&run.stdout),
        [
            "2*w11 - w34 - w43 <= 0",
            "w12 - w14 + w23 - w43 <= 0",
            "2*w22 - w34 - w43 <= 0",
            "w23 + w32 - w34 - w43 <= 0",
            "2*w23 - w34 + 2*w42 - 3*w43 <= 0",
        ]
    );
    let k = write(&dir, "k.txt", &run.stdout);
    let run = polypol(&[
        "instantiate",
        &k,
        "--pi",
        "w11=1,w12=2,w14=7,w22=3,w23=5,w32=4,w34=3,w42=2",
    ]);
    assert_eq!(run.stdout, "# parameters: w43\n-1*w43 + 6 <= 0\n");
    let simplified = polypol(&["simplify", &k]);
    let again = write(&dir, "k2.txt", &simplified.stdout);
    assert_eq!(polypol(&["simplify", &again]).stdout, simplified.stdout);
}

#[test]
fn check_verdicts() {
    let dir = TempDir::new().unwrap();
    let k = write(&dir, "k.txt", "p3 <= 9/4\n");
    let run = polypol(&["check", &k, "--pi", "p3=3"]);
    assert_eq!((run.status, run.stdout.as_str()), (1, "not satisfied\n"));
    assert_eq!(polypol(&["check", &k, "--pi", "p3=9/4"]).status, 0);
    let empty = write(&dir, "true.txt", "");
    assert_eq!(polypol(&["check", &empty, "--pi", ""]).status, 0);
    let run = polypol(&["instantiate", &k, "--pi", "p3=5"]);
    assert_eq!((run.status, run.stdout.as_str()), (1, "unsatisfiable\n"));
}

#[test]
fn output_is_deterministic() {
    let m = model("four_node.pdwg.json");
    let args = ["inverse", m.to_str().unwrap(), "--pi0", FOUR_NODE, "--raw"];
    assert_eq!(polypol(&args).stdout, polypol(&args).stdout);
}

#[test]
fn errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let m = model("paris_bologna.pmdp.json");
    let m = m.to_str().unwrap();
    let run = polypol(&["solve", m]);
    assert_eq!(run.status, 2);
    assert!(run.stderr.contains("p1, p2, p3"), "{}", run.stderr);
    assert_eq!(polypol(&["solve", m, "--pi", "p1=7,p2=11,p3=1,zz=2"]).status, 2);
    assert_eq!(polypol(&["solve", "/nonexistent.json"]).status, 2);
    let bad = write(&dir, "bad.json", &SINGLE_ACTION.replace("\"c\"]", "\"d\"]"));
    let run = polypol(&["solve", &bad, "--pi", "d=1"]);
    assert_eq!(run.status, 2);
    assert!(run.stderr.contains("transitions[0].weight"), "{}", run.stderr);
    let garbled = write(&dir, "k.txt", "p1 <= = 3\n");
    assert_eq!(polypol(&["simplify", &garbled]).status, 2);
    assert_eq!(polypol(&["check", &garbled]).status, 2);
}

#[test]
fn oracle_cap_from_environment() {
    let m = model("paris_bologna.pmdp.json");
    let args = ["solve", m.to_str().unwrap(), "--pi", PARIS, "--verify"];
    let run = polypol_env(&args, &[("POLYPOL_ORACLE_CAP", "1")]);
    assert_eq!(run.status, 2);
    assert!(run.stderr.contains("cap"), "{}", run.stderr);
    assert_eq!(polypol_env(&args, &[("POLYPOL_ORACLE_CAP", "2")]).status, 0);
    assert_eq!(polypol_env(&args, &[("POLYPOL_ORACLE_CAP", "lots")]).status, 2);
}
