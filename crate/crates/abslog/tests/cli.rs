use std::path::PathBuf;
use std::process::Command;

use abslog::cli::{main_with, EXIT_ERROR_TERMINAL, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use serde_json::Value;

fn run_with(args: &[&str], stdin: &str) -> (i32, String) {
    let mut out = vec![];
    let mut input = stdin.as_bytes();
    let mut all = vec!["abslog".to_string()];
    all.extend(args.iter().map(|s| s.to_string()));
    let code = main_with(all, &mut out, &mut input);
    (code, String::from_utf8(out).unwrap())
}

fn run(args: &[&str]) -> (i32, String) {
    run_with(args, "")
}

fn program(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs").join(rel).display().to_string()
}

fn scratch(name: &str, text: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|e| panic!("{e}: {s}"))
}

#[test]
fn list_names_every_example() {
    let (code, out) = run(&["example", "--list"]);
    assert_eq!(code, EXIT_OK);
    for n in abslog::examples::NAMES {
        assert!(out.lines().any(|l| l.starts_with(n)), "{n} missing from {out}");
    }
}

#[test]
fn refine_hoare_holds() {
    let (code, out) = run(&["refine", "--example", "hoare", "--budget", "60"]);
    assert_eq!(code, EXIT_OK);
    let j = json(&out);
    assert!(j["checks"].as_array().unwrap().iter().all(|c| c["verdict"] == "holds"));
}

#[test]
fn refine_single_check() {
    let (code, out) = run(&["refine", "--example", "cannon2", "--check", "Main"]);
    assert_eq!(code, EXIT_VIOLATION);
    let j = json(&out);
    assert_eq!(j["checks"].as_array().unwrap().len(), 1);
    assert_eq!(run(&["refine", "--example", "hoare", "--check", "nope"]).0, EXIT_USAGE);
}

#[test]
fn echo_reverses_scripted_input() {
    let (code, out) = run(&["run", "--example", "echo", "--io", "1,2,3,0"]);
    assert_eq!(code, EXIT_OK, "{out}");
    let puts: Vec<&str> = out.lines().filter(|l| l.starts_with("putint")).collect();
    assert_eq!(puts, ["putint([3])=0", "putint([2])=0", "putint([1])=0"]);
}

#[test]
fn run_json_output() {
    let (code, out) = run(&["run", "--example", "hoare", "--json"]);
    assert_eq!(code, EXIT_OK);
    let j = json(&out);
    assert_eq!(j["terminal"], "term");
    assert_eq!(j["events"][0]["args"]["list"][0]["int"], 441);
}

#[test]
fn run_files_with_mem() {
    let (code, out) = run(&["run", &program("mem/client.imp"), "--main", "Client.main"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().collect::<Vec<_>>(), ["print([2])=0", "term 2"]);
}

#[test]
fn run_division_by_zero() {
    let f = scratch("div.imp", "module D\n\ndef main() {\n  var x;\n  x := 1 / 0;\n  return x\n}\n");
    let (code, out) = run(&["run", &f, "--main", "D.main"]);
    assert_eq!(code, EXIT_ERROR_TERMINAL, "{out}");
}

#[test]
fn scripted_and_prompted_choices() {
    let script = scratch("picks.json", "[0, 1]");
    let (code, out) = run(&["run", "--example", "mem", "--script", &script]);
    assert_eq!(code, EXIT_OK, "{out}");
    let (code, out) = run_with(&["run", "--example", "mem", "--prompt"], "0\n");
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("choose"));
    let (code, _) = run_with(&["run", "--example", "mem", "--prompt"], "");
    assert_eq!(code, abslog::cli::EXIT_PARTIAL);
}

#[test]
fn seeded_runs_repeat() {
    let a = run(&["run", "--example", "stack2a", "--seed", "11"]);
    let b = run(&["run", "--example", "stack2a", "--seed", "11"]);
    assert_eq!(a, b);
}

#[test]
fn enum_config_overrides_responders() {
    let cfg = scratch("ec.json", r#"{"responders": {"getval": [{"int": 7}]}}"#);
    let (code, out) = run(&["--enum-config", &cfg, "run", "--example", "stack1"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("print([7])"));
    assert_eq!(run(&["--enum-config", "/nonexistent.json", "run", "--example", "stack1"]).0, EXIT_USAGE);
}

#[test]
fn beh_of_repeat() {
    let (code, out) = run(&["beh", "--example", "repeat", "--arg", "[2,3]"]);
    assert_eq!(code, EXIT_OK);
    let j = json(&out);
    assert_eq!(j["behavior"]["traces"][0]["value"]["int"], 5);
}

#[test]
fn beh_is_stable() {
    let a = run(&["beh", "--example", "stack2b"]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a, run(&["beh", "--example", "stack2b"]));
}

#[test]
fn beh_writes_file() {
    let dest = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("beh.json");
    let (code, out) = run(&["beh", "--example", "hoare", "--out", &dest.display().to_string()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let j = json(&std::fs::read_to_string(dest).unwrap());
    assert_eq!(j["main"], "Main.main");
}

#[test]
fn parse_reports_structure() {
    let (code, out) = run(&["parse", &program("cannon/cannon.imp")]);
    assert_eq!(code, EXIT_OK);
    let j = json(&out);
    assert_eq!(j["modules"][0]["module"], "Cannon");
    assert_eq!(j["modules"][0]["globals"][0][0], "powder");
    let bad = scratch("bad.imp", "module\n");
    assert_eq!(run(&["parse", &bad]).0, EXIT_USAGE);
}

#[test]
fn erase_echo_shows_context_ub() {
    let (code, out) = run(&["erase", "--example", "echo"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("module Echo"));
    assert!(out.contains("else: UB"));
}

#[test]
fn sim_verdicts() {
    assert_eq!(run(&["sim", "--example", "hoare"]).0, EXIT_OK);
    let (code, out) = run(&["sim", "--example", "cannon2.Main", "--probe"]);
    assert_eq!(code, EXIT_VIOLATION);
    assert_eq!(json(&out)["verdict"], "fails");
    assert_eq!(run(&["sim", "--example", "echo"]).0, EXIT_USAGE);
}

const BUGGY_PUSH: &str = "module Stack

def new() {
  var stk;
  stk = Mem.alloc(1);
  Mem.store(stk, NULL);
  return stk
}

def push(stk, v) {
  var node;
  node = Mem.alloc(2);
  Mem.store(node, v);
  Mem.store(node + 8, NULL);
  Mem.store(stk, node);
  return 0
}

def pop(stk) {
  var hd, v, next;
  hd = Mem.load(stk);
  if (hd == NULL) then { v := 0 } else {
    v = Mem.load(hd);
    next = Mem.load(hd + 8);
    Mem.store(stk, next);
    Mem.free(hd);
    Mem.free(hd + 8)
  };
  return v
}
";

#[test]
fn buggy_stack_is_rejected() {
    let buggy = scratch("buggy_stack.imp", BUGGY_PUSH);
    let (stack, client) = (program("stack/stack.imp"), program("stack/client.imp"));
    let refine = |imp: &str| {
        run(&["refine", "--main", "Client.main", "--budget", "120", "--imp", imp, "--abs", &stack, "--ctx", &client])
    };
    assert_eq!(refine(&stack).0, EXIT_OK);
    let (code, out) = refine(&buggy);
    assert_eq!(code, EXIT_VIOLATION, "{out}");
    assert!(json(&out)["witness"]["events"].is_array());
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
    assert_eq!(run(&["run"]).0, EXIT_USAGE);
    assert_eq!(run(&["run", "--example", "nope"]).0, EXIT_USAGE);
    assert_eq!(run(&["beh", "x.imp"]).0, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_abslog");
    let st = Command::new(bin).args(["run", "--example", "cannon2"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_ERROR_TERMINAL));
    let st = Command::new(bin).args(["refine", "--example", "repeat"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    let st = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
}
