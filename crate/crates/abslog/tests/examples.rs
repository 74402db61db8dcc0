use abslog::behavior::{enumerate_stack, EnumConfig, Terminal, Trace, Verdict};
use abslog::examples::{self, build, check_all, sim_setup, NAMES, SIM_NAMES};
use abslog::imp::{embed, parse};
use abslog::kernel::{fundef, guarantee, obs, seq, ModStack, ModuleSem};
use abslog::values::AnyValue;

#[test]
fn shipped_bundles_hold() {
    for n in NAMES {
        let b = build(n).unwrap();
        let r = check_all(&b).unwrap();
        assert!(r.holds(), "{n}: {}", r.to_json());
        assert_eq!(r.outcomes.len(), b.checks.len());
    }
}

#[test]
fn double_fire_fails_everywhere_it_should() {
    let b = build("cannon2").unwrap();
    let r = check_all(&b).unwrap();
    assert!(!r.holds());
    let failing: Vec<_> = r.outcomes.iter().filter(|o| !o.report.holds()).map(|o| o.name.as_str()).collect();
    assert_eq!(failing, ["Main", "end-to-end"]);
}

const BROKEN_POP: &str = "module Stack

def new() {
  var stk;
  stk = Mem.alloc(1);
  Mem.store(stk, NULL);
  return stk
}

def push(stk, v) {
  var node, hd;
  node = Mem.alloc(2);
  hd = Mem.load(stk);
  Mem.store(node, v);
  Mem.store(node + 8, hd);
  Mem.store(stk, node);
  return 0
}

def pop(stk) {
  var hd, v;
  hd = Mem.load(stk);
  if (hd == NULL) then { v := 0 } else { v = Mem.load(hd) };
  return v
}
";

#[test]
fn stack_that_never_pops_is_rejected() {
    let b = build("stack1").unwrap();
    let c = b.check("Stack").unwrap().clone();
    let broken = embed(&parse(BROKEN_POP).unwrap());
    let mods: Vec<ModuleSem> =
        c.imp.mods.iter().map(|m| if m.name == "Stack" { broken.clone() } else { (**m).clone() }).collect();
    let mut bad = c.clone();
    bad.imp = ModStack::of(mods);
    let o = b.run_check(&bad).unwrap();
    match o.report.verdict() {
        Verdict::Violation(t) => assert!(t.events.iter().any(|e| e.fun == "print"), "{t}"),
        Verdict::Holds => panic!("broken pop accepted"),
    }
}

#[test]
fn guarantee_false_leaves_only_the_empty_partial() {
    let m = ModuleSem::new("G", AnyValue::Unit)
        .with_fun("main", fundef(|_| seq(guarantee(false), obs("print", AnyValue::Int(1)))));
    let b = enumerate_stack(&ModStack::single(m), "G.main", AnyValue::Unit, 4, &EnumConfig::default()).unwrap();
    assert!(b.is_empty());
    assert!(b.covers(&Trace::new(vec![], Terminal::Partial)));
    assert!(!b.covers(&Trace::new(vec![], Terminal::Error)));
    assert!(!b.covers(&Trace::term(AnyValue::Int(0))));
    let j = b.to_json();
    assert_eq!(j["traces"].as_array().unwrap().len(), 1);
    assert_eq!(j["traces"][0]["terminal"], "partial");
    assert_eq!(j["traces"][0]["events"].as_array().unwrap().len(), 0);
}

#[test]
fn shipped_sims_match_expectations() {
    for n in SIM_NAMES {
        let s = sim_setup(n).unwrap();
        let r = s.run().unwrap();
        assert!(r.init_related, "{n}");
        assert_eq!(r.sim_verdict(), s.expect_sim, "{n}");
        assert_eq!(r.trace.holds(), s.expect_trace, "{n}");
    }
}

#[test]
fn repeat_rejects_negative_counts() {
    let b = examples::repeat().unwrap();
    let beh = enumerate_stack(&b.abs_stack, &b.main, AnyValue::ints(&[-1, 3]), b.budget, &EnumConfig::default()).unwrap();
    assert!(beh.is_top());
}

#[test]
fn bundle_json_names_checks() {
    let b = build("hoare").unwrap();
    let j = check_all(&b).unwrap().to_json();
    let names: Vec<_> = j["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["F", "Main", "abspec pair", "erasure", "end-to-end"]);
}
