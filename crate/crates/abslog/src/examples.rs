//! The shipped example developments, packaged as bundles: implementation
//! stack, pre-abstractions with their spec tables, the erased final
//! abstraction, and the refinement checks that connect them.

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::abspec::{
    build_abspec, nb_body, res_m_any, res_m_sync, res_m_sync_or_free, to_abs, ub_body, AbsCfg, PreAbs,
};
use crate::behavior::{
    check_refine, enumerate_stack, with_deep_stack, BehError, BehSet, EnumConfig, RefineReport, Terminal, Trace,
    FRESH_BLOCKS_KEY,
};
use crate::imp::{embed, mem_impl, mem_preabs, parse, ImpError, ImpModule};
use crate::kernel::{
    assume, bind, call, choose, fundef, get_state, guarantee, nb, obs, put_state, ret, seq, seq_with, ub, Domain,
    FunDef, ModStack, ModuleSem,
};
use crate::pcm::Resource;
use crate::simulation::{adequacy_probe, AdequacyReport, ProbeCtx, SimConfig, SimError, SimVerdict};
use crate::speclang::{tables, SpecTable};
use crate::values::{Address, AnyValue};

pub const STACK_HANDLE_KEY: &str = "stack.handle";

pub const HOARE_MAIN: &str = include_str!("../programs/hoare/main.imp");
pub const HOARE_F: &str = include_str!("../programs/hoare/f.imp");
pub const HOARE_A_MAIN: &str = include_str!("../programs/hoare/a_main.imp");
pub const HOARE_A_F: &str = include_str!("../programs/hoare/a_f.imp");
pub const CANNON_MAIN: &str = include_str!("../programs/cannon/main.imp");
pub const CANNON: &str = include_str!("../programs/cannon/cannon.imp");
pub const CANNON_A_MAIN: &str = include_str!("../programs/cannon/a_main.imp");
pub const CANNON_A: &str = include_str!("../programs/cannon/a_cannon.imp");
pub const MEM_CLIENT: &str = include_str!("../programs/mem/client.imp");
pub const STACK: &str = include_str!("../programs/stack/stack.imp");
pub const STACK_CLIENT: &str = include_str!("../programs/stack/client.imp");
pub const ECHO: &str = include_str!("../programs/echo/echo.imp");
pub const REPEAT_RP: &str = include_str!("../programs/repeat/rp.imp");
pub const REPEAT_SC: &str = include_str!("../programs/repeat/sc.imp");
pub const REPEAT_AD: &str = include_str!("../programs/repeat/ad.imp");

/// Every shipped program, as `(path, source)`.
pub fn corpus() -> Vec<(&'static str, &'static str)> {
    vec![
        ("hoare/main.imp", HOARE_MAIN),
        ("hoare/f.imp", HOARE_F),
        ("hoare/a_main.imp", HOARE_A_MAIN),
        ("hoare/a_f.imp", HOARE_A_F),
        ("cannon/main.imp", CANNON_MAIN),
        ("cannon/cannon.imp", CANNON),
        ("cannon/a_main.imp", CANNON_A_MAIN),
        ("cannon/a_cannon.imp", CANNON_A),
        ("mem/client.imp", MEM_CLIENT),
        ("stack/stack.imp", STACK),
        ("stack/client.imp", STACK_CLIENT),
        ("echo/echo.imp", ECHO),
        ("repeat/rp.imp", REPEAT_RP),
        ("repeat/sc.imp", REPEAT_SC),
        ("repeat/ad.imp", REPEAT_AD),
    ]
}

pub const NAMES: [&str; 8] = ["hoare", "cannon", "mem", "stack1", "stack2a", "stack2b", "echo", "repeat"];

#[derive(Debug, Error)]
pub enum ExampleError {
    #[error("unknown example `{0}`")]
    Unknown(String),
    #[error("shipped program: {0}")]
    Program(#[from] ImpError),
    #[error(transparent)]
    Beh(#[from] BehError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    PerModule,
    SpecErasure,
    EndToEnd,
    Chain,
}

impl CheckKind {
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::PerModule => "per-module",
            CheckKind::SpecErasure => "spec-erasure",
            CheckKind::EndToEnd => "end-to-end",
            CheckKind::Chain => "chain",
        }
    }
}

/// `Beh(imp) ⊆ Beh(abs)` for the bundle's entry point and arguments.
#[derive(Clone)]
pub struct RefineCheck {
    pub name: String,
    pub kind: CheckKind,
    pub imp: ModStack,
    pub abs: ModStack,
    pub budget: usize,
    pub abs_budget: usize,
}

#[derive(Clone)]
pub struct ExampleBundle {
    pub name: String,
    pub summary: String,
    pub impl_stack: ModStack,
    /// The erased final abstraction.
    pub abs_stack: ModStack,
    pub preabs: Vec<PreAbs>,
    pub specs: SpecTable,
    pub sigmas: BTreeMap<String, Resource>,
    /// Module names passed to spec erasure.
    pub friends: Vec<String>,
    pub sims: Vec<SimSetup>,
    pub main: String,
    pub args: Vec<AnyValue>,
    pub enum_cfg: EnumConfig,
    pub budget: usize,
    pub checks: Vec<RefineCheck>,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: CheckKind,
    pub report: RefineReport,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub struct BundleReport {
    pub bundle: String,
    pub outcomes: Vec<CheckOutcome>,
    pub sims: Vec<(String, AdequacyReport)>,
}

impl BundleReport {
    pub fn holds(&self) -> bool {
        self.outcomes.iter().all(|o| o.report.holds())
            && self.sims.iter().all(|(_, r)| r.sim_verdict() == SimVerdict::Holds)
    }

    pub fn to_json(&self) -> Json {
        json!({
            "bundle": self.bundle,
            "verdict": if self.holds() { "holds" } else { "violation" },
            "checks": self.outcomes.iter().map(|o| {
                let mut j = o.report.to_json();
                j["name"] = json!(o.name);
                j["kind"] = json!(o.kind.label());
                j["millis"] = json!(o.millis as u64);
                j
            }).collect::<Vec<_>>(),
            "sims": self.sims.iter().map(|(n, r)| {
                let mut j = r.to_json();
                j["name"] = json!(n);
                j
            }).collect::<Vec<_>>(),
        })
    }
}

impl ExampleBundle {
    pub fn check(&self, name: &str) -> Option<&RefineCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn run_check(&self, c: &RefineCheck) -> Result<CheckOutcome, BehError> {
        let t = Instant::now();
        let (imp, abs, main, args, cfg) = (&c.imp, &c.abs, &self.main, &self.args, &self.enum_cfg);
        let report = with_deep_stack(|| {
            check_refine(imp, abs, &ModStack::default(), main, args, c.budget, c.abs_budget, cfg)
        })?;
        Ok(CheckOutcome { name: c.name.clone(), kind: c.kind, report, millis: t.elapsed().as_millis() })
    }

    /// Behavior of the implementation stack on the first argument.
    pub fn impl_behavior(&self) -> Result<BehSet, BehError> {
        self.behavior_of(&self.impl_stack, self.budget)
    }

    pub fn abs_behavior(&self) -> Result<BehSet, BehError> {
        self.behavior_of(&self.abs_stack, self.budget)
    }

    pub fn behavior_of(&self, stack: &ModStack, budget: usize) -> Result<BehSet, BehError> {
        let arg = self.args.first().cloned().unwrap_or(AnyValue::List(vec![]));
        with_deep_stack(|| enumerate_stack(stack, &self.main, arg, budget, &self.enum_cfg))
    }
}

/// Runs every check of the bundle in order, then its simulations.
pub fn check_all(b: &ExampleBundle) -> Result<BundleReport, ExampleError> {
    let outcomes = b.checks.iter().map(|c| b.run_check(c)).collect::<Result<Vec<_>, _>>()?;
    let sims = b
        .sims
        .iter()
        .map(|s| Ok((s.name.clone(), s.run()?)))
        .collect::<Result<Vec<_>, ExampleError>>()?;
    Ok(BundleReport { bundle: b.name.clone(), outcomes, sims })
}

pub fn build(name: &str) -> Result<ExampleBundle, ExampleError> {
    match name {
        "hoare" => hoare(),
        "cannon" => cannon(1),
        "cannon2" => cannon(2),
        "mem" => mem(),
        "stack1" => stack1(),
        "stack2a" => stack2(false),
        "stack2b" => stack2(true),
        "echo" => echo(),
        "repeat" => repeat(),
        _ => Err(ExampleError::Unknown(name.to_string())),
    }
}

fn imp(src: &str) -> Result<ImpModule, ImpError> {
    parse(src)
}

fn module(src: &str) -> Result<ModuleSem, ImpError> {
    Ok(embed(&parse(src)?))
}

fn stack(mods: &[&ModuleSem]) -> ModStack {
    ModStack::of(mods.iter().map(|m| (*m).clone()).collect())
}

fn no_args() -> Vec<AnyValue> {
    vec![AnyValue::List(vec![])]
}

fn check(name: &str, kind: CheckKind, imp: ModStack, abs: ModStack, budget: usize, abs_budget: usize) -> RefineCheck {
    RefineCheck { name: name.to_string(), kind, imp, abs, budget, abs_budget }
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

/// `[S | (A, σ) : S]` for one module of a development whose spec table is
/// `s`.
fn abspec(s: &SpecTable, pre: &PreAbs, sigma: &Resource, cfg: &AbsCfg) -> ModuleSem {
    build_abspec(s, pre, sigma, s, cfg)
}

pub fn hoare() -> Result<ExampleBundle, ExampleError> {
    let (i_main, i_f) = (module(HOARE_MAIN)?, module(HOARE_F)?);
    let (a_main, a_f) = (module(HOARE_A_MAIN)?, module(HOARE_A_F)?);
    let (p_main, p_f) = (PreAbs::from_module(&a_main), PreAbs::from_module(&a_f));
    let s = tables::hoare();
    let cfg = AbsCfg::default();
    let abs_main = abspec(&s, &p_main, &Resource::Unit, &cfg);
    let abs_f = abspec(&s, &p_f, &Resource::Unit, &cfg);
    const FR: [&str; 2] = ["Main", "F"];
    let e_main = to_abs(&FR, &p_main);
    let e_f = to_abs(&FR, &p_f);
    let checks = vec![
        check("F", CheckKind::PerModule, stack(&[&i_main, &i_f]), stack(&[&i_main, &abs_f]), 60, 120),
        check("Main", CheckKind::PerModule, stack(&[&i_main, &abs_f]), stack(&[&abs_main, &abs_f]), 60, 120),
        check("abspec pair", CheckKind::EndToEnd, stack(&[&i_main, &i_f]), stack(&[&abs_main, &abs_f]), 60, 120),
        check("erasure", CheckKind::SpecErasure, stack(&[&abs_main, &abs_f]), stack(&[&e_main, &e_f]), 120, 120),
        check("end-to-end", CheckKind::EndToEnd, stack(&[&i_main, &i_f]), stack(&[&e_main, &e_f]), 60, 120),
    ];
    Ok(ExampleBundle {
        name: "hoare".into(),
        summary: "Hoare-style specs: F.f from x%4=0 to r%4=1 lets Main drop its check".into(),
        impl_stack: stack(&[&i_main, &i_f]),
        abs_stack: stack(&[&e_main, &e_f]),
        preabs: vec![p_main, p_f],
        specs: s,
        sigmas: BTreeMap::from([("Main".into(), Resource::Unit), ("F".into(), Resource::Unit)]),
        friends: names(&FR),
        sims: vec![sim_setup("hoare.F")?, sim_setup("hoare.Main")?],
        main: "Main.main".into(),
        args: no_args(),
        enum_cfg: EnumConfig::default(),
        budget: 60,
        checks,
    })
}

/// Repeats the body of the single function of `src` `n` times.
fn unrolled(src: &str, n: usize) -> Result<ImpModule, ImpError> {
    let mut m = imp(src)?;
    for f in &mut m.funs {
        let body = f.body.clone();
        f.body = (0..n).flat_map(|_| body.clone()).collect();
    }
    Ok(m)
}

pub fn cannon_universe() -> Vec<Resource> {
    let mut u = vec![Resource::Unit];
    u.extend(["Ball", "Ready", "Loaded", "Fired"].map(Resource::cannon));
    u.push(Resource::Bad);
    u
}

/// The cannon development, firing `num_fire` times.
pub fn cannon(num_fire: usize) -> Result<ExampleBundle, ExampleError> {
    let i_main = embed(&unrolled(CANNON_MAIN, num_fire)?);
    let i_can = module(CANNON)?;
    let p_main = PreAbs::from_module(&embed(&unrolled(CANNON_A_MAIN, num_fire)?));
    let p_can = PreAbs::from_module(&module(CANNON_A)?);
    let s = tables::cannon();
    let u = cannon_universe();
    let cfg = AbsCfg::default().with_frames(u.clone()).with_res_f(u.clone()).with_res_m(res_m_any(u));
    let abs_main = abspec(&s, &p_main, &Resource::Unit, &cfg);
    let abs_can = abspec(&s, &p_can, &Resource::cannon("Ready"), &cfg);
    const FR: [&str; 2] = ["Main", "Cannon"];
    let e_main = to_abs(&FR, &p_main);
    let e_can = to_abs(&FR, &p_can);
    let checks = vec![
        check("Main", CheckKind::PerModule, stack(&[&i_main, &i_can]), stack(&[&abs_main, &i_can]), 80, 200),
        check("Cannon", CheckKind::PerModule, stack(&[&abs_main, &i_can]), stack(&[&abs_main, &abs_can]), 200, 200),
        check("erasure", CheckKind::SpecErasure, stack(&[&abs_main, &abs_can]), stack(&[&e_main, &e_can]), 200, 200),
        check("end-to-end", CheckKind::EndToEnd, stack(&[&i_main, &i_can]), stack(&[&e_main, &e_can]), 80, 200),
    ];
    Ok(ExampleBundle {
        name: if num_fire == 1 { "cannon".into() } else { format!("cannon{num_fire}") },
        summary: format!("a cannon that may fire once, fired {num_fire} time(s)"),
        impl_stack: stack(&[&i_main, &i_can]),
        abs_stack: stack(&[&e_main, &e_can]),
        preabs: vec![p_main, p_can],
        specs: s,
        sigmas: BTreeMap::from([("Main".into(), Resource::Unit), ("Cannon".into(), Resource::cannon("Ready"))]),
        friends: names(&FR),
        sims: if num_fire == 1 {
            vec![sim_setup("cannon.Main")?, sim_setup("cannon.Cannon")?]
        } else if num_fire == 2 {
            vec![sim_setup("cannon2.Main")?]
        } else {
            vec![]
        },
        main: "Main.main".into(),
        args: no_args(),
        enum_cfg: EnumConfig::default(),
        budget: 80,
        checks,
    })
}

pub fn stack_handles() -> Vec<AnyValue> {
    (0..4).map(|b| AnyValue::Addr(Address::heap(b, 0))).collect()
}

/// Fresh blocks `{0..3}`, stack handles at their bases, inputs from `{0,1,2}`.
pub fn mem_enum_cfg() -> EnumConfig {
    EnumConfig::default()
        .with_domain(FRESH_BLOCKS_KEY, (0..4).map(AnyValue::Int).collect())
        .with_domain(STACK_HANDLE_KEY, stack_handles())
        .with_responder("getval", (0..3).map(AnyValue::Int).collect())
        .with_responder("getint", (0..3).map(AnyValue::Int).collect())
}

fn auth_empty() -> Resource {
    Resource::full(Resource::Unit)
}

pub fn mem() -> Result<ExampleBundle, ExampleError> {
    let client = module(MEM_CLIENT)?;
    let i_mem = mem_impl();
    let p_mem = mem_preabs();
    let s = tables::mem(&Default::default());
    let cfg = AbsCfg::default().with_res_m(res_m_sync_or_free());
    let abs_mem = abspec(&s, &p_mem, &auth_empty(), &cfg);
    let e_mem = to_abs(&["Mem"], &p_mem);
    let checks = vec![
        check("Mem", CheckKind::PerModule, stack(&[&client, &i_mem]), stack(&[&client, &abs_mem]), 80, 160),
        check("end-to-end", CheckKind::EndToEnd, stack(&[&client, &i_mem]), stack(&[&client, &e_mem]), 80, 160),
    ];
    Ok(ExampleBundle {
        name: "mem".into(),
        summary: "the memory module against its points-to abspec".into(),
        impl_stack: stack(&[&client, &i_mem]),
        abs_stack: stack(&[&client, &e_mem]),
        preabs: vec![p_mem],
        specs: s,
        sigmas: BTreeMap::from([("Mem".into(), auth_empty())]),
        friends: names(&["Mem"]),
        sims: vec![],
        main: "Client.main".into(),
        args: no_args(),
        enum_cfg: mem_enum_cfg(),
        budget: 80,
        checks,
    })
}

fn pool_get(pool: &AnyValue, h: &AnyValue) -> Option<AnyValue> {
    pool.as_list()?.iter().find_map(|e| e.as_pair().filter(|(k, _)| *k == h).map(|(_, l)| l.clone()))
}

fn pool_set(pool: &AnyValue, h: &AnyValue, l: AnyValue) -> AnyValue {
    let mut out: Vec<AnyValue> =
        pool.as_list().unwrap_or_default().iter().filter(|e| e.as_pair().is_none_or(|(k, _)| k != h)).cloned().collect();
    out.push(AnyValue::pair(h.clone(), l));
    out.sort();
    AnyValue::List(out)
}

fn a1_new() -> FunDef {
    fundef(|x| {
        if x != AnyValue::List(vec![]) {
            return ub();
        }
        bind(choose(Domain::described("ptr", STACK_HANDLE_KEY)), |h| {
            bind(get_state(), move |pool| {
                let fresh = pool_get(&pool, &h).is_none();
                let next = pool_set(&pool, &h, AnyValue::List(vec![]));
                seq(guarantee(fresh), seq(put_state(next), ret(h.clone())))
            })
        })
    })
}

fn a1_push() -> FunDef {
    fundef(|x| {
        let Some([h, v]) = x.as_list() else { return ub() };
        if h.as_addr().is_none() || crate::values::downcast_val(v).is_none() {
            return ub();
        }
        let (h, v) = (h.clone(), v.clone());
        bind(get_state(), move |pool| {
            let Some(AnyValue::List(stk)) = pool_get(&pool, &h) else { return ub() };
            let mut l = vec![v.clone()];
            l.extend(stk);
            seq(put_state(pool_set(&pool, &h, AnyValue::List(l))), ret(AnyValue::Int(0)))
        })
    })
}

fn a1_pop() -> FunDef {
    fundef(|x| {
        let Some([h]) = x.as_list() else { return ub() };
        if h.as_addr().is_none() {
            return ub();
        }
        let h = h.clone();
        bind(get_state(), move |pool| {
            let Some(AnyValue::List(stk)) = pool_get(&pool, &h) else { return ub() };
            match stk.split_first() {
                None => ret(AnyValue::Int(0)),
                Some((v, rest)) => {
                    seq(put_state(pool_set(&pool, &h, AnyValue::List(rest.to_vec()))), ret(v.clone()))
                }
            }
        })
    })
}

/// `A¹_Stack`: a pool of abstract lists indexed by handle.
pub fn stack_a1() -> PreAbs {
    PreAbs::new("Stack", AnyValue::List(vec![]))
        .single("new", a1_new(), "h := choose(ptr); guarantee(pool h = None); pool[h := []]; h")
        .single("push", a1_push(), "stk := unopt?(pool h); pool[h := v :: stk]; 0")
        .single("pop", a1_pop(), "match unopt?(pool h) with [] => 0 | v :: stk' => pool[h := stk']; v")
}

/// `A²_Stack`: friends get NB, everyone else `A¹`.
pub fn stack_a2() -> PreAbs {
    let a1 = stack_a1();
    let mut p = PreAbs::new("Stack", a1.init.clone());
    for (f, pf) in a1.funs {
        p = p.split(f, nb_body(), "NB", pf.friend, pf.friend_sketch);
    }
    p
}

fn stack_bundle_base(
    name: &str,
    summary: &str,
    checks: Vec<RefineCheck>,
    preabs: Vec<PreAbs>,
    specs: SpecTable,
    sigma: Resource,
) -> Result<ExampleBundle, ExampleError> {
    let client = module(STACK_CLIENT)?;
    let i_stack = module(STACK)?;
    let e_stack = to_abs(&["Mem", "Stack"], &preabs[0]);
    Ok(ExampleBundle {
        name: name.into(),
        summary: summary.into(),
        impl_stack: stack(&[&client, &mem_impl(), &i_stack]),
        abs_stack: stack(&[&client, &mem_impl(), &e_stack]),
        preabs,
        specs,
        sigmas: BTreeMap::from([("Stack".into(), sigma), ("Mem".into(), auth_empty())]),
        friends: names(&["Mem", "Stack"]),
        sims: vec![],
        main: "Client.main".into(),
        args: no_args(),
        enum_cfg: mem_enum_cfg(),
        budget: 120,
        checks,
    })
}

pub fn stack1() -> Result<ExampleBundle, ExampleError> {
    let client = module(STACK_CLIENT)?;
    let i_stack = module(STACK)?;
    let i_mem = mem_impl();
    let a1 = stack_a1();
    let s = tables::stack1();
    let abs1 = abspec(&s, &a1, &Resource::Unit, &AbsCfg::default());
    let e1 = to_abs(&["Mem", "Stack"], &a1);
    let checks = vec![
        check(
            "Stack",
            CheckKind::PerModule,
            stack(&[&client, &i_mem, &i_stack]),
            stack(&[&client, &i_mem, &abs1]),
            120,
            240,
        ),
        check(
            "erasure",
            CheckKind::SpecErasure,
            stack(&[&client, &i_mem, &abs1]),
            stack(&[&client, &i_mem, &e1]),
            240,
            240,
        ),
    ];
    stack_bundle_base("stack1", "the pointer stack against its pool abstraction", checks, vec![a1], s, Resource::Unit)
}

/// `stack2a` (exact contents) or `stack2b` (bag properties), on top of the
/// erased `A¹`.
pub fn stack2(bag: bool) -> Result<ExampleBundle, ExampleError> {
    let client = module(STACK_CLIENT)?;
    let i_stack = module(STACK)?;
    let i_mem = mem_impl();
    let a1 = stack_a1();
    let a2 = stack_a2();
    let dom = tables::StackDomain::default();
    let s = if bag { tables::stack2b(&dom) } else { tables::stack2a(&dom) };
    let cfg = AbsCfg::default().with_res_m(res_m_sync());
    let abs2 = abspec(&s, &a2, &auth_empty(), &cfg);
    let e1 = to_abs(&["Mem", "Stack"], &a1);
    let e2 = to_abs(&["Mem", "Stack"], &a2);
    let checks = vec![
        check("Stack", CheckKind::PerModule, stack(&[&client, &e1]), stack(&[&client, &abs2]), 60, 120),
        check(
            "chain",
            CheckKind::Chain,
            stack(&[&client, &i_mem, &i_stack]),
            stack(&[&client, &i_mem, &abs2]),
            120,
            240,
        ),
        check("erasure", CheckKind::SpecErasure, stack(&[&client, &abs2]), stack(&[&client, &e2]), 120, 120),
    ];
    let (name, summary) = if bag {
        ("stack2b", "stack handles as bags constrained by a property")
    } else {
        ("stack2a", "stack handles owning their exact contents")
    };
    stack_bundle_base(name, summary, checks, vec![a2], s, auth_empty())
}

/// `IO`: `getint` and `putint` are observable. At most `max_inputs` nonzero
/// answers to `getint` are accepted.
pub fn io_module(max_inputs: Option<i64>) -> ModuleSem {
    ModuleSem::new("IO", AnyValue::Int(0))
        .with_fun(
            "getint",
            fundef(move |_| {
                bind(obs("getint", AnyValue::List(vec![])), move |v| {
                    bind(get_state(), move |n| {
                        let n = n.as_int().unwrap_or(0);
                        let nonzero = v != AnyValue::Int(0);
                        if nonzero && max_inputs.is_some_and(|k| n >= k) {
                            return nb();
                        }
                        seq(put_state(AnyValue::Int(n + i64::from(nonzero))), ret(v.clone()))
                    })
                })
            }),
        )
        .with_fun("putint", fundef(|x| seq_with(obs("putint", x), || ret(AnyValue::Int(0)))))
}

fn int_list(v: &AnyValue) -> Option<Vec<i64>> {
    v.as_list()?.iter().map(AnyValue::as_int).collect()
}

fn echo_echo() -> FunDef {
    fundef(|x| {
        if x != AnyValue::List(vec![]) {
            return ub();
        }
        bind(call("Echo.input", AnyValue::List(vec![])), |stk| {
            if int_list(&stk).is_none() {
                return nb();
            }
            call("Echo.output", stk)
        })
    })
}

fn echo_input() -> FunDef {
    fundef(|stk| {
        let Some(l) = int_list(&stk) else { return nb() };
        bind(call("IO.getint", AnyValue::List(vec![])), move |v| match v.as_int() {
            None => ub(),
            Some(0) => ret(AnyValue::ints(&l)),
            Some(n) => {
                let mut l2 = vec![n];
                l2.extend(&l);
                call("Echo.input", AnyValue::ints(&l2))
            }
        })
    })
}

fn echo_output() -> FunDef {
    fundef(|stk| {
        let Some(l) = int_list(&stk) else { return nb() };
        match l.split_first() {
            None => ret(AnyValue::Int(0)),
            Some((hd, tl)) => {
                let tl = AnyValue::ints(tl);
                seq(call("IO.putint", AnyValue::ints(&[*hd])), call("Echo.output", tl))
            }
        }
    })
}

/// `A_Echo` over abstract lists of integers.
pub fn echo_abs() -> PreAbs {
    PreAbs::new("Echo", AnyValue::Unit)
        .single("echo", echo_echo(), "stk :! list int64 := Echo.input([]); Echo.output(stk)")
        .split(
            "input",
            echo_input(),
            "v :? int64 := IO.getint(); if v == 0 then stk else Echo.input(v :: stk)",
            ub_body(),
            "UB",
        )
        .split(
            "output",
            echo_output(),
            "match stk with [] => 0 | hd :: tl => IO.putint(hd); Echo.output(tl)",
            ub_body(),
            "UB",
        )
}

/// Input bound for the refinement checks.
pub const ECHO_MAX_INPUTS: i64 = 2;
/// Input bound for the bundle's own stacks (runs and behaviors).
pub const ECHO_RUN_MAX_INPUTS: i64 = 3;

pub fn echo() -> Result<ExampleBundle, ExampleError> {
    let i_echo = module(ECHO)?;
    let i_stack = module(STACK)?;
    let i_mem = mem_impl();
    let io = io_module(Some(ECHO_MAX_INPUTS));
    let io3 = io_module(Some(ECHO_RUN_MAX_INPUTS));
    let a1 = stack_a1();
    let a_echo = echo_abs();
    const FR: [&str; 2] = ["Stack", "Echo"];
    let e1 = to_abs(&FR, &a1);
    let e_echo = to_abs(&FR, &a_echo);
    let checks = vec![
        check(
            "Stack",
            CheckKind::SpecErasure,
            stack(&[&i_mem, &i_stack, &i_echo, &io]),
            stack(&[&i_mem, &e1, &i_echo, &io]),
            400,
            400,
        ),
        check(
            "end-to-end",
            CheckKind::EndToEnd,
            stack(&[&i_mem, &i_stack, &i_echo, &io]),
            stack(&[&i_mem, &e1, &e_echo, &io]),
            400,
            400,
        ),
    ];
    let dom = tables::StackDomain::default();
    Ok(ExampleBundle {
        name: "echo".into(),
        summary: "reads integers until 0 and prints them back in reverse".into(),
        impl_stack: stack(&[&i_mem, &i_stack, &i_echo, &io3]),
        abs_stack: stack(&[&i_mem, &e1, &e_echo, &io3]),
        preabs: vec![a1, a_echo],
        specs: tables::stack1().union(&tables::echo(&dom)),
        sigmas: BTreeMap::from([
            ("Mem".into(), auth_empty()),
            ("Stack".into(), Resource::Unit),
            ("Echo".into(), Resource::Unit),
        ]),
        friends: names(&FR),
        sims: vec![],
        main: "Echo.echo".into(),
        args: no_args(),
        enum_cfg: mem_enum_cfg(),
        budget: 400,
        checks,
    })
}

/// Complete traces of `b` on `stack` whose `getint` answers are exactly
/// `script`.
pub fn scripted_runs(b: &ExampleBundle, stack: &ModStack, script: &[i64]) -> Result<Vec<Trace>, BehError> {
    let beh = b.behavior_of(stack, b.budget)?;
    Ok(beh
        .complete_traces()
        .into_iter()
        .filter(|t| {
            let ins: Vec<i64> =
                t.events.iter().filter(|e| e.fun == "getint").filter_map(|e| e.ret.as_int()).collect();
            ins == script
        })
        .collect())
}

/// `putint` arguments of a trace, in order.
pub fn putints(t: &Trace) -> Vec<i64> {
    t.events
        .iter()
        .filter(|e| e.fun == "putint")
        .filter_map(|e| e.args.as_list().and_then(|a| a.first()).and_then(AnyValue::as_int))
        .collect()
}

fn ad_add() -> FunDef {
    fundef(|x| {
        let Some([n, m]) = x.as_list() else { return ub() };
        let (Some(n), Some(m)) = (n.as_int(), m.as_int()) else { return ub() };
        seq(assume(n >= 0), ret(AnyValue::Int(n.wrapping_add(m))))
    })
}

pub fn repeat_args() -> Vec<AnyValue> {
    let mut out = vec![];
    for n in [0, 1, 2, -1] {
        for m in [0, 3] {
            out.push(AnyValue::ints(&[n, m]));
        }
    }
    out
}

pub fn repeat() -> Result<ExampleBundle, ExampleError> {
    let (i_rp, i_sc, i_ad) = (module(REPEAT_RP)?, module(REPEAT_SC)?, module(REPEAT_AD)?);
    let p_rp = PreAbs::new("RP", AnyValue::List(vec![])).split("repeat", nb_body(), "NB", ub_body(), "UB");
    let p_sc = PreAbs::new("SC", AnyValue::List(vec![])).split("succ", nb_body(), "NB", ub_body(), "UB");
    let p_ad = PreAbs::new("AD", AnyValue::Unit).single("add", ad_add(), "assume(n >= 0); n + m");
    let dom = tables::RepeatDomain::default();
    let s_sc = tables::sc(&dom.ms);
    let s = tables::ad().union(&tables::h_rp(&s_sc, &dom)).union(&s_sc);
    let cfg = AbsCfg::default();
    let abs_rp = abspec(&s, &p_rp, &Resource::Unit, &cfg);
    let abs_sc = abspec(&s, &p_sc, &Resource::Unit, &cfg);
    let abs_ad = abspec(&s, &p_ad, &Resource::Unit, &cfg);
    let all = ["AD", "RP", "SC"];
    let (e_rp, e_sc, e_ad) = (to_abs(&all, &p_rp), to_abs(&all, &p_sc), to_abs(&all, &p_ad));
    let checks = vec![
        check("RP", CheckKind::PerModule, stack(&[&i_ad, &i_rp, &i_sc]), stack(&[&i_ad, &abs_rp, &i_sc]), 80, 160),
        check("SC", CheckKind::PerModule, stack(&[&i_ad, &i_rp, &i_sc]), stack(&[&i_ad, &i_rp, &abs_sc]), 80, 160),
        check(
            "AD",
            CheckKind::PerModule,
            stack(&[&i_ad, &i_rp, &i_sc]),
            stack(&[&abs_ad, &abs_rp, &abs_sc]),
            80,
            160,
        ),
        check(
            "erasure",
            CheckKind::SpecErasure,
            stack(&[&abs_ad, &abs_rp, &abs_sc]),
            stack(&[&e_ad, &e_rp, &e_sc]),
            160,
            160,
        ),
        check("end-to-end", CheckKind::EndToEnd, stack(&[&i_ad, &i_rp, &i_sc]), stack(&[&e_ad, &e_rp, &e_sc]), 80, 160),
    ];
    Ok(ExampleBundle {
        name: "repeat".into(),
        summary: "a higher-order repeat whose spec is parameterized by the spec of its argument".into(),
        impl_stack: stack(&[&i_ad, &i_rp, &i_sc]),
        abs_stack: stack(&[&e_ad, &e_rp, &e_sc]),
        preabs: vec![p_ad, p_rp, p_sc],
        specs: s,
        sigmas: all.iter().map(|m| (m.to_string(), Resource::Unit)).collect(),
        friends: names(&all),
        sims: vec![],
        main: "AD.add".into(),
        args: repeat_args(),
        enum_cfg: EnumConfig::default(),
        budget: 80,
        checks,
    })
}

/// A shipped simulation: one module pair with its worlds and invariant, and
/// the closed run used to cross-check it against trace inclusion.
#[derive(Clone)]
pub struct SimSetup {
    pub name: String,
    pub cfg: SimConfig,
    pub imp: ModuleSem,
    pub abs: ModuleSem,
    pub argpairs: Vec<(AnyValue, AnyValue)>,
    pub probe: ProbeCtx,
    pub expect_sim: SimVerdict,
    pub expect_trace: bool,
}

impl SimSetup {
    pub fn run(&self) -> Result<AdequacyReport, SimError> {
        adequacy_probe(&self.cfg, &self.imp, &self.abs, &self.argpairs, &self.probe)
    }
}

pub const SIM_NAMES: [&str; 5] = ["hoare.F", "hoare.Main", "cannon.Main", "cannon2.Main", "cannon.Cannon"];

fn abs_state(res: &Resource, orig: AnyValue) -> AnyValue {
    AnyValue::pair(res.to_value(), orig)
}

fn powder(n: i64) -> AnyValue {
    AnyValue::List(vec![AnyValue::pair(AnyValue::str("powder"), AnyValue::Int(n))])
}

pub fn sim_setup(name: &str) -> Result<SimSetup, ExampleError> {
    let empty = AnyValue::List(vec![]);
    let unit_state = abs_state(&Resource::Unit, empty.clone());
    let probe = |ctx: Vec<&ModuleSem>, budget: usize| ProbeCtx {
        ctx: stack(&ctx),
        main: "Main.main".into(),
        args: no_args(),
        budget,
        abs_budget: 2 * budget,
    };
    let setup = match name {
        "hoare.F" | "hoare.Main" => {
            let s = tables::hoare();
            let cfg = AbsCfg::default();
            let (i_main, i_f) = (module(HOARE_MAIN)?, module(HOARE_F)?);
            let p_main = PreAbs::from_module(&module(HOARE_A_MAIN)?);
            let p_f = PreAbs::from_module(&module(HOARE_A_F)?);
            let base = SimConfig::trivial(empty.clone(), unit_state.clone());
            if name == "hoare.F" {
                SimSetup {
                    name: name.into(),
                    cfg: base,
                    imp: i_f,
                    abs: abspec(&s, &p_f, &Resource::Unit, &cfg),
                    argpairs: [36, 40].map(|x| (AnyValue::ints(&[x]), AnyValue::ints(&[x]))).to_vec(),
                    probe: probe(vec![&i_main], 60),
                    expect_sim: SimVerdict::Holds,
                    expect_trace: true,
                }
            } else {
                SimSetup {
                    name: name.into(),
                    cfg: base.with_rets(AnyValue::ints(&[441, 1, 0]).as_list().unwrap_or(&[]).to_vec()),
                    imp: i_main,
                    abs: abspec(&s, &p_main, &Resource::Unit, &cfg),
                    argpairs: vec![(empty.clone(), empty.clone())],
                    probe: ProbeCtx { main: "Main.main".into(), ..probe(vec![&i_f], 60) },
                    expect_sim: SimVerdict::Holds,
                    expect_trace: true,
                }
            }
        }
        "cannon.Main" | "cannon2.Main" | "cannon.Cannon" => {
            let s = tables::cannon();
            let u = cannon_universe();
            let cfg = AbsCfg::default().with_frames(u.clone()).with_res_f(u.clone()).with_res_m(res_m_any(u));
            let fires = if name == "cannon2.Main" { 2 } else { 1 };
            let i_main = embed(&unrolled(CANNON_MAIN, fires)?);
            let i_can = module(CANNON)?;
            let rets = vec![AnyValue::Int(0), AnyValue::Int(1)];
            if name == "cannon.Cannon" {
                let p_can = PreAbs::from_module(&module(CANNON_A)?);
                let loaded = (powder(1), abs_state(&Resource::cannon("Ready"), empty.clone()));
                let fired = (powder(0), abs_state(&Resource::cannon("Fired"), empty.clone()));
                let states = vec![loaded.clone(), fired.clone()];
                let inv_states = states.clone();
                let two_shots = embed(&unrolled(CANNON_MAIN, 2)?);
                SimSetup {
                    name: name.into(),
                    cfg: SimConfig::trivial(loaded.0.clone(), loaded.1.clone())
                        .with_invariant(states, std::sync::Arc::new(move |_, si, sa| {
                            inv_states.iter().any(|(a, b)| a == si && b == sa)
                        }))
                        .with_rets(rets),
                    imp: i_can,
                    abs: abspec(&s, &p_can, &Resource::cannon("Ready"), &cfg),
                    argpairs: vec![(empty.clone(), empty.clone())],
                    probe: probe(vec![&two_shots], 80),
                    expect_sim: SimVerdict::Holds,
                    expect_trace: true,
                }
            } else {
                let p_main = PreAbs::from_module(&embed(&unrolled(CANNON_A_MAIN, fires)?));
                SimSetup {
                    name: name.into(),
                    cfg: SimConfig::trivial(empty.clone(), unit_state.clone()).with_rets(rets),
                    imp: i_main,
                    abs: abspec(&s, &p_main, &Resource::Unit, &cfg),
                    argpairs: vec![(empty.clone(), empty.clone())],
                    probe: probe(vec![&i_can], 80),
                    expect_sim: if fires == 1 { SimVerdict::Holds } else { SimVerdict::Fails },
                    expect_trace: fires == 1,
                }
            }
        }
        _ => return Err(ExampleError::Unknown(name.to_string())),
    };
    Ok(setup)
}

/// The first non-partial terminal values of a behavior.
pub fn complete_terminals(b: &BehSet) -> Vec<Terminal> {
    b.complete_traces().into_iter().map(|t| t.terminal).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_parses() {
        for (p, src) in corpus() {
            assert!(parse(src).is_ok(), "{p}");
        }
    }

    #[test]
    fn every_bundle_builds() {
        for n in NAMES {
            let b = build(n).unwrap();
            assert_eq!(b.name, n);
            assert!(b.impl_stack.is_well_formed(), "{n}");
        }
        assert!(matches!(build("nope"), Err(ExampleError::Unknown(_))));
    }

    #[test]
    fn pool_updates() {
        let h = AnyValue::Int(1);
        let p = pool_set(&AnyValue::List(vec![]), &h, AnyValue::ints(&[2]));
        assert_eq!(pool_get(&p, &h), Some(AnyValue::ints(&[2])));
        let p = pool_set(&p, &h, AnyValue::ints(&[]));
        assert_eq!(p.as_list().map(|l| l.len()), Some(1));
    }

    #[test]
    fn hoare_checks_hold() {
        let b = hoare().unwrap();
        let r = check_all(&b).unwrap();
        assert!(r.holds(), "{}", r.to_json());
    }

    #[test]
    fn repeat_checks_hold() {
        let b = repeat().unwrap();
        let r = check_all(&b).unwrap();
        assert!(r.holds(), "{}", r.to_json());
    }
}
