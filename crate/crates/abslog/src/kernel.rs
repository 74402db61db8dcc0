//! Resumable programs over dual-nondeterminism events, modules, linking and
//! the closed machine that dispatches calls between modules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::values::AnyValue;

/// Candidate answers for `Choose`/`Take`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Finite(Vec<AnyValue>),
    /// Resolved through the enumeration config (`key`) at check time.
    Described { name: String, key: String },
    Empty,
}

impl Domain {
    /// Duplicate-free finite domain, keeping first occurrences in order.
    pub fn finite(vals: impl IntoIterator<Item = AnyValue>) -> Domain {
        let mut seen = BTreeSet::new();
        let vs: Vec<AnyValue> = vals.into_iter().filter(|v| seen.insert(v.clone())).collect();
        if vs.is_empty() {
            Domain::Empty
        } else {
            Domain::Finite(vs)
        }
    }

    pub fn bools() -> Domain {
        Domain::Finite(vec![AnyValue::Bool(true), AnyValue::Bool(false)])
    }

    pub fn described(name: impl Into<String>, key: impl Into<String>) -> Domain {
        Domain::Described { name: name.into(), key: key.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Choose(Domain),
    Take(Domain),
    Obs(String, AnyValue),
    Call(String, AnyValue),
    Get,
    Put(AnyValue),
    GetCaller,
    Ipc,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Choose(d) => write!(f, "choose({})", DomainView(d)),
            Event::Take(d) => write!(f, "take({})", DomainView(d)),
            Event::Obs(n, a) => write!(f, "obs {n}({a})"),
            Event::Call(n, a) => write!(f, "call {n}({a})"),
            Event::Get => write!(f, "get"),
            Event::Put(v) => write!(f, "put({v})"),
            Event::GetCaller => write!(f, "get_caller"),
            Event::Ipc => write!(f, "ipc"),
        }
    }
}

struct DomainView<'a>(&'a Domain);

impl fmt::Display for DomainView<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Domain::Empty => write!(f, "∅"),
            Domain::Described { name, .. } => write!(f, "{name}"),
            Domain::Finite(vs) => write!(f, "{}", AnyValue::List(vs.clone())),
        }
    }
}

pub type Cont = Arc<dyn Fn(AnyValue) -> Prog + Send + Sync>;
pub type Thunk = Arc<dyn Fn() -> Prog + Send + Sync>;
pub type FunDef = Arc<dyn Fn(AnyValue) -> Prog + Send + Sync>;

/// A program tree: finished, waiting on an event answer, or about to take a
/// silent step. Continuations are unfolded on demand.
#[derive(Clone)]
pub enum Prog {
    Ret(AnyValue),
    Vis(Event, Cont),
    Tau(Thunk),
}

impl fmt::Debug for Prog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prog::Ret(v) => write!(f, "Ret({v})"),
            Prog::Vis(e, _) => write!(f, "Vis({e}, _)"),
            Prog::Tau(_) => write!(f, "Tau(_)"),
        }
    }
}

pub fn fundef<F>(f: F) -> FunDef
where
    F: Fn(AnyValue) -> Prog + Send + Sync + 'static,
{
    Arc::new(f)
}

pub fn ret(v: AnyValue) -> Prog {
    Prog::Ret(v)
}

pub fn skip() -> Prog {
    Prog::Ret(AnyValue::Unit)
}

pub fn trigger(e: Event) -> Prog {
    Prog::Vis(e, Arc::new(Prog::Ret))
}

pub fn tau<F>(next: F) -> Prog
where
    F: Fn() -> Prog + Send + Sync + 'static,
{
    Prog::Tau(Arc::new(next))
}

pub fn bind<F>(p: Prog, k: F) -> Prog
where
    F: Fn(AnyValue) -> Prog + Send + Sync + 'static,
{
    bind_cont(p, Arc::new(k))
}

pub fn bind_cont(p: Prog, k: Cont) -> Prog {
    match p {
        Prog::Ret(v) => k(v),
        Prog::Tau(t) => Prog::Tau(Arc::new(move || bind_cont(t(), k.clone()))),
        Prog::Vis(e, c) => Prog::Vis(e, Arc::new(move |a| bind_cont(c(a), k.clone()))),
    }
}

pub fn seq(p: Prog, q: Prog) -> Prog {
    bind(p, move |_| q.clone())
}

/// `p; f()` where the tail is built only once `p` returns.
pub fn seq_with<F>(p: Prog, f: F) -> Prog
where
    F: Fn() -> Prog + Send + Sync + 'static,
{
    bind(p, move |_| f())
}

pub fn ite(c: bool, p: Prog, q: Prog) -> Prog {
    if c {
        p
    } else {
        q
    }
}

/// Loop over an explicit state: `guard(s)` yields a `Bool`, `body(s)` the next
/// state. Each back-edge is a silent step.
pub fn while_loop<G, B>(init: AnyValue, guard: G, body: B) -> Prog
where
    G: Fn(&AnyValue) -> Prog + Send + Sync + 'static,
    B: Fn(AnyValue) -> Prog + Send + Sync + 'static,
{
    loop_from(init, Arc::new(guard), Arc::new(body))
}

type Guard = Arc<dyn Fn(&AnyValue) -> Prog + Send + Sync>;

fn loop_from(s: AnyValue, guard: Guard, body: Cont) -> Prog {
    let g = guard.clone();
    let st = s.clone();
    bind(g(&s), move |b| {
        if b == AnyValue::Bool(true) {
            let guard = guard.clone();
            let body2 = body.clone();
            bind(body(st.clone()), move |s2| {
                let guard = guard.clone();
                let body = body2.clone();
                tau(move || loop_from(s2.clone(), guard.clone(), body.clone()))
            })
        } else {
            ret(st.clone())
        }
    })
}

pub fn repeat_n(n: u64, body: Prog) -> Prog {
    if n == 0 {
        return skip();
    }
    let b = body.clone();
    seq_with(body, move || {
        let b = b.clone();
        tau(move || repeat_n(n - 1, b.clone()))
    })
}

pub fn choose(d: Domain) -> Prog {
    trigger(Event::Choose(d))
}

pub fn take(d: Domain) -> Prog {
    trigger(Event::Take(d))
}

pub fn obs(f: impl Into<String>, args: AnyValue) -> Prog {
    trigger(Event::Obs(f.into(), args))
}

pub fn call(f: impl Into<String>, args: AnyValue) -> Prog {
    trigger(Event::Call(f.into(), args))
}

pub fn get_state() -> Prog {
    trigger(Event::Get)
}

pub fn put_state(v: AnyValue) -> Prog {
    trigger(Event::Put(v))
}

pub fn get_caller() -> Prog {
    trigger(Event::GetCaller)
}

pub fn ipc() -> Prog {
    trigger(Event::Ipc)
}

/// Undefined behavior: take from the empty set.
pub fn ub() -> Prog {
    take(Domain::Empty)
}

/// No behavior: choose from the empty set.
pub fn nb() -> Prog {
    choose(Domain::Empty)
}

pub fn assume(p: bool) -> Prog {
    if p {
        skip()
    } else {
        ub()
    }
}

pub fn guarantee(p: bool) -> Prog {
    if p {
        skip()
    } else {
        nb()
    }
}

/// Per-event stateful rewriter. `None` leaves the event in place; `Some(q)`
/// replaces it by `q`, which must return `(answer, new_state)` as a pair.
pub type Handler = Arc<dyn Fn(&Event, &AnyValue) -> Option<Prog> + Send + Sync>;

/// Interprets the selected events of `p`, returning `(value, final_state)`.
pub fn interpret(p: Prog, h: Handler, s: AnyValue) -> Prog {
    match p {
        Prog::Ret(v) => Prog::Ret(AnyValue::pair(v, s)),
        Prog::Tau(t) => Prog::Tau(Arc::new(move || interpret(t(), h.clone(), s.clone()))),
        Prog::Vis(e, k) => match h(&e, &s) {
            Some(q) => bind(q, move |res| {
                let (a, s2) = res.into_pair().unwrap_or((AnyValue::Unit, AnyValue::Unit));
                interpret(k(a), h.clone(), s2)
            }),
            None => Prog::Vis(
                e,
                Arc::new(move |a| interpret(k(a), h.clone(), s.clone())),
            ),
        },
    }
}

/// Stateless variant: handler results are answers.
pub fn interpret_plain<F>(p: Prog, h: F) -> Prog
where
    F: Fn(&Event) -> Option<Prog> + Send + Sync + 'static,
{
    let h = Arc::new(h);
    let handler: Handler = Arc::new(move |e, s| {
        let s = s.clone();
        h(e).map(|q| bind(q, move |a| ret(AnyValue::pair(a, s.clone()))))
    });
    bind(interpret(p, handler, AnyValue::Unit), |r| {
        ret(r.into_pair().map(|(v, _)| v).unwrap_or(AnyValue::Unit))
    })
}

/// `(name, init, funs)`.
#[derive(Clone)]
pub struct ModuleSem {
    pub name: String,
    pub init: AnyValue,
    pub funs: BTreeMap<String, FunDef>,
}

impl ModuleSem {
    pub fn new(name: impl Into<String>, init: AnyValue) -> Self {
        ModuleSem { name: name.into(), init, funs: BTreeMap::new() }
    }

    pub fn with_fun(mut self, f: impl Into<String>, body: FunDef) -> Self {
        self.funs.insert(f.into(), body);
        self
    }

    pub fn qualified(&self, f: &str) -> String {
        format!("{}.{}", self.name, f)
    }
}

impl fmt::Debug for ModuleSem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModuleSem")
            .field("name", &self.name)
            .field("init", &self.init)
            .field("funs", &self.funs.keys().collect::<Vec<_>>())
            .finish()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ModStack {
    pub mods: Vec<Arc<ModuleSem>>,
    pub warnings: Vec<String>,
}

impl ModStack {
    pub fn of(mods: Vec<ModuleSem>) -> ModStack {
        let stack = ModStack { mods: mods.into_iter().map(Arc::new).collect(), warnings: vec![] };
        stack.rescanned()
    }

    pub fn single(m: ModuleSem) -> ModStack {
        ModStack::of(vec![m])
    }

    fn rescanned(mut self) -> ModStack {
        let mut seen = BTreeSet::new();
        let mut dups = BTreeSet::new();
        for m in &self.mods {
            for f in m.funs.keys() {
                if !seen.insert(f.clone()) {
                    dups.insert(f.clone());
                }
            }
        }
        self.warnings = dups.into_iter().map(|f| format!("duplicate({f})")).collect();
        self
    }

    pub fn is_well_formed(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.mods.iter().map(|m| m.name.clone()).collect()
    }

    /// Resolves `M.f` exactly, or a bare `f` to the first module defining it.
    pub fn resolve(&self, fname: &str) -> Option<(usize, FunDef)> {
        if let Some((m, f)) = fname.split_once('.') {
            self.mods
                .iter()
                .enumerate()
                .find(|(_, md)| md.name == m)
                .and_then(|(i, md)| md.funs.get(f).map(|d| (i, d.clone())))
        } else {
            self.mods
                .iter()
                .enumerate()
                .find_map(|(i, md)| md.funs.get(fname).map(|d| (i, d.clone())))
        }
    }
}

pub fn link(a: &ModStack, b: &ModStack) -> ModStack {
    let mods = a.mods.iter().chain(b.mods.iter()).cloned().collect();
    ModStack { mods, warnings: vec![] }.rescanned()
}

/// The caller name reported for the initial invocation of `main`.
pub const ENV_CALLER: &str = "";

#[derive(Clone)]
struct Frame {
    module: usize,
    caller: String,
    k: Cont,
}

/// A closed configuration: every module's local state, the call stack and
/// the running program.
#[derive(Clone)]
pub struct Closed {
    stack: Arc<ModStack>,
    states: Vec<AnyValue>,
    frames: Vec<Frame>,
    cur: usize,
    caller: String,
    prog: Prog,
    fault: Option<String>,
}

pub enum Step {
    Done(AnyValue),
    Fault(String),
    Silent(Closed),
    Choose(Domain, Suspended),
    Take(Domain, Suspended),
    Obs(String, AnyValue, Suspended),
}

/// A machine paused on an answer-taking event.
#[derive(Clone)]
pub struct Suspended {
    machine: Closed,
    k: Cont,
}

impl Suspended {
    pub fn resume(&self, a: AnyValue) -> Closed {
        let mut m = self.machine.clone();
        m.prog = (self.k)(a);
        m
    }
}

pub fn close(stack: &ModStack, main: &str, arg: AnyValue) -> Closed {
    let states = stack.mods.iter().map(|m| m.init.clone()).collect();
    let (cur, prog, fault) = match stack.resolve(main) {
        Some((i, f)) => (i, f(arg), None),
        None => (0, skip(), Some(format!("unresolved function {main}"))),
    };
    Closed {
        stack: Arc::new(stack.clone()),
        states,
        frames: vec![],
        cur,
        caller: ENV_CALLER.to_string(),
        prog,
        fault,
    }
}

impl Closed {
    pub fn module_states(&self) -> &[AnyValue] {
        &self.states
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// Advances through state and caller queries until something the
    /// enumerator must see happens.
    pub fn step(mut self) -> Step {
        if let Some(msg) = self.fault.take() {
            return Step::Fault(msg);
        }
        loop {
            let prog = std::mem::replace(&mut self.prog, skip());
            match prog {
                Prog::Ret(v) => {
                    let Some(fr) = self.frames.pop() else {
                        return Step::Done(v);
                    };
                    self.cur = fr.module;
                    self.caller = fr.caller;
                    self.prog = (fr.k)(v);
                    return Step::Silent(self);
                }
                Prog::Tau(t) => {
                    self.prog = t();
                    return Step::Silent(self);
                }
                Prog::Vis(e, k) => match e {
                    Event::Get => self.prog = k(self.states[self.cur].clone()),
                    Event::Put(v) => {
                        self.states[self.cur] = v;
                        self.prog = k(AnyValue::Unit);
                    }
                    Event::GetCaller => self.prog = k(AnyValue::Str(self.caller.clone())),
                    Event::Ipc => self.prog = k(AnyValue::Unit),
                    Event::Call(f, args) => {
                        let Some((j, body)) = self.stack.resolve(&f) else {
                            return Step::Fault(format!("unresolved function {f}"));
                        };
                        let me = self.stack.mods[self.cur].name.clone();
                        self.frames.push(Frame {
                            module: self.cur,
                            caller: std::mem::replace(&mut self.caller, me),
                            k,
                        });
                        self.cur = j;
                        self.prog = body(args);
                        return Step::Silent(self);
                    }
                    Event::Choose(d) => return Step::Choose(d, Suspended { machine: self, k }),
                    Event::Take(d) => return Step::Take(d, Suspended { machine: self, k }),
                    Event::Obs(f, a) => return Step::Obs(f, a, Suspended { machine: self, k }),
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_det(mut c: Closed) -> Result<AnyValue, String> {
        for _ in 0..10_000 {
            match c.step() {
                Step::Done(v) => return Ok(v),
                Step::Fault(m) => return Err(m),
                Step::Silent(n) => c = n,
                Step::Choose(Domain::Finite(vs), s) | Step::Take(Domain::Finite(vs), s) => {
                    c = s.resume(vs[0].clone())
                }
                Step::Obs(_, _, s) => c = s.resume(AnyValue::Int(0)),
                _ => return Err("stuck".into()),
            }
        }
        Err("fuel".into())
    }

    #[test]
    fn link_appends_and_flags_duplicates() {
        let m1 = ModuleSem::new("M1", AnyValue::Unit).with_fun("f", fundef(|_| skip()));
        let m2 = ModuleSem::new("M2", AnyValue::Unit).with_fun("f", fundef(|_| skip()));
        let a = ModStack::single(m1);
        let b = ModStack::single(m2);
        let l = link(&a, &b);
        assert_eq!(l.names(), vec!["M1", "M2"]);
        assert_eq!(l.warnings, vec!["duplicate(f)".to_string()]);
        let e = link(&ModStack::default(), &a);
        assert_eq!(e.names(), vec!["M1"]);
        assert!(e.is_well_formed());
    }

    #[test]
    fn assume_guarantee_shapes() {
        assert!(matches!(assume(true), Prog::Ret(AnyValue::Unit)));
        assert!(matches!(assume(false), Prog::Vis(Event::Take(Domain::Empty), _)));
        assert!(matches!(guarantee(false), Prog::Vis(Event::Choose(Domain::Empty), _)));
    }

    #[test]
    fn get_caller_reports_dynamic_caller() {
        let m = ModuleSem::new("M", AnyValue::Unit)
            .with_fun("main", fundef(|_| call("N.f", AnyValue::Unit)));
        let n = ModuleSem::new("N", AnyValue::Unit).with_fun("f", fundef(|_| get_caller()));
        let c = close(&ModStack::of(vec![m, n]), "main", AnyValue::Unit);
        assert_eq!(run_det(c), Ok(AnyValue::str("M")));
    }

    #[test]
    fn missing_callee_faults() {
        let m = ModuleSem::new("M", AnyValue::Unit)
            .with_fun("main", fundef(|_| call("g", AnyValue::Unit)));
        let c = close(&ModStack::single(m), "main", AnyValue::Unit);
        assert!(run_det(c).is_err());
    }

    #[test]
    fn state_is_module_local() {
        let m = ModuleSem::new("M", AnyValue::Int(1)).with_fun(
            "main",
            fundef(|_| {
                seq_with(call("N.bump", AnyValue::Unit), get_state)
            }),
        );
        let n = ModuleSem::new("N", AnyValue::Int(10)).with_fun(
            "bump",
            fundef(|_| bind(get_state(), |s| put_state(AnyValue::Int(s.as_int().unwrap() + 1)))),
        );
        let c = close(&ModStack::of(vec![m, n]), "main", AnyValue::Unit);
        assert_eq!(run_det(c), Ok(AnyValue::Int(1)));
    }

    #[test]
    fn interpret_threads_state_and_skips_ipc() {
        let p = seq_with(ipc(), || {
            seq_with(put_state(AnyValue::Int(7)), get_state)
        });
        let h: Handler = Arc::new(|e, s| match e {
            Event::Ipc => Some(ret(AnyValue::pair(AnyValue::Unit, s.clone()))),
            Event::Put(v) => Some(ret(AnyValue::pair(AnyValue::Unit, v.clone()))),
            Event::Get => Some(ret(AnyValue::pair(s.clone(), s.clone()))),
            _ => None,
        });
        let out = interpret(p, h, AnyValue::Unit);
        match out {
            Prog::Ret(v) => assert_eq!(v, AnyValue::pair(AnyValue::Int(7), AnyValue::Int(7))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repeat_and_loop() {
        let m = ModuleSem::new("M", AnyValue::Int(0)).with_fun(
            "main",
            fundef(|_| {
                let bump = bind(get_state(), |s| put_state(AnyValue::Int(s.as_int().unwrap() + 1)));
                seq_with(repeat_n(3, bump), || {
                    bind(
                        while_loop(
                            AnyValue::Int(0),
                            |s| ret(AnyValue::Bool(s.as_int().unwrap() < 4)),
                            |s| ret(AnyValue::Int(s.as_int().unwrap() + 1)),
                        ),
                        |i| bind(get_state(), move |s| ret(AnyValue::pair(i.clone(), s))),
                    )
                })
            }),
        );
        let c = close(&ModStack::single(m), "main", AnyValue::Unit);
        assert_eq!(run_det(c), Ok(AnyValue::pair(AnyValue::Int(4), AnyValue::Int(3))));
    }
}
