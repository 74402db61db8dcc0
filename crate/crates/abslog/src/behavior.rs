//! Bounded trace sets: `Choose` is union, `Take` is intersection of
//! Partial-closed sets, `Take ∅` is every trace and `Choose ∅` none.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::kernel::{close, link, Closed, Domain, ModStack, Step};
use crate::values::AnyValue;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObsRecord {
    pub fun: String,
    pub args: AnyValue,
    pub ret: AnyValue,
}

impl ObsRecord {
    pub fn new(fun: impl Into<String>, args: AnyValue, ret: AnyValue) -> Self {
        ObsRecord { fun: fun.into(), args, ret }
    }

    pub fn to_json(&self) -> Json {
        json!({ "fn": self.fun, "args": self.args.to_json(), "ret": self.ret.to_json() })
    }
}

impl fmt::Display for ObsRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})={}", self.fun, self.args, self.ret)
    }
}

/// How a trace ends. `Undef` stands for every continuation of the events
/// (undefined behavior after them); `Diverge` is never produced by the
/// bounded enumerator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Terminal {
    Partial,
    Undef,
    Error,
    Diverge,
    Term(AnyValue),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub events: Vec<ObsRecord>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn new(events: Vec<ObsRecord>, terminal: Terminal) -> Self {
        Trace { events, terminal }
    }

    pub fn term(v: AnyValue) -> Self {
        Trace::new(vec![], Terminal::Term(v))
    }

    pub fn to_json(&self) -> Json {
        let events: Vec<Json> = self.events.iter().map(ObsRecord::to_json).collect();
        match &self.terminal {
            Terminal::Term(v) => {
                json!({ "events": events, "terminal": "term", "value": v.to_json() })
            }
            Terminal::Error => json!({ "events": events, "terminal": "error" }),
            Terminal::Partial => json!({ "events": events, "terminal": "partial" }),
            Terminal::Undef => json!({ "events": events, "terminal": "undef" }),
            Terminal::Diverge => json!({ "events": events, "terminal": "diverge" }),
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "] ")?;
        match &self.terminal {
            Terminal::Term(v) => write!(f, "Term {v}"),
            t => write!(f, "{t:?}"),
        }
    }
}

fn starts_with(xs: &[ObsRecord], p: &[ObsRecord]) -> bool {
    xs.len() >= p.len() && xs[..p.len()] == *p
}

fn lcp(a: &[ObsRecord], b: &[ObsRecord]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// A bounded behavior. Finite sets are stored without their implicit
/// Partial-closure and kept canonical (sorted, redundancy-free).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BehSet {
    Top,
    Finite(BTreeSet<Trace>),
}

impl BehSet {
    pub fn empty() -> BehSet {
        BehSet::Finite(BTreeSet::new())
    }

    pub fn single(t: Trace) -> BehSet {
        BehSet::from_traces([t])
    }

    pub fn from_traces(ts: impl IntoIterator<Item = Trace>) -> BehSet {
        normalize(ts.into_iter().collect())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, BehSet::Top)
    }

    pub fn traces(&self) -> Vec<Trace> {
        match self {
            BehSet::Top => vec![Trace::new(vec![], Terminal::Undef)],
            BehSet::Finite(ts) => ts.iter().cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BehSet::Top => 1,
            BehSet::Finite(ts) => ts.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, BehSet::Finite(ts) if ts.is_empty())
    }

    /// Traces that end in `Term`, `Error` or `Undef`.
    pub fn complete_traces(&self) -> Vec<Trace> {
        self.traces().into_iter().filter(|t| t.terminal != Terminal::Partial).collect()
    }

    pub fn union(self, other: BehSet) -> BehSet {
        match (self, other) {
            (BehSet::Top, _) | (_, BehSet::Top) => BehSet::Top,
            (BehSet::Finite(mut a), BehSet::Finite(b)) => {
                a.extend(b);
                normalize(a)
            }
        }
    }

    /// Intersection of the Partial-closures.
    pub fn intersect(self, other: BehSet) -> BehSet {
        let (a, b) = match (self, other) {
            (BehSet::Top, x) | (x, BehSet::Top) => return x,
            (BehSet::Finite(a), BehSet::Finite(b)) => (a, b),
        };
        let mut out = BTreeSet::new();
        meet_into(&a, &b, &mut out);
        meet_into(&b, &a, &mut out);
        let bv: Vec<&Trace> = b.iter().collect();
        for t in &a {
            let i = bv.partition_point(|x| *x < t);
            let mut best = None;
            for j in [i.checked_sub(1), Some(i)].into_iter().flatten() {
                if let Some(n) = bv.get(j) {
                    let l = lcp(&t.events, &n.events);
                    best = Some(best.map_or(l, |b: usize| b.max(l)));
                }
            }
            if let Some(l) = best {
                out.insert(Trace::new(t.events[..l].to_vec(), Terminal::Partial));
            }
        }
        normalize(out)
    }

    /// Prepends an observable event to every trace.
    pub fn prefixed(self, e: ObsRecord) -> BehSet {
        let ts = match self {
            BehSet::Top => return BehSet::single(Trace::new(vec![e], Terminal::Undef)),
            BehSet::Finite(ts) => ts,
        };
        if ts.is_empty() {
            return BehSet::empty();
        }
        BehSet::Finite(
            ts.into_iter()
                .map(|mut t| {
                    t.events.insert(0, e.clone());
                    t
                })
                .collect(),
        )
    }

    /// Membership in the Partial-closure.
    pub fn covers(&self, t: &Trace) -> bool {
        let ts = match self {
            BehSet::Top => return true,
            BehSet::Finite(ts) => ts,
        };
        for n in 0..=t.events.len() {
            if n == t.events.len() && t.terminal == Terminal::Undef {
                let u = Trace::new(t.events.clone(), Terminal::Undef);
                return ts.contains(&u);
            }
            let u = Trace::new(t.events[..n].to_vec(), Terminal::Undef);
            if ts.contains(&u) {
                return true;
            }
        }
        match t.terminal {
            Terminal::Partial if t.events.is_empty() => true,
            Terminal::Partial => {
                let probe = Trace::new(t.events.clone(), Terminal::Partial);
                ts.range(probe..).next().is_some_and(|n| starts_with(&n.events, &t.events))
            }
            _ => ts.contains(t),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            BehSet::Top => json!({ "top": true }),
            BehSet::Finite(ts) if ts.is_empty() => {
                json!({ "traces": [Trace::new(vec![], Terminal::Partial).to_json()] })
            }
            BehSet::Finite(ts) => {
                json!({ "traces": ts.iter().map(Trace::to_json).collect::<Vec<_>>() })
            }
        }
    }
}

/// Members of `a` inside the closure of `b`; an `Undef` member of `a`
/// contributes the members of `b` that extend it.
fn meet_into(a: &BTreeSet<Trace>, b: &BTreeSet<Trace>, out: &mut BTreeSet<Trace>) {
    let bset = BehSet::Finite(b.clone());
    for t in a {
        if bset.covers(t) {
            out.insert(t.clone());
        } else if t.terminal == Terminal::Undef {
            let probe = Trace::new(t.events.clone(), Terminal::Partial);
            for n in b.range(probe..) {
                if !starts_with(&n.events, &t.events) {
                    break;
                }
                out.insert(n.clone());
            }
        }
    }
}

fn normalize(ts: BTreeSet<Trace>) -> BehSet {
    let undefs: BTreeSet<Vec<ObsRecord>> = ts
        .iter()
        .filter(|t| t.terminal == Terminal::Undef)
        .map(|t| t.events.clone())
        .collect();
    if undefs.contains(&Vec::new()) {
        return BehSet::Top;
    }
    let under_undef = |t: &Trace| {
        let lim = if t.terminal == Terminal::Undef { t.events.len() } else { t.events.len() + 1 };
        (0..lim).any(|n| undefs.contains(&t.events[..n]))
    };
    let kept: Vec<Trace> = ts.into_iter().filter(|t| undefs.is_empty() || !under_undef(t)).collect();
    let mut out = BTreeSet::new();
    for (i, t) in kept.iter().enumerate() {
        if t.terminal == Terminal::Partial {
            if let Some(n) = kept.get(i + 1) {
                if starts_with(&n.events, &t.events) {
                    continue;
                }
            }
        }
        out.insert(t.clone());
    }
    BehSet::Finite(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BehError {
    #[error("enumeration config has no candidates for domain {name} (key {key})")]
    ConfigMissing { name: String, key: String },
    #[error("bad enumeration config: {0}")]
    BadConfig(String),
    #[error("trace set exceeded {0} traces")]
    TooLarge(usize),
}

/// Finite stand-ins for described domains and the environment's answers to
/// observable events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub domains: BTreeMap<String, Vec<AnyValue>>,
    pub responders: BTreeMap<String, Vec<AnyValue>>,
    pub default_response: Vec<AnyValue>,
    pub max_traces: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            domains: BTreeMap::new(),
            responders: BTreeMap::new(),
            default_response: vec![AnyValue::Int(0)],
            max_traces: 2_000_000,
        }
    }
}

pub const FRESH_BLOCKS_KEY: &str = "mem.fresh";

impl EnumConfig {
    pub fn with_domain(mut self, key: &str, vals: Vec<AnyValue>) -> Self {
        self.domains.insert(key.to_string(), vals);
        self
    }

    pub fn with_responder(mut self, f: &str, vals: Vec<AnyValue>) -> Self {
        self.responders.insert(f.to_string(), vals);
        self
    }

    pub fn resolve(&self, d: &Domain) -> Result<Vec<AnyValue>, BehError> {
        match d {
            Domain::Empty => Ok(vec![]),
            Domain::Finite(vs) => Ok(vs.clone()),
            Domain::Described { name, key } => self
                .domains
                .get(key)
                .cloned()
                .ok_or_else(|| BehError::ConfigMissing { name: name.clone(), key: key.clone() }),
        }
    }

    pub fn responses(&self, f: &str) -> &[AnyValue] {
        self.responders.get(f).map(Vec::as_slice).unwrap_or(&self.default_response)
    }

    /// Keys of the JSON form: `domains`, `responders` (maps to lists of tagged
    /// values), `default_response` (list) and `fresh_blocks` (list of block
    /// ids, shorthand for the `mem.fresh` domain).
    pub fn from_json(j: &Json) -> Result<EnumConfig, BehError> {
        let bad = |m: &str| BehError::BadConfig(m.to_string());
        let vals = |v: &Json| -> Result<Vec<AnyValue>, BehError> {
            v.as_array()
                .ok_or_else(|| bad("expected a list"))?
                .iter()
                .map(|x| AnyValue::from_json(x).map_err(|e| BehError::BadConfig(e.to_string())))
                .collect()
        };
        let mut cfg = EnumConfig::default();
        let obj = j.as_object().ok_or_else(|| bad("expected an object"))?;
        for (k, v) in obj {
            match k.as_str() {
                "domains" | "responders" => {
                    let m = v.as_object().ok_or_else(|| bad("expected an object"))?;
                    for (name, list) in m {
                        let target = if k == "domains" { &mut cfg.domains } else { &mut cfg.responders };
                        target.insert(name.clone(), vals(list)?);
                    }
                }
                "default_response" => cfg.default_response = vals(v)?,
                "fresh_blocks" => {
                    let blocks = v
                        .as_array()
                        .ok_or_else(|| bad("fresh_blocks"))?
                        .iter()
                        .map(|b| b.as_i64().map(AnyValue::Int).ok_or_else(|| bad("fresh_blocks")))
                        .collect::<Result<Vec<_>, _>>()?;
                    cfg.domains.insert(FRESH_BLOCKS_KEY.to_string(), blocks);
                }
                "max_traces" => {
                    cfg.max_traces = v.as_u64().ok_or_else(|| bad("max_traces"))? as usize
                }
                other => return Err(BehError::BadConfig(format!("unknown key {other}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<EnumConfig, BehError> {
        let text = std::fs::read_to_string(path).map_err(|e| BehError::BadConfig(e.to_string()))?;
        let j: Json = serde_json::from_str(&text).map_err(|e| BehError::BadConfig(e.to_string()))?;
        EnumConfig::from_json(&j)
    }

    /// Entries of `other` win.
    pub fn overlay(mut self, other: &EnumConfig) -> EnumConfig {
        self.domains.extend(other.domains.clone());
        self.responders.extend(other.responders.clone());
        if other.default_response != EnumConfig::default().default_response {
            self.default_response = other.default_response.clone();
        }
        self
    }
}

/// Runs `f` on a thread with a deep stack; enumeration recurses once per
/// choice point.
pub fn with_deep_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn enumeration thread")
            .join()
            .expect("enumeration thread panicked")
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumStats {
    pub truncations: usize,
    pub choice_points: usize,
}

pub fn enumerate(c: &Closed, budget: usize, cfg: &EnumConfig) -> Result<BehSet, BehError> {
    enumerate_with_stats(c, budget, cfg).map(|(b, _)| b)
}

pub fn enumerate_with_stats(
    c: &Closed,
    budget: usize,
    cfg: &EnumConfig,
) -> Result<(BehSet, EnumStats), BehError> {
    let c = c.clone();
    with_deep_stack(move || {
        let mut st = EnumStats::default();
        let b = explore(c, budget, cfg, &mut st)?;
        Ok((b, st))
    })
}

fn check_size(b: BehSet, cfg: &EnumConfig) -> Result<BehSet, BehError> {
    if b.len() > cfg.max_traces {
        return Err(BehError::TooLarge(cfg.max_traces));
    }
    Ok(b)
}

fn explore(mut c: Closed, mut fuel: usize, cfg: &EnumConfig, st: &mut EnumStats) -> Result<BehSet, BehError> {
    loop {
        match c.step() {
            Step::Done(v) => return Ok(BehSet::single(Trace::term(v))),
            Step::Fault(_) => return Ok(BehSet::single(Trace::new(vec![], Terminal::Error))),
            Step::Silent(n) => {
                if fuel == 0 {
                    st.truncations += 1;
                    return Ok(BehSet::single(Trace::new(vec![], Terminal::Partial)));
                }
                fuel -= 1;
                c = n;
            }
            Step::Choose(d, k) => {
                st.choice_points += 1;
                let mut acc = BehSet::empty();
                for v in cfg.resolve(&d)? {
                    acc = acc.union(explore(k.resume(v), fuel, cfg, st)?);
                    if acc.is_top() {
                        break;
                    }
                }
                return check_size(acc, cfg);
            }
            Step::Take(d, k) => {
                st.choice_points += 1;
                let mut acc = BehSet::Top;
                for v in cfg.resolve(&d)? {
                    let b = explore(k.resume(v), fuel, cfg, st)?;
                    acc = acc.intersect(b);
                }
                return check_size(acc, cfg);
            }
            Step::Obs(f, a, k) => {
                let mut acc = BehSet::empty();
                for r in cfg.responses(&f).to_vec() {
                    let b = explore(k.resume(r.clone()), fuel, cfg, st)?;
                    acc = acc.union(b.prefixed(ObsRecord::new(f.clone(), a.clone(), r)));
                }
                return check_size(acc, cfg);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violation(Trace),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Violation(t) => write!(f, "violation: {t}"),
        }
    }
}

/// A concrete member of the impl set outside the abs closure, if `t` is not
/// covered.
fn witness_for(t: &Trace, abs: &BehSet) -> Option<Trace> {
    if abs.covers(t) {
        return None;
    }
    if t.terminal != Terminal::Undef {
        return Some(t.clone());
    }
    let mut candidates = vec![Terminal::Error, Terminal::Term(AnyValue::Unit)];
    candidates.extend((0..8).map(|i| Terminal::Term(AnyValue::tagged("witness", AnyValue::Int(i)))));
    candidates
        .into_iter()
        .map(|term| Trace::new(t.events.clone(), term))
        .find(|w| !abs.covers(w))
}

pub fn included(imp: &BehSet, abs: &BehSet) -> Verdict {
    for t in imp.traces() {
        if let Some(w) = witness_for(&t, abs) {
            return Verdict::Violation(w);
        }
    }
    Verdict::Holds
}

#[derive(Clone, Debug)]
pub struct ArgReport {
    pub arg: AnyValue,
    pub verdict: Verdict,
    pub impl_traces: usize,
    pub abs_traces: usize,
    pub abs_truncated: bool,
}

#[derive(Clone, Debug)]
pub struct RefineReport {
    pub main: String,
    pub budget: usize,
    pub abs_budget: usize,
    pub args: Vec<ArgReport>,
}

impl RefineReport {
    pub fn verdict(&self) -> Verdict {
        self.args
            .iter()
            .find(|a| !a.verdict.holds())
            .map(|a| a.verdict.clone())
            .unwrap_or(Verdict::Holds)
    }

    pub fn holds(&self) -> bool {
        self.verdict().holds()
    }

    pub fn to_json(&self) -> Json {
        let verdict = self.verdict();
        let mut j = json!({
            "verdict": if verdict.holds() { "holds" } else { "violation" },
            "main": self.main,
            "budget": self.budget,
            "abs_budget": self.abs_budget,
            "args": self.args.iter().map(|a| json!({
                "arg": a.arg.to_json(),
                "verdict": if a.verdict.holds() { "holds" } else { "violation" },
                "impl_traces": a.impl_traces,
                "abs_traces": a.abs_traces,
                "abs_truncated": a.abs_truncated,
            })).collect::<Vec<_>>(),
        });
        if let Verdict::Violation(w) = verdict {
            j["witness"] = w.to_json();
        }
        j
    }
}

pub fn enumerate_stack(
    stack: &ModStack,
    main: &str,
    arg: AnyValue,
    budget: usize,
    cfg: &EnumConfig,
) -> Result<BehSet, BehError> {
    enumerate(&close(stack, main, arg), budget, cfg)
}

/// `Beh(ctx ∘ impl) ⊆ Beh(ctx ∘ abs)` for each argument. A violation is a
/// definite counterexample at this budget; `Holds` is bounded evidence.
#[allow(clippy::too_many_arguments)]
pub fn check_refine(
    imp: &ModStack,
    abs: &ModStack,
    ctx: &ModStack,
    main: &str,
    args: &[AnyValue],
    budget: usize,
    abs_budget: usize,
    cfg: &EnumConfig,
) -> Result<RefineReport, BehError> {
    let left = link(ctx, imp);
    let right = link(ctx, abs);
    let mut out = vec![];
    for arg in args {
        let bi = enumerate(&close(&left, main, arg.clone()), budget, cfg)?;
        let (ba, st) = enumerate_with_stats(&close(&right, main, arg.clone()), abs_budget, cfg)?;
        out.push(ArgReport {
            arg: arg.clone(),
            verdict: included(&bi, &ba),
            impl_traces: bi.len(),
            abs_traces: ba.len(),
            abs_truncated: st.truncations > 0,
        });
    }
    Ok(RefineReport { main: main.to_string(), budget, abs_budget, args: out })
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("choice script exhausted")]
    ScriptExhausted,
    #[error("unusable answer: {0}")]
    BadAnswer(String),
    #[error(transparent)]
    Config(#[from] BehError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiceKind {
    Choose,
    Take,
}

/// Resolves nondeterminism along a single execution.
pub trait Provider {
    fn pick(&mut self, kind: ChoiceKind, candidates: &[AnyValue]) -> Result<AnyValue, RunError>;
    fn respond(&mut self, f: &str, args: &AnyValue, default: &[AnyValue]) -> Result<AnyValue, RunError>;
}

/// A single execution path; `Choose ∅` ends in `Partial`, `Take ∅` in `Undef`.
pub fn run_path(
    c: &Closed,
    budget: usize,
    cfg: &EnumConfig,
    p: &mut dyn Provider,
    on_event: &mut dyn FnMut(&ObsRecord),
) -> Result<Trace, RunError> {
    let mut c = c.clone();
    let mut fuel = budget;
    let mut events = vec![];
    loop {
        match c.step() {
            Step::Done(v) => return Ok(Trace::new(events, Terminal::Term(v))),
            Step::Fault(_) => return Ok(Trace::new(events, Terminal::Error)),
            Step::Silent(n) => {
                if fuel == 0 {
                    return Ok(Trace::new(events, Terminal::Partial));
                }
                fuel -= 1;
                c = n;
            }
            Step::Choose(d, k) => {
                let vals = cfg.resolve(&d)?;
                if vals.is_empty() {
                    return Ok(Trace::new(events, Terminal::Partial));
                }
                let v = p.pick(ChoiceKind::Choose, &vals)?;
                c = k.resume(v);
            }
            Step::Take(d, k) => {
                let vals = cfg.resolve(&d)?;
                if vals.is_empty() {
                    return Ok(Trace::new(events, Terminal::Undef));
                }
                let v = p.pick(ChoiceKind::Take, &vals)?;
                c = k.resume(v);
            }
            Step::Obs(f, a, k) => {
                let r = p.respond(&f, &a, cfg.responses(&f))?;
                let rec = ObsRecord::new(f, a, r.clone());
                on_event(&rec);
                events.push(rec);
                c = k.resume(r);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::*;

    fn t(evs: &[i64], term: Terminal) -> Trace {
        Trace::new(
            evs.iter().map(|&i| ObsRecord::new("print", AnyValue::Int(i), AnyValue::Int(0))).collect(),
            term,
        )
    }

    fn beh_of(p: Prog, budget: usize) -> BehSet {
        let m = ModuleSem::new("M", AnyValue::Unit).with_fun("main", {
            let p = p.clone();
            fundef(move |_| p.clone())
        });
        enumerate_stack(&ModStack::single(m), "main", AnyValue::Unit, budget, &EnumConfig::default()).unwrap()
    }

    #[test]
    fn leaf_and_ub_nb() {
        assert_eq!(beh_of(ret(AnyValue::Int(5)), 4), BehSet::single(Trace::term(AnyValue::Int(5))));
        assert_eq!(beh_of(seq(assume(false), obs("print", AnyValue::Int(1))), 4), BehSet::Top);
        let nb_set = beh_of(seq(guarantee(false), obs("print", AnyValue::Int(1))), 4);
        assert_eq!(nb_set, BehSet::empty());
        assert!(nb_set.covers(&Trace::new(vec![], Terminal::Partial)));
        assert!(!nb_set.covers(&Trace::term(AnyValue::Unit)));
    }

    #[test]
    fn included_examples() {
        let s = BehSet::single(t(&[1], Terminal::Term(AnyValue::Int(1))));
        assert!(included(&s, &BehSet::Top).holds());
        let a = BehSet::single(Trace::term(AnyValue::Int(1)));
        assert!(included(&a, &a).holds());
        let err = BehSet::single(Trace::new(vec![], Terminal::Error));
        let part = BehSet::single(Trace::new(vec![], Terminal::Partial));
        assert_eq!(included(&err, &part), Verdict::Violation(Trace::new(vec![], Terminal::Error)));
    }

    #[test]
    fn partial_prefixes_are_covered() {
        let abs = BehSet::single(t(&[1, 2], Terminal::Term(AnyValue::Unit)));
        assert!(abs.covers(&t(&[1], Terminal::Partial)));
        assert!(abs.covers(&t(&[1, 2], Terminal::Partial)));
        assert!(!abs.covers(&t(&[2], Terminal::Partial)));
        assert!(!abs.covers(&t(&[1], Terminal::Term(AnyValue::Unit))));
    }

    #[test]
    fn undef_after_events() {
        let imp = BehSet::single(t(&[1, 1], Terminal::Undef));
        let abs = BehSet::single(t(&[1, 1], Terminal::Partial));
        assert_eq!(included(&imp, &abs), Verdict::Violation(t(&[1, 1], Terminal::Error)));
        let abs2 = BehSet::single(t(&[1], Terminal::Undef));
        assert!(included(&imp, &abs2).holds());
    }

    #[test]
    fn intersection_keeps_common_prefix() {
        let a = BehSet::single(t(&[1, 2], Terminal::Term(AnyValue::Unit)));
        let b = BehSet::single(t(&[1, 3], Terminal::Term(AnyValue::Unit)));
        let m = a.intersect(b);
        assert_eq!(m, BehSet::single(t(&[1], Terminal::Partial)));
        let u = BehSet::single(t(&[1], Terminal::Undef));
        let c = BehSet::from_traces([t(&[1, 5], Terminal::Error), t(&[2], Terminal::Error)]);
        assert_eq!(u.intersect(c), BehSet::from_traces([t(&[1, 5], Terminal::Error)]));
    }

    #[test]
    fn choose_is_union_take_is_intersection() {
        let d = Domain::finite([AnyValue::Int(1), AnyValue::Int(2)]);
        let body = |v: AnyValue| obs("print", v);
        let c = beh_of(bind(choose(d.clone()), body), 4);
        assert_eq!(
            c,
            BehSet::from_traces([t(&[1], Terminal::Term(AnyValue::Int(0))), t(&[2], Terminal::Term(AnyValue::Int(0)))])
        );
        let k = beh_of(bind(take(d), body), 4);
        assert_eq!(k, BehSet::single(Trace::new(vec![], Terminal::Partial)));
    }

    #[test]
    fn budget_truncates_to_partial() {
        let p = while_loop(AnyValue::Unit, |_| ret(AnyValue::Bool(true)), |s| seq(obs("print", AnyValue::Int(1)), ret(s)));
        let b = beh_of(p, 3);
        assert!(b.traces().iter().all(|t| t.terminal == Terminal::Partial));
    }

    #[test]
    fn trace_json_shape() {
        let tr = Trace::new(
            vec![ObsRecord::new("print", AnyValue::Int(1), AnyValue::Int(0))],
            Terminal::Term(AnyValue::Int(1)),
        );
        assert_eq!(
            tr.to_json().to_string(),
            r#"{"events":[{"args":{"int":1},"fn":"print","ret":{"int":0}}],"terminal":"term","value":{"int":1}}"#
        );
    }

    #[test]
    fn config_round_trip() {
        let j = serde_json::json!({
            "domains": {"k": [{"int": 1}]},
            "responders": {"getint": [{"int": 0}, {"int": 1}]},
            "fresh_blocks": [0, 1]
        });
        let cfg = EnumConfig::from_json(&j).unwrap();
        assert_eq!(cfg.domains["k"], vec![AnyValue::Int(1)]);
        assert_eq!(cfg.domains[FRESH_BLOCKS_KEY].len(), 2);
        assert_eq!(cfg.responses("getint").len(), 2);
        assert_eq!(cfg.responses("print"), &[AnyValue::Int(0)]);
        assert!(EnumConfig::from_json(&serde_json::json!({"bogus": 1})).is_err());
    }
}
