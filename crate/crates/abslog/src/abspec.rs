//! Operational translations: abspec modules built from pre-abstractions and
//! spec tables, spec erasure into plain abstractions, and safe modules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::kernel::{
    bind, call, choose, fundef, get_caller, get_state, interpret, nb, put_state, ret, seq_with, take, tau, ub,
    while_loop, Domain, Event, FunDef, Handler, ModuleSem, Prog,
};
use crate::pcm::Resource;
use crate::speclang::{default_spec, Spec, SpecTable};
use crate::values::{measure_lt, AnyValue, Measure, Ordinal};

/// One function of a pre-abstraction. `context: None` means the function has
/// a single definition and no friend/context split.
#[derive(Clone)]
pub struct PreFun {
    pub friend: FunDef,
    pub context: Option<FunDef>,
    pub friend_sketch: String,
    pub context_sketch: Option<String>,
}

#[derive(Clone)]
pub struct PreAbs {
    pub name: String,
    pub init: AnyValue,
    pub funs: BTreeMap<String, PreFun>,
}

impl PreAbs {
    pub fn new(name: impl Into<String>, init: AnyValue) -> PreAbs {
        PreAbs { name: name.into(), init, funs: BTreeMap::new() }
    }

    pub fn single(mut self, f: impl Into<String>, body: FunDef, sketch: impl Into<String>) -> PreAbs {
        self.funs.insert(
            f.into(),
            PreFun { friend: body, context: None, friend_sketch: sketch.into(), context_sketch: None },
        );
        self
    }

    pub fn split(
        mut self,
        f: impl Into<String>,
        friend: FunDef,
        friend_sketch: impl Into<String>,
        context: FunDef,
        context_sketch: impl Into<String>,
    ) -> PreAbs {
        self.funs.insert(
            f.into(),
            PreFun {
                friend,
                context: Some(context),
                friend_sketch: friend_sketch.into(),
                context_sketch: Some(context_sketch.into()),
            },
        );
        self
    }

    /// Every function of `m` as a single definition.
    pub fn from_module(m: &ModuleSem) -> PreAbs {
        let mut p = PreAbs::new(m.name.clone(), m.init.clone());
        for (f, body) in &m.funs {
            p = p.single(f.clone(), body.clone(), "<module body>");
        }
        p
    }

    pub fn qualified(&self, f: &str) -> String {
        format!("{}.{}", self.name, f)
    }
}

pub fn nb_body() -> FunDef {
    fundef(|_| nb())
}

pub fn ub_body() -> FunDef {
    fundef(|_| ub())
}

/// `(current res_m, res handed over, frame) ↦ candidate new res_m`.
pub type ResMFn = Arc<dyn Fn(&Resource, &Resource, &Resource) -> Vec<Resource> + Send + Sync>;

/// Finite stand-ins for the unrestricted choices of the translation.
#[derive(Clone)]
pub struct AbsCfg {
    /// Frames an ASSUME may take.
    pub frames: Vec<Resource>,
    /// Resources a caller may keep across a call.
    pub res_f: Vec<Resource>,
    pub res_m: ResMFn,
    /// Pure calls an IPC may make.
    pub ipc_menu: Vec<(String, AnyValue)>,
    /// Upper bound on the number of calls in one IPC.
    pub ipc_rounds: u64,
}

impl Default for AbsCfg {
    fn default() -> Self {
        AbsCfg { frames: vec![Resource::Unit], res_f: vec![Resource::Unit], res_m: res_m_keep(), ipc_menu: vec![], ipc_rounds: 0 }
    }
}

impl AbsCfg {
    pub fn with_frames(mut self, frames: Vec<Resource>) -> Self {
        self.frames = frames;
        self
    }

    pub fn with_res_f(mut self, res_f: Vec<Resource>) -> Self {
        self.res_f = res_f;
        self
    }

    pub fn with_res_m(mut self, f: ResMFn) -> Self {
        self.res_m = f;
        self
    }

    pub fn with_ipc(mut self, menu: Vec<(String, AnyValue)>, rounds: u64) -> Self {
        self.ipc_menu = menu;
        self.ipc_rounds = rounds;
        self
    }
}

/// Module resource never changes.
pub fn res_m_keep() -> ResMFn {
    Arc::new(|cur, _, _| vec![cur.clone()])
}

/// Any element of a fixed universe.
pub fn res_m_any(universe: Vec<Resource>) -> ResMFn {
    Arc::new(move |_, _, _| universe.clone())
}

/// Writes the fragment cells of `res` into the authoritative part of `cur`.
pub fn auth_sync(cur: &Resource, res: &Resource) -> Option<Resource> {
    let Resource::Auth { full: Some(full), frag } = cur else { return None };
    let mut m = auth_cells(full)?;
    if let Resource::Auth { full: None, frag: rf } = res {
        if let Resource::Map(cells) = rf.as_ref() {
            for (k, v) in cells {
                m.insert(k.clone(), v.clone());
            }
        }
    }
    Some(Resource::auth(Some(Resource::map(m)), frag.as_ref().clone()))
}

fn auth_cells(full: &Resource) -> Option<BTreeMap<AnyValue, Resource>> {
    match full {
        Resource::Map(m) => Some(m.clone()),
        Resource::Unit => Some(BTreeMap::new()),
        _ => None,
    }
}

/// Removes the key `k` from the authoritative part of `cur`.
pub fn auth_delete(cur: &Resource, k: &AnyValue) -> Option<Resource> {
    let Resource::Auth { full: Some(full), frag } = cur else { return None };
    let mut m = auth_cells(full)?;
    m.remove(k)?;
    Some(Resource::auth(Some(Resource::map(m)), frag.as_ref().clone()))
}

/// Keep, or synchronize with the handed-over fragment.
pub fn res_m_sync() -> ResMFn {
    Arc::new(|cur, res, _| {
        let mut out = vec![cur.clone()];
        out.extend(auth_sync(cur, res));
        out
    })
}

/// Keep, synchronize, or drop one cell that is absent from `res` and the
/// frame (the cell was freed).
pub fn res_m_sync_or_free() -> ResMFn {
    Arc::new(|cur, res, frm| {
        let mut out = vec![cur.clone()];
        out.extend(auth_sync(cur, res));
        if let Resource::Auth { full: Some(full), .. } = cur {
            if let Resource::Map(m) = full.as_ref() {
                for k in m.keys() {
                    if !frag_has(res, k) && !frag_has(frm, k) {
                        out.extend(auth_delete(cur, k));
                    }
                }
            }
        }
        out
    })
}

fn frag_has(r: &Resource, k: &AnyValue) -> bool {
    match r {
        Resource::Auth { frag, .. } => matches!(frag.as_ref(), Resource::Map(m) if m.contains_key(k)),
        _ => false,
    }
}

pub fn measure_to_value(d: &Measure) -> AnyValue {
    match d {
        None => AnyValue::none(),
        Some(o) => AnyValue::some(AnyValue::Ord(*o)),
    }
}

pub fn measure_from_value(v: &AnyValue) -> Measure {
    match v {
        AnyValue::Option(Some(b)) => match b.as_ref() {
            AnyValue::Ord(o) => Some(*o),
            _ => None,
        },
        _ => None,
    }
}

fn res_of(v: &AnyValue) -> Resource {
    Resource::from_value(v).unwrap_or(Resource::Bad)
}

fn split_state(st: &AnyValue) -> (Resource, AnyValue) {
    match st.as_pair() {
        Some((r, o)) => (res_of(r), o.clone()),
        None => (Resource::Bad, AnyValue::Unit),
    }
}

fn valid_sum(rs: &[&Resource]) -> bool {
    Resource::sum(rs.iter().copied()).valid()
}

fn field(v: &AnyValue, i: usize) -> AnyValue {
    v.as_list().and_then(|l| l.get(i).cloned()).unwrap_or(AnyValue::Unit)
}

struct Ctx {
    table: SpecTable,
    cfg: AbsCfg,
}

/// Entry ASSUME: takes `(a, xa, d, frm)` over the witnesses that satisfy the
/// precondition and are valid with the module resource.
fn assume_entry(ctx: Arc<Ctx>, spec: Arc<Spec>, x: AnyValue) -> Prog {
    bind(get_state(), move |st| {
        let (res_m, _) = split_state(&st);
        let mut cands = BTreeSet::new();
        for a in spec.quantifiers_for(&x) {
            for (xa, d, res) in (spec.entry)(&a, &x) {
                if !spec.pre_holds(&a, &x, &xa, &d, &res) {
                    continue;
                }
                for frm in &ctx.cfg.frames {
                    if valid_sum(&[&res, &res_m, frm]) {
                        cands.insert(AnyValue::List(vec![a.clone(), xa.clone(), measure_to_value(&d), frm.to_value()]));
                    }
                }
            }
        }
        take(Domain::finite(cands))
    })
}

/// Post-call ASSUME: takes `(ra, frm)`.
fn assume_ret(ctx: Arc<Ctx>, spec: Arc<Spec>, a: AnyValue, r: AnyValue, res_f: Resource) -> Prog {
    bind(get_state(), move |st| {
        let (res_m, _) = split_state(&st);
        let mut cands = BTreeSet::new();
        for (ra, res) in (spec.ret)(&a, &r) {
            if !spec.post_holds(&a, &r, &ra, &res) {
                continue;
            }
            for frm in &ctx.cfg.frames {
                if valid_sum(&[&res, &res_f, &res_m, frm]) {
                    cands.insert(AnyValue::pair(ra.clone(), frm.to_value()));
                }
            }
        }
        take(Domain::finite(cands))
    })
}

/// Exit GUARANTEE: chooses `(r, res_m')`, installs `res_m'` and returns `r`.
fn guarantee_exit(ctx: Arc<Ctx>, spec: Arc<Spec>, a: AnyValue, ra: AnyValue, frm: Resource) -> Prog {
    bind(get_state(), move |st| {
        let (cur, orig) = split_state(&st);
        let mut cands = BTreeSet::new();
        for (r, res) in (spec.exit)(&a, &ra) {
            if !spec.post_holds(&a, &r, &ra, &res) {
                continue;
            }
            for rm in (ctx.cfg.res_m)(&cur, &res, &frm) {
                if valid_sum(&[&res, &rm, &frm]) {
                    cands.insert(AnyValue::pair(r.clone(), rm.to_value()));
                }
            }
        }
        let orig = orig.clone();
        bind(choose(Domain::finite(cands)), move |c| {
            let (r, rm) = c.into_pair().unwrap_or((AnyValue::Unit, AnyValue::Unit));
            seq_with(put_state(AnyValue::pair(rm, orig.clone())), move || ret(r.clone()))
        })
    })
}

/// `abspecCall`: returns `(ra, frm')`.
fn abspec_call(ctx: Arc<Ctx>, d: Measure, frm: Resource, fname: String, xa: AnyValue) -> Prog {
    let spec = Arc::new(ctx.table.get(&fname));
    bind(get_state(), move |st| {
        let (cur, orig) = split_state(&st);
        let mut cands = BTreeSet::new();
        for a in spec.quantifiers_for_abs(&xa) {
            for (x, d2, res) in (spec.call)(&a, &xa) {
                if !measure_lt(&d2, &d) || !spec.pre_holds(&a, &x, &xa, &d2, &res) {
                    continue;
                }
                for rf in &ctx.cfg.res_f {
                    for rm in (ctx.cfg.res_m)(&cur, &res, &frm) {
                        if valid_sum(&[&res, rf, &rm, &frm]) {
                            cands.insert(AnyValue::List(vec![a.clone(), x.clone(), rf.to_value(), rm.to_value()]));
                        }
                    }
                }
            }
        }
        let (ctx, spec, fname, orig) = (ctx.clone(), spec.clone(), fname.clone(), orig.clone());
        bind(choose(Domain::finite(cands)), move |c| {
            let (a, x, rf) = (field(&c, 0), field(&c, 1), res_of(&field(&c, 2)));
            let rm = field(&c, 3);
            let (ctx, spec, fname) = (ctx.clone(), spec.clone(), fname.clone());
            seq_with(put_state(AnyValue::pair(rm, orig.clone())), move || {
                let (ctx, spec, a, rf) = (ctx.clone(), spec.clone(), a.clone(), rf.clone());
                bind(call(fname.clone(), x.clone()), move |r| {
                    assume_ret(ctx.clone(), spec.clone(), a.clone(), r, rf.clone())
                })
            })
        })
    })
}

/// `abspecIPC`: at most `k` more pure calls; returns the new frame.
fn abspec_ipc(ctx: Arc<Ctx>, d: Measure, frm: Resource, k: u64) -> Prog {
    if k == 0 || ctx.cfg.ipc_menu.is_empty() {
        return ret(frm.to_value());
    }
    bind(choose(Domain::bools()), move |go| {
        if go != AnyValue::Bool(true) {
            return ret(frm.to_value());
        }
        let menu = Domain::finite(ctx.cfg.ipc_menu.iter().map(|(f, xa)| AnyValue::pair(AnyValue::str(f), xa.clone())));
        let ctx = ctx.clone();
        let frm = frm.clone();
        bind(choose(menu), move |fx| {
            let (f, xa) = fx.into_pair().unwrap_or((AnyValue::Unit, AnyValue::Unit));
            let fname = f.as_str().unwrap_or_default().to_string();
            let ctx2 = ctx.clone();
            bind(abspec_call(ctx.clone(), d, frm.clone(), fname, xa), move |rf| {
                let frm2 = rf.as_pair().map(|(_, f)| res_of(f)).unwrap_or(Resource::Bad);
                let ctx = ctx2.clone();
                tau(move || abspec_ipc(ctx.clone(), d, frm2.clone(), k - 1))
            })
        })
    })
}

/// Runs a pre-abstraction body with calls and IPCs translated. The result is
/// `(ra, frm')`.
fn abspec_body(ctx: Arc<Ctx>, d: Measure, frm: Resource, body: Prog) -> Prog {
    let c = ctx.clone();
    let h: Handler = Arc::new(move |e, s| {
        let frm = res_of(s);
        let s = s.clone();
        match e {
            Event::Call(f, xa) => Some(abspec_call(c.clone(), d, frm, f.clone(), xa.clone())),
            Event::Ipc => Some(bind(abspec_ipc(c.clone(), d, frm, c.cfg.ipc_rounds), |f2| {
                ret(AnyValue::pair(AnyValue::Unit, f2))
            })),
            Event::Get => Some(bind(get_state(), move |st| {
                let orig = st.as_pair().map(|(_, o)| o.clone()).unwrap_or(AnyValue::Unit);
                ret(AnyValue::pair(orig, s.clone()))
            })),
            Event::Put(v) => {
                let v = v.clone();
                Some(bind(get_state(), move |st| {
                    let rm = st.as_pair().map(|(r, _)| r.clone()).unwrap_or(AnyValue::Unit);
                    let s = s.clone();
                    seq_with(put_state(AnyValue::pair(rm, v.clone())), move || ret(AnyValue::pair(AnyValue::Unit, s.clone())))
                }))
            }
            _ => None,
        }
    });
    interpret(body, h, frm.to_value())
}

/// `abspecFun(S, s, fun)`.
fn abspec_fun(ctx: Arc<Ctx>, spec: Arc<Spec>, fun: FunDef) -> FunDef {
    fundef(move |x| {
        let (ctx, spec, fun) = (ctx.clone(), spec.clone(), fun.clone());
        bind(assume_entry(ctx.clone(), spec.clone(), x), move |t| {
            let (a, xa, d, frm) = (field(&t, 0), field(&t, 1), measure_from_value(&field(&t, 2)), res_of(&field(&t, 3)));
            let (ctx, spec) = (ctx.clone(), spec.clone());
            let mid = match d {
                None => abspec_body(ctx.clone(), d, frm, fun(xa.clone())),
                Some(_) => {
                    let rets = (spec.pure_ret)(&a, &xa);
                    bind(abspec_ipc(ctx.clone(), d, frm, ctx.cfg.ipc_rounds), move |f2| {
                        let f2 = f2.clone();
                        bind(choose(Domain::finite(rets.clone())), move |ra| ret(AnyValue::pair(ra, f2.clone())))
                    })
                }
            };
            bind(mid, move |rf| {
                let (ra, frm) = rf.into_pair().unwrap_or((AnyValue::Unit, AnyValue::Unit));
                guarantee_exit(ctx.clone(), spec.clone(), a.clone(), ra, res_of(&frm))
            })
        })
    })
}

/// `toAbspec(S, (frd, ctx), s)`.
fn to_abspec(ctx: Arc<Ctx>, f: &PreFun, spec: Spec) -> FunDef {
    let friend = abspec_fun(ctx.clone(), Arc::new(spec), f.friend.clone());
    match &f.context {
        None => friend,
        Some(c) => {
            let context = abspec_fun(ctx, Arc::new(default_spec()), c.clone());
            fundef(move |x| {
                let (friend, context) = (friend.clone(), context.clone());
                bind(take(Domain::bools()), move |b| {
                    if b == AnyValue::Bool(true) {
                        friend(x.clone())
                    } else {
                        context(x.clone())
                    }
                })
            })
        }
    }
}

/// `[S | (A, σ) : own]`: initial state `(σ, A.init)`.
pub fn build_abspec(table: &SpecTable, pre: &PreAbs, sigma: &Resource, own: &SpecTable, cfg: &AbsCfg) -> ModuleSem {
    let ctx = Arc::new(Ctx { table: table.clone(), cfg: cfg.clone() });
    let mut m = ModuleSem::new(pre.name.clone(), AnyValue::pair(sigma.to_value(), pre.init.clone()));
    for (f, pf) in &pre.funs {
        m = m.with_fun(f.clone(), to_abspec(ctx.clone(), pf, own.get(&pre.qualified(f))));
    }
    m
}

/// Spec erasure: dispatch on the caller's module, IPCs become `skip`.
pub fn to_abs(friends: &[&str], pre: &PreAbs) -> ModuleSem {
    let ns: Arc<BTreeSet<String>> = Arc::new(friends.iter().map(|s| s.to_string()).collect());
    let mut m = ModuleSem::new(pre.name.clone(), pre.init.clone());
    for (f, pf) in &pre.funs {
        let friend = pf.friend.clone();
        let context = pf.context.clone();
        let ns = ns.clone();
        m = m.with_fun(
            f.clone(),
            fundef(move |x| {
                let (friend, context, ns) = (friend.clone(), context.clone(), ns.clone());
                bind(get_caller(), move |mn| {
                    let is_friend = mn.as_str().is_some_and(|n| ns.contains(n));
                    let body = match (&context, is_friend) {
                        (Some(c), false) => c(x.clone()),
                        _ => friend(x.clone()),
                    };
                    erase_ipc(body)
                })
            }),
        );
    }
    m
}

fn erase_ipc(p: Prog) -> Prog {
    let h: Handler = Arc::new(|e, s| match e {
        Event::Ipc => Some(ret(AnyValue::pair(AnyValue::Unit, s.clone()))),
        _ => None,
    });
    bind(interpret(p, h, AnyValue::Unit), |r| ret(r.as_pair().map(|(v, _)| v.clone()).unwrap_or(AnyValue::Unit)))
}

/// Textual listing of `toAbs(friends, pre)`.
pub fn erase_listing(friends: &[&str], pre: &PreAbs) -> String {
    let mut out = String::new();
    let fs = if friends.is_empty() { "∅".to_string() } else { friends.join(", ") };
    let _ = writeln!(out, "module {} (friends: {fs})", pre.name);
    let _ = writeln!(out, "  init = {}", pre.init);
    for (f, pf) in &pre.funs {
        match &pf.context_sketch {
            None if pf.context.is_none() => {
                let _ = writeln!(out, "  {f}: {}", pf.friend_sketch);
            }
            cs => {
                let _ = writeln!(out, "  {f}:");
                let _ = writeln!(out, "    if get_caller() ∈ {{{fs}}}: {}", pf.friend_sketch);
                let _ = writeln!(out, "    else: {}", cs.as_deref().unwrap_or("<context>"));
            }
        }
        let _ = writeln!(out, "    [IPC ↦ skip]");
    }
    out
}

/// `Safe(ns, ns_i)`: each `f ∈ ns_i` calls arbitrary functions of `ns`
/// with arguments from `args`, then returns one of `rets`.
pub fn safe_module(name: &str, ns: &[String], ns_i: &[String], args: &[AnyValue], rets: &[AnyValue]) -> ModuleSem {
    let targets: Vec<AnyValue> = ns
        .iter()
        .flat_map(|g| args.iter().map(move |a| AnyValue::pair(AnyValue::str(g), a.clone())))
        .collect();
    let targets = Arc::new(targets);
    let rets = Arc::new(rets.to_vec());
    let mut m = ModuleSem::new(name, AnyValue::Unit);
    for f in ns_i {
        let (targets, rets) = (targets.clone(), rets.clone());
        m = m.with_fun(
            f.clone(),
            fundef(move |_| {
                let targets = targets.clone();
                let rets = rets.clone();
                let looped = while_loop(
                    AnyValue::Unit,
                    {
                        let empty = targets.is_empty();
                        move |_| if empty { ret(AnyValue::Bool(false)) } else { choose(Domain::bools()) }
                    },
                    move |_| {
                        bind(choose(Domain::finite(targets.iter().cloned())), |gx| {
                            let (g, x) = gx.into_pair().unwrap_or((AnyValue::Unit, AnyValue::Unit));
                            bind(call(g.as_str().unwrap_or_default(), x), |_| ret(AnyValue::Unit))
                        })
                    },
                );
                bind(looped, move |_| choose(Domain::finite(rets.iter().cloned())))
            }),
        );
    }
    m
}

/// One abspec call of `fname` at measure `d` and frame `frm`, issued from a
/// module whose state has the abspec shape `(res_m, orig)`.
pub fn abspec_call_with(table: &SpecTable, cfg: &AbsCfg, d: Measure, frm: Resource, fname: &str, xa: AnyValue) -> Prog {
    let ctx = Arc::new(Ctx { table: table.clone(), cfg: cfg.clone() });
    abspec_call(ctx, d, frm, fname.to_string(), xa)
}

/// `ω + n` for small `n`.
pub fn omega_plus(n: u64) -> Ordinal {
    Ordinal::new(1, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{enumerate, included, EnumConfig, Verdict};
    use crate::kernel::{close, obs, skip, ModStack};
    use crate::speclang::spec_of_hl;

    fn beh(stack: &ModStack, main: &str, budget: usize) -> crate::behavior::BehSet {
        enumerate(&close(stack, main, AnyValue::Unit), budget, &EnumConfig::default()).unwrap()
    }

    #[test]
    fn measure_value_round_trip() {
        for d in [None, Some(Ordinal::nat(3)), Some(omega_plus(2))] {
            assert_eq!(measure_from_value(&measure_to_value(&d)), d);
        }
    }

    #[test]
    fn false_pre_is_ub() {
        let s = SpecTable::new().with("M.f", spec_of_hl("M.f", |_| false, |_| true));
        let pre = PreAbs::new("M", AnyValue::Unit).single("f", fundef(|_| skip()), "skip");
        let m = build_abspec(&s, &pre, &Resource::Unit, &s, &AbsCfg::default());
        let b = beh(&ModStack::single(m), "M.f", 20);
        assert!(matches!(b, crate::behavior::BehSet::Top));
    }

    #[test]
    fn abspec_of_default_spec_matches_erasure() {
        let body = fundef(|_| seq_with(obs("print", AnyValue::ints(&[1])), || ret(AnyValue::Int(3))));
        let pre = PreAbs::new("M", AnyValue::Unit).split("f", body.clone(), "print 1; 3", body, "print 1; 3");
        let t = SpecTable::new();
        let a = build_abspec(&t, &pre, &Resource::Unit, &t, &AbsCfg::default());
        let e = to_abs(&[], &pre);
        let ba = beh(&ModStack::single(a), "M.f", 50);
        let be = beh(&ModStack::single(e), "M.f", 50);
        assert_eq!(included(&ba, &be), Verdict::Holds);
        assert_eq!(included(&be, &ba), Verdict::Holds);
    }

    #[test]
    fn to_abs_dispatches_on_caller() {
        let pre = PreAbs::new("A", AnyValue::Unit).split("f", nb_body(), "NB", ub_body(), "UB");
        let caller = ModuleSem::new("B", AnyValue::Unit).with_fun("main", fundef(|_| call("A.f", AnyValue::Unit)));
        let friend = ModStack::of(vec![caller.clone(), to_abs(&["B"], &pre)]);
        let ctx = ModStack::of(vec![caller, to_abs(&[], &pre)]);
        let bf = beh(&friend, "B.main", 20);
        let bc = beh(&ctx, "B.main", 20);
        assert!(matches!(bc, crate::behavior::BehSet::Top));
        assert!(!matches!(bf, crate::behavior::BehSet::Top));
    }

    #[test]
    fn measure_violation_is_nb() {
        let s = SpecTable::new().with(
            "M.g",
            Spec::new("M.g", vec![AnyValue::Unit], |_, _, _, d, _| d.is_some(), |_, _, _, _| true)
                .with_measures(vec![Some(Ordinal::nat(5))]),
        );
        let ctx = Arc::new(Ctx { table: s, cfg: AbsCfg::default() });
        let st = AnyValue::pair(Resource::Unit.to_value(), AnyValue::Unit);
        let mk = |d: Measure| {
            let ctx = ctx.clone();
            let st = st.clone();
            ModuleSem::new("M", st).with_fun(
                "main",
                fundef(move |_| abspec_call(ctx.clone(), d, Resource::Unit, "M.g".into(), AnyValue::Unit)),
            ).with_fun("g", fundef(|_| obs("g", AnyValue::Unit)))
        };
        let low = beh(&ModStack::single(mk(Some(Ordinal::nat(5)))), "M.main", 20);
        assert_eq!(low, crate::behavior::BehSet::empty());
        let high = beh(&ModStack::single(mk(Some(Ordinal::nat(6)))), "M.main", 20);
        assert_ne!(high, crate::behavior::BehSet::empty());
    }

    #[test]
    fn safe_module_only_calls_listed() {
        let ns = vec!["S1.f".to_string(), "S2.g".to_string()];
        let a = safe_module("S1", &ns, &["f".to_string()], &[AnyValue::Unit], &[AnyValue::Int(0)]);
        let b = safe_module("S2", &ns, &["g".to_string()], &[AnyValue::Unit], &[AnyValue::Int(0)]);
        let st = ModStack::of(vec![a, b]);
        let b = beh(&st, "S1.f", 8);
        let crate::behavior::BehSet::Finite(ts) = b else { panic!() };
        assert!(ts.iter().all(|t| !matches!(t.terminal, crate::behavior::Terminal::Error)));
    }

    #[test]
    fn auth_sync_overwrites_cells() {
        let k = AnyValue::Int(1);
        let cur = Resource::auth(Some(Resource::map([(k.clone(), Resource::excl(AnyValue::Int(0)))])), Resource::Unit);
        let res = Resource::frag(Resource::map([(k.clone(), Resource::excl(AnyValue::Int(7)))]));
        let s = auth_sync(&cur, &res).unwrap();
        assert!(s.plus(&res).valid());
        assert!(!cur.plus(&res).valid());
        assert!(auth_delete(&s, &k).unwrap().plus(&Resource::Unit).valid());
    }
}
