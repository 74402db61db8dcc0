//! A bounded simulation game between an implementation module and an
//! abstraction module, with Kripke worlds and a module-local relational
//! invariant, plus an adequacy probe against trace inclusion.

use std::sync::Arc;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::behavior::{check_refine, with_deep_stack, BehError, EnumConfig, RefineReport};
use crate::kernel::{Event, ModStack, ModuleSem, Prog, ENV_CALLER};
use crate::values::AnyValue;

pub type WorldLeq = Arc<dyn Fn(&AnyValue, &AnyValue) -> bool + Send + Sync>;
/// `I(world, impl state, abs state)`.
pub type Invariant = Arc<dyn Fn(&AnyValue, &AnyValue, &AnyValue) -> bool + Send + Sync>;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("world order is not a preorder: {0}")]
    BadPreorder(String),
    #[error("function {0} is missing on one side")]
    Missing(String),
    #[error(transparent)]
    Domain(#[from] BehError),
}

#[derive(Clone)]
pub struct SimConfig {
    pub worlds: Vec<AnyValue>,
    pub leq: WorldLeq,
    pub invariant: Invariant,
    /// State pairs quantified over at function entry and after calls; only
    /// those satisfying the invariant are used.
    pub states: Vec<(AnyValue, AnyValue)>,
    /// Values a call may return.
    pub rets: Vec<AnyValue>,
    /// Reported by `get_caller` on both sides.
    pub caller: String,
    pub fuel: usize,
    pub stutter: usize,
    pub enum_cfg: EnumConfig,
}

impl SimConfig {
    /// One world, invariant "states are the given pair".
    pub fn trivial(st_i: AnyValue, st_a: AnyValue) -> SimConfig {
        let (si, sa) = (st_i.clone(), st_a.clone());
        SimConfig {
            worlds: vec![AnyValue::Unit],
            leq: Arc::new(|_, _| true),
            invariant: Arc::new(move |_, a, b| *a == si && *b == sa),
            states: vec![(st_i, st_a)],
            rets: vec![],
            caller: ENV_CALLER.to_string(),
            fuel: 64,
            stutter: 256,
            enum_cfg: EnumConfig::default(),
        }
    }

    pub fn with_invariant(mut self, states: Vec<(AnyValue, AnyValue)>, inv: Invariant) -> Self {
        self.states = states;
        self.invariant = inv;
        self
    }

    pub fn with_worlds(mut self, worlds: Vec<AnyValue>, leq: WorldLeq) -> Self {
        self.worlds = worlds;
        self.leq = leq;
        self
    }

    pub fn with_rets(mut self, rets: Vec<AnyValue>) -> Self {
        self.rets = rets;
        self
    }

    pub fn with_caller(mut self, caller: impl Into<String>) -> Self {
        self.caller = caller.into();
        self
    }

    pub fn with_fuel(mut self, fuel: usize, stutter: usize) -> Self {
        self.fuel = fuel;
        self.stutter = stutter;
        self
    }

    pub fn with_enum_cfg(mut self, cfg: EnumConfig) -> Self {
        self.enum_cfg = cfg;
        self
    }

    /// Reflexivity and transitivity of `leq` over `worlds`.
    pub fn validate(&self) -> Result<(), SimError> {
        let ws = &self.worlds;
        for a in ws {
            if !(self.leq)(a, a) {
                return Err(SimError::BadPreorder(format!("{a} is not below itself")));
            }
            for b in ws {
                for c in ws {
                    if (self.leq)(a, b) && (self.leq)(b, c) && !(self.leq)(a, c) {
                        return Err(SimError::BadPreorder(format!("{a} ⊑ {b} ⊑ {c} but not {a} ⊑ {c}")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimVerdict {
    Holds,
    Fails,
    FuelExhausted,
}

impl SimVerdict {
    pub fn label(self) -> &'static str {
        match self {
            SimVerdict::Holds => "holds",
            SimVerdict::Fails => "fails",
            SimVerdict::FuelExhausted => "fuel-exhausted",
        }
    }
}

/// Which rules fire first when both sides could move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RuleOrder {
    #[default]
    ImplFirst,
    AbsFirst,
}

#[derive(Clone)]
struct Side {
    st: AnyValue,
    prog: Prog,
}

/// One node of the game: a world and the two sides.
#[derive(Clone)]
pub struct SimGoal {
    world: AnyValue,
    imp: Side,
    abs: Side,
    fuel: usize,
    stutter: usize,
}

struct Game<'a> {
    cfg: &'a SimConfig,
    order: RuleOrder,
    goals: usize,
}

fn all<I, F>(items: I, mut f: F) -> Result<SimVerdict, SimError>
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Result<SimVerdict, SimError>,
{
    let mut out = SimVerdict::Holds;
    for x in items {
        match f(x)? {
            SimVerdict::Fails => return Ok(SimVerdict::Fails),
            SimVerdict::FuelExhausted => out = SimVerdict::FuelExhausted,
            SimVerdict::Holds => {}
        }
    }
    Ok(out)
}

fn any<I, F>(items: I, mut f: F) -> Result<SimVerdict, SimError>
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Result<SimVerdict, SimError>,
{
    let mut out = SimVerdict::Fails;
    for x in items {
        match f(x)? {
            SimVerdict::Holds => return Ok(SimVerdict::Holds),
            SimVerdict::FuelExhausted => out = SimVerdict::FuelExhausted,
            SimVerdict::Fails => {}
        }
    }
    Ok(out)
}

/// Runs state, caller and IPC queries, which have a single answer.
fn settle(mut s: Side, caller: &str) -> Side {
    loop {
        match &s.prog {
            Prog::Vis(Event::Get, k) => s.prog = k(s.st.clone()),
            Prog::Vis(Event::Put(v), k) => {
                s.st = v.clone();
                s.prog = k(AnyValue::Unit);
            }
            Prog::Vis(Event::GetCaller, k) => s.prog = k(AnyValue::Str(caller.to_string())),
            Prog::Vis(Event::Ipc, k) => s.prog = k(AnyValue::Unit),
            _ => return s,
        }
    }
}

enum Move {
    /// A complete rule: `∀` over the answers.
    Forall(Vec<AnyValue>, bool),
    /// An incomplete rule: `∃` over the answers.
    Exists(Vec<AnyValue>, bool),
    Tau(bool),
}

impl Game<'_> {
    fn resolve(&self, d: &crate::kernel::Domain) -> Result<Vec<AnyValue>, SimError> {
        Ok(self.cfg.enum_cfg.resolve(d)?)
    }

    fn complete_move(&self, g: &SimGoal) -> Result<Option<Move>, SimError> {
        let imp_move = match &g.imp.prog {
            Prog::Vis(Event::Choose(d), _) => Some(Move::Forall(self.resolve(d)?, true)),
            Prog::Tau(_) => Some(Move::Tau(true)),
            _ => None,
        };
        let abs_move = match &g.abs.prog {
            Prog::Vis(Event::Take(d), _) => Some(Move::Forall(self.resolve(d)?, false)),
            Prog::Tau(_) => Some(Move::Tau(false)),
            _ => None,
        };
        Ok(match self.order {
            RuleOrder::ImplFirst => imp_move.or(abs_move),
            RuleOrder::AbsFirst => abs_move.or(imp_move),
        })
    }

    fn incomplete_move(&self, g: &SimGoal) -> Result<Option<Move>, SimError> {
        if let Prog::Vis(Event::Choose(d), _) = &g.abs.prog {
            return Ok(Some(Move::Exists(self.resolve(d)?, false)));
        }
        if let Prog::Vis(Event::Take(d), _) = &g.imp.prog {
            return Ok(Some(Move::Exists(self.resolve(d)?, true)));
        }
        Ok(None)
    }

    fn resume(g: &SimGoal, on_impl: bool, v: AnyValue, fuel: usize, stutter: usize) -> SimGoal {
        let mut g2 = g.clone();
        let side = if on_impl { &mut g2.imp } else { &mut g2.abs };
        side.prog = match &side.prog {
            Prog::Vis(_, k) => k(v),
            Prog::Tau(t) => t(),
            p => p.clone(),
        };
        g2.fuel = fuel;
        g2.stutter = stutter;
        g2
    }

    fn inv_at_future(&self, w: &AnyValue, si: &AnyValue, sa: &AnyValue) -> Vec<AnyValue> {
        self.cfg
            .worlds
            .iter()
            .filter(|w2| (self.cfg.leq)(w, w2) && (self.cfg.invariant)(w2, si, sa))
            .cloned()
            .collect()
    }

    fn play(&mut self, g: SimGoal) -> Result<SimVerdict, SimError> {
        self.goals += 1;
        let caller = self.cfg.caller.clone();
        let g = SimGoal { imp: settle(g.imp, &caller), abs: settle(g.abs, &caller), ..g };

        if let Some(m) = self.complete_move(&g)? {
            if g.stutter == 0 {
                return Ok(SimVerdict::FuelExhausted);
            }
            let (f, s) = (g.fuel, g.stutter - 1);
            return match m {
                Move::Tau(on_impl) => self.play(Self::resume(&g, on_impl, AnyValue::Unit, f, s)),
                Move::Forall(vs, on_impl) => all(vs, |v| self.play(Self::resume(&g, on_impl, v, f, s))),
                Move::Exists(..) => unreachable!(),
            };
        }
        if g.fuel == 0 {
            return Ok(SimVerdict::FuelExhausted);
        }
        let (f, s) = (g.fuel - 1, self.cfg.stutter);
        if let Some(Move::Exists(vs, on_impl)) = self.incomplete_move(&g)? {
            return any(vs, |v| self.play(Self::resume(&g, on_impl, v, f, s)));
        }
        match (&g.imp.prog, &g.abs.prog) {
            (Prog::Ret(ri), Prog::Ret(ra)) => {
                let ok = ri == ra && !self.inv_at_future(&g.world, &g.imp.st, &g.abs.st).is_empty();
                Ok(if ok { SimVerdict::Holds } else { SimVerdict::Fails })
            }
            (Prog::Vis(Event::Call(fi, xi), ki), Prog::Vis(Event::Call(fa, xa), ka)) => {
                if fi != fa || xi != xa {
                    return Ok(SimVerdict::Fails);
                }
                let w1s = self.inv_at_future(&g.world, &g.imp.st, &g.abs.st);
                let cfg = self.cfg;
                any(w1s, |w1| {
                    let afters: Vec<(AnyValue, AnyValue)> = cfg
                        .states
                        .iter()
                        .filter(|(si, sa)| cfg.worlds.iter().any(|w2| (cfg.leq)(&w1, w2) && (cfg.invariant)(w2, si, sa)))
                        .cloned()
                        .collect();
                    all(afters, |(si, sa)| {
                        all(cfg.rets.clone(), |r| {
                            self.play(SimGoal {
                                world: g.world.clone(),
                                imp: Side { st: si.clone(), prog: ki(r.clone()) },
                                abs: Side { st: sa.clone(), prog: ka(r) },
                                fuel: f,
                                stutter: s,
                            })
                        })
                    })
                })
            }
            (Prog::Vis(Event::Obs(fi, xi), ki), Prog::Vis(Event::Obs(fa, xa), ka)) => {
                if fi != fa || xi != xa {
                    return Ok(SimVerdict::Fails);
                }
                let resps = self.cfg.enum_cfg.responses(fi).to_vec();
                all(resps, |r| {
                    self.play(SimGoal {
                        world: g.world.clone(),
                        imp: Side { st: g.imp.st.clone(), prog: ki(r.clone()) },
                        abs: Side { st: g.abs.st.clone(), prog: ka(r) },
                        fuel: f,
                        stutter: s,
                    })
                })
            }
            _ => Ok(SimVerdict::Fails),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairResult {
    pub arg_impl: AnyValue,
    pub arg_abs: AnyValue,
    pub verdict: SimVerdict,
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub fun: String,
    pub pairs: Vec<PairResult>,
    pub goals: usize,
}

impl SimReport {
    pub fn verdict(&self) -> SimVerdict {
        let vs = self.pairs.iter().map(|p| p.verdict);
        if vs.clone().any(|v| v == SimVerdict::Fails) {
            SimVerdict::Fails
        } else if vs.into_iter().any(|v| v == SimVerdict::FuelExhausted) {
            SimVerdict::FuelExhausted
        } else {
            SimVerdict::Holds
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "fun": self.fun,
            "verdict": self.verdict().label(),
            "goals": self.goals,
            "pairs": self.pairs.iter().map(|p| json!({
                "impl": p.arg_impl.to_json(),
                "abs": p.arg_abs.to_json(),
                "verdict": p.verdict.label(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// `fun` of `imp` against `fun` of `abs`, from every invariant-respecting
/// state pair, for each argument pair.
pub fn sim_check(
    cfg: &SimConfig,
    imp: &ModuleSem,
    abs: &ModuleSem,
    fun: &str,
    argpairs: &[(AnyValue, AnyValue)],
) -> Result<SimReport, SimError> {
    sim_check_ordered(cfg, imp, abs, fun, argpairs, RuleOrder::default())
}

pub fn sim_check_ordered(
    cfg: &SimConfig,
    imp: &ModuleSem,
    abs: &ModuleSem,
    fun: &str,
    argpairs: &[(AnyValue, AnyValue)],
    order: RuleOrder,
) -> Result<SimReport, SimError> {
    cfg.validate()?;
    let (Some(fi), Some(fa)) = (imp.funs.get(fun), abs.funs.get(fun)) else {
        return Err(SimError::Missing(fun.to_string()));
    };
    let mut game = Game { cfg, order, goals: 0 };
    let mut pairs = vec![];
    for (xi, xa) in argpairs {
        let verdict = with_deep_stack(|| {
            all(cfg.worlds.clone(), |w| {
                let starts: Vec<_> =
                    cfg.states.iter().filter(|(si, sa)| (cfg.invariant)(&w, si, sa)).cloned().collect();
                all(starts, |(si, sa)| {
                    game.play(SimGoal {
                        world: w.clone(),
                        imp: Side { st: si, prog: fi(xi.clone()) },
                        abs: Side { st: sa, prog: fa(xa.clone()) },
                        fuel: cfg.fuel,
                        stutter: cfg.stutter,
                    })
                })
            })
        })?;
        pairs.push(PairResult { arg_impl: xi.clone(), arg_abs: xa.clone(), verdict });
    }
    Ok(SimReport { fun: fun.to_string(), pairs, goals: game.goals })
}

/// Every function of `imp`, with identical arguments on both sides.
pub fn sim_module(cfg: &SimConfig, imp: &ModuleSem, abs: &ModuleSem, args: &[AnyValue]) -> Result<Vec<SimReport>, SimError> {
    let pairs: Vec<_> = args.iter().map(|a| (a.clone(), a.clone())).collect();
    imp.funs.keys().map(|f| sim_check(cfg, imp, abs, f, &pairs)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    BothHold,
    BothFail,
    /// The game failed or ran out of fuel while traces are included.
    SimIncomplete,
    /// The game held while a trace violation exists.
    CheckerBug,
    /// The game ran out of fuel and traces show a violation.
    Inconclusive,
}

impl Agreement {
    pub fn label(self) -> &'static str {
        match self {
            Agreement::BothHold => "agree: both hold",
            Agreement::BothFail => "agree: both fail",
            Agreement::SimIncomplete => "sim incomplete",
            Agreement::CheckerBug => "checker bug",
            Agreement::Inconclusive => "inconclusive",
        }
    }
}

/// A closed run for the adequacy probe: context modules and entry points.
#[derive(Clone)]
pub struct ProbeCtx {
    pub ctx: ModStack,
    pub main: String,
    pub args: Vec<AnyValue>,
    pub budget: usize,
    pub abs_budget: usize,
}

#[derive(Clone, Debug)]
pub struct AdequacyReport {
    /// Whether the initial states are related at some world.
    pub init_related: bool,
    pub sim: Vec<SimReport>,
    pub trace: RefineReport,
    pub agreement: Agreement,
}

impl AdequacyReport {
    pub fn sim_verdict(&self) -> SimVerdict {
        let vs: Vec<_> = self.sim.iter().map(SimReport::verdict).collect();
        if !self.init_related || vs.contains(&SimVerdict::Fails) {
            SimVerdict::Fails
        } else if vs.contains(&SimVerdict::FuelExhausted) {
            SimVerdict::FuelExhausted
        } else {
            SimVerdict::Holds
        }
    }

    pub fn to_json(&self) -> Json {
        json!({
            "init_related": self.init_related,
            "sim": self.sim.iter().map(SimReport::to_json).collect::<Vec<_>>(),
            "sim_verdict": self.sim_verdict().label(),
            "trace": self.trace.to_json(),
            "agreement": self.agreement.label(),
        })
    }
}

/// Runs the game on every function of `imp` and, independently, trace
/// inclusion of `ctx ∘ imp` in `ctx ∘ abs`. The simulation only counts when
/// the two initial states are related.
pub fn adequacy_probe(
    cfg: &SimConfig,
    imp: &ModuleSem,
    abs: &ModuleSem,
    argpairs: &[(AnyValue, AnyValue)],
    probe: &ProbeCtx,
) -> Result<AdequacyReport, SimError> {
    let sim = imp.funs.keys().map(|f| sim_check(cfg, imp, abs, f, argpairs)).collect::<Result<Vec<_>, _>>()?;
    let (i, a) = (ModStack::single(imp.clone()), ModStack::single(abs.clone()));
    let trace = with_deep_stack(|| {
        check_refine(&i, &a, &probe.ctx, &probe.main, &probe.args, probe.budget, probe.abs_budget, &cfg.enum_cfg)
    })?;
    let init_related = cfg.worlds.iter().any(|w| (cfg.invariant)(w, &imp.init, &abs.init));
    let mut report = AdequacyReport { init_related, sim, trace, agreement: Agreement::BothHold };
    report.agreement = match (report.sim_verdict(), report.trace.holds()) {
        (SimVerdict::Holds, true) => Agreement::BothHold,
        (SimVerdict::Holds, false) => Agreement::CheckerBug,
        (SimVerdict::Fails, false) => Agreement::BothFail,
        (SimVerdict::FuelExhausted, false) => Agreement::Inconclusive,
        (_, true) => Agreement::SimIncomplete,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{assume, fundef, guarantee, obs, ret, seq, skip};

    fn one(name: &str, body: crate::kernel::FunDef) -> ModuleSem {
        ModuleSem::new(name, AnyValue::Unit).with_fun("f", body)
    }

    fn run(i: &ModuleSem, a: &ModuleSem) -> SimVerdict {
        let cfg = SimConfig::trivial(AnyValue::Unit, AnyValue::Unit);
        sim_check(&cfg, i, a, "f", &[(AnyValue::Unit, AnyValue::Unit)]).unwrap().verdict()
    }

    #[test]
    fn abs_ub_discharges() {
        let i = one("M", fundef(|_| obs("print", AnyValue::Int(1))));
        let a = one("M", fundef(|_| seq(assume(false), ret(AnyValue::Int(0)))));
        assert_eq!(run(&i, &a), SimVerdict::Holds);
    }

    #[test]
    fn impl_nb_discharges() {
        let i = one("M", fundef(|_| seq(guarantee(false), ret(AnyValue::Int(0)))));
        let a = one("M", fundef(|_| ret(AnyValue::Int(1))));
        assert_eq!(run(&i, &a), SimVerdict::Holds);
    }

    #[test]
    fn different_returns_fail() {
        let i = one("M", fundef(|_| ret(AnyValue::Int(0))));
        let a = one("M", fundef(|_| seq(skip(), ret(AnyValue::Int(1)))));
        assert_eq!(run(&i, &a), SimVerdict::Fails);
    }

    #[test]
    fn preorder_is_checked() {
        let cfg = SimConfig::trivial(AnyValue::Unit, AnyValue::Unit)
            .with_worlds(vec![AnyValue::Int(0), AnyValue::Int(1)], Arc::new(|a, b| a != b));
        assert!(matches!(cfg.validate(), Err(SimError::BadPreorder(_))));
    }
}
