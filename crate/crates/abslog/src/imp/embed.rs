use std::collections::BTreeMap;
use std::sync::Arc;

use crate::kernel::{bind, call, fundef, get_state, obs, put_state, ret, seq_with, ub, ModuleSem, Prog};
use crate::values::{downcast_val, upcast_val, upcast_vals, Address, AnyValue, ImpValue};

use super::{BinOp, Callee, Expr, ImpFun, ImpModule, Stmt};

type Env = Arc<BTreeMap<String, ImpValue>>;
type K = Arc<dyn Fn(Env) -> Prog + Send + Sync>;

#[derive(Clone)]
struct Ctx {
    globals: Arc<Vec<String>>,
}

fn globals_of(st: &AnyValue) -> BTreeMap<String, ImpValue> {
    st.as_list()
        .unwrap_or(&[])
        .iter()
        .filter_map(|p| {
            let (k, v) = p.as_pair()?;
            Some((k.as_str()?.to_string(), downcast_val(v)?))
        })
        .collect()
}

fn globals_value(g: &BTreeMap<String, ImpValue>) -> AnyValue {
    AnyValue::List(g.iter().map(|(k, v)| AnyValue::pair(AnyValue::str(k), upcast_val(v))).collect())
}

fn arith(op: BinOp, a: &ImpValue, b: &ImpValue) -> Option<ImpValue> {
    use ImpValue::*;
    let bool_v = |b: bool| VInt(b as i64);
    Some(match (op, a, b) {
        (_, VUndef, _) | (_, _, VUndef) => return None,
        (BinOp::Add, VInt(x), VInt(y)) => VInt(x.wrapping_add(*y)),
        (BinOp::Add, VPtr(p), VInt(n)) | (BinOp::Add, VInt(n), VPtr(p)) => VPtr(p.shift(*n)?),
        (BinOp::Sub, VInt(x), VInt(y)) => VInt(x.wrapping_sub(*y)),
        (BinOp::Sub, VPtr(p), VInt(n)) => VPtr(p.shift(n.checked_neg()?)?),
        (BinOp::Sub, VPtr(Address::Heap { block: b1, off: o1 }), VPtr(Address::Heap { block: b2, off: o2 }))
            if b1 == b2 =>
        {
            VInt(o1.wrapping_sub(*o2))
        }
        (BinOp::Mul, VInt(x), VInt(y)) => VInt(x.wrapping_mul(*y)),
        (BinOp::Div, VInt(_), VInt(0)) | (BinOp::Mod, VInt(_), VInt(0)) => return None,
        (BinOp::Div, VInt(x), VInt(y)) => VInt(x.wrapping_div(*y)),
        (BinOp::Mod, VInt(x), VInt(y)) => VInt(x.wrapping_rem(*y)),
        (BinOp::Eq, VInt(x), VInt(y)) => bool_v(x == y),
        (BinOp::Eq, VPtr(p), VPtr(q)) => bool_v(p == q),
        (BinOp::Eq, VPtr(_), VInt(0)) | (BinOp::Eq, VInt(0), VPtr(_)) => VInt(0),
        (BinOp::Lt, VInt(x), VInt(y)) => bool_v(x < y),
        (BinOp::Lt, VPtr(Address::Heap { block: b1, off: o1 }), VPtr(Address::Heap { block: b2, off: o2 }))
            if b1 == b2 =>
        {
            bool_v(o1 < o2)
        }
        _ => return None,
    })
}

fn eval(e: &Expr, env: &BTreeMap<String, ImpValue>, g: &BTreeMap<String, ImpValue>) -> Option<ImpValue> {
    match e {
        Expr::Lit(n) => Some(ImpValue::VInt(*n)),
        Expr::Var(x) => env.get(x).or_else(|| g.get(x)).cloned(),
        Expr::Bin(op, a, b) => arith(*op, &eval(a, env, g)?, &eval(b, env, g)?),
    }
}

fn truthy(v: &ImpValue) -> Option<bool> {
    match v {
        ImpValue::VInt(n) => Some(*n != 0),
        ImpValue::VPtr(_) => Some(true),
        ImpValue::VUndef => None,
    }
}

impl Ctx {
    /// Runs `f` with the current globals (empty map when the module has
    /// none, without touching the state).
    fn with_globals(&self, f: impl Fn(BTreeMap<String, ImpValue>) -> Prog + Send + Sync + 'static) -> Prog {
        if self.globals.is_empty() {
            f(BTreeMap::new())
        } else {
            bind(get_state(), move |st| f(globals_of(&st)))
        }
    }

    fn assign(&self, x: &str, v: ImpValue, env: Env, k: K) -> Prog {
        if env.contains_key(x) || !self.globals.iter().any(|g| g == x) {
            let mut e = (*env).clone();
            e.insert(x.to_string(), v);
            return k(Arc::new(e));
        }
        let x = x.to_string();
        bind(get_state(), move |st| {
            let mut g = globals_of(&st);
            g.insert(x.clone(), v.clone());
            let (env, k) = (env.clone(), k.clone());
            seq_with(put_state(globals_value(&g)), move || k(env.clone()))
        })
    }

    fn eval_then(&self, es: Vec<Expr>, env: Env, f: impl Fn(Vec<ImpValue>) -> Prog + Send + Sync + 'static) -> Prog {
        self.with_globals(move |g| match es.iter().map(|e| eval(e, &env, &g)).collect::<Option<Vec<_>>>() {
            Some(vs) => f(vs),
            None => ub(),
        })
    }

    fn call_then(&self, f: String, args: Vec<ImpValue>, ret_var: Option<String>, env: Env, k: K) -> Prog {
        let me = self.clone();
        bind(call(f, upcast_vals(&args)), move |r| match (downcast_val(&r), &ret_var) {
            (None, _) => ub(),
            (Some(_), None) => k(env.clone()),
            (Some(v), Some(x)) => me.assign(x, v, env.clone(), k.clone()),
        })
    }

    fn exec_block(&self, ss: Arc<Vec<Stmt>>, i: usize, env: Env, k: K) -> Prog {
        if i >= ss.len() {
            return k(env);
        }
        let me = self.clone();
        let ss2 = ss.clone();
        let next: K = Arc::new(move |env2| me.exec_block(ss2.clone(), i + 1, env2, k.clone()));
        self.exec(&ss[i], env, next)
    }

    fn exec(&self, s: &Stmt, env: Env, k: K) -> Prog {
        let me = self.clone();
        match s.clone() {
            Stmt::Skip => k(env),
            Stmt::Assign(x, e) => {
                let env2 = env.clone();
                self.eval_then(vec![e], env, move |vs| me.assign(&x, vs[0].clone(), env2.clone(), k.clone()))
            }
            Stmt::If(c, t, e) => {
                let (t, e) = (Arc::new(t), Arc::new(e));
                let env2 = env.clone();
                self.eval_then(vec![c], env, move |vs| match truthy(&vs[0]) {
                    Some(true) => me.exec_block(t.clone(), 0, env2.clone(), k.clone()),
                    Some(false) => me.exec_block(e.clone(), 0, env2.clone(), k.clone()),
                    None => ub(),
                })
            }
            Stmt::Call { ret: rv, callee, args } => {
                let env2 = env.clone();
                self.eval_then(args, env, move |vs| match &callee {
                    Callee::Direct(f) => me.call_then(f.clone(), vs, rv.clone(), env2.clone(), k.clone()),
                    Callee::Indirect(x) => match env2.get(x) {
                        Some(ImpValue::VPtr(Address::Fn(f))) => {
                            me.call_then(f.clone(), vs, rv.clone(), env2.clone(), k.clone())
                        }
                        _ => {
                            let (me, x, vs, rv, env2, k) =
                                (me.clone(), x.clone(), vs.clone(), rv.clone(), env2.clone(), k.clone());
                            me.clone().with_globals(move |g| match g.get(&x) {
                                Some(ImpValue::VPtr(Address::Fn(f))) => {
                                    me.call_then(f.clone(), vs.clone(), rv.clone(), env2.clone(), k.clone())
                                }
                                _ => ub(),
                            })
                        }
                    },
                    Callee::Obs(f) => {
                        let (me, rv, env2, k) = (me.clone(), rv.clone(), env2.clone(), k.clone());
                        bind(obs(f.clone(), upcast_vals(&vs)), move |r| {
                            let v = downcast_val(&r).unwrap_or(ImpValue::VUndef);
                            match &rv {
                                Some(x) => me.assign(x, v, env2.clone(), k.clone()),
                                None => k(env2.clone()),
                            }
                        })
                    }
                })
            }
            Stmt::AddrOf(x, g) => self.assign(&x, ImpValue::VPtr(Address::func(g)), env, k),
            Stmt::Malloc(x, e) => self.mem_op("Mem.alloc", vec![e], Some(x), env, k),
            Stmt::Free(e) => self.mem_op("Mem.free", vec![e], None, env, k),
            Stmt::Load(x, e) => self.mem_op("Mem.load", vec![e], Some(x), env, k),
            Stmt::Store(a, b) => self.mem_op("Mem.store", vec![a, b], None, env, k),
            Stmt::Cmp(x, a, b) => self.mem_op("Mem.cmp", vec![a, b], Some(x), env, k),
        }
    }

    fn mem_op(&self, f: &'static str, es: Vec<Expr>, rv: Option<String>, env: Env, k: K) -> Prog {
        let me = self.clone();
        let env2 = env.clone();
        self.eval_then(es, env, move |vs| me.call_then(f.to_string(), vs, rv.clone(), env2.clone(), k.clone()))
    }

    fn run_fun(&self, f: Arc<ImpFun>, arg: AnyValue) -> Prog {
        let Some(items) = arg.as_list() else { return ub() };
        if items.len() != f.params.len() {
            return ub();
        }
        let Some(vals) = items.iter().map(downcast_val).collect::<Option<Vec<_>>>() else { return ub() };
        let mut env: BTreeMap<String, ImpValue> = f.locals.iter().map(|x| (x.clone(), ImpValue::VUndef)).collect();
        env.extend(f.params.iter().cloned().zip(vals));
        let me = self.clone();
        let f2 = f.clone();
        let k: K = Arc::new(move |env| {
            let f2 = f2.clone();
            me.eval_then(vec![f2.ret.clone()], env, |vs| ret(upcast_val(&vs[0])))
        });
        self.exec_block(Arc::new(f.body.clone()), 0, Arc::new(env), k)
    }
}

/// The module's semantics: globals live in the module state as a list of
/// `(name, value)` pairs, everything else is function-local.
pub fn embed(m: &ImpModule) -> ModuleSem {
    let ctx = Ctx { globals: Arc::new(m.globals.iter().map(|(g, _)| g.clone()).collect()) };
    let init: BTreeMap<String, ImpValue> = m.globals.iter().map(|(g, v)| (g.clone(), ImpValue::VInt(*v))).collect();
    let mut sem = ModuleSem::new(m.name.clone(), globals_value(&init));
    for f in &m.funs {
        let f = Arc::new(f.clone());
        let ctx = ctx.clone();
        sem = sem.with_fun(f.name.clone(), fundef(move |x| ctx.run_fun(f.clone(), x)));
    }
    sem
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{enumerate, BehSet, EnumConfig, Terminal};
    use crate::imp::parse;
    use crate::kernel::{close, ModStack};

    fn run(src: &str, main: &str, arg: AnyValue) -> BehSet {
        let m = embed(&parse(src).unwrap());
        enumerate(&close(&ModStack::single(m), main, arg), 200, &EnumConfig::default()).unwrap()
    }

    #[test]
    fn hoare_body_prints_441() {
        let b = run(
            "module F def f(x) { var r; r := x * x / 4 + x + 1; print(r); return r }",
            "F.f",
            AnyValue::ints(&[40]),
        );
        let BehSet::Finite(ts) = b else { panic!() };
        let done: Vec<_> = ts.iter().filter(|t| t.terminal != Terminal::Partial).collect();
        assert_eq!(done.len(), 1);
        assert_eq!(done[0].terminal, Terminal::Term(AnyValue::Int(441)));
        assert_eq!(done[0].events[0].args, AnyValue::ints(&[441]));
    }

    #[test]
    fn arity_and_division_ub() {
        let src = "module M def f(x) { return 1 / x }";
        assert_eq!(run(src, "M.f", AnyValue::ints(&[1, 2])), BehSet::Top);
        assert_eq!(run(src, "M.f", AnyValue::ints(&[0])), BehSet::Top);
        assert!(matches!(run(src, "M.f", AnyValue::ints(&[1])), BehSet::Finite(_)));
    }

    #[test]
    fn globals_persist() {
        let src = "module C local n = 1 def f() { var r; r := 1 / n; n := n - 1; return r } def g() { var a; a = C.f(); a = C.f(); return a }";
        assert_eq!(run(src, "C.g", AnyValue::List(vec![])), BehSet::Top);
    }

    #[test]
    fn arith_edges() {
        assert_eq!(arith(BinOp::Add, &ImpValue::VInt(i64::MAX), &ImpValue::VInt(1)), Some(ImpValue::VInt(i64::MIN)));
        assert_eq!(arith(BinOp::Mul, &ImpValue::VUndef, &ImpValue::VInt(1)), None);
        let p = ImpValue::VPtr(Address::heap(1, 0));
        assert_eq!(arith(BinOp::Add, &p, &ImpValue::VInt(8)), Some(ImpValue::VPtr(Address::heap(1, 8))));
        assert_eq!(arith(BinOp::Eq, &p, &ImpValue::VInt(0)), Some(ImpValue::VInt(0)));
    }
}
