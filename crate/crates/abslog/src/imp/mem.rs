use std::collections::{BTreeMap, BTreeSet};

use crate::abspec::{nb_body, PreAbs};
use crate::behavior::FRESH_BLOCKS_KEY;
use crate::kernel::{bind, choose, fundef, get_state, guarantee, put_state, ret, seq_with, ub, Domain, FunDef, ModuleSem, Prog};
use crate::values::{downcast_val, upcast_val, Address, AnyValue, ImpValue};

/// Blocks handed out so far and the live cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemState {
    pub used: BTreeSet<u64>,
    pub cells: BTreeMap<(u64, i64), ImpValue>,
}

impl MemState {
    pub fn to_value(&self) -> AnyValue {
        AnyValue::pair(
            AnyValue::List(self.used.iter().map(|b| AnyValue::Int(*b as i64)).collect()),
            AnyValue::List(
                self.cells
                    .iter()
                    .map(|((b, o), v)| AnyValue::pair(AnyValue::Addr(Address::heap(*b, *o)), upcast_val(v)))
                    .collect(),
            ),
        )
    }

    pub fn from_value(v: &AnyValue) -> Option<MemState> {
        let (used, cells) = v.as_pair()?;
        let used = used.as_list()?.iter().map(|b| b.as_int().map(|b| b as u64)).collect::<Option<_>>()?;
        let cells = cells
            .as_list()?
            .iter()
            .map(|c| {
                let (p, v) = c.as_pair()?;
                match p.as_addr()? {
                    Address::Heap { block, off } => Some(((*block, *off), downcast_val(v)?)),
                    Address::Fn(_) => None,
                }
            })
            .collect::<Option<_>>()?;
        Some(MemState { used, cells })
    }

    fn live(&self, p: &AnyValue) -> Option<(u64, i64)> {
        match p.as_addr()? {
            Address::Heap { block, off } if self.cells.contains_key(&(*block, *off)) => Some((*block, *off)),
            _ => None,
        }
    }

    fn block_live(&self, b: u64) -> bool {
        self.cells.keys().any(|(c, _)| *c == b)
    }
}

fn with_mem(f: impl Fn(MemState) -> Prog + Send + Sync + 'static) -> Prog {
    bind(get_state(), move |st| match MemState::from_value(&st) {
        Some(m) => f(m),
        None => ub(),
    })
}

fn save_then(m: &MemState, v: AnyValue) -> Prog {
    seq_with(put_state(m.to_value()), move || ret(v.clone()))
}

fn args(x: &AnyValue, n: usize) -> Option<Vec<AnyValue>> {
    let l = x.as_list()?;
    (l.len() == n).then(|| l.to_vec())
}

fn alloc() -> FunDef {
    fundef(|x| {
        let Some(n) = args(&x, 1).and_then(|a| a[0].as_int()) else { return ub() };
        if n < 0 {
            return ub();
        }
        with_mem(move |m| {
            bind(choose(Domain::described("fresh block", FRESH_BLOCKS_KEY)), move |b| {
                let Some(b) = b.as_int().filter(|b| *b >= 0).map(|b| b as u64) else { return ub() };
                let m = m.clone();
                seq_with(guarantee(!m.used.contains(&b)), move || {
                    let mut m = m.clone();
                    m.used.insert(b);
                    for i in 0..n {
                        m.cells.insert((b, 8 * i), ImpValue::VUndef);
                    }
                    save_then(&m, AnyValue::Addr(Address::heap(b, 0)))
                })
            })
        })
    })
}

fn free() -> FunDef {
    fundef(|x| {
        let Some(a) = args(&x, 1) else { return ub() };
        with_mem(move |mut m| match m.live(&a[0]) {
            Some(c) => {
                m.cells.remove(&c);
                save_then(&m, AnyValue::Int(0))
            }
            None => ub(),
        })
    })
}

fn load() -> FunDef {
    fundef(|x| {
        let Some(a) = args(&x, 1) else { return ub() };
        with_mem(move |m| match m.live(&a[0]) {
            Some(c) => ret(upcast_val(&m.cells[&c])),
            None => ub(),
        })
    })
}

fn store() -> FunDef {
    fundef(|x| {
        let Some(a) = args(&x, 2) else { return ub() };
        let Some(v) = downcast_val(&a[1]) else { return ub() };
        with_mem(move |mut m| match m.live(&a[0]) {
            Some(c) => {
                m.cells.insert(c, v.clone());
                save_then(&m, AnyValue::Int(0))
            }
            None => ub(),
        })
    })
}

/// Value comparison; pointers must point into live blocks.
fn cmp() -> FunDef {
    fundef(|x| {
        let Some(a) = args(&x, 2) else { return ub() };
        let (Some(u), Some(v)) = (downcast_val(&a[0]), downcast_val(&a[1])) else { return ub() };
        with_mem(move |m| {
            let ok = |p: &Address| match p {
                Address::Heap { block, .. } => m.block_live(*block),
                Address::Fn(_) => true,
            };
            let r = match (&u, &v) {
                (ImpValue::VInt(i), ImpValue::VInt(j)) => i == j,
                (ImpValue::VPtr(p), ImpValue::VPtr(q)) if ok(p) && ok(q) => p == q,
                (ImpValue::VPtr(p), ImpValue::VInt(0)) | (ImpValue::VInt(0), ImpValue::VPtr(p)) if ok(p) => false,
                _ => return ub(),
            };
            ret(AnyValue::Int(r as i64))
        })
    })
}

fn mem_funs() -> Vec<(&'static str, FunDef)> {
    vec![("alloc", alloc()), ("free", free()), ("load", load()), ("store", store()), ("cmp", cmp())]
}

/// `I_Mem`: a nondeterministic allocator over cell-granular memory.
pub fn mem_impl() -> ModuleSem {
    mem_funs().into_iter().fold(ModuleSem::new("Mem", MemState::default().to_value()), |m, (f, d)| m.with_fun(f, d))
}

/// `A_Mem`: friends get NB, everyone else the implementation.
pub fn mem_preabs() -> PreAbs {
    mem_funs().into_iter().fold(PreAbs::new("Mem", MemState::default().to_value()), |p, (f, d)| {
        p.split(f, nb_body(), "NB", d, format!("I_Mem.{f}"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{enumerate, BehSet, EnumConfig, Terminal};
    use crate::imp::{embed, parse};
    use crate::kernel::{close, ModStack};

    fn cfg() -> EnumConfig {
        EnumConfig::default().with_domain(FRESH_BLOCKS_KEY, (0..4).map(AnyValue::Int).collect())
    }

    fn run(src: &str) -> BehSet {
        let c = embed(&parse(src).unwrap());
        let st = ModStack::of(vec![c, mem_impl()]);
        enumerate(&close(&st, "C.main", AnyValue::List(vec![])), 200, &cfg()).unwrap()
    }

    #[test]
    fn store_then_load() {
        let b = run("module C def main() { var p, v; p = malloc(2); store(p, 1); v = load(p); return v }");
        let BehSet::Finite(ts) = b else { panic!("{b:?}") };
        let terms: BTreeSet<_> = ts.iter().map(|t| t.terminal.clone()).filter(|t| *t != Terminal::Partial).collect();
        assert_eq!(terms, BTreeSet::from([Terminal::Term(AnyValue::Int(1))]));
    }

    #[test]
    fn load_after_free_is_ub() {
        assert_eq!(run("module C def main() { var p, v; p = malloc(1); free(p); v = load(p); return v }"), BehSet::Top);
        assert_eq!(run("module C def main() { var p, v; p = malloc(1); v = load(p + 8); return v }"), BehSet::Top);
    }

    #[test]
    fn allocator_is_nondeterministic() {
        let b = run("module C def main() { var p, q; p = malloc(1); q = malloc(1); return p }");
        let BehSet::Finite(ts) = b else { panic!() };
        let terms: BTreeSet<_> = ts.iter().map(|t| t.terminal.clone()).filter(|t| *t != Terminal::Partial).collect();
        assert_eq!(terms.len(), 4);
    }

    #[test]
    fn state_round_trip() {
        let mut m = MemState::default();
        m.used.insert(2);
        m.cells.insert((2, 8), ImpValue::VInt(5));
        assert_eq!(MemState::from_value(&m.to_value()), Some(m));
    }
}
