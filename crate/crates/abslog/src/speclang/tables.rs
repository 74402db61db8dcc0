//! Spec tables for the shipped examples.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::pcm::{points_to, Resource};
use crate::values::{downcast_val, measure_ge, upcast_val, Address, AnyValue, ImpValue, Measure, Ordinal};

use super::{default_spec, spec_of_hl, Spec, SpecTable};

fn arg_ints(x: &AnyValue) -> Option<Vec<i64>> {
    x.as_list()?.iter().map(AnyValue::as_int).collect()
}

fn int_of(r: &AnyValue) -> Option<i64> {
    r.as_int()
}

pub fn is_val(r: &AnyValue) -> bool {
    downcast_val(r).is_some()
}

/// `{x % 4 = 0} F.f {r % 4 = 1}` and `{⊤} Main.main {⊤}`.
pub fn hoare() -> SpecTable {
    let f = spec_of_hl(
        "F.f",
        |x| arg_ints(x).is_some_and(|v| v.len() == 1 && v[0].rem_euclid(4) == 0),
        |r| int_of(r).is_some_and(|n| n.rem_euclid(4) == 1),
    );
    SpecTable::new().with("F.f", f).with("Main.main", spec_of_hl("Main.main", |_| true, |_| true))
}

fn owns(sym: &'static str, post_ret: Option<i64>, name: &str) -> Spec {
    let want = Resource::cannon(sym);
    let want2 = want.clone();
    let want3 = want.clone();
    Spec::new(
        name,
        vec![AnyValue::Unit],
        move |_, x, xa, _, res| x == xa && *res == want,
        move |_, r, ra, res| r == ra && res.is_unit() && post_ret.is_none_or(|k| *r == AnyValue::Int(k)),
    )
    .with_entry(move |_, x| vec![(x.clone(), None, want2.clone())])
    .with_call(move |_, xa| vec![(xa.clone(), None, want3.clone())])
}

/// `{Ball} Main.main {⊤}` and `{Ball} Cannon.fire {r. r = 1}`.
pub fn cannon() -> SpecTable {
    SpecTable::new()
        .with("Main.main", owns("Ball", None, "Main.main"))
        .with("Cannon.fire", owns("Ball", Some(1), "Cannon.fire"))
}

/// The fragment `p ↦ ℓ` read back as its list of values, if `res` is
/// exactly that.
pub fn points_to_of(res: &Resource, p: &Address, n: usize) -> Option<Vec<AnyValue>> {
    let mut out = vec![];
    for i in 0..n {
        let key = AnyValue::Addr(p.shift(8 * i as i64)?);
        let Resource::Auth { full: None, frag } = res else { return None };
        let Resource::Map(m) = frag.as_ref() else { return None };
        if m.len() != n {
            return None;
        }
        match m.get(&key)? {
            Resource::Excl(v) => out.push(v.clone()),
            _ => return None,
        }
    }
    if n == 0 && !res.is_unit() {
        return None;
    }
    Some(out)
}

fn pt(p: &Address, vs: &[AnyValue]) -> Resource {
    let vs: Vec<ImpValue> = vs.iter().filter_map(downcast_val).collect();
    points_to(p, &vs)
}

fn addr_arg(x: &AnyValue, i: usize) -> Option<Address> {
    x.as_list()?.get(i)?.as_addr().cloned()
}

/// Parameters of the finite memory instance.
#[derive(Clone, Debug)]
pub struct MemDomain {
    pub blocks: Vec<u64>,
    pub vals: Vec<AnyValue>,
    pub sizes: Vec<i64>,
    pub measures: Vec<Measure>,
}

impl Default for MemDomain {
    fn default() -> Self {
        MemDomain {
            blocks: vec![0, 1, 2, 3],
            vals: vec![upcast_val(&ImpValue::VUndef), AnyValue::Int(0), AnyValue::Int(1), AnyValue::Int(2)],
            sizes: vec![0, 1, 2],
            measures: vec![Some(Ordinal::OMEGA)],
        }
    }
}

/// Pure memory operations with points-to footprints.
pub fn mem(dom: &MemDomain) -> SpecTable {
    let undef = upcast_val(&ImpValue::VUndef);
    let ds = dom.measures.clone();

    let alloc = {
        let ds2 = ds.clone();
        let blocks = dom.blocks.clone();
        let u1 = undef.clone();
        let u2 = undef.clone();
        Spec::new(
            "Mem.alloc",
            dom.sizes.iter().map(|n| AnyValue::Int(*n)).collect(),
            |a, x, _, d, res| {
                d.is_some() && *x == AnyValue::List(vec![a.clone()]) && a.as_int().is_some_and(|n| n >= 0) && res.is_unit()
            },
            |a, r, _, res| {
                let n = a.as_int().unwrap_or(-1);
                n >= 0 && r.as_addr().is_some_and(|p| points_to_of(res, p, n as usize).is_some())
            },
        )
        .with_relevant(|x| x.as_list().map(|l| l.to_vec()).unwrap_or_default())
        .with_entry(move |_, x| ds.iter().map(|d| (x.clone(), *d, Resource::Unit)).collect())
        .with_call(move |_, xa| ds2.iter().map(|d| (xa.clone(), *d, Resource::Unit)).collect())
        .with_exit(move |a, ra| {
            let n = a.as_int().unwrap_or(0).max(0) as usize;
            match ra.as_addr() {
                Some(p) => vec![(ra.clone(), pt(p, &vec![u1.clone(); n]))],
                None => vec![],
            }
        })
        .with_ret(move |a, r| {
            let n = a.as_int().unwrap_or(0).max(0) as usize;
            match r.as_addr() {
                Some(p) => vec![(r.clone(), pt(p, &vec![u2.clone(); n]))],
                None => vec![],
            }
        })
        .with_pure_ret(move |_, _| blocks.iter().map(|b| AnyValue::Addr(Address::heap(*b, 0))).collect())
    };

    let ds = dom.measures.clone();
    let vals = dom.vals.clone();
    let free = {
        let (ds2, vals2) = (ds.clone(), vals.clone());
        let vals3 = vals.clone();
        Spec::new(
            "Mem.free",
            vec![AnyValue::Unit],
            move |_, x, _, d, res| {
                d.is_some()
                    && addr_arg(x, 0).is_some_and(|p| x.as_list().map(|l| l.len()) == Some(1) && points_to_of(res, &p, 1).is_some_and(|v| vals3.contains(&v[0])))
            },
            |_, r, _, res| is_val(r) && res.is_unit(),
        )
        .with_entry(move |_, x| match addr_arg(x, 0) {
            Some(p) => { let p = &p; ds.iter().flat_map(|d| vals.iter().map(move |v| (x.clone(), *d, pt(p, std::slice::from_ref(v))))).collect() },
            None => vec![],
        })
        .with_call(move |_, xa| match addr_arg(xa, 0) {
            Some(p) => { let p = &p; ds2.iter().flat_map(|d| vals2.iter().map(move |v| (xa.clone(), *d, pt(p, std::slice::from_ref(v))))).collect() },
            None => vec![],
        })
        .with_pure_ret(|_, _| vec![AnyValue::Int(0)])
    };

    let ds = dom.measures.clone();
    let vals = dom.vals.clone();
    let cell_quant = {
        let vals = vals.clone();
        move |x: &AnyValue| match addr_arg(x, 0) {
            Some(p) => vals.iter().map(|v| AnyValue::pair(AnyValue::Addr(p.clone()), v.clone())).collect(),
            None => vec![],
        }
    };
    let pv = |a: &AnyValue| -> Option<(Address, AnyValue)> {
        let (p, v) = a.as_pair()?;
        Some((p.as_addr()?.clone(), v.clone()))
    };
    let mut cells = vec![];
    for b in &dom.blocks {
        for off in [0i64, 8] {
            for v in &dom.vals {
                cells.push(AnyValue::pair(AnyValue::Addr(Address::heap(*b, off)), v.clone()));
            }
        }
    }

    let load = {
        let ds2 = ds.clone();
        Spec::new(
            "Mem.load",
            cells.clone(),
            move |a, x, _, d, res| {
                pv(a).is_some_and(|(p, v)| {
                    d.is_some() && *x == AnyValue::List(vec![AnyValue::Addr(p.clone())]) && *res == pt(&p, &[v])
                })
            },
            move |a, r, _, res| pv(a).is_some_and(|(p, v)| *r == v && *res == pt(&p, std::slice::from_ref(&v))),
        )
        .with_relevant(cell_quant.clone())
        .with_entry(move |a, x| match pv(a) {
            Some((p, v)) => ds.iter().map(|d| (x.clone(), *d, pt(&p, std::slice::from_ref(&v)))).collect(),
            None => vec![],
        })
        .with_call(move |a, xa| match pv(a) {
            Some((p, v)) => ds2.iter().map(|d| (xa.clone(), *d, pt(&p, std::slice::from_ref(&v)))).collect(),
            None => vec![],
        })
        .with_exit(move |a, _| match pv(a) {
            Some((p, v)) => vec![(v.clone(), pt(&p, &[v]))],
            None => vec![],
        })
        .with_ret(move |a, r| match pv(a) {
            Some((p, v)) => vec![(r.clone(), pt(&p, &[v]))],
            None => vec![],
        })
        .with_pure_ret(move |a, _| pv(a).map(|(_, v)| vec![v]).unwrap_or_default())
    };

    let ds = dom.measures.clone();
    let store = {
        let ds2 = ds.clone();
        let (vals, vals2, vals3) = (vals.clone(), vals.clone(), vals.clone());
        Spec::new(
            "Mem.store",
            cells,
            move |a, x, _, d, res| {
                pv(a).is_some_and(|(p, v)| {
                    d.is_some()
                        && *x == AnyValue::List(vec![AnyValue::Addr(p.clone()), v])
                        && points_to_of(res, &p, 1).is_some_and(|old| vals3.contains(&old[0]))
                })
            },
            move |a, r, _, res| pv(a).is_some_and(|(p, v)| is_val(r) && *res == pt(&p, &[v])),
        )
        .with_relevant(|x| {
            let l = x.as_list().unwrap_or(&[]);
            match (l.first().and_then(AnyValue::as_addr), l.get(1)) {
                (Some(p), Some(v)) if l.len() == 2 => vec![AnyValue::pair(AnyValue::Addr(p.clone()), v.clone())],
                _ => vec![],
            }
        })
        .with_entry(move |a, x| match pv(a) {
            Some((p, _)) => { let p = &p; ds
                .iter()
                .flat_map(|d| vals.iter().map(move |old| (x.clone(), *d, pt(p, std::slice::from_ref(old)))))
                .collect() },
            None => vec![],
        })
        .with_call(move |a, xa| match pv(a) {
            Some((p, _)) => { let p = &p; ds2
                .iter()
                .flat_map(|d| vals2.iter().map(move |old| (xa.clone(), *d, pt(p, std::slice::from_ref(old)))))
                .collect() },
            None => vec![],
        })
        .with_exit(move |a, ra| match pv(a) {
            Some((p, v)) => vec![(ra.clone(), pt(&p, &[v]))],
            None => vec![],
        })
        .with_ret(move |a, r| match pv(a) {
            Some((p, v)) => vec![(r.clone(), pt(&p, &[v]))],
            None => vec![],
        })
        .with_pure_ret(|_, _| vec![AnyValue::Int(0)])
    };

    SpecTable::new()
        .with("Mem.alloc", alloc)
        .with("Mem.free", free)
        .with("Mem.load", load)
        .with("Mem.store", store)
}

pub fn stack1() -> SpecTable {
    SpecTable::new()
        .with("Stack.new", default_spec())
        .with("Stack.push", default_spec())
        .with("Stack.pop", default_spec())
}

/// `is_stk h ℓ`: the fragment `◯{h ↦ Ex(ℓ)}`.
pub fn is_stk(h: &AnyValue, l: &AnyValue) -> Resource {
    Resource::frag(Resource::map([(h.clone(), Resource::excl(l.clone()))]))
}

/// `is_bag h P`: the duplicable fragment `◯{h ↦ Some(Ag{P})}`.
pub fn is_bag(h: &AnyValue, p: &AnyValue) -> Resource {
    Resource::frag(Resource::map([(h.clone(), Resource::opt(Resource::ag([p.clone()])))]))
}

/// The finite stack instance: handles, element values, list length bound.
#[derive(Clone, Debug)]
pub struct StackDomain {
    pub handles: Vec<AnyValue>,
    pub vals: Vec<i64>,
    pub max_len: usize,
    pub measures: Vec<Measure>,
}

impl Default for StackDomain {
    fn default() -> Self {
        StackDomain {
            handles: (0..4).map(|b| AnyValue::Addr(Address::heap(b, 0))).collect(),
            vals: vec![0, 1, 2],
            max_len: 2,
            measures: vec![Some(Ordinal::OMEGA)],
        }
    }
}

impl StackDomain {
    pub fn lists(&self) -> Vec<AnyValue> {
        let mut out = vec![vec![]];
        let mut layer: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..self.max_len {
            let mut next = vec![];
            for l in &layer {
                for v in &self.vals {
                    let mut l2 = vec![*v];
                    l2.extend(l);
                    next.push(l2);
                }
            }
            out.extend(next.clone());
            layer = next;
        }
        out.into_iter().map(|l| AnyValue::ints(&l)).collect()
    }
}

fn split_args(x: &AnyValue) -> Option<&[AnyValue]> {
    x.as_list()
}

fn pure_entry(ds: Vec<Measure>, res: impl Fn(&AnyValue) -> Option<Resource> + Send + Sync + 'static)
    -> impl Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Measure, Resource)> + Send + Sync + 'static {
    move |a, x| match res(a) {
        Some(r) => ds.iter().map(|d| (x.clone(), *d, r.clone())).collect(),
        None => vec![],
    }
}

/// `is_stk`: pure stack operations that track contents exactly.
pub fn stack2a(dom: &StackDomain) -> SpecTable {
    let ds = dom.measures.clone();
    let handles = dom.handles.clone();
    let lists = dom.lists();
    let empty = AnyValue::List(vec![]);

    let new = {
        let e = empty.clone();
        let e2 = empty.clone();
        let e3 = empty.clone();
        let h2 = handles.clone();
        Spec::new(
            "Stack.new",
            vec![AnyValue::Unit],
            move |_, x, _, d, res| d.is_some() && *x == AnyValue::List(vec![]) && res.is_unit(),
            move |_, r, _, res| *res == is_stk(r, &e),
        )
        .with_measures(ds.clone())
        .with_exit(move |_, ra| vec![(ra.clone(), is_stk(ra, &e2))])
        .with_ret(move |_, r| vec![(r.clone(), is_stk(r, &e3))])
        .with_pure_ret(move |_, _| h2.clone())
    };

    // a = (h, (v, ℓ))
    let hvl = |a: &AnyValue| -> Option<(AnyValue, AnyValue, AnyValue)> {
        let (h, rest) = a.as_pair()?;
        let (v, l) = rest.as_pair()?;
        Some((h.clone(), v.clone(), l.clone()))
    };
    let cons = |v: &AnyValue, l: &AnyValue| -> AnyValue {
        let mut out = vec![v.clone()];
        out.extend(l.as_list().unwrap_or(&[]).iter().cloned());
        AnyValue::List(out)
    };
    let push = {
        let lists = lists.clone();
        let dom_all: Vec<AnyValue> = handles
            .iter()
            .flat_map(|h| {
                let lists = lists.clone();
                dom.vals.iter().flat_map(move |v| {
                    let h = h.clone();
                    lists.clone().into_iter().map(move |l| AnyValue::pair(h.clone(), AnyValue::pair(AnyValue::Int(*v), l)))
                })
            })
            .collect();
        let lists2 = lists.clone();
        Spec::new(
            "Stack.push",
            dom_all,
            move |a, x, _, d, res| {
                hvl(a).is_some_and(|(h, v, l)| d.is_some() && *x == AnyValue::List(vec![h.clone(), v]) && *res == is_stk(&h, &l))
            },
            move |a, r, _, res| hvl(a).is_some_and(|(h, v, l)| is_val(r) && *res == is_stk(&h, &cons(&v, &l))),
        )
        .with_relevant(move |x| match split_args(x) {
            Some([h, v]) => lists2.iter().map(|l| AnyValue::pair(h.clone(), AnyValue::pair(v.clone(), l.clone()))).collect(),
            _ => vec![],
        })
        .with_entry(pure_entry(ds.clone(), move |a| hvl(a).map(|(h, _, l)| is_stk(&h, &l))))
        .with_call(pure_entry(ds.clone(), move |a| hvl(a).map(|(h, _, l)| is_stk(&h, &l))))
        .with_exit(move |a, ra| hvl(a).map(|(h, v, l)| vec![(ra.clone(), is_stk(&h, &cons(&v, &l)))]).unwrap_or_default())
        .with_ret(move |a, r| hvl(a).map(|(h, v, l)| vec![(r.clone(), is_stk(&h, &cons(&v, &l)))]).unwrap_or_default())
        .with_pure_ret(|_, _| vec![AnyValue::Int(0)])
    };

    let hl = |a: &AnyValue| -> Option<(AnyValue, AnyValue)> {
        let (h, l) = a.as_pair()?;
        Some((h.clone(), l.clone()))
    };
    let head = |l: &AnyValue| l.as_list().and_then(|v| v.first().cloned()).unwrap_or(AnyValue::Int(0));
    let tail = |l: &AnyValue| AnyValue::List(l.as_list().map(|v| v.iter().skip(1).cloned().collect()).unwrap_or_default());
    let pop = {
        let dom_all: Vec<AnyValue> = handles
            .iter()
            .flat_map(|h| lists.iter().map(move |l| AnyValue::pair(h.clone(), l.clone())))
            .collect();
        let lists2 = lists.clone();
        Spec::new(
            "Stack.pop",
            dom_all,
            move |a, x, _, d, res| hl(a).is_some_and(|(h, l)| d.is_some() && *x == AnyValue::List(vec![h.clone()]) && *res == is_stk(&h, &l)),
            move |a, r, _, res| hl(a).is_some_and(|(h, l)| *r == head(&l) && *res == is_stk(&h, &tail(&l))),
        )
        .with_relevant(move |x| match split_args(x) {
            Some([h]) => lists2.iter().map(|l| AnyValue::pair(h.clone(), l.clone())).collect(),
            _ => vec![],
        })
        .with_entry(pure_entry(ds.clone(), move |a| hl(a).map(|(h, l)| is_stk(&h, &l))))
        .with_call(pure_entry(ds.clone(), move |a| hl(a).map(|(h, l)| is_stk(&h, &l))))
        .with_exit(move |a, _| hl(a).map(|(h, l)| vec![(head(&l), is_stk(&h, &tail(&l)))]).unwrap_or_default())
        .with_ret(move |a, r| hl(a).map(|(h, l)| vec![(r.clone(), is_stk(&h, &tail(&l)))]).unwrap_or_default())
        .with_pure_ret(move |a, _| hl(a).map(|(_, l)| vec![head(&l)]).unwrap_or_default())
    };

    SpecTable::new().with("Stack.new", new).with("Stack.push", push).with("Stack.pop", pop)
}

/// The finite menu of element properties for `is_bag`.
pub fn bag_props() -> Vec<AnyValue> {
    ["evens", "odds", "nonzero"].into_iter().map(AnyValue::str).collect()
}

pub fn in_prop(p: &AnyValue, v: &AnyValue) -> bool {
    let Some(n) = v.as_int() else { return false };
    match p.as_str() {
        Some("evens") => n.rem_euclid(2) == 0,
        Some("odds") => n.rem_euclid(2) == 1,
        Some("nonzero") => n != 0,
        _ => false,
    }
}

/// `is_bag`: pure stack operations that only preserve an element property.
pub fn stack2b(dom: &StackDomain) -> SpecTable {
    let ds = dom.measures.clone();
    let handles = dom.handles.clone();
    let props = bag_props();
    let vals: Vec<AnyValue> = dom.vals.iter().map(|v| AnyValue::Int(*v)).collect();

    let new = {
        let h2 = handles.clone();
        Spec::new(
            "Stack.new",
            props.clone(),
            move |_, x, _, d, res| d.is_some() && *x == AnyValue::List(vec![]) && res.is_unit(),
            move |p, r, _, res| *res == is_bag(r, p),
        )
        .with_measures(ds.clone())
        .with_exit(move |p, ra| vec![(ra.clone(), is_bag(ra, p))])
        .with_ret(move |p, r| vec![(r.clone(), is_bag(r, p))])
        .with_pure_ret(move |_, _| h2.clone())
    };

    let hvp = |a: &AnyValue| -> Option<(AnyValue, AnyValue, AnyValue)> {
        let (h, rest) = a.as_pair()?;
        let (v, p) = rest.as_pair()?;
        Some((h.clone(), v.clone(), p.clone()))
    };
    let push = {
        let dom_all: Vec<AnyValue> = handles
            .iter()
            .flat_map(|h| {
                let props = props.clone();
                vals.iter().flat_map(move |v| {
                    let h = h.clone();
                    let v = v.clone();
                    props.clone().into_iter().map(move |p| AnyValue::pair(h.clone(), AnyValue::pair(v.clone(), p)))
                })
            })
            .collect();
        let props2 = props.clone();
        Spec::new(
            "Stack.push",
            dom_all,
            move |a, x, _, d, res| {
                hvp(a).is_some_and(|(h, v, p)| {
                    d.is_some() && *x == AnyValue::List(vec![h.clone(), v.clone()]) && in_prop(&p, &v) && *res == is_bag(&h, &p)
                })
            },
            move |a, r, _, res| hvp(a).is_some_and(|(h, _, p)| is_val(r) && *res == is_bag(&h, &p)),
        )
        .with_relevant(move |x| match split_args(x) {
            Some([h, v]) => props2.iter().map(|p| AnyValue::pair(h.clone(), AnyValue::pair(v.clone(), p.clone()))).collect(),
            _ => vec![],
        })
        .with_entry(pure_entry(ds.clone(), move |a| hvp(a).map(|(h, _, p)| is_bag(&h, &p))))
        .with_call(pure_entry(ds.clone(), move |a| hvp(a).map(|(h, _, p)| is_bag(&h, &p))))
        .with_exit(move |a, ra| hvp(a).map(|(h, _, p)| vec![(ra.clone(), is_bag(&h, &p))]).unwrap_or_default())
        .with_ret(move |a, r| hvp(a).map(|(h, _, p)| vec![(r.clone(), is_bag(&h, &p))]).unwrap_or_default())
        .with_pure_ret(|_, _| vec![AnyValue::Int(0)])
    };

    let hp = |a: &AnyValue| -> Option<(AnyValue, AnyValue)> {
        let (h, p) = a.as_pair()?;
        Some((h.clone(), p.clone()))
    };
    let pop = {
        let dom_all: Vec<AnyValue> =
            handles.iter().flat_map(|h| props.iter().map(move |p| AnyValue::pair(h.clone(), p.clone()))).collect();
        let props2 = props.clone();
        let vals2 = vals.clone();
        Spec::new(
            "Stack.pop",
            dom_all,
            move |a, x, _, d, res| hp(a).is_some_and(|(h, p)| d.is_some() && *x == AnyValue::List(vec![h.clone()]) && *res == is_bag(&h, &p)),
            move |a, r, _, res| {
                hp(a).is_some_and(|(h, p)| (*r == AnyValue::Int(0) || in_prop(&p, r)) && *res == is_bag(&h, &p))
            },
        )
        .with_relevant(move |x| match split_args(x) {
            Some([h]) => props2.iter().map(|p| AnyValue::pair(h.clone(), p.clone())).collect(),
            _ => vec![],
        })
        .with_entry(pure_entry(ds.clone(), move |a| hp(a).map(|(h, p)| is_bag(&h, &p))))
        .with_call(pure_entry(ds.clone(), move |a| hp(a).map(|(h, p)| is_bag(&h, &p))))
        .with_exit(move |a, ra| hp(a).map(|(h, p)| vec![(ra.clone(), is_bag(&h, &p))]).unwrap_or_default())
        .with_ret(move |a, r| hp(a).map(|(h, p)| vec![(r.clone(), is_bag(&h, &p))]).unwrap_or_default())
        .with_pure_ret(move |a, _| {
            let Some((_, p)) = hp(a) else { return vec![] };
            let mut out = vec![AnyValue::Int(0)];
            out.extend(vals2.iter().filter(|v| in_prop(&p, v) && **v != AnyValue::Int(0)).cloned());
            out
        })
    };

    SpecTable::new().with("Stack.new", new).with("Stack.push", push).with("Stack.pop", pop)
}

/// `is_estk h ℓ = nonzero(ℓ) ∗ is_stk h ℓ`.
pub fn is_estk(h: &AnyValue, l: &AnyValue) -> Option<Resource> {
    let ok = l.as_list()?.iter().all(|v| v.as_int().is_some_and(|n| n != 0));
    ok.then(|| is_stk(h, l))
}

/// `Echo.echo: s∗`; `input`/`output` relate a handle to an abstract list.
pub fn echo(dom: &StackDomain) -> SpecTable {
    let handles = dom.handles.clone();
    let lists: Vec<AnyValue> = dom.lists().into_iter().filter(|l| is_estk(&AnyValue::Unit, l).is_some()).collect();
    let io_spec = |name: &str| {
        let lists = lists.clone();
        let lists2 = lists.clone();
        let lists4 = lists.clone();
        Spec::new(
            name,
            handles.clone(),
            |h, x, xa, d, res| {
                d.is_none() && *x == AnyValue::List(vec![h.clone()]) && is_estk(h, xa).is_some_and(|r| r == *res)
            },
            |h, r, ra, res| is_val(r) && is_estk(h, ra).is_some_and(|q| q == *res),
        )
        .with_relevant(|x| match x.as_list() {
            Some([h]) => vec![h.clone()],
            _ => vec![],
        })
        .with_abs_relevant({
            let hs = handles.clone();
            move |_| hs.clone()
        })
        .with_entry(move |h, _| lists.iter().filter_map(|l| Some((l.clone(), None, is_estk(h, l)?))).collect())
        .with_call(move |h, xa| is_estk(h, xa).map(|r| vec![(AnyValue::List(vec![h.clone()]), None, r)]).unwrap_or_default())
        .with_ret(move |h, _| lists2.iter().filter_map(|l| Some((l.clone(), is_estk(h, l)?))).collect())
        .with_exit(move |h, ra| is_estk(h, ra).map(|r| vec![(AnyValue::Int(0), r)]).unwrap_or_default())
        .with_pure_ret(move |_, _| lists4.clone())
    };
    SpecTable::new()
        .with("Echo.echo", default_spec())
        .with("Echo.input", io_spec("Echo.input"))
        .with("Echo.output", io_spec("Echo.output"))
}

/// Named mathematical functions usable as `f_sem`.
pub fn fsem(name: &str, m: i64) -> Option<i64> {
    match name {
        "succ" => Some(m.wrapping_add(1)),
        "id" => Some(m),
        _ => None,
    }
}

pub fn fsem_iter(name: &str, n: i64, m: i64) -> Option<i64> {
    (0..n.max(0)).try_fold(m, |acc, _| fsem(name, acc))
}

/// The finite instance of the higher-order repeat spec.
#[derive(Clone, Debug)]
pub struct RepeatDomain {
    pub fptrs: Vec<AnyValue>,
    pub ns: Vec<i64>,
    pub ms: Vec<i64>,
    pub fsems: Vec<String>,
    pub sample_ms: Vec<i64>,
    pub extra_omega: u64,
}

impl Default for RepeatDomain {
    fn default() -> Self {
        RepeatDomain {
            fptrs: vec![AnyValue::Addr(Address::func("SC.succ"))],
            ns: vec![0, 1, 2, 3],
            ms: (0..=8).collect(),
            fsems: vec!["succ".into(), "id".into()],
            sample_ms: (0..=8).collect(),
            extra_omega: 1,
        }
    }
}

/// `S_SC`: `{x = [m] ∧ d = Some _} SC.succ {r = m + 1}`.
pub fn sc(ms: &[i64]) -> SpecTable {
    let s = Spec::new(
        "SC.succ",
        ms.iter().map(|m| AnyValue::Int(*m)).collect(),
        |m, x, _, d, res| d.is_some() && *x == AnyValue::List(vec![m.clone()]) && res.is_unit(),
        |m, r, _, res| m.as_int().is_some_and(|m| *r == AnyValue::Int(m + 1)) && res.is_unit(),
    )
    .with_relevant(|x| match x.as_list() {
        Some([m]) => vec![m.clone()],
        _ => vec![],
    })
    .with_measures(vec![Some(Ordinal::OMEGA)])
    .with_exit(|m, _| m.as_int().map(|m| vec![(AnyValue::Int(m + 1), Resource::Unit)]).unwrap_or_default())
    .with_pure_ret(|m, _| m.as_int().map(|m| vec![AnyValue::Int(m + 1)]).unwrap_or_default());
    SpecTable::new().with("SC.succ", s)
}

/// Decides `Sf ⊒ {*f : ∀m. {x = [m] ∧ d = Some ω} {r = f_sem(m)}}` on the
/// sampled arguments.
pub fn fn_spec_ok(sf: &SpecTable, f: &AnyValue, fsem_name: &str, sample_ms: &[i64]) -> bool {
    let Some(Address::Fn(name)) = f.as_addr() else { return false };
    let Some(s1) = sf.specs.get(name) else { return false };
    let d = Some(Ordinal::OMEGA);
    for m in sample_ms {
        let Some(want) = fsem(fsem_name, *m) else { return false };
        let x = AnyValue::List(vec![AnyValue::Int(*m)]);
        let a1s = s1.quantifiers_for(&x);
        let ok = a1s.iter().any(|a1| {
            s1.pre_holds(a1, &x, &x, &d, &Resource::Unit) && {
                let r = AnyValue::Int(want);
                (s1.exit)(a1, &r).iter().all(|(rc, res)| *rc == r && res.is_unit())
                    && [AnyValue::Int(want), AnyValue::Int(want + 1), AnyValue::Int(want - 1)]
                        .iter()
                        .all(|rr| !s1.post_holds(a1, rr, rr, &Resource::Unit) || *rr == r)
            }
        });
        if !ok {
            return false;
        }
    }
    true
}

/// `H_RP(Sf)`.
pub fn h_rp(sf: &SpecTable, dom: &RepeatDomain) -> SpecTable {
    let mut side = BTreeMap::new();
    for f in &dom.fptrs {
        for fs in &dom.fsems {
            side.insert((f.clone(), fs.clone()), fn_spec_ok(sf, f, fs, &dom.sample_ms));
        }
    }
    let side = Arc::new(side);
    let mut quant = vec![];
    for f in &dom.fptrs {
        for n in &dom.ns {
            for m in &dom.ms {
                for fs in &dom.fsems {
                    quant.push(AnyValue::List(vec![f.clone(), AnyValue::Int(*n), AnyValue::Int(*m), AnyValue::str(fs)]));
                }
            }
        }
    }
    let parts = |a: &AnyValue| -> Option<(AnyValue, i64, i64, String)> {
        match a.as_list()? {
            [f, n, m, fs] => Some((f.clone(), n.as_int()?, m.as_int()?, fs.as_str()?.to_string())),
            _ => None,
        }
    };
    let fsems = dom.fsems.clone();
    let extra = dom.extra_omega;
    let s = Spec::new(
        "RP.repeat",
        quant,
        move |a, x, _, d, res| {
            parts(a).is_some_and(|(f, n, m, fs)| {
                *x == AnyValue::List(vec![f.clone(), AnyValue::Int(n), AnyValue::Int(m)])
                    && n >= 0
                    && measure_ge(d, &Ordinal::new(1, n as u64))
                    && side.get(&(f, fs)).copied().unwrap_or(false)
                    && res.is_unit()
            })
        },
        move |a, r, _, res| {
            parts(a).is_some_and(|(_, n, m, fs)| fsem_iter(&fs, n, m).is_some_and(|v| *r == AnyValue::Int(v)) && res.is_unit())
        },
    )
    .with_relevant(move |x| match x.as_list() {
        Some([f, n, m]) => fsems.iter().map(|fs| AnyValue::List(vec![f.clone(), n.clone(), m.clone(), AnyValue::str(fs)])).collect(),
        _ => vec![],
    })
    .with_entry(move |a, x| {
        let Some((_, n, _, _)) = parts(a) else { return vec![] };
        (0..=extra).map(|k| (x.clone(), Some(Ordinal::new(1, n.max(0) as u64 + k)), Resource::Unit)).collect()
    })
    .with_call(move |a, xa| {
        let Some((_, n, _, _)) = parts(a) else { return vec![] };
        (0..=extra).map(|k| (xa.clone(), Some(Ordinal::new(1, n.max(0) as u64 + k)), Resource::Unit)).collect()
    })
    .with_exit(move |a, _| {
        parts(a).and_then(|(_, n, m, fs)| fsem_iter(&fs, n, m)).map(|v| vec![(AnyValue::Int(v), Resource::Unit)]).unwrap_or_default()
    })
    .with_pure_ret(move |a, _| parts(a).and_then(|(_, n, m, fs)| fsem_iter(&fs, n, m)).map(|v| vec![AnyValue::Int(v)]).unwrap_or_default());
    SpecTable::new().with("RP.repeat", s)
}

pub fn ad() -> SpecTable {
    SpecTable::new().with("AD.add", default_spec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoare_spec_examples() {
        let t = hoare();
        let f = t.get("F.f");
        let u = AnyValue::Unit;
        let x = AnyValue::List(vec![AnyValue::Int(40)]);
        assert!(f.pre_holds(&u, &x, &x, &None, &Resource::Unit));
        let r = AnyValue::Int(441);
        assert!(f.post_holds(&u, &r, &r, &Resource::Unit));
        assert!(!f.post_holds(&u, &AnyValue::Int(442), &AnyValue::Int(442), &Resource::Unit));
    }

    #[test]
    fn mem_load_pre() {
        let t = mem(&MemDomain::default());
        let load = t.get("Mem.load");
        let p = Address::heap(0, 0);
        let v = AnyValue::Int(1);
        let a = AnyValue::pair(AnyValue::Addr(p.clone()), v.clone());
        let x = AnyValue::List(vec![AnyValue::Addr(p.clone())]);
        let d = Some(Ordinal::nat(1));
        assert!(load.pre_holds(&a, &x, &x, &d, &pt(&p, std::slice::from_ref(&v))));
        assert!(!load.pre_holds(&a, &x, &x, &None, &pt(&p, &[v])));
        let args = vec![x.clone(), AnyValue::List(vec![AnyValue::Addr(p), AnyValue::Int(2)])];
        for f in ["Mem.load", "Mem.store", "Mem.free"] {
            t.get(f).check_witnesses(&args, &[AnyValue::Int(0), AnyValue::Int(1)]).unwrap();
        }
        t.get("Mem.alloc").check_witnesses(&[AnyValue::ints(&[1])], &[AnyValue::Addr(Address::heap(2, 0))]).unwrap();
    }

    #[test]
    fn bag_pop_admits_zero_or_member() {
        let t = stack2b(&StackDomain::default());
        let pop = t.get("Stack.pop");
        let h = AnyValue::Addr(Address::heap(0, 0));
        let a = AnyValue::pair(h.clone(), AnyValue::str("odds"));
        let res = is_bag(&h, &AnyValue::str("odds"));
        assert!(pop.post_holds(&a, &AnyValue::Int(0), &AnyValue::Unit, &res));
        assert!(pop.post_holds(&a, &AnyValue::Int(1), &AnyValue::Unit, &res));
        assert!(!pop.post_holds(&a, &AnyValue::Int(2), &AnyValue::Unit, &res));
    }

    #[test]
    fn repeat_measure_bound() {
        let dom = RepeatDomain::default();
        let t = h_rp(&sc(&dom.ms), &dom);
        let s = t.get("RP.repeat");
        let f = AnyValue::Addr(Address::func("SC.succ"));
        let x = AnyValue::List(vec![f.clone(), AnyValue::Int(2), AnyValue::Int(3)]);
        let a = AnyValue::List(vec![f, AnyValue::Int(2), AnyValue::Int(3), AnyValue::str("succ")]);
        assert!(s.pre_holds(&a, &x, &x, &Some(Ordinal::new(1, 2)), &Resource::Unit));
        assert!(!s.pre_holds(&a, &x, &x, &Some(Ordinal::new(0, 9)), &Resource::Unit));
        assert!(s.post_holds(&a, &AnyValue::Int(5), &AnyValue::Unit, &Resource::Unit));
    }

    #[test]
    fn higher_order_side_condition() {
        let dom = RepeatDomain::default();
        let f = AnyValue::Addr(Address::func("SC.succ"));
        assert!(fn_spec_ok(&sc(&dom.ms), &f, "succ", &dom.sample_ms));
        assert!(!fn_spec_ok(&sc(&dom.ms), &f, "id", &dom.sample_ms));
        assert!(!fn_spec_ok(&SpecTable::new(), &f, "succ", &dom.sample_ms));
    }

    #[test]
    fn stack_lists_enumerated() {
        let d = StackDomain::default();
        assert_eq!(d.lists().len(), 1 + 3 + 9);
        stack2a(&d).get("Stack.pop").check_witnesses(&[AnyValue::List(vec![d.handles[0].clone()])], &[AnyValue::Int(0)]).unwrap();
    }
}
