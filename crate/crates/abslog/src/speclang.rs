//! Function specifications: a quantifier domain, pre/post predicates over
//! values, measures and resources, and the finite witness menus used by the
//! executable translations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::pcm::{Pcm, PcmError, Resource};
use crate::values::{AnyValue, Measure};

pub mod tables;

/// `(a, x, xa, d, res)`.
pub type PreFn = Arc<dyn Fn(&AnyValue, &AnyValue, &AnyValue, &Measure, &Resource) -> bool + Send + Sync>;
/// `(a, r, ra, res)`.
pub type PostFn = Arc<dyn Fn(&AnyValue, &AnyValue, &AnyValue, &Resource) -> bool + Send + Sync>;
/// `(a, known argument) ↦ (other argument, measure, resource)` candidates.
pub type ArgWit = Arc<dyn Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Measure, Resource)> + Send + Sync>;
/// `(a, known return) ↦ (other return, resource)` candidates.
pub type RetWit = Arc<dyn Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Resource)> + Send + Sync>;
/// `(a, argument) ↦ values`.
pub type ValWit = Arc<dyn Fn(&AnyValue, &AnyValue) -> Vec<AnyValue> + Send + Sync>;
pub type QuantFn = Arc<dyn Fn(&AnyValue) -> Vec<AnyValue> + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("witness {tuple} of {spec} ({side}) fails its own predicate")]
    BadWitness { spec: String, side: &'static str, tuple: String },
    #[error(transparent)]
    Pcm(#[from] PcmError),
}

/// One function's specification.
///
/// Witness menus stand in for the unrestricted `choose`/`take` of tuples:
/// `entry` feeds the callee's ASSUME (`x ↦ xa, d, res`), `call` the caller's
/// GUARANTEE (`xa ↦ x, d', res`), `ret` the caller's ASSUME after the call
/// (`r ↦ ra, res`), `exit` the callee's GUARANTEE (`ra ↦ r, res`), and
/// `pure_ret` the abstract result of a pure invocation.
#[derive(Clone)]
pub struct Spec {
    pub name: String,
    pub domain: Vec<AnyValue>,
    /// Quantifier values worth taking for a concrete argument; the rest
    /// would fail the precondition.
    pub relevant: Option<QuantFn>,
    /// Same, for an abstract argument on the caller side.
    pub abs_relevant: Option<QuantFn>,
    pub pre: PreFn,
    pub post: PostFn,
    pub entry: ArgWit,
    pub call: ArgWit,
    pub ret: RetWit,
    pub exit: RetWit,
    pub pure_ret: ValWit,
}

impl fmt::Debug for Spec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Spec({}, |A|={})", self.name, self.domain.len())
    }
}

fn same_arg(d: Measure) -> ArgWit {
    Arc::new(move |_, v| vec![(v.clone(), d, Resource::Unit)])
}

fn same_ret() -> RetWit {
    Arc::new(|_, v| vec![(v.clone(), Resource::Unit)])
}

impl Spec {
    /// Witnesses default to: same value on both sides, impure measure, no
    /// resource.
    pub fn new<P, Q>(name: impl Into<String>, domain: Vec<AnyValue>, pre: P, post: Q) -> Spec
    where
        P: Fn(&AnyValue, &AnyValue, &AnyValue, &Measure, &Resource) -> bool + Send + Sync + 'static,
        Q: Fn(&AnyValue, &AnyValue, &AnyValue, &Resource) -> bool + Send + Sync + 'static,
    {
        Spec {
            name: name.into(),
            domain,
            relevant: None,
            abs_relevant: None,
            pre: Arc::new(pre),
            post: Arc::new(post),
            entry: same_arg(None),
            call: same_arg(None),
            ret: same_ret(),
            exit: same_ret(),
            pure_ret: Arc::new(|_, _| vec![]),
        }
    }

    pub fn with_relevant(mut self, f: impl Fn(&AnyValue) -> Vec<AnyValue> + Send + Sync + 'static) -> Spec {
        let f: QuantFn = Arc::new(f);
        self.relevant = Some(f.clone());
        self.abs_relevant = Some(f);
        self
    }

    pub fn with_abs_relevant(mut self, f: impl Fn(&AnyValue) -> Vec<AnyValue> + Send + Sync + 'static) -> Spec {
        self.abs_relevant = Some(Arc::new(f));
        self
    }

    pub fn with_entry(
        mut self,
        f: impl Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Measure, Resource)> + Send + Sync + 'static,
    ) -> Spec {
        self.entry = Arc::new(f);
        self
    }

    pub fn with_call(
        mut self,
        f: impl Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Measure, Resource)> + Send + Sync + 'static,
    ) -> Spec {
        self.call = Arc::new(f);
        self
    }

    pub fn with_ret(
        mut self,
        f: impl Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Resource)> + Send + Sync + 'static,
    ) -> Spec {
        self.ret = Arc::new(f);
        self
    }

    pub fn with_exit(
        mut self,
        f: impl Fn(&AnyValue, &AnyValue) -> Vec<(AnyValue, Resource)> + Send + Sync + 'static,
    ) -> Spec {
        self.exit = Arc::new(f);
        self
    }

    pub fn with_pure_ret(mut self, f: impl Fn(&AnyValue, &AnyValue) -> Vec<AnyValue> + Send + Sync + 'static) -> Spec {
        self.pure_ret = Arc::new(f);
        self
    }

    /// Both argument menus produce the given measures instead of `None`.
    pub fn with_measures(self, ds: Vec<Measure>) -> Spec {
        let ds2 = ds.clone();
        self.with_entry(move |_, x| ds.iter().map(|d| (x.clone(), *d, Resource::Unit)).collect())
            .with_call(move |_, xa| ds2.iter().map(|d| (xa.clone(), *d, Resource::Unit)).collect())
    }

    pub fn quantifiers_for(&self, x: &AnyValue) -> Vec<AnyValue> {
        match &self.relevant {
            Some(f) => f(x),
            None => self.domain.clone(),
        }
    }

    pub fn quantifiers_for_abs(&self, xa: &AnyValue) -> Vec<AnyValue> {
        match &self.abs_relevant {
            Some(f) => f(xa),
            None => self.domain.clone(),
        }
    }

    pub fn pre_holds(&self, a: &AnyValue, x: &AnyValue, xa: &AnyValue, d: &Measure, res: &Resource) -> bool {
        (self.pre)(a, x, xa, d, res)
    }

    pub fn post_holds(&self, a: &AnyValue, r: &AnyValue, ra: &AnyValue, res: &Resource) -> bool {
        (self.post)(a, r, ra, res)
    }

    /// Every witness produced for the sampled arguments and returns
    /// satisfies the predicate it is offered to.
    pub fn check_witnesses(&self, args: &[AnyValue], rets: &[AnyValue]) -> Result<(), SpecError> {
        let bad = |side: &'static str, tuple: String| SpecError::BadWitness { spec: self.name.clone(), side, tuple };
        let mut seen: [(usize, usize, String); 4] = Default::default();
        let mut note = |i: usize, ok: bool, t: String| {
            seen[i].0 += 1;
            if ok {
                seen[i].1 += 1;
            } else if seen[i].2.is_empty() {
                seen[i].2 = t;
            }
        };
        for x in args {
            for a in self.quantifiers_for(x) {
                for (xa, d, res) in (self.entry)(&a, x) {
                    note(0, self.pre_holds(&a, x, &xa, &d, &res), format!("({a}, {x}, {xa}, {d:?}, {res})"));
                }
                for (xc, d, res) in (self.call)(&a, x) {
                    note(1, self.pre_holds(&a, &xc, x, &d, &res), format!("({a}, {xc}, {x}, {d:?}, {res})"));
                }
            }
        }
        for a in &self.domain {
            for r in rets {
                for (ra, res) in (self.ret)(a, r) {
                    note(2, self.post_holds(a, r, &ra, &res), format!("({a}, {r}, {ra}, {res})"));
                }
                for (rc, res) in (self.exit)(a, r) {
                    note(3, self.post_holds(a, &rc, r, &res), format!("({a}, {rc}, {r}, {res})"));
                }
            }
        }
        for (i, side) in ["entry", "call", "ret", "exit"].into_iter().enumerate() {
            let (n, ok, t) = &seen[i];
            if *n > 0 && *ok == 0 {
                return Err(bad(side, t.clone()));
            }
        }
        Ok(())
    }
}

/// `s∗`: impure, concrete and abstract values coincide, no resources.
pub fn default_spec() -> Spec {
    Spec::new(
        "s*",
        vec![AnyValue::Unit],
        |_, x, xa, d, res| d.is_none() && x == xa && res.is_unit(),
        |_, r, ra, res| r == ra && res.is_unit(),
    )
}

/// A resource-free Hoare triple. The measure is unconstrained, but the
/// witness menus only offer `None`.
pub fn spec_of_hl<P, Q>(name: impl Into<String>, pre: P, post: Q) -> Spec
where
    P: Fn(&AnyValue) -> bool + Send + Sync + 'static,
    Q: Fn(&AnyValue) -> bool + Send + Sync + 'static,
{
    Spec::new(
        name,
        vec![AnyValue::Unit],
        move |_, x, xa, _, res| x == xa && res.is_unit() && pre(x),
        move |_, r, ra, res| r == ra && res.is_unit() && post(r),
    )
}

/// Specs keyed by qualified function name; missing entries read as `s∗`.
#[derive(Clone, Debug, Default)]
pub struct SpecTable {
    pub specs: BTreeMap<String, Spec>,
}

impl SpecTable {
    pub fn new() -> SpecTable {
        SpecTable::default()
    }

    pub fn with(mut self, f: impl Into<String>, s: Spec) -> SpecTable {
        self.specs.insert(f.into(), s);
        self
    }

    pub fn get(&self, f: &str) -> Spec {
        self.specs.get(f).cloned().unwrap_or_else(default_spec)
    }

    pub fn declared(&self, f: &str) -> bool {
        self.specs.contains_key(f)
    }

    /// Entries of `other` win on overlap.
    pub fn union(&self, other: &SpecTable) -> SpecTable {
        let mut specs = self.specs.clone();
        specs.extend(other.specs.clone());
        SpecTable { specs }
    }

    pub fn restrict(&self, names: &[&str]) -> SpecTable {
        SpecTable {
            specs: self.specs.iter().filter(|(k, _)| names.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.keys().cloned().collect()
    }
}

/// Finite sample for the strengthening check.
#[derive(Clone, Debug, Default)]
pub struct SpecSample {
    pub args: Vec<(AnyValue, AnyValue, Measure)>,
    pub rets: Vec<(AnyValue, AnyValue)>,
}

/// Sampled `s1 ⊒ s0`: every `a0` has an `a1` whose precondition is reachable
/// by update from `s0`'s and whose postcondition updates back to `s0`'s,
/// on every sampled tuple and universe resource.
pub fn stronger(p: &Pcm, s1: &Spec, s0: &Spec, sample: &SpecSample) -> Result<bool, SpecError> {
    let universe = p.universe.clone().ok_or_else(|| PcmError::UniverseMissing(p.name.clone()))?;
    for a0 in &s0.domain {
        let mut found = false;
        for a1 in &s1.domain {
            let mut ok = true;
            'outer: for (x, xa, d) in &sample.args {
                for res in &universe {
                    if s0.pre_holds(a0, x, xa, d, res)
                        && !p.upd_modality(res, |r| s1.pre_holds(a1, x, xa, d, r))?
                    {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                'outer2: for (r, ra) in &sample.rets {
                    for res in &universe {
                        if s1.post_holds(a1, r, ra, res)
                            && !p.upd_modality(res, |q| s0.post_holds(a0, r, ra, q))?
                        {
                            ok = false;
                            break 'outer2;
                        }
                    }
                }
            }
            if ok {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Sampled `S1 ⊒ S0` on tables: every entry of `S0` has a stronger entry in
/// `S1`.
pub fn stronger_table(p: &Pcm, t1: &SpecTable, t0: &SpecTable, sample: &SpecSample) -> Result<bool, SpecError> {
    for (f, s0) in &t0.specs {
        match t1.specs.get(f) {
            Some(s1) => {
                if !stronger(p, s1, s0, sample)? {
                    return Ok(false);
                }
            }
            None => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::cannon_pcm;
    use crate::values::Ordinal;

    #[test]
    fn default_spec_examples() {
        let s = default_spec();
        let u = AnyValue::Unit;
        let three = AnyValue::Int(3);
        assert!(s.pre_holds(&u, &three, &three, &None, &Resource::Unit));
        assert!(!s.pre_holds(&u, &three, &AnyValue::Int(4), &None, &Resource::Unit));
        assert!(!s.pre_holds(&u, &three, &three, &Some(Ordinal::new(0, 1)), &Resource::Unit));
    }

    #[test]
    fn hoare_spec_leaves_measure_free() {
        let s = spec_of_hl("top", |_| true, |_| true);
        let u = AnyValue::Unit;
        let v = AnyValue::Int(1);
        assert!(s.pre_holds(&u, &v, &v, &Some(Ordinal::new(0, 1)), &Resource::Unit));
        assert!(!default_spec().pre_holds(&u, &v, &v, &Some(Ordinal::new(0, 1)), &Resource::Unit));
        s.check_witnesses(std::slice::from_ref(&v), std::slice::from_ref(&v)).unwrap();
    }

    #[test]
    fn witness_check_catches_bad_menus() {
        let s = spec_of_hl("even", |x| x.as_int().is_some_and(|n| n % 2 == 0), |_| true);
        assert!(s.check_witnesses(&[AnyValue::Int(2)], &[]).is_ok());
        assert!(s.check_witnesses(&[AnyValue::Int(3)], &[]).is_err());
    }

    #[test]
    fn stronger_is_reflexive_and_table_subset() {
        let p = cannon_pcm();
        let sample = SpecSample {
            args: vec![(AnyValue::Int(1), AnyValue::Int(1), None)],
            rets: vec![(AnyValue::Int(1), AnyValue::Int(1)), (AnyValue::Int(0), AnyValue::Int(0))],
        };
        let s = default_spec();
        assert!(stronger(&p, &s, &s, &sample).unwrap());
        let t = SpecTable::new().with("A.f", s.clone()).with("A.g", s);
        assert!(stronger_table(&p, &t, &t.restrict(&["A.f"]), &sample).unwrap());
        assert!(!stronger_table(&p, &t.restrict(&["A.f"]), &t, &sample).unwrap());
    }
}
