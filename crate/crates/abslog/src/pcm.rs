//! Partial commutative monoids over a single resource tree, with finite
//! decision procedures for frame-preserving updates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{OnceLock, RwLock};

use thiserror::Error;

use crate::values::{upcast_val, Address, AnyValue, ImpValue};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcmError {
    #[error("resource {0} is outside the carrier of {1}")]
    CarrierMismatch(String, String),
    #[error("operands {0} and {1} come from different algebras")]
    Incompatible(String, String),
    #[error("pcm {0} has no finite universe")]
    UniverseMissing(String),
    #[error("unknown named table {0}")]
    UnknownTable(String),
    #[error("value is not an encoded resource: {0}")]
    NotAResource(String),
}

/// An element of one of the installed algebras. `Unit` is the shared
/// identity; composites are kept canonical so that equality is syntactic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resource {
    Unit,
    Bad,
    Excl(AnyValue),
    Ag(BTreeSet<AnyValue>),
    Auth { full: Option<Box<Resource>>, frag: Box<Resource> },
    Map(BTreeMap<AnyValue, Resource>),
    Prod(Box<Resource>, Box<Resource>),
    Opt(Box<Resource>),
    Named(String, String),
}

/// A finite commutative table: unlisted sums of two non-units are `Bad`.
#[derive(Clone, Debug)]
pub struct NamedTable {
    pub tag: String,
    pub symbols: Vec<String>,
    pub sums: BTreeMap<(String, String), String>,
}

impl NamedTable {
    pub fn sum(&self, a: &str, b: &str) -> Option<&str> {
        self.sums
            .get(&(a.to_string(), b.to_string()))
            .or_else(|| self.sums.get(&(b.to_string(), a.to_string())))
            .map(String::as_str)
    }
}

pub const CANNON: &str = "cannon";

pub fn cannon_table() -> NamedTable {
    let mut sums = BTreeMap::new();
    sums.insert(("Ball".to_string(), "Ready".to_string()), "Loaded".to_string());
    NamedTable {
        tag: CANNON.to_string(),
        symbols: ["Ball", "Ready", "Fired", "Loaded"].map(String::from).to_vec(),
        sums,
    }
}

fn registry() -> &'static RwLock<BTreeMap<String, NamedTable>> {
    static REG: OnceLock<RwLock<BTreeMap<String, NamedTable>>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut m = BTreeMap::new();
        m.insert(CANNON.to_string(), cannon_table());
        RwLock::new(m)
    })
}

pub fn register_named(t: NamedTable) {
    registry().write().expect("named registry").insert(t.tag.clone(), t);
}

fn with_table<T>(tag: &str, f: impl FnOnce(&NamedTable) -> T) -> Result<T, PcmError> {
    let reg = registry().read().expect("named registry");
    reg.get(tag).map(f).ok_or_else(|| PcmError::UnknownTable(tag.to_string()))
}

impl Resource {
    pub fn named(tag: &str, sym: &str) -> Resource {
        Resource::Named(tag.to_string(), sym.to_string())
    }

    pub fn cannon(sym: &str) -> Resource {
        Resource::named(CANNON, sym)
    }

    pub fn excl(v: AnyValue) -> Resource {
        Resource::Excl(v)
    }

    pub fn ag(vs: impl IntoIterator<Item = AnyValue>) -> Resource {
        Resource::Ag(vs.into_iter().collect()).canon()
    }

    pub fn frag(r: Resource) -> Resource {
        Resource::Auth { full: None, frag: Box::new(r) }.canon()
    }

    pub fn full(r: Resource) -> Resource {
        Resource::Auth { full: Some(Box::new(r)), frag: Box::new(Resource::Unit) }.canon()
    }

    pub fn auth(full: Option<Resource>, frag: Resource) -> Resource {
        Resource::Auth { full: full.map(Box::new), frag: Box::new(frag) }.canon()
    }

    pub fn map(entries: impl IntoIterator<Item = (AnyValue, Resource)>) -> Resource {
        Resource::Map(entries.into_iter().collect()).canon()
    }

    pub fn prod(a: Resource, b: Resource) -> Resource {
        Resource::Prod(Box::new(a), Box::new(b)).canon()
    }

    pub fn opt(r: Resource) -> Resource {
        Resource::Opt(Box::new(r)).canon()
    }

    pub fn is_unit(&self) -> bool {
        *self == Resource::Unit
    }

    /// Collapses units and propagates `Bad` to the root.
    pub fn canon(self) -> Resource {
        match self {
            Resource::Ag(s) if s.is_empty() => Resource::Unit,
            Resource::Auth { full, frag } => {
                let frag = frag.canon();
                let full = full.map(|f| f.canon());
                if frag == Resource::Bad || full.as_ref() == Some(&Resource::Bad) {
                    return Resource::Bad;
                }
                if full.is_none() && frag.is_unit() {
                    return Resource::Unit;
                }
                Resource::Auth { full: full.map(Box::new), frag: Box::new(frag) }
            }
            Resource::Map(m) => {
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    match v.canon() {
                        Resource::Unit => {}
                        Resource::Bad => return Resource::Bad,
                        v => {
                            out.insert(k, v);
                        }
                    }
                }
                if out.is_empty() {
                    Resource::Unit
                } else {
                    Resource::Map(out)
                }
            }
            Resource::Prod(a, b) => match (a.canon(), b.canon()) {
                (Resource::Bad, _) | (_, Resource::Bad) => Resource::Bad,
                (Resource::Unit, Resource::Unit) => Resource::Unit,
                (a, b) => Resource::Prod(Box::new(a), Box::new(b)),
            },
            Resource::Opt(r) => match r.canon() {
                Resource::Bad => Resource::Bad,
                r => Resource::Opt(Box::new(r)),
            },
            r => r,
        }
    }

    /// The algebra operation; structural, with `Named` sums looked up in the
    /// registry.
    pub fn add(&self, other: &Resource) -> Result<Resource, PcmError> {
        use Resource::*;
        let mismatch = || PcmError::Incompatible(self.to_string(), other.to_string());
        let r = match (self, other) {
            (Bad, _) | (_, Bad) => Bad,
            (Unit, x) | (x, Unit) => x.clone(),
            (Excl(_), Excl(_)) => Bad,
            (Ag(a), Ag(b)) => Ag(a.union(b).cloned().collect()),
            (Auth { full: fa, frag: ga }, Auth { full: fb, frag: gb }) => {
                let full = match (fa, fb) {
                    (Some(_), Some(_)) => return Ok(Bad),
                    (Some(f), None) | (None, Some(f)) => Some(f.clone()),
                    (None, None) => None,
                };
                Auth { full, frag: Box::new(ga.add(gb)?) }
            }
            (Map(a), Map(b)) => {
                let mut out = a.clone();
                for (k, v) in b {
                    let cur = out.remove(k).unwrap_or(Unit);
                    out.insert(k.clone(), cur.add(v)?);
                }
                Map(out)
            }
            (Prod(a1, b1), Prod(a2, b2)) => Prod(Box::new(a1.add(a2)?), Box::new(b1.add(b2)?)),
            (Opt(a), Opt(b)) => Opt(Box::new(a.add(b)?)),
            (Named(t1, a), Named(t2, b)) => {
                if t1 != t2 {
                    return Err(mismatch());
                }
                match with_table(t1, |t| t.sum(a, b).map(String::from))? {
                    Some(s) => Named(t1.clone(), s),
                    None => Bad,
                }
            }
            _ => return Err(mismatch()),
        };
        Ok(r.canon())
    }

    /// Sum that treats incompatible operands as `Bad`.
    pub fn plus(&self, other: &Resource) -> Resource {
        self.add(other).unwrap_or(Resource::Bad)
    }

    pub fn sum<'a>(rs: impl IntoIterator<Item = &'a Resource>) -> Resource {
        rs.into_iter().fold(Resource::Unit, |acc, r| acc.plus(r))
    }

    pub fn valid(&self) -> bool {
        use Resource::*;
        match self {
            Unit | Excl(_) | Named(..) => true,
            Bad => false,
            Ag(s) => s.len() <= 1,
            Auth { full, frag } => match full {
                None => frag.valid(),
                Some(f) => f.valid() && frag.included_in(f),
            },
            Map(m) => m.values().all(Resource::valid),
            Prod(a, b) => a.valid() && b.valid(),
            Opt(r) => r.valid(),
        }
    }

    /// `self ≼ other`: some frame `c` has `self + c = other`.
    pub fn included_in(&self, other: &Resource) -> bool {
        use Resource::*;
        if self == other || self.is_unit() || *other == Bad {
            return true;
        }
        match (self, other) {
            (Ag(a), Ag(b)) => a.is_subset(b),
            (Auth { full: fa, frag: ga }, Auth { full: fb, frag: gb }) => {
                let full_ok = match (fa, fb) {
                    (None, _) => true,
                    (Some(x), Some(y)) => x == y,
                    (Some(_), None) => false,
                };
                full_ok && ga.included_in(gb)
            }
            (Map(a), Map(b)) => a.iter().all(|(k, v)| b.get(k).is_some_and(|w| v.included_in(w))),
            (Prod(a1, b1), Prod(a2, b2)) => a1.included_in(a2) && b1.included_in(b2),
            (Opt(a), Opt(b)) => a.included_in(b),
            (Named(t, a), Named(t2, b)) if t == t2 => with_table(t, |tbl| {
                tbl.symbols.iter().any(|c| tbl.sum(a, c) == Some(b.as_str()))
            })
            .unwrap_or(false),
            _ => false,
        }
    }

    pub fn to_value(&self) -> AnyValue {
        use Resource::*;
        let t = AnyValue::tagged;
        match self {
            Unit => t("res.unit", AnyValue::Unit),
            Bad => t("res.bad", AnyValue::Unit),
            Excl(v) => t("res.excl", v.clone()),
            Ag(s) => t("res.ag", AnyValue::List(s.iter().cloned().collect())),
            Auth { full, frag } => t(
                "res.auth",
                AnyValue::pair(
                    AnyValue::Option(full.as_ref().map(|f| Box::new(f.to_value()))),
                    frag.to_value(),
                ),
            ),
            Map(m) => t(
                "res.map",
                AnyValue::List(m.iter().map(|(k, v)| AnyValue::pair(k.clone(), v.to_value())).collect()),
            ),
            Prod(a, b) => t("res.prod", AnyValue::pair(a.to_value(), b.to_value())),
            Opt(r) => t("res.opt", r.to_value()),
            Named(tag, s) => t("res.named", AnyValue::pair(AnyValue::str(tag), AnyValue::str(s))),
        }
    }

    pub fn from_value(v: &AnyValue) -> Result<Resource, PcmError> {
        let bad = || PcmError::NotAResource(v.to_string());
        let AnyValue::Tagged(tag, inner) = v else { return Err(bad()) };
        let inner = inner.as_ref();
        let r = match tag.as_str() {
            "res.unit" => Resource::Unit,
            "res.bad" => Resource::Bad,
            "res.excl" => Resource::Excl(inner.clone()),
            "res.ag" => Resource::Ag(inner.as_list().ok_or_else(bad)?.iter().cloned().collect()),
            "res.auth" => {
                let (full, frag) = inner.as_pair().ok_or_else(bad)?;
                let full = match full {
                    AnyValue::Option(None) => None,
                    AnyValue::Option(Some(f)) => Some(Box::new(Resource::from_value(f)?)),
                    _ => return Err(bad()),
                };
                Resource::Auth { full, frag: Box::new(Resource::from_value(frag)?) }
            }
            "res.map" => {
                let mut m = BTreeMap::new();
                for e in inner.as_list().ok_or_else(bad)? {
                    let (k, r) = e.as_pair().ok_or_else(bad)?;
                    m.insert(k.clone(), Resource::from_value(r)?);
                }
                Resource::Map(m)
            }
            "res.prod" => {
                let (a, b) = inner.as_pair().ok_or_else(bad)?;
                Resource::Prod(Box::new(Resource::from_value(a)?), Box::new(Resource::from_value(b)?))
            }
            "res.opt" => Resource::Opt(Box::new(Resource::from_value(inner)?)),
            "res.named" => {
                let (t, s) = inner.as_pair().ok_or_else(bad)?;
                Resource::named(t.as_str().ok_or_else(bad)?, s.as_str().ok_or_else(bad)?)
            }
            _ => return Err(bad()),
        };
        Ok(r.canon())
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Resource::*;
        match self {
            Unit => write!(f, "ε"),
            Bad => write!(f, "↯"),
            Excl(v) => write!(f, "Ex({v})"),
            Ag(s) => {
                write!(f, "Ag{{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            Auth { full, frag } => {
                if let Some(x) = full {
                    write!(f, "●{x}")?;
                    if !frag.is_unit() {
                        write!(f, "⋅")?;
                    }
                }
                if !frag.is_unit() || full.is_none() {
                    write!(f, "◯{frag}")?;
                }
                Ok(())
            }
            Map(m) => {
                write!(f, "[")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}↦{v}")?;
                }
                write!(f, "]")
            }
            Prod(a, b) => write!(f, "({a}, {b})"),
            Opt(r) => write!(f, "Some({r})"),
            Named(_, s) => write!(f, "{s}"),
        }
    }
}

/// Shape of an algebra, used for carrier checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PcmKind {
    Excl,
    Ag,
    Auth(Box<PcmKind>),
    FinMap(Box<PcmKind>),
    Prod(Box<PcmKind>, Box<PcmKind>),
    Opt(Box<PcmKind>),
    Named(String),
    /// A product indexed by component name, stored as a map keyed by
    /// `Str(name)`.
    Record(BTreeMap<String, PcmKind>),
}

impl PcmKind {
    pub fn contains(&self, r: &Resource) -> bool {
        use Resource as R;
        if matches!(r, R::Unit | R::Bad) {
            return true;
        }
        match (self, r) {
            (PcmKind::Excl, R::Excl(_)) => true,
            (PcmKind::Ag, R::Ag(_)) => true,
            (PcmKind::Auth(k), R::Auth { full, frag }) => {
                full.as_deref().is_none_or(|x| k.contains(x)) && k.contains(frag)
            }
            (PcmKind::FinMap(k), R::Map(m)) => m.values().all(|v| k.contains(v)),
            (PcmKind::Prod(ka, kb), R::Prod(a, b)) => ka.contains(a) && kb.contains(b),
            (PcmKind::Opt(k), R::Opt(x)) => k.contains(x),
            (PcmKind::Named(t), R::Named(t2, s)) => {
                t == t2 && with_table(t, |tbl| tbl.symbols.contains(s)).unwrap_or(false)
            }
            (PcmKind::Record(ks), R::Map(m)) => m.iter().all(|(k, v)| {
                k.as_str().and_then(|n| ks.get(n)).is_some_and(|kind| kind.contains(v))
            }),
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pcm {
    pub name: String,
    pub kind: PcmKind,
    pub universe: Option<Vec<Resource>>,
}

impl Pcm {
    pub fn new(name: impl Into<String>, kind: PcmKind) -> Pcm {
        Pcm { name: name.into(), kind, universe: None }
    }

    pub fn with_universe(mut self, u: Vec<Resource>) -> Pcm {
        self.universe = Some(u);
        self
    }

    pub fn unit(&self) -> Resource {
        Resource::Unit
    }

    fn check(&self, r: &Resource) -> Result<(), PcmError> {
        if self.kind.contains(r) {
            Ok(())
        } else {
            Err(PcmError::CarrierMismatch(r.to_string(), self.name.clone()))
        }
    }

    pub fn add(&self, a: &Resource, b: &Resource) -> Result<Resource, PcmError> {
        self.check(a)?;
        self.check(b)?;
        a.add(b)
    }

    pub fn valid(&self, a: &Resource) -> Result<bool, PcmError> {
        self.check(a)?;
        Ok(a.valid())
    }

    fn universe(&self) -> Result<&[Resource], PcmError> {
        self.universe.as_deref().ok_or_else(|| PcmError::UniverseMissing(self.name.clone()))
    }

    /// Frame-preserving update, decided over the universe (plus the unit
    /// frame).
    pub fn fpu(&self, from: &Resource, to: &Resource) -> Result<bool, PcmError> {
        let u = self.universe()?;
        let ok = |f: &Resource| !from.plus(f).valid() || to.plus(f).valid();
        Ok(ok(&Resource::Unit) && u.iter().all(ok))
    }

    pub fn upd_modality(&self, r: &Resource, p: impl Fn(&Resource) -> bool) -> Result<bool, PcmError> {
        let u = self.universe()?;
        for cand in std::iter::once(r).chain(u.iter()) {
            if p(cand) && self.fpu(r, cand)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

pub fn excl() -> PcmKind {
    PcmKind::Excl
}

pub fn ag() -> PcmKind {
    PcmKind::Ag
}

pub fn auth(inner: PcmKind) -> PcmKind {
    PcmKind::Auth(Box::new(inner))
}

pub fn finmap(inner: PcmKind) -> PcmKind {
    PcmKind::FinMap(Box::new(inner))
}

pub fn prod(a: PcmKind, b: PcmKind) -> PcmKind {
    PcmKind::Prod(Box::new(a), Box::new(b))
}

pub fn opt(inner: PcmKind) -> PcmKind {
    PcmKind::Opt(Box::new(inner))
}

pub fn named(tag: &str) -> PcmKind {
    PcmKind::Named(tag.to_string())
}

/// The six-element cannon algebra.
pub fn cannon_pcm() -> Pcm {
    let mut u = vec![Resource::Unit];
    u.extend(["Ball", "Ready", "Fired", "Loaded"].map(Resource::cannon));
    u.push(Resource::Bad);
    Pcm::new(CANNON, named(CANNON)).with_universe(u)
}

/// `Auth(ptr → Ex(val))`.
pub fn mem_kind() -> PcmKind {
    auth(finmap(excl()))
}

pub fn cell_key(a: &Address) -> AnyValue {
    AnyValue::Addr(a.clone())
}

/// The fragment owning `p, p+8, …` with the given contents.
pub fn points_to(p: &Address, vs: &[ImpValue]) -> Resource {
    if vs.is_empty() {
        return Resource::Unit;
    }
    let mut m = BTreeMap::new();
    for (i, v) in vs.iter().enumerate() {
        let Some(a) = p.shift(8 * i as i64) else { return Resource::Bad };
        if m.insert(cell_key(&a), Resource::Excl(upcast_val(v))).is_some() {
            return Resource::Bad;
        }
    }
    Resource::frag(Resource::Map(m))
}

/// The authoritative heap owned by the memory module.
pub fn heap_full(cells: &BTreeMap<Address, AnyValue>) -> Resource {
    Resource::full(Resource::Map(
        cells.iter().map(|(a, v)| (cell_key(a), Resource::Excl(v.clone()))).collect(),
    ))
}

/// Memory universe: fragments and authoritative parts over the cells of
/// `blocks × offsets` holding values from `vals`.
pub fn mem_pcm(blocks: &[u64], offsets: &[i64], vals: &[AnyValue]) -> Pcm {
    let cells: Vec<AnyValue> = blocks
        .iter()
        .flat_map(|b| offsets.iter().map(move |o| cell_key(&Address::heap(*b, *o))))
        .collect();
    let mut maps = vec![BTreeMap::new()];
    for c in &cells {
        let mut next = vec![];
        for m in &maps {
            next.push(m.clone());
            for v in vals {
                let mut m2 = m.clone();
                m2.insert(c.clone(), Resource::Excl(v.clone()));
                next.push(m2);
            }
        }
        maps = next;
    }
    let mut u = vec![Resource::Bad];
    for m in &maps {
        u.push(Resource::frag(Resource::Map(m.clone())));
        u.push(Resource::full(Resource::Map(m.clone())));
    }
    u.sort();
    u.dedup();
    Pcm::new("mem", mem_kind()).with_universe(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cannon_table_examples() {
        let ball = Resource::cannon("Ball");
        assert_eq!(Resource::Unit.add(&ball).unwrap(), ball);
        assert_eq!(ball.add(&ball).unwrap(), Resource::Bad);
        assert!(!Resource::Bad.valid());
        assert_eq!(ball.plus(&Resource::cannon("Ready")), Resource::cannon("Loaded"));
    }

    #[test]
    fn cannon_fpu() {
        let p = cannon_pcm();
        let from = Resource::cannon("Ready").plus(&Resource::cannon("Ball"));
        assert!(p.fpu(&from, &Resource::cannon("Fired")).unwrap());
        let two = Resource::cannon("Ball").plus(&Resource::cannon("Ball"));
        assert!(!p.fpu(&Resource::cannon("Ready"), &two).unwrap());
        assert!(p.upd_modality(&from, |x| *x == Resource::cannon("Fired")).unwrap());
        assert!(p.upd_modality(&Resource::Bad, |_| true).unwrap());
        assert!(Pcm::new("x", excl()).fpu(&Resource::Unit, &Resource::Unit).is_err());
    }

    #[test]
    fn excl_and_ag() {
        let a = Resource::excl(AnyValue::Int(1));
        let b = Resource::excl(AnyValue::Int(2));
        assert_eq!(a.add(&b).unwrap(), Resource::Bad);
        let g = Resource::ag([AnyValue::Int(1)]);
        assert_eq!(g.add(&g).unwrap(), g);
        assert!(g.valid());
        assert!(!g.plus(&Resource::ag([AnyValue::Int(2)])).valid());
    }

    #[test]
    fn prod_pointwise() {
        let x = Resource::prod(Resource::ag([AnyValue::Int(1)]), Resource::Unit);
        let y = Resource::prod(Resource::Unit, Resource::excl(AnyValue::Int(3)));
        assert_eq!(
            x.add(&y).unwrap(),
            Resource::prod(Resource::ag([AnyValue::Int(1)]), Resource::excl(AnyValue::Int(3)))
        );
    }

    #[test]
    fn points_to_laws() {
        let p = Address::heap(0, 0);
        let v = ImpValue::VInt(1);
        let w = ImpValue::VInt(2);
        assert_eq!(points_to(&p, &[]), Resource::Unit);
        assert_eq!(
            points_to(&p, &[v.clone(), w.clone()]),
            points_to(&p, std::slice::from_ref(&v)).plus(&points_to(&p.shift(8).unwrap(), std::slice::from_ref(&w)))
        );
        assert_eq!(points_to(&p, &[v]).plus(&points_to(&p, &[w])), Resource::Bad);
    }

    #[test]
    fn auth_validity() {
        let mut cells = BTreeMap::new();
        cells.insert(Address::heap(0, 0), AnyValue::Int(5));
        let full = heap_full(&cells);
        let frag = points_to(&Address::heap(0, 0), &[ImpValue::VInt(5)]);
        assert!(full.plus(&frag).valid());
        let wrong = points_to(&Address::heap(0, 0), &[ImpValue::VInt(6)]);
        assert!(!full.plus(&wrong).valid());
        assert!(!full.plus(&full).valid());
    }

    #[test]
    fn encoding_round_trip() {
        let r = Resource::auth(
            Some(Resource::map([(AnyValue::Int(1), Resource::excl(AnyValue::Int(2)))])),
            Resource::prod(Resource::cannon("Ball"), Resource::opt(Resource::ag([AnyValue::Int(0)]))),
        );
        assert_eq!(Resource::from_value(&r.to_value()).unwrap(), r);
        assert!(Resource::from_value(&AnyValue::Int(1)).is_err());
    }

    #[test]
    fn carrier_checks() {
        let p = Pcm::new("mem", mem_kind());
        assert!(p.add(&Resource::cannon("Ball"), &Resource::Unit).is_err());
        assert!(Resource::cannon("Ball").add(&Resource::excl(AnyValue::Int(1))).is_err());
    }
}
