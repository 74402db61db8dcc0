//! The value universe shared by every module boundary.

use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

/// A location: a heap cell `(block, offset)` or a function entry point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Address {
    Heap { block: u64, off: i64 },
    Fn(String),
}

impl Address {
    pub fn heap(block: u64, off: i64) -> Self {
        Address::Heap { block, off }
    }

    pub fn func(name: impl Into<String>) -> Self {
        Address::Fn(name.into())
    }

    pub fn offset(&self) -> i64 {
        match self {
            Address::Heap { off, .. } => *off,
            Address::Fn(_) => 0,
        }
    }

    /// Pointer arithmetic in bytes. Function addresses do not move.
    pub fn shift(&self, delta: i64) -> Option<Address> {
        match self {
            Address::Heap { block, off } => Some(Address::Heap {
                block: *block,
                off: off.wrapping_add(delta),
            }),
            Address::Fn(_) => None,
        }
    }
}

/// `ω·omega + fin`, an ordinal below ω².
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ordinal {
    pub omega: u64,
    pub fin: u64,
}

impl Ordinal {
    pub const fn new(omega: u64, fin: u64) -> Self {
        Ordinal { omega, fin }
    }

    pub const fn nat(n: u64) -> Self {
        Ordinal { omega: 0, fin: n }
    }

    pub const OMEGA: Ordinal = Ordinal { omega: 1, fin: 0 };

    /// Largest ordinals strictly below `self` that the helper can produce:
    /// `ω·k+n` steps to `ω·k+(n-1)`, and `ω·k` steps to `ω·(k-1)+bound`.
    pub fn predecessor(&self, bound: u64) -> Option<Ordinal> {
        if self.fin > 0 {
            Some(Ordinal::new(self.omega, self.fin - 1))
        } else if self.omega > 0 {
            Some(Ordinal::new(self.omega - 1, bound))
        } else {
            None
        }
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.omega, self.fin) {
            (0, n) => write!(f, "{n}"),
            (1, 0) => write!(f, "ω"),
            (1, n) => write!(f, "ω+{n}"),
            (k, 0) => write!(f, "ω·{k}"),
            (k, n) => write!(f, "ω·{k}+{n}"),
        }
    }
}

pub fn ord_lt(a: &Ordinal, b: &Ordinal) -> bool {
    a < b
}

/// `None` is the impure measure; `Some o` marks a pure call bounded by `o`.
pub type Measure = Option<Ordinal>;

pub fn measure_lt(d1: &Measure, d2: &Measure) -> bool {
    match (d1, d2) {
        (_, None) => true,
        (Some(a), Some(b)) => ord_lt(a, b),
        (None, Some(_)) => false,
    }
}

/// `d ≥ Some o`.
pub fn measure_ge(d: &Measure, o: &Ordinal) -> bool {
    matches!(d, Some(x) if x >= o)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnyValue {
    Int(i64),
    Str(String),
    Bool(bool),
    Unit,
    Pair(Box<AnyValue>, Box<AnyValue>),
    List(Vec<AnyValue>),
    Option(Option<Box<AnyValue>>),
    Addr(Address),
    Ord(Ordinal),
    Tagged(String, Box<AnyValue>),
}

impl AnyValue {
    pub fn pair(a: AnyValue, b: AnyValue) -> Self {
        AnyValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn some(v: AnyValue) -> Self {
        AnyValue::Option(Some(Box::new(v)))
    }

    pub fn none() -> Self {
        AnyValue::Option(None)
    }

    pub fn str(s: impl Into<String>) -> Self {
        AnyValue::Str(s.into())
    }

    pub fn tagged(tag: impl Into<String>, v: AnyValue) -> Self {
        AnyValue::Tagged(tag.into(), Box::new(v))
    }

    pub fn ints(xs: &[i64]) -> Self {
        AnyValue::List(xs.iter().map(|&i| AnyValue::Int(i)).collect())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AnyValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AnyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AnyValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[AnyValue]> {
        match self {
            AnyValue::List(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&AnyValue, &AnyValue)> {
        match self {
            AnyValue::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn into_pair(self) -> Option<(AnyValue, AnyValue)> {
        match self {
            AnyValue::Pair(a, b) => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn as_addr(&self) -> Option<&Address> {
        match self {
            AnyValue::Addr(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_tagged(&self, tag: &str) -> Option<&AnyValue> {
        match self {
            AnyValue::Tagged(t, v) if t == tag => Some(v),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            AnyValue::Int(i) => json!({ "int": i }),
            AnyValue::Str(s) => json!({ "str": s }),
            AnyValue::Bool(b) => json!({ "bool": b }),
            AnyValue::Unit => json!({ "unit": null }),
            AnyValue::Pair(a, b) => json!({ "pair": [a.to_json(), b.to_json()] }),
            AnyValue::List(xs) => json!({ "list": xs.iter().map(AnyValue::to_json).collect::<Vec<_>>() }),
            AnyValue::Option(None) => json!({ "none": null }),
            AnyValue::Option(Some(v)) => json!({ "some": v.to_json() }),
            AnyValue::Addr(Address::Heap { block, off }) => {
                json!({ "addr": { "block": block, "off": off } })
            }
            AnyValue::Addr(Address::Fn(name)) => json!({ "addr": { "fn": name } }),
            AnyValue::Ord(o) => json!({ "ord": [o.omega, o.fin] }),
            AnyValue::Tagged(t, v) => json!({ "tagged": { "tag": t, "val": v.to_json() } }),
        }
    }

    pub fn from_json(j: &Json) -> Result<AnyValue, ValueError> {
        let bad = || ValueError::Json(j.to_string());
        let obj = j.as_object().ok_or_else(bad)?;
        if obj.len() != 1 {
            return Err(bad());
        }
        let (k, v) = obj.iter().next().ok_or_else(bad)?;
        Ok(match k.as_str() {
            "int" => AnyValue::Int(v.as_i64().ok_or_else(bad)?),
            "str" => AnyValue::Str(v.as_str().ok_or_else(bad)?.to_string()),
            "bool" => AnyValue::Bool(v.as_bool().ok_or_else(bad)?),
            "unit" => AnyValue::Unit,
            "none" => AnyValue::Option(None),
            "some" => AnyValue::some(AnyValue::from_json(v)?),
            "pair" => {
                let xs = v.as_array().filter(|xs| xs.len() == 2).ok_or_else(bad)?;
                AnyValue::pair(AnyValue::from_json(&xs[0])?, AnyValue::from_json(&xs[1])?)
            }
            "list" => AnyValue::List(
                v.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(AnyValue::from_json)
                    .collect::<Result<_, _>>()?,
            ),
            "addr" => {
                if let Some(name) = v.get("fn").and_then(Json::as_str) {
                    AnyValue::Addr(Address::func(name))
                } else {
                    let block = v.get("block").and_then(Json::as_u64).ok_or_else(bad)?;
                    let off = v.get("off").and_then(Json::as_i64).ok_or_else(bad)?;
                    AnyValue::Addr(Address::heap(block, off))
                }
            }
            "ord" => {
                let xs = v.as_array().filter(|xs| xs.len() == 2).ok_or_else(bad)?;
                let k = xs[0].as_u64().ok_or_else(bad)?;
                let n = xs[1].as_u64().ok_or_else(bad)?;
                AnyValue::Ord(Ordinal::new(k, n))
            }
            "tagged" => {
                let tag = v.get("tag").and_then(Json::as_str).ok_or_else(bad)?;
                let val = v.get("val").ok_or_else(bad)?;
                AnyValue::tagged(tag, AnyValue::from_json(val)?)
            }
            _ => return Err(bad()),
        })
    }
}

impl From<i64> for AnyValue {
    fn from(i: i64) -> Self {
        AnyValue::Int(i)
    }
}

impl From<bool> for AnyValue {
    fn from(b: bool) -> Self {
        AnyValue::Bool(b)
    }
}

impl From<&str> for AnyValue {
    fn from(s: &str) -> Self {
        AnyValue::Str(s.to_string())
    }
}

impl fmt::Display for AnyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyValue::Int(i) => write!(f, "{i}"),
            AnyValue::Str(s) => write!(f, "{s:?}"),
            AnyValue::Bool(b) => write!(f, "{b}"),
            AnyValue::Unit => write!(f, "()"),
            AnyValue::Pair(a, b) => write!(f, "({a}, {b})"),
            AnyValue::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            AnyValue::Option(None) => write!(f, "None"),
            AnyValue::Option(Some(v)) => write!(f, "Some({v})"),
            AnyValue::Addr(Address::Heap { block, off }) => write!(f, "&b{block}+{off}"),
            AnyValue::Addr(Address::Fn(name)) => write!(f, "&{name}"),
            AnyValue::Ord(o) => write!(f, "{o}"),
            AnyValue::Tagged(t, v) => write!(f, "{t}<{v}>"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValueError {
    #[error("not a tagged value rendering: {0}")]
    Json(String),
}

/// IMP's machine values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ImpValue {
    VInt(i64),
    VPtr(Address),
    VUndef,
}

impl ImpValue {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            ImpValue::VInt(i) => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for ImpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImpValue::VInt(i) => write!(f, "{i}"),
            ImpValue::VPtr(a) => write!(f, "{}", AnyValue::Addr(a.clone())),
            ImpValue::VUndef => write!(f, "undef"),
        }
    }
}

/// Carrier descriptors accepted by [`downcast`] and [`unpack_args`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Carrier {
    Int64,
    Val,
    Ptr,
    ListVal,
    ListInt64,
    Ordinal,
    Bool,
    Text,
}

/// A host value tagged with its carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Typed {
    Int64(i64),
    Val(ImpValue),
    Ptr(Address),
    ListVal(Vec<ImpValue>),
    ListInt64(Vec<i64>),
    Ordinal(Ordinal),
    Bool(bool),
    Text(String),
    Unit,
    Pair(Box<Typed>, Box<Typed>),
    Opt(Option<Box<Typed>>),
}

impl Typed {
    pub fn carrier(&self) -> Option<Carrier> {
        Some(match self {
            Typed::Int64(_) => Carrier::Int64,
            Typed::Val(_) => Carrier::Val,
            Typed::Ptr(_) => Carrier::Ptr,
            Typed::ListVal(_) => Carrier::ListVal,
            Typed::ListInt64(_) => Carrier::ListInt64,
            Typed::Ordinal(_) => Carrier::Ordinal,
            Typed::Bool(_) => Carrier::Bool,
            Typed::Text(_) => Carrier::Text,
            Typed::Unit | Typed::Pair(..) | Typed::Opt(_) => return None,
        })
    }
}

const UNDEF_TAG: &str = "undef";

pub fn upcast_val(v: &ImpValue) -> AnyValue {
    match v {
        ImpValue::VInt(i) => AnyValue::Int(*i),
        ImpValue::VPtr(a) => AnyValue::Addr(a.clone()),
        ImpValue::VUndef => AnyValue::tagged(UNDEF_TAG, AnyValue::Unit),
    }
}

pub fn downcast_val(a: &AnyValue) -> Option<ImpValue> {
    match a {
        AnyValue::Int(i) => Some(ImpValue::VInt(*i)),
        AnyValue::Addr(p) => Some(ImpValue::VPtr(p.clone())),
        AnyValue::Tagged(t, v) if t == UNDEF_TAG && **v == AnyValue::Unit => Some(ImpValue::VUndef),
        _ => None,
    }
}

pub fn upcast_vals(vs: &[ImpValue]) -> AnyValue {
    AnyValue::List(vs.iter().map(upcast_val).collect())
}

pub fn upcast(x: &Typed) -> AnyValue {
    match x {
        Typed::Int64(i) => AnyValue::Int(*i),
        Typed::Val(v) => upcast_val(v),
        Typed::Ptr(p) => AnyValue::Addr(p.clone()),
        Typed::ListVal(vs) => upcast_vals(vs),
        Typed::ListInt64(xs) => AnyValue::ints(xs),
        Typed::Ordinal(o) => AnyValue::Ord(*o),
        Typed::Bool(b) => AnyValue::Bool(*b),
        Typed::Text(s) => AnyValue::Str(s.clone()),
        Typed::Unit => AnyValue::Unit,
        Typed::Pair(a, b) => AnyValue::pair(upcast(a), upcast(b)),
        Typed::Opt(o) => AnyValue::Option(o.as_ref().map(|v| Box::new(upcast(v)))),
    }
}

pub fn downcast(a: &AnyValue, target: Carrier) -> Option<Typed> {
    match target {
        Carrier::Int64 => a.as_int().map(Typed::Int64),
        Carrier::Val => downcast_val(a).map(Typed::Val),
        Carrier::Ptr => a.as_addr().cloned().map(Typed::Ptr),
        Carrier::ListVal => a
            .as_list()?
            .iter()
            .map(downcast_val)
            .collect::<Option<Vec<_>>>()
            .map(Typed::ListVal),
        Carrier::ListInt64 => a
            .as_list()?
            .iter()
            .map(AnyValue::as_int)
            .collect::<Option<Vec<_>>>()
            .map(Typed::ListInt64),
        Carrier::Ordinal => match a {
            AnyValue::Ord(o) => Some(Typed::Ordinal(*o)),
            _ => None,
        },
        Carrier::Bool => a.as_bool().map(Typed::Bool),
        Carrier::Text => a.as_str().map(|s| Typed::Text(s.to_string())),
    }
}

/// The `[p: ptr, v: val]?` discipline: an upcast list of exactly `arity`
/// values, each of the stated kind.
pub fn unpack_args(a: &AnyValue, arity: usize, kinds: &[Carrier]) -> Option<Vec<ImpValue>> {
    let items = a.as_list()?;
    if items.len() != arity || kinds.len() != arity {
        return None;
    }
    items
        .iter()
        .zip(kinds)
        .map(|(item, kind)| match kind {
            Carrier::Int64 => item.as_int().map(ImpValue::VInt),
            Carrier::Ptr => item.as_addr().cloned().map(ImpValue::VPtr),
            Carrier::Val => downcast_val(item),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upcast_examples() {
        assert_eq!(upcast(&Typed::Int64(5)), AnyValue::Int(5));
        assert_eq!(
            upcast(&Typed::ListVal(vec![ImpValue::VPtr(Address::heap(0, 0)), ImpValue::VInt(7)])),
            AnyValue::List(vec![AnyValue::Addr(Address::heap(0, 0)), AnyValue::Int(7)])
        );
        assert_eq!(upcast(&Typed::Unit), AnyValue::Unit);
    }

    #[test]
    fn downcast_examples() {
        assert_eq!(downcast(&AnyValue::Int(5), Carrier::Int64), Some(Typed::Int64(5)));
        assert_eq!(downcast(&AnyValue::str("x"), Carrier::Int64), None);
        let l = AnyValue::List(vec![AnyValue::Addr(Address::heap(0, 0)), AnyValue::Int(7)]);
        assert_eq!(
            downcast(&l, Carrier::ListVal),
            Some(Typed::ListVal(vec![ImpValue::VPtr(Address::heap(0, 0)), ImpValue::VInt(7)]))
        );
    }

    #[test]
    fn unpack_examples() {
        let p = Address::heap(1, 8);
        let a = upcast_vals(&[ImpValue::VPtr(p.clone()), ImpValue::VInt(3)]);
        assert_eq!(
            unpack_args(&a, 2, &[Carrier::Ptr, Carrier::Val]),
            Some(vec![ImpValue::VPtr(p), ImpValue::VInt(3)])
        );
        let short = upcast_vals(&[ImpValue::VInt(3)]);
        assert_eq!(unpack_args(&short, 2, &[Carrier::Ptr, Carrier::Val]), None);
        assert_eq!(unpack_args(&AnyValue::List(vec![]), 0, &[]), Some(vec![]));
        let not_ptr = upcast_vals(&[ImpValue::VInt(0), ImpValue::VInt(3)]);
        assert_eq!(unpack_args(&not_ptr, 2, &[Carrier::Ptr, Carrier::Val]), None);
    }

    #[test]
    fn measure_order() {
        assert!(measure_lt(&Some(Ordinal::nat(1)), &Some(Ordinal::nat(2))));
        assert!(measure_lt(&None, &None));
        assert!(!measure_lt(&Some(Ordinal::OMEGA), &Some(Ordinal::OMEGA)));
        assert!(!measure_lt(&None, &Some(Ordinal::nat(0))));
        assert!(measure_lt(&Some(Ordinal::nat(100)), &Some(Ordinal::OMEGA)));
    }

    #[test]
    fn json_shapes() {
        assert_eq!(AnyValue::Int(5).to_json().to_string(), r#"{"int":5}"#);
        assert_eq!(
            AnyValue::Addr(Address::heap(0, 8)).to_json().to_string(),
            r#"{"addr":{"block":0,"off":8}}"#
        );
        let v = AnyValue::pair(AnyValue::ints(&[1, 2]), AnyValue::some(AnyValue::Ord(Ordinal::new(1, 3))));
        assert_eq!(AnyValue::from_json(&v.to_json()), Ok(v));
    }

    #[test]
    fn undef_round_trips() {
        let u = upcast_val(&ImpValue::VUndef);
        assert_eq!(downcast_val(&u), Some(ImpValue::VUndef));
    }
}
