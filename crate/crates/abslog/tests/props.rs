mod common;

use abslog::behavior::{enumerate_stack, included, EnumConfig, Terminal};
use abslog::imp::{embed, parse, render};
use abslog::kernel::{bind, fundef, take, Domain, ModStack, ModuleSem, Prog};
use abslog::pcm::{cannon_pcm, mem_pcm, points_to, Resource};
use abslog::values::{downcast_val, measure_lt, upcast_val, Address, AnyValue, ImpValue, Ordinal};
use common::{gen_ctx, gen_det_program, plug, Fill};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn value() -> impl Strategy<Value = AnyValue> {
    let leaf = prop_oneof![
        any::<i64>().prop_map(AnyValue::Int),
        "[a-z]{0,4}".prop_map(AnyValue::Str),
        any::<bool>().prop_map(AnyValue::Bool),
        Just(AnyValue::Unit),
        (0u64..4, -16i64..16).prop_map(|(b, o)| AnyValue::Addr(Address::heap(b, o))),
        "[A-Z][a-z]{0,3}\\.[a-z]{1,3}".prop_map(|f| AnyValue::Addr(Address::func(f))),
        (0u64..3, 0u64..5).prop_map(|(w, n)| AnyValue::Ord(Ordinal::new(w, n))),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| AnyValue::pair(a, b)),
            prop::collection::vec(inner.clone(), 0..4).prop_map(AnyValue::List),
            prop::option::of(inner.clone()).prop_map(|o| AnyValue::Option(o.map(Box::new))),
            ("[a-z]{1,3}", inner).prop_map(|(t, v)| AnyValue::tagged(t, v)),
        ]
    })
}

fn resource_from(u: Vec<Resource>) -> impl Strategy<Value = Resource> {
    prop::sample::select(u)
}

fn mem_universe() -> Vec<Resource> {
    mem_pcm(&[0, 1], &[0, 8], &[AnyValue::Int(0), AnyValue::Int(1)]).universe.unwrap()
}

fn beh(p: impl Fn() -> Prog + Send + Sync + 'static, budget: usize) -> abslog::behavior::BehSet {
    let m = ModuleSem::new("K", AnyValue::Unit).with_fun("main", fundef(move |_| p()));
    enumerate_stack(&ModStack::single(m), "K.main", AnyValue::Unit, budget, &EnumConfig::default()).unwrap()
}

proptest! {
    #[test]
    fn value_json_round_trip(v in value()) {
        prop_assert_eq!(AnyValue::from_json(&v.to_json()).unwrap(), v);
    }

    #[test]
    fn imp_value_cast_round_trip(i in any::<i64>(), b in 0u64..8, o in -64i64..64) {
        for v in [ImpValue::VInt(i), ImpValue::VPtr(Address::heap(b, o)), ImpValue::VUndef] {
            prop_assert_eq!(downcast_val(&upcast_val(&v)), Some(v.clone()));
        }
    }

    #[test]
    fn measure_order_is_strict(a in (0u64..3, 0u64..5), b in (0u64..3, 0u64..5), c in (0u64..3, 0u64..5)) {
        let m = |(w, n): (u64, u64)| Some(Ordinal::new(w, n));
        prop_assert!(!measure_lt(&m(a), &m(a)));
        prop_assert!(!(measure_lt(&m(a), &m(b)) && measure_lt(&m(b), &m(a))));
        if measure_lt(&m(a), &m(b)) && measure_lt(&m(b), &m(c)) {
            prop_assert!(measure_lt(&m(a), &m(c)));
        }
        prop_assert!(measure_lt(&m(a), &None));
    }

    #[test]
    fn mem_algebra_laws(
        a in resource_from(mem_universe()),
        b in resource_from(mem_universe()),
        c in resource_from(mem_universe()),
    ) {
        prop_assert_eq!(a.plus(&b), b.plus(&a));
        prop_assert_eq!(a.plus(&b).plus(&c), a.plus(&b.plus(&c)));
        prop_assert_eq!(a.plus(&Resource::Unit), a.clone());
        if a.plus(&b).valid() {
            prop_assert!(a.valid() && b.valid());
            prop_assert!(a.included_in(&a.plus(&b)));
        }
    }

    #[test]
    fn cannon_fpu_respects_frames(a in resource_from(cannon_pcm().universe.unwrap()), b in resource_from(cannon_pcm().universe.unwrap())) {
        let p = cannon_pcm();
        if p.fpu(&a, &b).unwrap() {
            for f in p.universe.clone().unwrap() {
                prop_assert!(!a.plus(&f).valid() || b.plus(&f).valid());
            }
        }
        prop_assert!(p.fpu(&a, &a).unwrap());
    }

    #[test]
    fn points_to_splits(vs in prop::collection::vec(-3i64..3, 1..7), b in 0u64..4, o in 0i64..4) {
        let p = Address::heap(b, 8 * o);
        let vals: Vec<_> = vs.iter().map(|v| ImpValue::VInt(*v)).collect();
        let k = vals.len() / 2;
        let q = p.shift(8 * k as i64).unwrap();
        prop_assert_eq!(points_to(&p, &vals), points_to(&p, &vals[..k]).plus(&points_to(&q, &vals[k..])));
        prop_assert!(points_to(&p, &vals).valid());
        prop_assert!(!points_to(&p, &vals).plus(&points_to(&p, &vals)).valid());
    }

    #[test]
    fn guarantee_assume_is_skip_or_less(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = gen_ctx(&mut rng, 3);
        let (c1, c2) = (ctx.clone(), ctx);
        let lhs = beh(move || plug(&c1, Fill::GuaranteeAssume, 0), 10);
        let rhs = beh(move || plug(&c2, Fill::Skip, 0), 10);
        prop_assert!(included(&lhs, &rhs).holds());
    }

    #[test]
    fn take_is_intersection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (gen_ctx(&mut rng, 2), gen_ctx(&mut rng, 2));
        let (a1, b1, a2, b2) = (a.clone(), b.clone(), a, b);
        let both = beh(move || {
            let (a, b) = (a1.clone(), b1.clone());
            bind(take(Domain::bools()), move |v| {
                if v == AnyValue::Bool(true) { plug(&a, Fill::Skip, 0) } else { plug(&b, Fill::Skip, 0) }
            })
        }, 8);
        let sep = beh(move || plug(&a2, Fill::Skip, 0), 8).intersect(beh(move || plug(&b2, Fill::Skip, 0), 8));
        prop_assert_eq!(both, sep);
    }

    #[test]
    fn budget_only_adds_traces(seed in any::<u64>(), n in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = gen_ctx(&mut rng, 3);
        let (c1, c2) = (ctx.clone(), ctx);
        let small = beh(move || plug(&c1, Fill::Skip, 0), n);
        let large = beh(move || plug(&c2, Fill::Skip, 0), n + 4);
        for t in small.traces().into_iter().filter(|t| t.terminal != Terminal::Partial) {
            prop_assert!(large.covers(&t), "{}", t);
        }
    }

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = gen_det_program(&mut rng);
        let m = parse(&src).unwrap();
        let again = parse(&render(&m)).unwrap();
        prop_assert_eq!(&again, &m);
        prop_assert_eq!(render(&again), render(&m));
        let b = enumerate_stack(&ModStack::single(embed(&m)), "M.main", AnyValue::List(vec![]), 1000, &EnumConfig::default()).unwrap();
        prop_assert_eq!(b.traces().len(), 1);
    }
}
