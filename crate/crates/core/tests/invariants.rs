//! Randomized invariants of kernels and operators.

use maxmin::{
    build_lattice, empirical_order, lattice_max_rho, lattice_max_rho_unbounded,
    modulus_of_continuity, Activation, BoxDomain, Evaluator, KernelProfile, LatticeMode,
    RangeClass, TargetFunction,
};
use proptest::prelude::*;
use std::sync::OnceLock;

fn profiles() -> &'static [KernelProfile; 2] {
    static CELL: OnceLock<[KernelProfile; 2]> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            KernelProfile::new(Activation::Logistic, 2).unwrap(),
            KernelProfile::new(Activation::Ramp, 2).unwrap(),
        ]
    })
}

fn symmetric_activation() -> impl Strategy<Value = Activation> {
    prop_oneof![
        Just(Activation::Logistic),
        Just(Activation::Tanh),
        Just(Activation::Ramp),
        Just(Activation::ThreeStep),
        (0.2f64..3.0).prop_map(|g| Activation::power_tail(g).unwrap()),
    ]
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| [a, b])
}

/// `(1 + sin(a y_1 + b y_2)) / 2`, a smooth target in `[0, 1]`.
fn wave(a: f64, b: f64) -> TargetFunction {
    TargetFunction::new(
        "wave",
        2,
        maxmin::Support::Everywhere,
        RangeClass::UnitInterval,
        move |y| (1.0 + (a * y[0] + b * y[1]).sin()) / 2.0,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_even_and_bounded(act in symmetric_activation(), y in -60.0f64..60.0) {
        let phi = maxmin::phi(&act, y);
        prop_assert!((0.0..=0.5).contains(&phi));
        prop_assert!((phi - maxmin::phi(&act, -y)).abs() <= 1e-12);
    }

    #[test]
    fn rho_is_a_product(act in symmetric_activation(), y in prop::array::uniform3(-8.0f64..8.0)) {
        let p = KernelProfile::with_tail_epsilon(act, 3, 1e-6).unwrap();
        let product: f64 = y.iter().map(|&v| p.phi(v)).product();
        prop_assert_eq!(p.rho(&y).unwrap(), product);
    }

    #[test]
    fn activation_names_round_trip(g in 0.01f64..10.0, a in 0.1f64..5.0, b in 0.1f64..5.0) {
        for act in [Activation::power_tail(g).unwrap(), Activation::gompertz(a, b).unwrap()] {
            prop_assert_eq!(act.to_string().parse::<Activation>().unwrap(), act);
        }
    }

    #[test]
    fn lattice_size_matches_bounds(n in 1u64..500, a in -3.0f64..3.0, w in 0.01f64..2.0) {
        let domain = BoxDomain::new(vec![(a, a + w)]).unwrap();
        let lo = (n as f64 * a).ceil() as i64;
        let hi = (n as f64 * (a + w)).floor() as i64;
        match build_lattice(n, &domain) {
            Ok(l) => prop_assert_eq!(l.len(), (hi - lo + 1) as u128),
            Err(_) => prop_assert!(hi < lo),
        }
    }

    #[test]
    fn lattice_maximum_above_floor(which in 0usize..2, n in 1u64..300, y in point()) {
        let p = &profiles()[which];
        let floor = p.lattice_floor() * (1.0 - 1e-12);
        prop_assert!(lattice_max_rho(p, n, &BoxDomain::unit(2), &y).unwrap() >= floor);
        prop_assert!(lattice_max_rho_unbounded(p, n, &y).unwrap() >= floor);
    }

    #[test]
    fn windows_agree_with_full_lattice(which in 0usize..2, n in 1u64..60, y in point(), a in 0.5f64..8.0, b in 0.5f64..8.0) {
        let p = &profiles()[which];
        let h = wave(a, b);
        let d = BoxDomain::unit(2);
        let windowed = Evaluator::new(p, LatticeMode::Windowed);
        let full = Evaluator::new(p, LatticeMode::Full);
        prop_assert_eq!(windowed.max_min(&h, n, &d, &y).unwrap().value, full.max_min(&h, n, &d, &y).unwrap().value);
        prop_assert_eq!(windowed.max_product(&h, n, &d, &y).unwrap().value, full.max_product(&h, n, &d, &y).unwrap().value);
        let c = windowed.classical(&h, n, &d, &y).unwrap().value - full.classical(&h, n, &d, &y).unwrap().value;
        prop_assert!(c.abs() <= 1e-12);
    }

    #[test]
    fn max_min_is_monotone_and_stays_in_range(n in 1u64..80, y in point(), a in 0.5f64..8.0, b in 0.5f64..8.0, shift in 0.0f64..0.5) {
        let p = &profiles()[0];
        let d = BoxDomain::unit(2);
        let h = wave(a, b);
        let g = h.map("raised", RangeClass::UnitInterval, move |v| (v + shift).min(1.0));
        let e = Evaluator::new(p, LatticeMode::Windowed);
        let mh = e.max_min(&h, n, &d, &y).unwrap().value;
        let mg = e.max_min(&g, n, &d, &y).unwrap().value;
        prop_assert!(mh <= mg);
        prop_assert!((0.0..=1.0).contains(&mh));
    }

    #[test]
    fn max_min_distributes_over_caps(n in 1u64..80, y in point(), a in 0.5f64..8.0, cap in 0.0f64..=1.0) {
        let p = &profiles()[0];
        let d = BoxDomain::unit(2);
        let h = wave(a, 1.0);
        let capped = h.map("capped", RangeClass::UnitInterval, move |v| v.min(cap));
        let e = Evaluator::new(p, LatticeMode::Windowed);
        let lhs = e.max_min(&capped, n, &d, &y).unwrap().value;
        let rhs = e.max_min(&h, n, &d, &y).unwrap().value.min(cap);
        prop_assert!((lhs - rhs).abs() <= 1e-15);
    }

    #[test]
    fn extended_reproduces_constants(c in prop_oneof![-20.0f64..-1.0001, -1.0f64..-0.0001, 0.0f64..=1.0, 1.0001f64..20.0], n in 1u64..50, y in point()) {
        let p = &profiles()[0];
        let h = TargetFunction::constant(c, 2).unwrap();
        let v = Evaluator::new(p, LatticeMode::Windowed).extended_max_min(&h, n, &BoxDomain::unit(2), &y).unwrap().value;
        prop_assert!((v - c).abs() <= 1e-14 * c.abs().max(1.0));
    }

    #[test]
    fn quasi_reproduces_constants(c in 0.0f64..=1.0, n in 1u64..200, y in prop::array::uniform2(-50.0f64..50.0)) {
        let p = &profiles()[1];
        let h = TargetFunction::constant(c, 2).unwrap();
        prop_assert_eq!(Evaluator::new(p, LatticeMode::Windowed).quasi_max_min(&h, n, &y).unwrap().value, c);
    }

    #[test]
    fn power_laws_have_their_order(p in 0.1f64..3.0, c in 0.01f64..10.0) {
        let samples: Vec<(u64, f64)> = [10u64, 30, 100, 400].iter().map(|&n| (n, c * (n as f64).powf(-p))).collect();
        prop_assert!((empirical_order(&samples).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn modulus_grows_with_delta(d1 in 0.02f64..0.5, extra in 0.0f64..0.5, a in 0.5f64..8.0) {
        let h = TargetFunction::new("sine", 1, maxmin::Support::Everywhere, RangeClass::UnitInterval, move |y| {
            (1.0 + (a * y[0]).sin()) / 2.0
        }).unwrap();
        let d = BoxDomain::unit(1);
        let d2 = d1 + extra;
        let res = maxmin::modulus_resolution(&d, d1, 101);
        let small = modulus_of_continuity(&h, &d, d1, res, 1.0).unwrap();
        let large = modulus_of_continuity(&h, &d, d2, res, 1.0).unwrap();
        prop_assert!(small.lower <= large.lower);
        prop_assert!(small.lower <= small.upper);
        prop_assert!(small.lower <= a * d1 / 2.0 + 1e-12);
    }
}
