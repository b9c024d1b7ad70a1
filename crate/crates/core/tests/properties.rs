//! Randomized invariants of the operator algebra, the scaling map, the
//! extended bracket and the series output.

use kvnlab::charges::{epb, liouvillian_field, liouvillian_value, lms_charge_field, ScalarField4};
use kvnlab::cli::series::Series;
use kvnlab::dynamics::{integrate_sampled, IntegratorConfig};
use kvnlab::model::{ExtendedPoint, LmsParams, MonomialPotential};
use kvnlab::opalg::{
    adjoint_infinitesimal, bopp_operators, bopp_to_kvn, build_c_hbar, build_series_c, hamiltonian_vector_field,
    leak_detect, lms_quantum_generator, AdjointMode, ClassicalPoly, Key, NormalPoly, OperatorPoly,
    PairAlgebra, Scalar, SymbolicPotential,
};
use kvnlab::symmetry::{bracket_change, lms_map_point};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(cases) }
}

fn key(max: u32) -> impl Strategy<Value = Key> {
    [0..=max, 0..=max, 0..=max, 0..=max]
}

fn poly<K: PairAlgebra>() -> impl Strategy<Value = NormalPoly<K>> {
    prop::collection::vec((key(2), -3i64..=3, 1i64..=2), 1..=3)
        .prop_map(|terms| NormalPoly::from_terms(terms.into_iter().map(|(k, a, b)| (k, Scalar::ratio(a, b)))))
}

/// Real polynomial in `(q, p)` of total degree at most 4.
fn phase_poly() -> impl Strategy<Value = ClassicalPoly> {
    prop::collection::vec((0u32..=4, 0u32..=4, -4i64..=4), 1..=4).prop_map(|terms| {
        ClassicalPoly::from_terms(
            terms.into_iter().filter(|(a, b, _)| a + b <= 4).map(|(a, b, c)| ([a, b, 0, 0], Scalar::int(c))),
        )
    })
}

fn jacobi<K: PairAlgebra>(a: &NormalPoly<K>, b: &NormalPoly<K>, c: &NormalPoly<K>) -> NormalPoly<K> {
    let t1 = a.commutator(&b.commutator(c));
    let t2 = b.commutator(&c.commutator(a));
    let t3 = c.commutator(&a.commutator(b));
    &(&t1 + &t2) + &t3
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn extended_product_is_associative(a in poly::<kvnlab::opalg::Kvn>(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn extended_commutator_satisfies_jacobi(a in poly::<kvnlab::opalg::Kvn>(), b in poly(), c in poly()) {
        prop_assert!(jacobi(&a, &b, &c).is_zero());
    }

    #[test]
    fn bopp_product_is_associative(a in poly::<kvnlab::opalg::Bopp>(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert!(jacobi(&a, &b, &c).is_zero());
    }

    #[test]
    fn bopp_rewriting_round_trips(x in poly::<kvnlab::opalg::Kvn>()) {
        let r = leak_detect(&x);
        prop_assert_eq!(bopp_to_kvn(&r.rewritten), x);
    }

    #[test]
    fn unbarred_products_stay_unbarred(a in poly::<kvnlab::opalg::Bopp>(), b in poly::<kvnlab::opalg::Bopp>()) {
        let (ua, _) = a.split_barred();
        let (ub, _) = b.split_barred();
        let prod = &ua * &ub;
        prop_assert!(!prod.has_barred());
        prop_assert!(!leak_detect(&bopp_to_kvn(&ua.commutator(&ub))).leaks);
    }
}

proptest! {
    #![proptest_config(config(50))]

    #[test]
    fn classical_limit_is_the_vector_field(c in phase_poly()) {
        let g = build_c_hbar(&c).unwrap();
        prop_assert_eq!(g.hbar_zero_part(), hamiltonian_vector_field(&c));
    }

    #[test]
    fn difference_operator_matches_its_series(c in phase_poly()) {
        // degree 4 truncates after D^3
        prop_assert_eq!(build_c_hbar(&c).unwrap(), build_series_c(&c, 3));
    }

    #[test]
    fn difference_operator_is_hermitian(c in phase_poly()) {
        prop_assert!(build_c_hbar(&c).unwrap().is_hermitian());
    }
}

#[test]
fn similarity_generator_leaks_off_the_oscillator() {
    let (bq, bp, _, _) = bopp_operators();
    for n in [1u32, 3, 4, 5] {
        let a = lms_quantum_generator(&SymbolicPotential::formal(n).unwrap()).unwrap();
        for x in [&bq, &bp] {
            let dx = adjoint_infinitesimal(&a, x, &Scalar::alpha(), AdjointMode::Kvn);
            assert!(leak_detect(&dx).leaks, "n={n}");
        }
    }
    let h = lms_quantum_generator(&SymbolicPotential::formal(2).unwrap()).unwrap();
    let g: OperatorPoly = build_c_hbar(&SymbolicPotential::formal(2).unwrap().hamiltonian()).unwrap();
    // the oscillator dilation commutes with the generator of time evolution
    assert!(h.commutator(&g).is_zero());
}

fn exponent() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![-2.0, -1.0, 1.0, 3.0, 4.0, 2.5, 6.0])
}

fn ext_point() -> impl Strategy<Value = ExtendedPoint> {
    (0.2f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(q, p, lq, lp)| ExtendedPoint::new(q, p, lq, lp))
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn scaling_map_is_a_group_action(x in ext_point(), n in exponent(), a1 in 0.3f64..3.0, a2 in 0.3f64..3.0) {
        let p1 = LmsParams::from_alpha(a1, n);
        let p2 = LmsParams::from_alpha(a2, n);
        let both = lms_map_point(&lms_map_point(&x, &p1, n).unwrap(), &p2, n).unwrap();
        let once = lms_map_point(&x, &LmsParams::from_alpha(a1 * a2, n), n).unwrap();
        prop_assert!(both.max_abs_diff(&once) <= 1e-12 * (1.0 + once.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        let back = lms_map_point(&once, &LmsParams::from_alpha(1.0 / (a1 * a2), n), n).unwrap();
        prop_assert!(back.max_abs_diff(&x) <= 1e-12 * 4.0);
    }

    #[test]
    fn liouvillian_scales_homogeneously(x in ext_point(), n in exponent(), a in 0.3f64..3.0, g in prop::sample::select(vec![-1.0, 1.0])) {
        let pot = MonomialPotential::new(g, n).unwrap();
        let prm = LmsParams::from_alpha(a, n);
        let y = lms_map_point(&x, &prm, n).unwrap();
        let lhs = liouvillian_value(&y, &pot).unwrap();
        let rhs = a.powf(n / 2.0 - 1.0) * liouvillian_value(&x, &pot).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn bracket_factors(n in exponent(), beta in -1.0f64..1.0) {
        let (standard, extended) = bracket_change(&LmsParams::from_beta(beta, n), n);
        prop_assert!((extended - 1.0).abs() <= 1e-15);
        let expected = (beta * (1.0 + n / 2.0)).exp();
        prop_assert!((standard - expected).abs() <= 1e-13 * expected);
    }

    #[test]
    fn dilation_charge_brackets_to_the_liouvillian(x in ext_point(), n in exponent(), g in prop::sample::select(vec![-1.0, 1.0])) {
        let pot = MonomialPotential::new(g, n).unwrap();
        let b = epb(&liouvillian_field(&pot), &lms_charge_field(&pot).unwrap(), &x).unwrap();
        let h = liouvillian_value(&x, &pot).unwrap();
        prop_assert!((b - h).abs() <= 1e-10 * (1.0 + h.abs()), "{b} vs {h}");
        // finite differences agree with the analytic gradients
        let bn = epb(&liouvillian_field(&pot).numeric(), &lms_charge_field(&pot).unwrap().numeric(), &x).unwrap();
        prop_assert!((bn - h).abs() <= 1e-6 * (1.0 + h.abs()));
    }

    #[test]
    fn bracket_is_antisymmetric(x in ext_point(), i in 0usize..4, j in 0usize..4) {
        let (fi, fj) = (ScalarField4::coordinate(i), ScalarField4::coordinate(j));
        let a = epb(&fi, &fj, &x).unwrap();
        prop_assert_eq!(a, -epb(&fj, &fi, &x).unwrap());
        let conjugate = matches!((i, j), (0, 2) | (1, 3));
        let anti = matches!((i, j), (2, 0) | (3, 1));
        prop_assert_eq!(a, if conjugate { 1.0 } else if anti { -1.0 } else { 0.0 });
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn scaled_orbits_are_orbits(x in ext_point(), n in prop::sample::select(vec![1.0, 3.0, 4.0, 2.5]), a in 0.6f64..1.6) {
        let pot = MonomialPotential::new(1.0, n).unwrap();
        let cfg = IntegratorConfig::default();
        let prm = LmsParams::from_alpha(a, n);
        let times: Vec<f64> = (0..=20).map(|k| 0.05 * k as f64).collect();
        // orbits leaving the domain of a fractional power are not comparable
        let tr = integrate_sampled(&x, &pot, &times, &cfg);
        prop_assume!(tr.is_ok());
        let tr = tr.unwrap();
        let tf = a.powf(1.0 - n / 2.0);
        let mapped_times: Vec<f64> = times.iter().map(|t| tf * t).collect();
        let y0 = lms_map_point(&x, &prm, n).unwrap();
        let direct = integrate_sampled(&y0, &pot, &mapped_times, &cfg).unwrap();
        for (s, d) in tr.states.iter().zip(&direct.states) {
            let m = lms_map_point(s, &prm, n).unwrap();
            let scale = d.to_array().iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            prop_assert!(m.max_abs_diff(d) <= 1e-7 * scale, "{:?} vs {:?}", m, d);
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn csv_output_round_trips(values in prop::collection::vec(prop::option::of(-1e12f64..1e12), 0..40)) {
        let t: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.1).collect();
        let s = Series::new("roundtrip").column("t", t.clone()).optional_column("x", values.clone());
        let bytes = s.to_csv().unwrap();
        prop_assert_eq!(&bytes, &s.clone().to_csv().unwrap());
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        prop_assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), vec!["t", "x"]);
        let mut n = 0;
        for (row, (ti, vi)) in rd.records().zip(t.iter().zip(&values)) {
            let row = row.unwrap();
            prop_assert_eq!(row[0].parse::<f64>().unwrap(), *ti);
            match vi {
                Some(v) => prop_assert_eq!(row[1].parse::<f64>().unwrap(), *v),
                None => prop_assert_eq!(&row[1], ""),
            }
            n += 1;
        }
        prop_assert_eq!(n, values.len());
    }
}
