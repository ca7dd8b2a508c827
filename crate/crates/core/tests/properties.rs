mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relerg::averaging::{
    folner_defect, weighted_mean_flow, weighted_mean_scalar, CMatrix, CVector, MatrixFlow, WeightFamily, WeightScheme,
};
use relerg::dual_system::{DualState, GroupAlgebraElement};
use relerg::joinings::{is_relatively_disjoint, joining_polytope, transport, ClassicalSystem, Coupling};
use relerg::mixing_lab::{
    higher_order_mixing_check, higher_order_mixing_check_naive, multitime_correlation, CorrelationQuery,
};

fn letter() -> impl Strategy<Value = Letter> {
    prop_oneof![
        (-3i64..=3, prop_oneof![Just(1i64), Just(-1i64)]).prop_map(|(i, s)| (SHIFT, i, s)),
        (0i64..CYCLE_LEN, prop_oneof![Just(1i64), Just(-1i64)]).prop_map(|(i, s)| (CYCLE, i, s)),
    ]
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(), 0..=max)
}

fn coef() -> impl Strategy<Value = Complex64> {
    (-2i32..=2, -2i32..=2).prop_map(|(a, b)| Complex64::new(a as f64 / 2.0, b as f64 / 2.0))
}

fn element(terms: usize, max: usize) -> impl Strategy<Value = Naive> {
    prop::collection::vec((word(max), coef()), 1..=terms).prop_map(|ts| {
        let mut a = Naive::new();
        for (w, c) in ts {
            *a.entry(reduce(&w)).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        a.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn concat_is_associative_with_inverses(a in word(6), b in word(6), cc in word(6)) {
        let (x, y, z) = (build(&a), build(&b), build(&cc));
        prop_assert_eq!(x.concat(&y).concat(&z), x.concat(&y.concat(&z)));
        prop_assert!(x.concat(&x.inverse()).is_identity());
        prop_assert_eq!(x.inverse().inverse(), x.clone());
        prop_assert_eq!(x.concat(&y).inverse(), y.inverse().concat(&x.inverse()));
    }

    #[test]
    fn shift_is_an_automorphism(a in word(6), b in word(6), n in -20i64..20, m in -20i64..20) {
        let al = alphabet();
        let (x, y) = (build(&a), build(&b));
        prop_assert_eq!(al.apply_t(&x.concat(&y), n), al.apply_t(&x, n).concat(&al.apply_t(&y, n)));
        prop_assert_eq!(al.apply_t(&al.apply_t(&x, n), m), al.apply_t(&x, n + m));
        prop_assert_eq!(expand(&al.apply_t(&x, n)), reduce(&shift(&a, n)));
        prop_assert_eq!(al.orbit_class(&x).is_finite(), !has_shift_letter(&reduce(&a)));
    }

    #[test]
    fn words_round_trip_through_text(a in word(8)) {
        let al = alphabet();
        let x = build(&a);
        prop_assert_eq!(al.parse_word(&al.format_word(&x)).unwrap(), x);
    }

    #[test]
    fn product_matches_naive_convolution(a in element(4, 4), b in element(4, 4)) {
        let got = to_naive(&from_naive(&a).multiply(&from_naive(&b)));
        prop_assert!(distance(&got, &mul(&a, &b)) < 1e-12);
    }

    #[test]
    fn adjoint_reverses_products(a in element(3, 3), b in element(3, 3)) {
        let (x, y) = (from_naive(&a), from_naive(&b));
        let lhs = x.multiply(&y).adjoint();
        let rhs = y.adjoint().multiply(&x.adjoint());
        prop_assert!((&lhs - &rhs).l1_norm() < 1e-12);
    }

    #[test]
    fn trace_is_positive(a in element(4, 4)) {
        let x = from_naive(&a);
        let v = DualState::Trace.evaluate(&x.adjoint().multiply(&x));
        prop_assert!(v.re >= 0.0 && v.im.abs() < 1e-12);
    }

    #[test]
    fn alpha_and_expectation_match_oracles(a in element(4, 4), b in element(3, 3), n in -10i64..10) {
        let al = alphabet();
        let (x, y) = (from_naive(&a), from_naive(&b));
        prop_assert!(distance(&to_naive(&x.alpha(&al, n)), &alpha(&a, n)) < 1e-15);
        prop_assert!(distance(&to_naive(&x.cond_expectation(&al)), &expectation(&a)) < 1e-15);
        let hom = &x.multiply(&y).alpha(&al, n) - &x.alpha(&al, n).multiply(&y.alpha(&al, n));
        prop_assert!(hom.l1_norm() < 1e-12);
        // E commutes with the automorphism.
        let comm = &x.alpha(&al, n).cond_expectation(&al) - &x.cond_expectation(&al).alpha(&al, n);
        prop_assert!(comm.l1_norm() < 1e-15);
    }

    #[test]
    fn vector_states_match_oracle(seed in any::<u64>(), a in element(4, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, x) = random_vector_state(&mut rng, 3, 3);
        let got = state.evaluate(&from_naive(&a));
        prop_assert!((got - vector_state(&x, &a)).norm() < 1e-12);
    }

    #[test]
    fn multitime_is_linear_in_each_slot(
        a in element(2, 2), b in element(2, 2), b2 in element(2, 2), t in (1i64..6, 1i64..6), s in coef(),
    ) {
        let al = alphabet();
        let q = |mid: &Naive| CorrelationQuery {
            state: DualState::Trace,
            operators: vec![from_naive(&a), from_naive(mid)],
            times: vec![t.0, t.0 + t.1],
            permutation: vec![1, 0],
        };
        let mut combo = b.clone();
        for (w, c) in &b2 {
            *combo.entry(w.clone()).or_insert(Complex64::new(0.0, 0.0)) += c * s;
        }
        let lhs = multitime_correlation(&al, &q(&combo)).unwrap();
        let rhs = multitime_correlation(&al, &q(&b)).unwrap() + s * multitime_correlation(&al, &q(&b2)).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gap_scan_agrees_with_exhaustive_evaluation(
        seed in any::<u64>(), ops in prop::collection::vec(element(2, 2), 2..=3), flip in any::<bool>(),
    ) {
        let al = alphabet();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (state, _) = random_vector_state(&mut rng, 3, 2);
        let lib_ops: Vec<GroupAlgebraElement> = ops.iter().map(from_naive).collect();
        let mut perm: Vec<usize> = (0..ops.len()).collect();
        if flip {
            perm.reverse();
        }
        let fast = higher_order_mixing_check(&al, &state, &lib_ops, &perm, 8, 6).unwrap();
        let slow = higher_order_mixing_check_naive(&al, &state, &lib_ops, &perm, 8, 6).unwrap();
        prop_assert_eq!(fast.g, slow.g);
        prop_assert_eq!(fast.valid, slow.valid);
        prop_assert_eq!(fast.nonzero_tuples, slow.nonzero_tuples);
    }
}

fn scheme() -> impl Strategy<Value = WeightScheme> {
    prop_oneof![
        Just(WeightFamily::Uniform),
        (-0.9f64..4.0).prop_map(|s| WeightFamily::Power { s }),
        Just(WeightFamily::Log),
        (-0.9f64..4.0).prop_map(|s| WeightFamily::Voronoi { s }),
    ]
    .prop_flat_map(|f| {
        prop_oneof![
            Just(WeightScheme::discrete(f.clone()).unwrap()),
            Just(WeightScheme::continuous(f).unwrap())
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalizers_are_positive_and_defects_bounded(s in scheme(), n in 20.0f64..400.0) {
        let n = n.round();
        let z = s.normalizer(n).unwrap();
        prop_assert!(z > 0.0 && z.is_finite());
        let d = folner_defect(&s, 1.0, n).unwrap();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&d));
    }

    #[test]
    fn discrete_means_of_constants_are_exact(f in prop_oneof![
        Just(WeightFamily::Uniform), (-0.9f64..4.0).prop_map(|s| WeightFamily::Power { s }), Just(WeightFamily::Log)
    ], n in 1usize..300, v in coef()) {
        let s = WeightScheme::discrete(f).unwrap();
        let seq = vec![v; n];
        prop_assert!((weighted_mean_scalar(&seq, &s, n).unwrap() - v).norm() < 1e-12);
    }

    #[test]
    fn rotation_joinings_are_unique_iff_coprime(na in 1usize..=6, nb in 1usize..=6) {
        let (a, b) = (ClassicalSystem::cycle(na).unwrap(), ClassicalSystem::cycle(nb).unwrap());
        let poly = joining_polytope(&a, &b, None).unwrap();
        let r = is_relatively_disjoint(&poly).unwrap();
        let gcd = (1..=na.min(nb)).rev().find(|d| na % d == 0 && nb % d == 0).unwrap();
        prop_assert_eq!(r.disjoint, gcd == 1);
        prop_assert_eq!(r.nullspace_dimension, Some(gcd - 1));
        let product = DMatrix::from_element(na, nb, 1.0 / (na * nb) as f64);
        prop_assert!(poly.residual(&product) < 1e-12);
    }

    #[test]
    fn transport_keeps_couplings_in_the_polytope(na in 1usize..=4, nb in 1usize..=4, n in 0usize..10, seed in any::<u64>()) {
        use rand::Rng;
        let (a, b) = (ClassicalSystem::cycle(na).unwrap(), ClassicalSystem::cycle(nb).unwrap());
        let poly = joining_polytope(&a, &b, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..na * nb).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (v, _) = poly.minimize(&c).unwrap();
        prop_assert!(poly.residual(&v) < 1e-9);
        let moved: Coupling = transport(&a, &b, &v, n);
        prop_assert!(poly.residual(&moved) < 1e-9);
    }

    #[test]
    fn discrete_flow_means_match_direct_sums(
        angles in prop::collection::vec(-3.0f64..3.0, 1..=4), radius in 0.5f64..=1.0,
        f in prop_oneof![Just(WeightFamily::Uniform), (-0.9f64..2.0).prop_map(|s| WeightFamily::Power { s }), Just(WeightFamily::Log)],
        n in 1usize..200,
    ) {
        let d = angles.len();
        let diag: Vec<Complex64> = angles.iter().map(|&t| Complex64::from_polar(radius, t)).collect();
        let step = CMatrix::from_diagonal(&CVector::from_vec(diag.clone()));
        let x = CVector::from_fn(d, |i, _| Complex64::new(1.0, i as f64));
        let s = WeightScheme::discrete(f).unwrap();
        let got = weighted_mean_flow(&MatrixFlow::discrete(step).unwrap(), &x, &s, n as f64).unwrap();
        let z: f64 = (1..=n).map(|k| s.discrete_weight(n, k)).sum();
        for i in 0..d {
            let direct: Complex64 = (1..=n).map(|k| diag[i].powu(k as u32) * s.discrete_weight(n, k)).sum::<Complex64>() * x[i] / z;
            prop_assert!((got[i] - direct).norm() < 1e-10, "{} vs {}", got[i], direct);
        }
    }
}
