use dioph_core::dual::dual_records;
use dioph_core::dynamics::{
    a_t_membership, a_tilde_membership, lattice_nu, nu_of_subgroup, FlowParams, LatticeElement, Rates,
};
use dioph_core::exterior::project_bullet;
use dioph_core::measure::{classify_point, dimension_lower_bound, limsup_tail_profile, PointClass};
use dioph_core::scalar::ratio;
use dioph_core::{AffineSubspace, ApproximatingFunction, Ball, InhomShift, MultiVector, Scalar, SplitSpace};
use num_traits::Signed;
use proptest::prelude::*;

fn small_vec(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_antisymmetric(u in small_vec(5), v in small_vec(5)) {
        let (mu, mv) = (MultiVector::from_vector(&u), MultiVector::from_vector(&v));
        let uv = mu.wedge(&mv).unwrap();
        let vu = mv.wedge(&mu).unwrap();
        prop_assert_eq!(uv.add(&vu).unwrap(), MultiVector::zero(5));
        prop_assert!(mu.wedge(&mu).unwrap().is_zero());
    }

    #[test]
    fn nu_is_homogeneous_and_submultiplicative(
        u in prop::collection::vec(-4.0f64..4.0, 6),
        v in prop::collection::vec(-4.0f64..4.0, 6),
        k in -5.0f64..5.0,
    ) {
        let space = SplitSpace::new(3, 2).unwrap();
        let (mu, mv) = (MultiVector::from_vector(&u), MultiVector::from_vector(&v));
        let scaled = space.nu_norm(&mu.scale(&k));
        prop_assert!((scaled - k.abs() * space.nu_norm(&mu)).abs() <= 1e-12 * (1.0 + scaled));
        let uv = space.nu_norm(&mu.wedge(&mv).unwrap());
        prop_assert!(uv <= space.nu_norm(&mu) * space.nu_norm(&mv) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn projections_are_idempotent(u in small_vec(5), v in small_vec(5), d in 1usize..4) {
        let w = MultiVector::from_vector(&u).wedge(&MultiVector::from_vector(&v)).unwrap();
        let once = project_bullet(&w, d);
        prop_assert_eq!(project_bullet(&once, d), once);
        let space = SplitSpace::new(4, d.min(3)).unwrap();
        let mut wide = vec![0i64; space.dim()];
        wide[..5].copy_from_slice(&u);
        let m = MultiVector::from_vector(&wide).wedge(&MultiVector::from_vector(&wide.iter().rev().copied().collect::<Vec<_>>())).unwrap();
        let star = space.project_star(&m);
        prop_assert_eq!(space.project_star(&star), star);
    }

    #[test]
    fn nearest_integer_ties_toward_minus_infinity(k in -1000i64..1000, p in -99i64..99, q in 1i64..40) {
        let half = ratio(2 * k + 1, 2);
        prop_assert_eq!(half.nearest_integer().to_i64_exact(), Some(k));
        prop_assert_eq!(((2 * k + 1) as f64 / 2.0).nearest_integer(), k as f64);
        let x = ratio(p, q);
        let m = x.nearest_integer();
        let gap = (x.clone() - m.clone()).abs();
        prop_assert!(gap <= ratio(1, 2));
        prop_assert!((x.clone() - m.clone() - ratio(1, 1)).abs() >= gap);
        prop_assert!((x - m + ratio(1, 1)).abs() > gap);
    }

    #[test]
    fn dual_records_strictly_improve(p in -50i64..50, q in 1i64..50, tp in -9i64..9) {
        let sub = AffineSubspace::new(2, 1, vec![vec![ratio(tp, 7)], vec![ratio(p, q)]]).unwrap();
        let table = dual_records(&sub, &InhomShift::Constant(ratio(1, 3)), 200).unwrap();
        for w in table.entries.windows(2) {
            prop_assert!(w[0].height < w[1].height);
            prop_assert!(w[0].dist > w[1].dist);
        }
    }

    #[test]
    fn dimension_bound_decreases_in_tau(n in 2usize..7, tau in 1.0f64..10.0, step in 0.0f64..5.0) {
        for d in 1..n {
            let lo = dimension_lower_bound(n, d, tau + step).unwrap();
            let hi = dimension_lower_bound(n, d, tau).unwrap();
            prop_assert!(lo <= hi);
            prop_assert!(lo > d as f64 - 1.0 && hi <= d as f64);
        }
    }

    #[test]
    fn classification_is_a_partition(
        slope in 0.1f64..3.0,
        a in prop::collection::vec(-9i64..=9, 2),
        x in -1.0f64..1.0,
    ) {
        prop_assume!(a.iter().any(|&v| v != 0));
        let sub = AffineSubspace::line_through_origin(slope);
        let th = InhomShift::Linear(vec![0.2, 0.1]);
        let psi = ApproximatingFunction::parse("power:1").unwrap();
        let class = classify_point(&sub, &th, &psi, &a, 0.25, &[x]).unwrap();
        let v = 0.2 + 0.1 * x + a[0] as f64 * x + a[1] as f64 * slope * x;
        let dist = (v - v.round()).abs();
        let bound = psi.evaluate((a[0].abs().max(a[1].abs()) as f64).powi(2)).unwrap();
        if (dist - bound).abs() > 1e-9 {
            prop_assert_eq!(class == PointClass::NotInL, dist >= bound);
        }
        if class != PointClass::NotInL {
            let g = (0.1 + a[0] as f64 + a[1] as f64 * slope).abs();
            let threshold = (2.0 * 0.25 * a[0].abs().max(a[1].abs()) as f64).sqrt();
            prop_assert_eq!(class == PointClass::Small, g < threshold);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tail_profile_is_monotone(slope in 0.2f64..3.0, c in -0.5f64..0.5, power in 1i64..=3) {
        let sub = AffineSubspace::line_through_origin(slope);
        let psi = ApproximatingFunction::parse(&format!("power:{power}")).unwrap();
        let ball = Ball::interval(-0.5, 0.5).unwrap();
        let profile = limsup_tail_profile(&sub, &InhomShift::Constant(c), &psi, &ball, 256, 1, 5).unwrap();
        prop_assert!(profile.monotone());
        prop_assert!(profile.rows.iter().all(|r| r.tail_measure <= ball.volume() + 1e-12));
    }

    #[test]
    fn a_t_is_inside_a_tilde(slope in 0.2f64..3.0, x in -1.0f64..1.0, t in 2u32..9) {
        let sub = AffineSubspace::line_through_origin(slope);
        let params = FlowParams::new(2, 1, t, Rates::auto(2), 0.25).unwrap();
        if a_t_membership(&sub, &params, &[x]).unwrap() {
            prop_assert!(a_tilde_membership(&sub, &params, &[x]).unwrap());
        }
    }

    #[test]
    fn nu_is_basis_invariant(
        slope in 0.2f64..3.0,
        x in -1.0f64..1.0,
        p in -3i64..=3,
        q in small_vec(2),
        r in -3i64..=3,
        s in small_vec(2),
        m in -3i64..=3,
        t in 1u32..6,
    ) {
        let sub = AffineSubspace::line_through_origin(slope);
        let params = FlowParams::new(2, 1, t, Rates::auto(2), 0.25).unwrap();
        let u = LatticeElement::new(p, q.clone());
        let v = LatticeElement::new(r, s.clone());
        // (u, v) ↦ (u, v + m u) is unimodular
        let shifted = LatticeElement::new(r + m * p, s.iter().zip(&q).map(|(a, b)| a + m * b).collect());
        match nu_of_subgroup(&sub, &params, &[x], &[u.clone(), v]) {
            Ok(base) => {
                let other = nu_of_subgroup(&sub, &params, &[x], &[u, shifted]).unwrap();
                prop_assert!((base - other).abs() <= 1e-9 * (1.0 + base));
            }
            Err(e) => prop_assert!(matches!(e, dioph_core::Error::Degenerate(_))),
        }
    }

    #[test]
    fn lattice_nu_is_at_least_one(slope in 0.2f64..3.0, x in -1.0f64..1.0, t in 0u32..12) {
        let sub = AffineSubspace::line_through_origin(slope);
        let params = FlowParams::new(2, 1, t, Rates::auto(2), 0.25).unwrap();
        prop_assert!(lattice_nu(&sub, &params, &[x]).unwrap() >= 1.0 - 1e-9);
    }
}
