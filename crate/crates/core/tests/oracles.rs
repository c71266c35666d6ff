mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use dioph_core::dual::{dual_distance, dual_records, primal_solutions, verify_linear_identity};
use dioph_core::exponents::{enumerate_wedges, higher_exponent_records};
use dioph_core::exterior::{c_map, r_a_apply};
use dioph_core::rng::seeded_rng;
use dioph_core::{AffineSubspace, ApproximatingFunction, Blade, InhomShift, MultiVector, Rational};
use num_traits::Zero;
use oracle::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.random_range(-9..=9), rng.random_range(1..=7))
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<Rational>> {
    (0..=d).map(|_| (0..n - d).map(|_| random_rational(rng)).collect()).collect()
}

fn to_form<C: Clone>(m: &MultiVector<C>) -> BTreeMap<Vec<usize>, C>
where
    C: dioph_core::exterior::Coeff,
{
    m.terms().map(|(b, c)| (b.indices().collect(), c.clone())).collect()
}

fn to_multivector(dim: usize, w: &IntForm) -> MultiVector<i64> {
    MultiVector::from_terms(dim, w.iter().map(|(b, &c)| (Blade::from_indices(b).expect("valid"), c))).expect("in range")
}

/// Every coefficient vector in `{-2..2}^len`.
fn coefficient_vectors(len: usize) -> Vec<Vec<i64>> {
    box_vectors(len, 2)
}

#[test]
fn exterior_maps_match_determinant_expansion() {
    let mut rng = seeded_rng(11);
    for n in 1..=3usize {
        let subspaces: Vec<(usize, Vec<Vec<Rational>>)> = (1..n).map(|d| (d, random_rows(&mut rng, n, d))).collect();
        let all: Vec<usize> = (0..=n).collect();
        for grade in 1..=n + 1 {
            let blades = subsets(&all, grade);
            for coeffs in coefficient_vectors(blades.len()) {
                let w: IntForm = blades.iter().cloned().zip(coeffs).filter(|(_, c)| *c != 0).collect();
                let expected = c_map_oracle(n, grade, &w);
                let image = c_map(&to_multivector(n + 1, &w)).expect("homogeneous");
                let got: Vec<IntForm> = image.components.iter().map(to_form).collect();
                assert_eq!(got, expected, "c_map at n={n} w={w:?}");
                let image_q = image.map(|&c| int(c));
                for (d, rows) in &subspaces {
                    let sub = AffineSubspace::new(n, *d, rows.clone()).expect("valid");
                    let got: Vec<RatForm> = r_a_apply(&sub, &image_q).expect("shape").iter().map(to_form).collect();
                    assert_eq!(got, r_a_oracle(rows, *d, &expected), "R_A at n={n} d={d} w={w:?}");
                }
            }
        }
    }
}

#[test]
fn dual_distance_matches_coordinatewise_oracle() {
    let mut rng = seeded_rng(12);
    for _ in 0..500 {
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(1..n);
        let rows = random_rows(&mut rng, n, d);
        let theta: Vec<Rational> = (0..=d).map(|_| random_rational(&mut rng)).collect();
        let mut aprime: Vec<i64> = (0..n - d).map(|_| rng.random_range(-20..=20)).collect();
        if aprime.iter().all(|&a| a == 0) {
            aprime[0] = 1;
        }
        let sub = AffineSubspace::new(n, d, rows.clone()).expect("valid");
        let got = dual_distance(&sub, &InhomShift::Linear(theta.clone()), &aprime).expect("valid");
        let (dist, adp) = dual_distance_oracle(&rows, &theta, &aprime);
        assert_eq!(got.dist, dist);
        assert_eq!(got.adoubleprime, adp);
    }
}

#[test]
fn nearest_integer_ties_go_down() {
    let rows = vec![vec![rat(1, 2)], vec![rat(0, 1)]];
    let sub = AffineSubspace::new(2, 1, rows).expect("valid");
    // A a′ = (1/2, 0): −1/2 is equally close to −1 and 0
    let got = dual_distance(&sub, &InhomShift::Zero, &[1]).expect("valid");
    assert_eq!(got.adoubleprime, vec![-1, 0]);
    assert_eq!(got.dist, rat(1, 2));
}

#[test]
fn dual_records_match_box_scan() {
    let mut rng = seeded_rng(13);
    for trial in 0..12 {
        let n = rng.random_range(2..=3usize);
        let d = rng.random_range(1..n);
        let rows = random_rows(&mut rng, n, d);
        let theta: Vec<Rational> = if trial % 2 == 0 {
            vec![Rational::zero(); d + 1]
        } else {
            (0..=d).map(|_| random_rational(&mut rng)).collect()
        };
        let hmax = if n - d == 1 { 60 } else { 15 };
        let sub = AffineSubspace::new(n, d, rows.clone()).expect("valid");
        let table = dual_records(&sub, &InhomShift::Linear(theta.clone()), hmax as u64).expect("within budget");
        let got: Vec<(u64, Rational)> = table.entries.iter().map(|r| (r.height, r.dist.clone())).collect();
        assert_eq!(got, dual_records_oracle(&rows, &theta, hmax));
        for r in &table.entries {
            assert_eq!(dual_distance_oracle(&rows, &theta, &r.aprime), (r.dist.clone(), r.adoubleprime.clone()));
        }
    }
}

#[test]
fn grade_one_records_match_dual_records() {
    let mut rng = seeded_rng(14);
    for _ in 0..6 {
        let n = rng.random_range(2..=3usize);
        let d = rng.random_range(1..n);
        let sub = AffineSubspace::new(n, d, random_rows(&mut rng, n, d)).expect("valid");
        let h = if n - d == 1 { 100 } else { 20 };
        let wedge = higher_exponent_records(&sub, 1, h).expect("within budget");
        let dual = dual_records(&sub, &InhomShift::Zero, h).expect("within budget");
        let a: Vec<(u64, Rational)> = wedge.records.iter().map(|r| (r.pibullet_norm, r.lhs_norm.clone())).collect();
        let b: Vec<(u64, Rational)> = dual.entries.iter().map(|r| (r.height, r.dist.clone())).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn grade_two_records_match_pair_scan() {
    let mut rng = seeded_rng(15);
    for _ in 0..3 {
        let rows = random_rows(&mut rng, 3, 1);
        let sub = AffineSubspace::new(3, 1, rows.clone()).expect("valid");
        let scan = higher_exponent_records(&sub, 2, 2).expect("within budget");
        let got: Vec<(u64, Rational)> = scan.records.iter().map(|r| (r.pibullet_norm, r.lhs_norm.clone())).collect();
        assert_eq!(got, wedge2_records_oracle(&rows, 3, 1, 2));
    }
}

#[test]
fn wedge_enumeration_matches_pair_scan() {
    for (n, h) in [(2usize, 3i64), (3, 2)] {
        let vectors = box_vectors(n + 1, h);
        let mut expected = BTreeSet::new();
        for (i, u) in vectors.iter().enumerate() {
            for v in &vectors[i + 1..] {
                if let Some(w) = wedge2_normalized(u, v) {
                    expected.insert(w);
                }
            }
        }
        let got: BTreeSet<IntForm> =
            enumerate_wedges(n, 2, h as u64).expect("within budget").iter().map(to_form).collect();
        assert_eq!(got, expected, "n={n} h={h}");
    }
}

#[test]
fn primal_solutions_match_box_scan() {
    let mut rng = seeded_rng(16);
    let psis = [
        ApproximatingFunction::parse("dirichlet").expect("family"),
        ApproximatingFunction::parse("power:3/2").expect("family"),
    ];
    for trial in 0..40 {
        let psi = &psis[trial % 2];
        let rows = random_rows(&mut rng, 2, 1);
        let sub = AffineSubspace::new(2, 1, rows).expect("valid");
        let theta = vec![random_rational(&mut rng), random_rational(&mut rng)];
        let th = InhomShift::Linear(theta);
        let x = vec![random_rational(&mut rng)];
        let got: BTreeSet<(Vec<i64>, i64)> =
            primal_solutions(&sub, &th, psi, &x, 12).expect("within budget").into_iter().map(|s| (s.a, s.a0)).collect();
        let y = sub.parametrize(&x).expect("valid");
        let shift = th.evaluate(&x).expect("affine");
        assert_eq!(got, primal_oracle(&y, &shift, psi, 12));
    }
}

#[test]
fn linear_identity_is_exact() {
    let mut rng = seeded_rng(17);
    for _ in 0..300 {
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(1..n);
        let sub = AffineSubspace::new(n, d, random_rows(&mut rng, n, d)).expect("valid");
        let th = InhomShift::Linear((0..=d).map(|_| random_rational(&mut rng)).collect());
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(-50..=50)).collect();
        let x: Vec<Rational> = (0..d).map(|_| random_rational(&mut rng)).collect();
        let residual = verify_linear_identity(&sub, &th, &a, rng.random_range(-50..=50), &x).expect("affine");
        assert!(residual.is_zero());
    }
}
