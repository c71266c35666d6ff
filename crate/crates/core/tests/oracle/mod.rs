//! Slow reference implementations, written without the library's kernels.
//! Blades are sorted index lists; multivectors are maps from blade to coefficient.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dioph_core::{ApproximatingFunction, Rational};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Blade = Vec<usize>;
pub type IntForm = BTreeMap<Blade, i64>;
pub type RatForm = BTreeMap<Blade, Rational>;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(k: i64) -> Rational {
    rat(k, 1)
}

/// k-subsets of `universe`, in lexicographic order.
pub fn subsets(universe: &[usize], k: usize) -> Vec<Blade> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in universe.iter().enumerate() {
        for mut rest in subsets(&universe[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All permutations of `0..k` with their signs.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    if k == 0 {
        return vec![(Vec::new(), 1)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(k - 1) {
        for pos in 0..k {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            // inserting at `pos` moves the new element past `k - 1 - pos` others
            let sign = if (k - 1 - pos) % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

/// Leibniz determinant.
pub fn det(m: &[Vec<i64>]) -> i64 {
    permutations(m.len())
        .into_iter()
        .map(|(p, s)| s * p.iter().enumerate().map(|(r, &c)| m[r][c]).product::<i64>())
        .sum()
}

/// `⟨e_{u_1} ∧ … ∧ e_{u_k}, e_{m_1} ∧ … ∧ e_{m_k}⟩` as the Gram determinant of
/// orthonormal basis vectors.
pub fn pairing(u: &[usize], m: &[usize]) -> i64 {
    if u.len() != m.len() {
        return 0;
    }
    let gram: Vec<Vec<i64>> = u.iter().map(|a| m.iter().map(|b| i64::from(a == b)).collect()).collect();
    det(&gram)
}

/// Components `c(w)_i[J] = ⟨e_i ∧ e_J, w⟩` for `i ∈ 0..=n`, `J ⊂ {1..n}`.
pub fn c_map_oracle(n: usize, grade: usize, w: &IntForm) -> Vec<IntForm> {
    let plain: Vec<usize> = (1..=n).collect();
    (0..=n)
        .map(|i| {
            let mut comp = IntForm::new();
            for j in subsets(&plain, grade - 1) {
                let mut u = vec![i];
                u.extend(&j);
                let v: i64 = w.iter().map(|(m, c)| c * pairing(&u, m)).sum();
                if v != 0 {
                    comp.insert(j, v);
                }
            }
            comp
        })
        .collect()
}

/// `R_A = (Id_{d+1} | A)` applied to the component vector.
pub fn r_a_oracle(rows: &[Vec<Rational>], d: usize, comps: &[IntForm]) -> Vec<RatForm> {
    let n = comps.len() - 1;
    (0..=d)
        .map(|r| {
            let mut out = RatForm::new();
            for (i, comp) in comps.iter().enumerate() {
                let coeff = if i <= d { int(i64::from(i == r)) } else { rows[r][i - d - 1].clone() };
                for (j, c) in comp {
                    let entry = out.entry(j.clone()).or_insert_with(Rational::zero);
                    *entry += coeff.clone() * int(*c);
                }
            }
            out.retain(|_, v| !v.is_zero());
            debug_assert!(n >= d);
            out
        })
        .collect()
}

pub fn sup_rat(forms: &[RatForm]) -> Rational {
    forms.iter().flat_map(|f| f.values()).map(|v| v.abs()).fold(Rational::zero(), |m, v| if v > m { v } else { m })
}

/// `argmin_m |x + m|`, smaller `m` on ties.
pub fn nearest_shift(x: &Rational) -> i64 {
    let f = (-x.clone()).floor().to_integer().to_i64().expect("small");
    (f - 1..=f + 2)
        .min_by(|&a, &b| {
            let da = (x.clone() + int(a)).abs();
            let db = (x.clone() + int(b)).abs();
            da.cmp(&db).then(a.cmp(&b))
        })
        .expect("nonempty")
}

/// `(‖A a′ + a″ + θ‖_∞, a″)` with the coordinatewise minimizer.
pub fn dual_distance_oracle(rows: &[Vec<Rational>], theta: &[Rational], aprime: &[i64]) -> (Rational, Vec<i64>) {
    let mut dist = Rational::zero();
    let mut adp = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let v = row.iter().zip(aprime).fold(theta[r].clone(), |acc, (e, &a)| acc + e.clone() * int(a));
        let m = nearest_shift(&v);
        let res = (v + int(m)).abs();
        if res > dist {
            dist = res;
        }
        adp.push(m);
    }
    (dist, adp)
}

/// All integer vectors in `[-h, h]^k`, odometer order.
pub fn box_vectors(k: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-h; k];
    loop {
        out.push(v.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if v[i] < h {
                v[i] += 1;
                break;
            }
            v[i] = -h;
        }
    }
}

fn sup_int(v: &[i64]) -> u64 {
    v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
}

/// Strict records over per-height minima, stopping at zero.
fn records_from_minima(minima: BTreeMap<u64, Rational>) -> Vec<(u64, Rational)> {
    let mut out: Vec<(u64, Rational)> = Vec::new();
    for (h, v) in minima {
        if out.last().is_some_and(|(_, best)| v >= *best) {
            continue;
        }
        let stop = v.is_zero();
        out.push((h, v));
        if stop {
            break;
        }
    }
    out
}

/// Dual records `(height, distance)` by scanning the whole box.
pub fn dual_records_oracle(rows: &[Vec<Rational>], theta: &[Rational], hmax: i64) -> Vec<(u64, Rational)> {
    let k = rows[0].len();
    let mut minima: BTreeMap<u64, Rational> = BTreeMap::new();
    for a in box_vectors(k, hmax) {
        let h = sup_int(&a);
        if h == 0 {
            continue;
        }
        let (dist, _) = dual_distance_oracle(rows, theta, &a);
        let slot = minima.entry(h).or_insert_with(|| dist.clone());
        if dist < *slot {
            *slot = dist;
        }
    }
    records_from_minima(minima)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `u ∧ v` by 2×2 minors, divided by the gcd, first nonzero coefficient positive.
pub fn wedge2_normalized(u: &[i64], v: &[i64]) -> Option<IntForm> {
    let idx: Vec<usize> = (0..u.len()).collect();
    let mut w = IntForm::new();
    for pair in subsets(&idx, 2) {
        let (a, b) = (pair[0], pair[1]);
        let c = det(&[vec![u[a], u[b]], vec![v[a], v[b]]]);
        if c != 0 {
            w.insert(pair, c);
        }
    }
    let g = w.values().fold(0, |g, &c| gcd(g, c));
    if g == 0 {
        return None;
    }
    let sign = if *w.values().next().expect("nonzero") < 0 { -1 } else { 1 };
    Some(w.into_iter().map(|(k, c)| (k, sign * c / g)).collect())
}

/// Grade-2 records `(‖π_•(w)‖, ‖R_A c(w)‖)` over all pairs of factors in
/// `[-h, h]^{n+1}`.
pub fn wedge2_records_oracle(rows: &[Vec<Rational>], n: usize, d: usize, h: i64) -> Vec<(u64, Rational)> {
    let vectors = box_vectors(n + 1, h);
    let mut wedges = BTreeSet::new();
    for (i, u) in vectors.iter().enumerate() {
        for v in &vectors[i + 1..] {
            if let Some(w) = wedge2_normalized(u, v) {
                wedges.insert(w);
            }
        }
    }
    let mut minima: BTreeMap<u64, Rational> = BTreeMap::new();
    for w in wedges {
        let pib = w.iter().filter(|(b, _)| b.iter().all(|&i| i > d)).map(|(_, c)| c.unsigned_abs()).max().unwrap_or(0);
        if pib == 0 {
            continue;
        }
        let lhs = sup_rat(&r_a_oracle(rows, d, &c_map_oracle(n, 2, &w)));
        let slot = minima.entry(pib).or_insert_with(|| lhs.clone());
        if lhs < *slot {
            *slot = lhs;
        }
    }
    records_from_minima(minima)
}

/// Solutions `(a, a₀)` with `0 < ‖a‖ ≤ q` and `|θ + y·a + a₀| < ψ(‖a‖ⁿ)`, where
/// `a₀` is the nearest admissible integer. `shift` is `θ(x)`, `y` the point.
pub fn primal_oracle(
    y: &[Rational],
    shift: &Rational,
    psi: &ApproximatingFunction,
    q: i64,
) -> BTreeSet<(Vec<i64>, i64)> {
    let n = y.len();
    let mut out = BTreeSet::new();
    for a in box_vectors(n, q) {
        let h = sup_int(&a);
        if h == 0 {
            continue;
        }
        let bound = Rational::from_float(psi.evaluate((h as f64).powi(n as i32)).expect("finite")).expect("finite");
        let v = y.iter().zip(&a).fold(shift.clone(), |acc, (yi, &ai)| acc + yi.clone() * int(ai));
        let a0 = nearest_shift(&v);
        if (v + int(a0)).abs() < bound {
            out.insert((a, a0));
        }
    }
    out
}
