//! The dual inhomogeneous inequality `‖A a′ + a″ + 𝜽‖ < ‖a′‖^{−v}`: distances,
//! best-approximation records, exponent estimates and primal solutions.

use crate::budget;
use crate::error::{domain, shape, Result};
use crate::par;
use crate::psi::ApproximatingFunction;
use crate::scalar::{sup_norm, sup_norm_int, Scalar};
use crate::shell::{for_each_in_punctured_box, for_each_in_shell, punctured_box_size};
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

/// Result of [`dual_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualDistance<S> {
    pub dist: S,
    pub adoubleprime: Vec<i64>,
}

fn shift_column<S: Scalar>(sub: &AffineSubspace<S>, th: &InhomShift<S>) -> Result<Vec<S>> {
    th.column(sub.d()).ok_or_else(|| {
        domain(format!("the dual problem needs a constant or linear shift of length d+1 = {}", sub.d() + 1))
    })
}

fn distance_with_column<S: Scalar>(sub: &AffineSubspace<S>, theta: &[S], aprime: &[i64]) -> Result<DualDistance<S>> {
    let v: Vec<S> = sub.apply(aprime).into_iter().zip(theta).map(|(x, t)| x + t.clone()).collect();
    let mut adoubleprime = Vec::with_capacity(v.len());
    let mut dist = S::zero();
    for x in &v {
        let m = (-x.clone()).nearest_integer();
        let k = m.to_i64_exact().ok_or_else(|| domain(format!("integer part of {x} does not fit in i64")))?;
        let r = (x.clone() + m).abs();
        if r > dist {
            dist = r;
        }
        adoubleprime.push(k);
    }
    Ok(DualDistance { dist, adoubleprime })
}

/// `min_{a″ ∈ Z^{d+1}} ‖A a′ + a″ + 𝜽‖_∞` and the componentwise nearest-integer
/// minimizer (ties toward −∞).
pub fn dual_distance<S: Scalar>(
    sub: &AffineSubspace<S>,
    th: &InhomShift<S>,
    aprime: &[i64],
) -> Result<DualDistance<S>> {
    if aprime.len() != sub.codim() {
        return Err(shape(format!("aprime has length {}, expected n-d = {}", aprime.len(), sub.codim())));
    }
    if aprime.iter().all(|&x| x == 0) {
        return Err(domain("aprime must be nonzero"));
    }
    let theta = shift_column(sub, th)?;
    distance_with_column(sub, &theta, aprime)
}

/// `−ln dist / ln height`: `+∞` at distance zero, NaN at height 1.
pub fn instantaneous_exponent<S: Scalar>(dist: &S, height: u64) -> f64 {
    if dist.is_zero() {
        return f64::INFINITY;
    }
    if height < 2 {
        return f64::NAN;
    }
    -dist.ln_abs() / (height as f64).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record<S> {
    pub height: u64,
    pub aprime: Vec<i64>,
    pub adoubleprime: Vec<i64>,
    pub dist: S,
    pub vhat: f64,
}

/// Best-approximation records: heights strictly increasing, distances
/// strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable<S> {
    pub entries: Vec<Record<S>>,
}

impl<S: Scalar> RecordTable<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn heights(&self) -> Vec<u64> {
        self.entries.iter().map(|r| r.height).collect()
    }

    pub fn reaches_zero(&self) -> bool {
        self.entries.iter().any(|r| r.dist.is_zero())
    }
}

/// Scans `0 < ‖a′‖ ≤ hmax` shell by shell. Each shell contributes its
/// minimum (first in lexicographic order) when it strictly improves on every
/// earlier distance. The scan stops at distance zero.
pub fn dual_records<S: Scalar>(sub: &AffineSubspace<S>, th: &InhomShift<S>, hmax: u64) -> Result<RecordTable<S>> {
    if hmax == 0 {
        return Err(domain("hmax must be at least 1"));
    }
    budget::check(punctured_box_size(sub.codim(), hmax))?;
    let theta = shift_column(sub, th)?;
    let k = sub.codim();
    let minima = par::map_indexed(hmax as usize, |i| {
        let h = i as u64 + 1;
        let mut best: Option<Result<(Vec<i64>, DualDistance<S>)>> = None;
        for_each_in_shell(k, h, |a| {
            if matches!(best, Some(Err(_))) {
                return;
            }
            match distance_with_column(sub, &theta, a) {
                Ok(dd) => {
                    let better = match &best {
                        Some(Ok((_, cur))) => dd.dist < cur.dist,
                        _ => true,
                    };
                    if better {
                        best = Some(Ok((a.to_vec(), dd)));
                    }
                }
                Err(e) => best = Some(Err(e)),
            }
        });
        best.expect("shells of positive height are nonempty")
    });
    let mut entries: Vec<Record<S>> = Vec::new();
    for (i, shell_min) in minima.into_iter().enumerate() {
        let (aprime, dd) = shell_min?;
        if entries.last().is_some_and(|last| dd.dist >= last.dist) {
            continue;
        }
        let height = i as u64 + 1;
        let stop = dd.dist.is_zero();
        entries.push(Record {
            height,
            vhat: instantaneous_exponent(&dd.dist, height),
            aprime,
            adoubleprime: dd.adoubleprime,
            dist: dd.dist,
        });
        if stop {
            break;
        }
    }
    Ok(RecordTable { entries })
}

/// Point estimate of an exponent from a record tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentEstimate {
    pub value: f64,
    pub spread: f64,
    /// Number of records the estimate was taken over.
    pub tail_len: usize,
}

/// Median and range of the last `⌈fraction · len⌉` finite exponents.
/// Any infinite exponent (an exact hit) gives `+∞`. Records with undefined
/// exponents (height 1) are skipped.
pub fn estimate_from_exponents(vhats: &[f64], tail_fraction: f64) -> Result<ExponentEstimate> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(domain(format!("tail fraction {tail_fraction} not in (0, 1]")));
    }
    if vhats.is_empty() {
        return Err(domain("record table is empty"));
    }
    if vhats.iter().any(|v| *v == f64::INFINITY) {
        return Ok(ExponentEstimate { value: f64::INFINITY, spread: 0.0, tail_len: 1 });
    }
    let eligible: Vec<f64> = vhats.iter().copied().filter(|v| v.is_finite()).collect();
    if eligible.is_empty() {
        return Err(domain("no record has a defined exponent (all at height 1)"));
    }
    let take = ((tail_fraction * eligible.len() as f64).ceil() as usize).clamp(1, eligible.len());
    let mut tail = eligible[eligible.len() - take..].to_vec();
    tail.sort_by(f64::total_cmp);
    let mid = tail.len() / 2;
    let value = if tail.len() % 2 == 1 { tail[mid] } else { (tail[mid - 1] + tail[mid]) / 2.0 };
    Ok(ExponentEstimate { value, spread: tail[tail.len() - 1] - tail[0], tail_len: take })
}

pub fn estimate_omega<S: Scalar>(records: &RecordTable<S>, tail_fraction: f64) -> Result<ExponentEstimate> {
    let vhats: Vec<f64> = records.entries.iter().map(|r| r.vhat).collect();
    estimate_from_exponents(&vhats, tail_fraction)
}

/// A solution `(a, a₀)` of `|a₀ + y·a + θ(x)| < ψ(‖a‖ⁿ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalSolution {
    pub a: Vec<i64>,
    pub a0: i64,
}

/// All solutions with `0 < ‖a‖_∞ ≤ q` at the point `parametrize(x)`, where `a₀`
/// is the nearest integer to `−(y·a + θ(x))`. Exhaustive, in shell order.
pub fn primal_solutions<S: Scalar>(
    sub: &AffineSubspace<S>,
    th: &InhomShift<S>,
    psi: &ApproximatingFunction,
    x: &[S],
    q: u64,
) -> Result<Vec<PrimalSolution>> {
    if q == 0 {
        return Err(domain("Q must be at least 1"));
    }
    let n = sub.n();
    budget::check(punctured_box_size(n, q))?;
    let y = sub.parametrize(x)?;
    let shift = th.evaluate(x)?;
    let thresholds: Vec<S> =
        (1..=q).map(|h| S::from_f64_value(psi.evaluate((h as f64).powi(n as i32))?)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut failure = None;
    for_each_in_punctured_box(n, q, |a| {
        if failure.is_some() {
            return;
        }
        let v = y.iter().zip(a).fold(shift.clone(), |acc, (yi, &ai)| acc + yi.clone() * S::from_int(ai));
        let m = (-v.clone()).nearest_integer();
        let Some(a0) = m.to_i64_exact() else {
            failure = Some(domain("a0 does not fit in i64"));
            return;
        };
        let residual = (v + m).abs();
        if residual < thresholds[sup_norm_int(a) as usize - 1] {
            out.push(PrimalSolution { a: a.to_vec(), a0 });
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `|LHS − RHS|` for `θ̂(x) + a₀ + (x, x̃A)·a = x̃(A a′ + a″ + 𝜽)` with
/// `a′ = (a_{d+1}, …, a_n)` and `a″ = (a₀, a_1, …, a_d)`.
pub fn verify_linear_identity<S: Scalar>(
    sub: &AffineSubspace<S>,
    th: &InhomShift<S>,
    a: &[i64],
    a0: i64,
    x: &[S],
) -> Result<S> {
    let d = sub.d();
    let theta = shift_column(sub, th)?;
    let lhs = th.evaluate(x)? + S::from_int(a0) + sub.form(x, a)?;
    let mut column = sub.apply(&a[d..]);
    for (r, c) in column.iter_mut().enumerate() {
        let extra = if r == 0 { a0 } else { a[r - 1] };
        *c = c.clone() + S::from_int(extra) + theta[r].clone();
    }
    let rhs =
        std::iter::once(S::one()).chain(x.iter().cloned()).zip(column).fold(S::zero(), |acc, (xi, ci)| acc + xi * ci);
    Ok((lhs - rhs).abs())
}

/// Finite Borel–Cantelli sums up to height `h_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellSums {
    /// `Σ_{0<‖a‖≤H} ψ(‖a‖ⁿ)`, grouped by shell.
    pub lattice: f64,
    /// `Σ_{h≤H} h^{n−1} ψ(hⁿ)`.
    pub weighted: f64,
    /// `Σ_{k≤Hⁿ} ψ(k)`.
    pub plain: f64,
}

impl ShellSums {
    /// `lattice ≤ 3ⁿ·weighted` and `weighted ≤ plain`.
    pub fn chain_holds(&self, n: usize) -> bool {
        self.lattice <= 3f64.powi(n as i32) * self.weighted && self.weighted <= self.plain
    }
}

pub fn shell_sums(psi: &ApproximatingFunction, n: usize, h_max: u64) -> Result<ShellSums> {
    let top = budget::pow_count(h_max as u128, n as u32);
    budget::check(top)?;
    let mut lattice = 0.0;
    let mut weighted = 0.0;
    for h in 1..=h_max {
        let value = psi.evaluate((h as f64).powi(n as i32))?;
        lattice += crate::shell::shell_size(n, h) as f64 * value;
        weighted += (h as f64).powi(n as i32 - 1) * value;
    }
    let mut plain = 0.0;
    for k in 1..=top as u64 {
        plain += psi.evaluate(k as f64)?;
    }
    Ok(ShellSums { lattice, weighted, plain })
}

/// `‖A a′ + 𝜽‖_∞`, used to size brute-force searches over `a″`.
pub fn offset_norm<S: Scalar>(sub: &AffineSubspace<S>, th: &InhomShift<S>, aprime: &[i64]) -> Result<S> {
    let theta = shift_column(sub, th)?;
    let v: Vec<S> = sub.apply(aprime).into_iter().zip(theta).map(|(x, t)| x + t).collect();
    Ok(sup_norm(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use num_traits::Zero;

    fn line(num: i64, den: i64) -> AffineSubspace<Rational> {
        AffineSubspace::from_ratios(2, 1, &[&[(0, 1)], &[(num, den)]]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let zero = AffineSubspace::<Rational>::zero(2, 1).unwrap();
        let dd = dual_distance(&zero, &InhomShift::Zero, &[3]).unwrap();
        assert_eq!(dd.dist, ratio(0, 1));
        assert_eq!(dd.adoubleprime, vec![0, 0]);

        let dd = dual_distance(&line(1, 3), &InhomShift::Zero, &[1]).unwrap();
        assert_eq!(dd.dist, ratio(1, 3));
        assert_eq!(dd.adoubleprime, vec![0, 0]);

        let th = InhomShift::Linear(vec![ratio(0, 1), ratio(1, 2)]);
        let dd = dual_distance(&line(1, 3), &th, &[1]).unwrap();
        assert_eq!(dd.dist, ratio(1, 6));
        assert_eq!(dd.adoubleprime, vec![0, -1]);

        assert!(dual_distance(&line(1, 3), &InhomShift::Zero, &[0]).is_err());
        assert!(dual_distance(&line(1, 3), &InhomShift::Zero, &[1, 2]).is_err());
    }

    #[test]
    fn half_integer_ties_round_down() {
        let th = InhomShift::Constant(ratio(1, 2));
        let dd = dual_distance(&line(1, 3), &th, &[3]).unwrap();
        assert_eq!(dd.dist, ratio(1, 2));
        assert_eq!(dd.adoubleprime, vec![-1, -1]);
    }

    #[test]
    fn record_examples() {
        let zero = AffineSubspace::<Rational>::zero(2, 1).unwrap();
        let t = dual_records(&zero, &InhomShift::Zero, 5).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.entries[0].dist.is_zero());
        assert_eq!(t.entries[0].vhat, f64::INFINITY);

        let t = dual_records(&line(1, 2), &InhomShift::Zero, 10).unwrap();
        assert_eq!(t.heights(), vec![1, 2]);
        assert_eq!(t.entries[0].dist, ratio(1, 2));
        assert!(t.entries[1].dist.is_zero());
    }

    #[test]
    fn golden_records_follow_fibonacci() {
        let t = dual_records(&AffineSubspace::golden_line(), &InhomShift::Zero, 100).unwrap();
        assert_eq!(t.heights(), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert!(t.entries[0].vhat.is_nan());
    }

    #[test]
    fn estimator_policy() {
        let e = estimate_from_exponents(&[f64::NAN, 1.0, 3.0, 2.0, 5.0], 0.5).unwrap();
        assert_eq!(e.tail_len, 2);
        assert_eq!(e.value, 3.5);
        assert_eq!(e.spread, 3.0);
        assert_eq!(estimate_from_exponents(&[1.0, f64::INFINITY], 0.5).unwrap().value, f64::INFINITY);
        assert!(estimate_from_exponents(&[], 0.5).is_err());
        assert!(estimate_from_exponents(&[f64::NAN], 0.5).is_err());
        assert!(estimate_from_exponents(&[1.0], 0.0).is_err());
    }

    #[test]
    fn primal_at_origin_takes_everything() {
        let zero = AffineSubspace::<Rational>::zero(2, 1).unwrap();
        let psi = ApproximatingFunction::Dirichlet;
        let sols = primal_solutions(&zero, &InhomShift::Zero, &psi, &[ratio(0, 1)], 3).unwrap();
        assert_eq!(sols.len(), 7 * 7 - 1);
        assert!(sols.iter().all(|s| s.a0 == 0));
    }

    #[test]
    fn linear_identity_zero_case() {
        let sub = line(1, 3);
        let th = InhomShift::Linear(vec![ratio(1, 7), ratio(2, 5)]);
        let r = verify_linear_identity(&sub, &th, &[4, -2], 3, &[ratio(5, 11)]).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn shell_sum_chain() {
        for psi in [ApproximatingFunction::Dirichlet, ApproximatingFunction::parse("power:2").unwrap()] {
            for n in 1..=4 {
                assert!(shell_sums(&psi, n, 6).unwrap().chain_holds(n));
            }
        }
    }
}
