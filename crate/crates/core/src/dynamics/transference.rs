//! Randomized checks of the intersection and contraction properties of the
//! sets `I_t(α, φ)`.

use rand::Rng;

use super::nondiv::least_squares_slope;
use super::Rates;
use crate::ball::Ball;
use crate::budget;
use crate::error::{domain, Result};
use crate::goodfn::f_t_alpha;
use crate::rng::stream_rng;
use crate::scalar::{Rational, Scalar};
use crate::sets::{self, in_dyadic_shell, in_h_t, in_i_t, phi, Thresholds};
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionReport {
    pub t: u32,
    pub trials: usize,
    /// Sampled points lying in at least one `I_t(α, φ_δ(t))`.
    pub points_in_some_set: usize,
    /// Confirmed memberships, at most the member cap per trial.
    pub memberships: usize,
    pub pairs_checked: usize,
    /// Pairs left unchecked because of `max_pairs`.
    pub pairs_skipped: usize,
    /// Trials whose member search stopped at the cap implied by `max_pairs`.
    pub truncated_trials: usize,
    pub violations: usize,
    /// Pairs with `a = a′`, `a₀ ≠ a₀′`; each is also a violation.
    pub same_a_witnesses: usize,
}

/// Up to `limit` pairs `(a, a₀)` with `x ∈ I_t(α, ·)`, found with a binary64
/// prefilter and confirmed exactly.
#[allow(clippy::too_many_arguments)]
fn members_at(
    sub: &AffineSubspace<Rational>,
    subf: &AffineSubspace<f64>,
    th: &InhomShift<Rational>,
    thf: &InhomShift<f64>,
    t: u32,
    bounds: &Thresholds<Rational>,
    boundsf: &Thresholds<f64>,
    x: &[Rational],
    limit: usize,
) -> Result<Vec<(Vec<i64>, i64)>> {
    let (n, d) = (sub.n(), sub.d());
    let xf: Vec<f64> = x.iter().map(Scalar::as_f64).collect();
    let tv = thf.evaluate(&xf)?;
    let tg = thf.gradient(&xf, sets::FD_STEP)?;
    let m = (1i64 << (t + 1)) - 1;
    let side = (2 * m + 1) as u64;
    let count = side.pow((n - d) as u32);
    let slack = 1e-9;
    let mut out = Vec::new();
    let mut a = vec![0i64; n];
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut base = vec![0.0; d];
    for idx in 0..count {
        let mut rest = idx;
        for slot in a[d..].iter_mut() {
            *slot = (rest % side) as i64 - m;
            rest /= side;
        }
        let c0 = subf.form_offset(&a);
        let mut empty = false;
        for i in 0..d {
            base[i] = subf.rows()[i + 1].iter().zip(&a[d..]).map(|(c, &k)| c * k as f64).sum::<f64>() + tg[i];
            let g = boundsf.gradient + slack;
            lo[i] = ((-base[i] - g).floor() as i64).max(-m);
            hi[i] = ((-base[i] + g).ceil() as i64).min(m);
            empty |= lo[i] > hi[i];
        }
        if empty {
            continue;
        }
        a[..d].copy_from_slice(&lo);
        loop {
            if in_dyadic_shell(&a, t) {
                let v = tv + c0 + (0..d).map(|i| xf[i] * (a[i] as f64 + base[i] - tg[i])).sum::<f64>();
                let a0 = -(v.round() as i64);
                if (v + a0 as f64).abs() < boundsf.residual + slack && in_i_t(sub, th, t, &a, a0, bounds, x)? {
                    out.push((a.clone(), a0));
                    if out.len() == limit {
                        return Ok(out);
                    }
                }
            }
            let mut axis = 0;
            while axis < d {
                if a[axis] < hi[axis] {
                    a[axis] += 1;
                    break;
                }
                a[axis] = lo[axis];
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
    }
    Ok(out)
}

fn sample_point(ball: &Ball, rng: &mut impl Rng, targeted: bool) -> Vec<Rational> {
    (0..ball.dim())
        .map(|j| {
            let (lo, hi) = (ball.lower(j), ball.upper(j));
            if targeted {
                let m = rng.random_range(1..=12i64);
                let kl = (lo * m as f64).ceil() as i64;
                let kh = (hi * m as f64).floor() as i64;
                if kl <= kh {
                    return Rational::new(rng.random_range(kl..=kh).into(), m.into());
                }
            }
            let u: f64 = rng.random();
            Rational::from_f64_value(((lo + (hi - lo) * u) * 2f64.powi(32)).round() / 2f64.powi(32))
                .expect("finite sample")
        })
        .collect()
}

/// Samples `x ∈ B` (even trials uniformly, odd trials at rationals with
/// denominator at most 12), collects every `α` with `x ∈ I_t(α, φ_δ(t))` and
/// checks each unordered pair: `a ≠ a′` and `x ∈ H_t(α − α′, φ_δ(t))`, all
/// in exact arithmetic. The member search stops once the members found can
/// fill `max_pairs` pairs. Thresholds are the exact values of their binary64
/// images.
#[allow(clippy::too_many_arguments)]
pub fn check_intersection_property(
    sub: &AffineSubspace<Rational>,
    th: &InhomShift<Rational>,
    ball: &Ball,
    t: u32,
    delta: f64,
    l: f64,
    trials: usize,
    max_pairs: usize,
    seed: u64,
) -> Result<IntersectionReport> {
    let (n, d) = (sub.n(), sub.d());
    if ball.dim() != d {
        return Err(domain("ball dimension must equal d"));
    }
    if t as f64 * (n as f64 - delta) < 1.0 {
        return Err(domain("need t(n - delta) >= 1"));
    }
    if t > 20 {
        return Err(domain("t too large for exhaustive enumeration"));
    }
    let boundsf = Thresholds::inhom(n, d, t, phi(delta, t), l);
    let bounds = boundsf.to_scalar::<Rational>()?;
    let hbounds = bounds.doubled();
    let side = (1u128 << (t + 2)) - 1;
    let window = (2.0 * boundsf.gradient + 3.0) as u128;
    budget::check(budget::pow_count(side, (n - d) as u32).saturating_mul(budget::pow_count(window, d as u32)))?;
    let subf = sub.to_f64();
    let thf = th.to_f64();
    let mut report = IntersectionReport {
        t,
        trials,
        points_in_some_set: 0,
        memberships: 0,
        pairs_checked: 0,
        pairs_skipped: 0,
        truncated_trials: 0,
        violations: 0,
        same_a_witnesses: 0,
    };
    let member_cap = (2..).find(|k| k * (k - 1) / 2 >= max_pairs).expect("unbounded search");
    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial as u64);
        let x = sample_point(ball, &mut rng, trial % 2 == 1);
        let members = members_at(sub, &subf, th, &thf, t, &bounds, &boundsf, &x, member_cap)?;
        if members.len() == member_cap {
            report.truncated_trials += 1;
        }
        if !members.is_empty() {
            report.points_in_some_set += 1;
        }
        report.memberships += members.len();
        let mut budget_left = max_pairs;
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if budget_left == 0 {
                    report.pairs_skipped += 1;
                    continue;
                }
                budget_left -= 1;
                report.pairs_checked += 1;
                let (a, a0) = &members[i];
                let (b, b0) = &members[j];
                if a == b {
                    report.same_a_witnesses += 1;
                    report.violations += 1;
                    continue;
                }
                let diff: Vec<i64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
                if !in_h_t(sub, t, &diff, a0 - b0, &hbounds, &x)? {
                    report.violations += 1;
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub t: u32,
    /// Worst `ϱ(5𝔅 ∩ I_t(α, φ_δ(t))) / ϱ(5𝔅)` over the centres.
    pub ratio: f64,
    pub k_t: f64,
    pub centers: usize,
    pub training: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub instances: usize,
    pub skipped_below_t0: usize,
    /// Centres whose balls the local grid cannot resolve.
    pub skipped_unresolved: usize,
    pub t0: Option<u32>,
    pub alpha0_fit: f64,
    pub c_tilde: f64,
    pub c_d: f64,
    pub cover_failures: usize,
    pub containment_failures: usize,
    pub contraction_violations: usize,
    pub outside_11b: usize,
    /// `Σ_{t ≥ t₀} k_t` in closed form.
    pub k_sum: f64,
    pub k_sum_finite: bool,
    pub rows: Vec<ContractionRow>,
}

const LOCAL_POINTS: usize = 8192;
const PROFILE_LEVELS: i32 = 10;

struct Instance {
    t: u32,
    ratio: f64,
    centers: usize,
    profile: Vec<(f64, f64)>,
}

/// Grid points `lo + (k + 1/2) h` and prefix counts for O(1) range measures.
struct Local {
    lo: f64,
    h: f64,
    xs: Vec<f64>,
    f: Vec<f64>,
}

impl Local {
    fn range(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let i = self.xs.partition_point(|&x| x < a);
        let j = self.xs.partition_point(|&x| x <= b);
        i..j
    }
}

/// Newton iteration for a zero of the residual, started at `x`.
fn residual_root(sub: &AffineSubspace<f64>, th: &InhomShift<f64>, a: &[i64], a0: i64, x: f64) -> Result<Option<f64>> {
    let mut y = x;
    for _ in 0..40 {
        let r = sets::residual(sub, th, a, a0, &[y])?;
        let g = sets::gradient(sub, th, a, &[y])?[0];
        if g == 0.0 || !g.is_finite() {
            return Ok(None);
        }
        let step = r / g;
        y -= step;
        if step.abs() <= 1e-15 * y.abs().max(1.0) {
            break;
        }
    }
    Ok(Some(y))
}

/// Distance from `c` in `[lo, hi]` to the nearest unmarked point, by
/// exponential search and bisection on `F < thr`.
fn half_width(f: &dyn Fn(f64) -> Result<f64>, c: f64, thr: f64, cap: f64) -> Result<f64> {
    let mut widest = 0.0f64;
    for dir in [-1.0, 1.0] {
        let mut inside = 0.0;
        let mut s = 1e-300f64.max(cap * 1e-18);
        let mut outside = None;
        while s <= cap {
            if f(c + dir * s)? >= thr {
                outside = Some(s);
                break;
            }
            inside = s;
            s *= 2.0;
        }
        let Some(mut out) = outside else {
            return Ok(cap);
        };
        for _ in 0..80 {
            let mid = 0.5 * (inside + out);
            if f(c + dir * mid)? >= thr {
                out = mid;
            } else {
                inside = mid;
            }
        }
        widest = widest.max(out);
    }
    Ok(widest)
}

/// Contraction check for `d = 1`. Each instance draws `t`, an `a` in the
/// dyadic shell meeting the gradient bound, and `a₀` placing a residual zero
/// `x*` in `B̄`. On a local grid around `x*`, every grid point `x` of
/// `I_t(α, φ_δ(t)) ∩ B̄` gets the largest ball `𝔅(x)` whose trace on `B̄`
/// stays in `I_t(α, φ_δ⁺(t))`; the worst `ϱ(5𝔅 ∩ I_t(α, φ_δ(t)))/ϱ(5𝔅)` is
/// recorded with `ϱ` the measure restricted to `B`.
///
/// `(C̃, α₀)` come from sublevel profiles of `F_{t,α}` on `5𝔅(x*)` over the
/// first half of the instances; the second half is checked against
/// `k_t = c_d C̃ 2^{−((γ−δ)/2) α₀ t}` with `c_d = 2^d`.
#[allow(clippy::too_many_arguments)]
pub fn check_contraction_property(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    ball: &Ball,
    ts: std::ops::RangeInclusive<u32>,
    rates: Rates,
    l: f64,
    trials: usize,
    seed: u64,
) -> Result<ContractionReport> {
    let (n, d) = (sub.n(), sub.d());
    if d != 1 || ball.dim() != 1 {
        return Err(domain("the contraction check is implemented for d = 1 only"));
    }
    if ts.is_empty() || *ts.end() > 40 {
        return Err(domain("t range must be nonempty and at most 40"));
    }
    let (c, r) = (ball.center()[0], ball.radius());
    let in_closed = |y: f64| (y - c).abs() <= r;
    let ndl = (n as f64 * l).sqrt();
    let coarse: Vec<f64> = (0..1024).map(|k| c - r + (k as f64 + 0.5) * (2.0 * r / 1024.0)).collect();

    let mut instances: Vec<Instance> = Vec::new();
    let mut report = ContractionReport {
        instances: 0,
        skipped_below_t0: 0,
        skipped_unresolved: 0,
        t0: None,
        alpha0_fit: f64::NAN,
        c_tilde: f64::NAN,
        c_d: 2f64.powi(d as i32),
        cover_failures: 0,
        containment_failures: 0,
        contraction_violations: 0,
        outside_11b: 0,
        k_sum: f64::NAN,
        k_sum_finite: false,
        rows: Vec::new(),
    };

    for trial in 0..trials {
        let mut rng = stream_rng(seed, trial as u64);
        let t = rng.random_range(ts.clone());
        let tf = t as f64;
        let thr1 = phi(rates.delta, t) * ndl * (tf / 2.0).exp2();
        let thr2 = ((rates.delta + rates.gamma) / 2.0 * tf).exp2() * ndl * (tf / 2.0).exp2();
        let m = (1i64 << (t + 1)) - 1;
        let target = c + r * (2.0 * rng.random::<f64>() - 1.0);
        let tg = th.gradient(&[target], sets::FD_STEP)?[0];
        let mut a = vec![0i64; n];
        let mut found = false;
        for _ in 0..200 {
            for v in a[1..].iter_mut() {
                *v = rng.random_range(-m..=m);
            }
            let base: f64 = sub.rows()[1].iter().zip(&a[1..]).map(|(c, &k)| c * k as f64).sum::<f64>() + tg;
            let lo = ((-base - thr1).floor() as i64 + 1).max(-m);
            let hi = ((-base + thr1).ceil() as i64 - 1).min(m);
            if lo > hi {
                continue;
            }
            a[0] = rng.random_range(lo..=hi);
            if in_dyadic_shell(&a, t) {
                found = true;
                break;
            }
        }
        if !found {
            continue;
        }
        let a0 = -(sets::residual(sub, th, &a, 0, &[target])?.round() as i64);
        let Some(root) = residual_root(sub, th, &a, a0, target)? else { continue };
        let f = |y: f64| f_t_alpha(sub, th, t, &a, a0, l, &[y]);
        if !in_closed(root) || f(root)? >= thr1 {
            continue;
        }
        report.instances += 1;
        let mut proper = false;
        for &y in &coarse {
            if f(y)? >= thr2 {
                proper = true;
                break;
            }
        }
        if !proper {
            report.skipped_below_t0 += 1;
            continue;
        }
        let w = half_width(&f, root, thr2, 11.0 * r)?;
        let lo = (root - 12.0 * w).max(c - 11.0 * r);
        let hi = (root + 12.0 * w).min(c + 11.0 * r);
        let h = (hi - lo) / LOCAL_POINTS as f64;
        let xs: Vec<f64> = (0..LOCAL_POINTS).map(|k| lo + (k as f64 + 0.5) * h).collect();
        let fv = xs.iter().map(|&y| f(y)).collect::<Result<Vec<f64>>>()?;
        let local = Local { lo, h, xs, f: fv };
        let bad: Vec<f64> =
            local.xs.iter().zip(&local.f).filter(|(y, v)| in_closed(**y) && **v >= thr2).map(|(y, _)| *y).collect();
        let mut s1_in_b = vec![0usize; LOCAL_POINTS + 1];
        let mut in_b = vec![0usize; LOCAL_POINTS + 1];
        for k in 0..LOCAL_POINTS {
            let y = local.xs[k];
            let b = (y - c).abs() < r;
            in_b[k + 1] = in_b[k] + b as usize;
            s1_in_b[k + 1] = s1_in_b[k] + (b && local.f[k] < thr1) as usize;
        }
        let mut worst = 0.0f64;
        let mut centers = 0;
        let mut best_center: Option<(f64, f64)> = None;
        for k in 0..LOCAL_POINTS {
            let x = local.xs[k];
            if !(in_closed(x) && local.f[k] < thr1) {
                continue;
            }
            // (27): the centre lies in its own ball only if it is inside the outer set.
            if local.f[k] >= thr2 {
                report.cover_failures += 1;
                continue;
            }
            let j = bad.partition_point(|&y| y < x);
            let mut r_bad = f64::INFINITY;
            if j < bad.len() {
                r_bad = r_bad.min(bad[j] - x);
            }
            if j > 0 {
                r_bad = r_bad.min(x - bad[j - 1]);
            }
            let radius = r_bad - local.h;
            if !radius.is_finite() || radius <= 0.0 || x - 5.0 * radius < local.lo || x + 5.0 * radius > hi {
                report.skipped_unresolved += 1;
                continue;
            }
            centers += 1;
            // (28): the ball's trace on B̄ stays inside the outer set.
            for y in [x - radius * (1.0 - 1e-12), x + radius * (1.0 - 1e-12)] {
                if in_closed(y) && f(y)? >= thr2 {
                    report.containment_failures += 1;
                }
            }
            if (x - 5.0 * radius - c).abs() >= 11.0 * r || (x + 5.0 * radius - c).abs() >= 11.0 * r {
                report.outside_11b += 1;
            }
            let rg = local.range(x - 5.0 * radius, x + 5.0 * radius);
            let denom = in_b[rg.end] - in_b[rg.start];
            if denom == 0 {
                continue;
            }
            let ratio = (s1_in_b[rg.end] - s1_in_b[rg.start]) as f64 / denom as f64;
            worst = worst.max(ratio);
            if best_center.is_none_or(|(bx, _)| (x - root).abs() < (bx - root).abs()) {
                best_center = Some((x, radius));
            }
        }
        if centers == 0 {
            continue;
        }
        let mut profile = Vec::new();
        if let Some((x, radius)) = best_center {
            let rg = local.range(x - 5.0 * radius, x + 5.0 * radius);
            let vals = &local.f[rg];
            let sup = vals.iter().cloned().fold(0.0f64, f64::max);
            for k in 1..=PROFILE_LEVELS {
                let level = (-(k as f64)).exp2();
                let inside = vals.iter().filter(|&&v| v <= level * sup).count();
                profile.push((level, inside as f64 / vals.len() as f64));
            }
        }
        report.t0 = Some(report.t0.map_or(t, |t0| t0.min(t)));
        instances.push(Instance { t, ratio: worst, centers, profile });
    }

    let split = instances.len() / 2;
    let pts: Vec<(f64, f64)> = instances[..split]
        .iter()
        .flat_map(|i| i.profile.iter())
        .filter(|p| p.1 > 0.0)
        .map(|&(level, m)| (level.log2(), m.log2()))
        .collect();
    if pts.len() >= 2 {
        let alpha0 = least_squares_slope(&pts);
        let c_tilde = instances[..split]
            .iter()
            .flat_map(|i| i.profile.iter())
            .map(|&(level, m)| m / level.powf(alpha0))
            .fold(0.0f64, f64::max);
        report.alpha0_fit = alpha0;
        report.c_tilde = c_tilde;
        let rate = (rates.gamma - rates.delta) / 2.0 * alpha0;
        for (idx, inst) in instances.iter().enumerate() {
            let k_t = report.c_d * c_tilde * (-rate * inst.t as f64).exp2();
            let training = idx < split;
            if !training && inst.ratio > k_t * (1.0 + 1e-12) {
                report.contraction_violations += 1;
            }
            report.rows.push(ContractionRow { t: inst.t, ratio: inst.ratio, k_t, centers: inst.centers, training });
        }
        report.k_sum_finite = rate > 0.0;
        if let Some(t0) = report.t0 {
            let q = (-rate).exp2();
            report.k_sum =
                if rate > 0.0 { report.c_d * c_tilde * q.powi(t0 as i32) / (1.0 - q) } else { f64::INFINITY };
        }
    }
    Ok(report)
}
