//! Grid measures of truncated limsup sets, the gradient split of `𝓛(a, B)`,
//! the large/small derivative sets at scale `Q`, and the closed-form
//! divergence-side formulas.

use crate::ball::Ball;
use crate::budget;
use crate::dynamics::{a_t_window, mark_window, FlowParams, Rates};
use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::par;
use crate::psi::ApproximatingFunction;
use crate::scalar::{sup_norm, sup_norm_int, Scalar};
use crate::sets::{self, FD_STEP};
use crate::shell::for_each_in_shell;
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

/// Per-`a` constant in the Borel–Cantelli cap: `𝓛(a, B)` has measure about
/// `2ψ(‖a‖ⁿ)|B|` once the gradient is not small.
pub const BC_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LEstimate {
    pub value: f64,
    /// Second partials came from finite differences.
    pub finite_difference: bool,
}

/// `max{sup_{|β|=2, x∈2B} |∂_β θ̂(x)|, 1/(4r²)}`; callables are sampled on a
/// grid over `2B`.
pub fn compute_l(th: &InhomShift<f64>, ball: &Ball) -> Result<LEstimate> {
    let r = ball.radius();
    let floor = 1.0 / (4.0 * r * r);
    let InhomShift::Callable(c) = th else {
        return Ok(LEstimate { value: floor, finite_difference: false });
    };
    let d = ball.dim();
    let per_axis = match d {
        1 => 257,
        2 => 33,
        3 => 9,
        _ => 5,
    };
    let grid = Grid::new(ball.scaled(2.0)?, per_axis)?;
    budget::check(grid.len() as u128)?;
    let mut sup = 0.0f64;
    for x in grid.points() {
        for row in th.hessian(&x, 1e-4)? {
            for v in row {
                if !v.is_finite() {
                    return Err(crate::Error::Evaluation(format!("non-finite second derivative at {x:?}")));
                }
                sup = sup.max(v.abs());
            }
        }
    }
    Ok(LEstimate { value: sup.max(floor), finite_difference: c.hessian.is_none() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    NotInL,
    Small,
    Large,
}

/// Splits `𝓛(a, B)` by the gradient threshold `√(ndL‖a‖)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSplit {
    pub a: Vec<i64>,
    pub l: f64,
    pub threshold: f64,
}

impl GradientSplit {
    pub fn new(n: usize, d: usize, a: &[i64], l: f64) -> Result<Self> {
        if a.len() != n || a.iter().all(|&v| v == 0) {
            return Err(domain("a must be a nonzero vector of length n"));
        }
        let threshold = ((n * d) as f64 * l * sup_norm_int(a) as f64).sqrt();
        Ok(Self { a: a.to_vec(), l, threshold })
    }

    /// `Small` iff the gradient sup norm is strictly below the threshold.
    pub fn label(&self, gradient_norm: f64) -> PointClass {
        if gradient_norm < self.threshold {
            PointClass::Small
        } else {
            PointClass::Large
        }
    }
}

/// Classifies `x` against `𝓛(a, B)` with `a₀` the nearest integer to
/// `−(θ̂(x) + (x, x̃A)·a)`, which minimizes the residual for every `ψ`.
pub fn classify_point(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    psi: &ApproximatingFunction,
    a: &[i64],
    l: f64,
    x: &[f64],
) -> Result<PointClass> {
    let split = GradientSplit::new(sub.n(), sub.d(), a, l)?;
    let v = sets::residual(sub, th, a, 0, x)?;
    let bound = psi.evaluate((sup_norm_int(a) as f64).powi(sub.n() as i32))?;
    if (v - v.nearest_integer()).abs() >= bound {
        return Ok(PointClass::NotInL);
    }
    Ok(split.label(sup_norm(&sets::gradient(sub, th, a, x)?)))
}

/// The shift restricted to a grid: affine shifts stay symbolic, callables
/// are sampled once.
enum ShiftView {
    Affine { value: f64, slope: Vec<f64> },
    Sampled { points: Vec<Vec<f64>>, values: Vec<f64>, grads: Vec<Vec<f64>> },
}

impl ShiftView {
    fn new(th: &InhomShift<f64>, grid: &Grid) -> Result<Self> {
        let d = grid.dim();
        if let Some(col) = th.column(d) {
            return Ok(Self::Affine { value: col[0], slope: col[1..].to_vec() });
        }
        let points = grid.points();
        let values = points.iter().map(|x| th.evaluate(x)).collect::<Result<Vec<_>>>()?;
        let grads = points.iter().map(|x| th.gradient(x, FD_STEP)).collect::<Result<Vec<_>>>()?;
        Ok(Self::Sampled { points, values, grads })
    }

    /// Marks grid points with `dist(θ̂(x) + (x, x̃A)·a, Z) < bound` whose total
    /// gradient passes `keep`.
    fn mark(
        &self,
        sub: &AffineSubspace<f64>,
        grid: &Grid,
        a: &[i64],
        bound: f64,
        keep: &dyn Fn(f64) -> bool,
        out: &mut [bool],
    ) {
        let c0 = sub.form_offset(a);
        let g = sub.form_gradient(a);
        match self {
            Self::Affine { value, slope } => {
                let total: Vec<f64> = g.iter().zip(slope).map(|(u, v)| u + v).collect();
                if keep(sup_norm(&total)) {
                    grid.mark_near_integer(c0 + value, &total, bound, out);
                }
            }
            Self::Sampled { points, values, grads } => {
                for (i, x) in points.iter().enumerate() {
                    if out[i] {
                        continue;
                    }
                    let v = values[i] + c0 + g.iter().zip(x).map(|(u, xi)| u * xi).sum::<f64>();
                    if (v - v.nearest_integer()).abs() < bound {
                        let norm = g.iter().zip(&grads[i]).fold(0.0f64, |m, (u, w)| m.max((u + w).abs()));
                        out[i] |= keep(norm);
                    }
                }
            }
        }
    }
}

/// ORs `mark` over every `a` with `‖a‖ = h` for `h` in `heights`, in parallel
/// over chunks of heights.
fn mark_heights(
    sub: &AffineSubspace<f64>,
    view: &ShiftView,
    grid: &Grid,
    heights: std::ops::Range<u64>,
    bound_at: &(dyn Fn(u64) -> Result<f64> + Sync),
    keep_at: &(dyn Fn(u64, f64) -> bool + Sync),
) -> Result<Vec<bool>> {
    let n = sub.n();
    let hs: Vec<u64> = heights.collect();
    let ranges = par::chunk_ranges(hs.len(), par::worker_hint());
    let parts = par::map_indexed(ranges.len(), |c| -> Result<Vec<bool>> {
        let mut out = vec![false; grid.len()];
        for &h in &hs[ranges[c].clone()] {
            let bound = bound_at(h)?;
            let keep = |g: f64| keep_at(h, g);
            for_each_in_shell(n, h, |a| view.mark(sub, grid, a, bound, &keep, &mut out));
        }
        Ok(out)
    });
    Ok(par::or_reduce(grid.len(), parts.into_iter().collect::<Result<Vec<_>>>()?))
}

fn check_dims(sub: &AffineSubspace<f64>, ball: &Ball) -> Result<()> {
    if ball.dim() != sub.d() {
        return Err(domain("ball dimension must equal d"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub t0: u32,
    pub tail_measure: f64,
    pub bc_cap: f64,
    /// Boundary cells times cell volume: the midpoint rule's resolution.
    pub slack: f64,
}

/// Tail measures for every start `t0..=t1` at a fixed end `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailProfile {
    pub t1: u32,
    pub rows: Vec<TailRow>,
    pub cap_constant: f64,
}

impl TailProfile {
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].tail_measure >= w[1].tail_measure)
    }

    pub fn below_cap(&self) -> bool {
        self.rows.iter().all(|r| r.tail_measure <= r.bc_cap + r.slack)
    }
}

/// `K·3ⁿ Σ h^{n−1} ψ(hⁿ) |B|` over `2^{t0} ≤ h < 2^{t1+1}`.
pub fn bc_cap(psi: &ApproximatingFunction, n: usize, t0: u32, t1: u32, volume: f64) -> Result<f64> {
    let mut sum = 0.0;
    for h in 1u64 << t0..1u64 << (t1 + 1) {
        sum += (h as f64).powi(n as i32 - 1) * psi.evaluate((h as f64).powi(n as i32))?;
    }
    Ok(BC_CONSTANT * 3f64.powi(n as i32) * sum * volume)
}

/// Grid measures of `{x ∈ B : x ∈ 𝓛(a, B) for some a with 2^t ≤ ‖a‖ < 2^{t+1},
/// t ∈ [s, t1]}` for each `s` in `t0..=t1`.
pub fn limsup_tail_profile(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    psi: &ApproximatingFunction,
    ball: &Ball,
    per_axis: usize,
    t0: u32,
    t1: u32,
) -> Result<TailProfile> {
    check_dims(sub, ball)?;
    if t1 < t0 || t1 > 30 {
        return Err(domain("need t0 <= t1 <= 30"));
    }
    let n = sub.n();
    let grid = Grid::new(ball.clone(), per_axis)?;
    let top = (1u128 << (t1 + 2)) - 1;
    let count = budget::pow_count(top, n as u32);
    budget::check(if th.is_affine() { count } else { count.saturating_mul(grid.len() as u128) })?;
    let view = ShiftView::new(th, &grid)?;
    let bound_at = |h: u64| psi.evaluate((h as f64).powi(n as i32));
    let keep_all = |_: u64, _: f64| true;
    let mut shells = Vec::new();
    for t in t0..=t1 {
        shells.push(mark_heights(sub, &view, &grid, 1u64 << t..1u64 << (t + 1), &bound_at, &keep_all)?);
    }
    let mut acc = vec![false; grid.len()];
    let mut rows = Vec::new();
    for (t, flags) in (t0..=t1).collect::<Vec<_>>().into_iter().zip(shells).rev() {
        for (o, f) in acc.iter_mut().zip(flags) {
            *o |= f;
        }
        rows.push(TailRow {
            t0: t,
            tail_measure: grid.measure(&acc),
            bc_cap: bc_cap(psi, n, t, t1, ball.volume())?,
            slack: grid.boundary_cells(&acc) as f64 * grid.cell_volume(),
        });
    }
    rows.reverse();
    Ok(TailProfile { t1, rows, cap_constant: BC_CONSTANT })
}

pub fn limsup_tail_measure(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    psi: &ApproximatingFunction,
    ball: &Ball,
    per_axis: usize,
    t0: u32,
    t1: u32,
) -> Result<f64> {
    Ok(limsup_tail_profile(sub, th, psi, ball, per_axis, t0, t1)?.rows[0].tail_measure)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeShellRow {
    pub h: u64,
    pub count: u128,
    pub measure: f64,
    /// `measure / (ψ(hⁿ) · count · |B|)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeSetReport {
    pub rows: Vec<LargeShellRow>,
    pub max_ratio: f64,
    /// Measure of the union over all shells from each start height on.
    pub tail: Vec<(u64, f64)>,
    pub tail_monotone: bool,
}

/// Per-shell grid measure of `∪_{‖a‖=h} 𝓛_large(a, B)`.
#[allow(clippy::too_many_arguments)]
pub fn large_set_measure_check(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    psi: &ApproximatingFunction,
    ball: &Ball,
    per_axis: usize,
    heights: std::ops::RangeInclusive<u64>,
    l: f64,
) -> Result<LargeSetReport> {
    check_dims(sub, ball)?;
    if *heights.start() == 0 || heights.is_empty() {
        return Err(domain("heights must be a nonempty range of positive integers"));
    }
    let (n, d) = (sub.n(), sub.d());
    let grid = Grid::new(ball.clone(), per_axis)?;
    budget::check(budget::pow_count(2 * *heights.end() as u128 + 1, n as u32))?;
    let view = ShiftView::new(th, &grid)?;
    let bound_at = |h: u64| psi.evaluate((h as f64).powi(n as i32));
    let keep_large = |h: u64, g: f64| g >= ((n * d) as f64 * l * h as f64).sqrt();
    let vol = ball.volume();
    let mut rows = Vec::new();
    let mut flags_per_shell = Vec::new();
    for h in heights.clone() {
        let flags = mark_heights(sub, &view, &grid, h..h + 1, &bound_at, &keep_large)?;
        let measure = grid.measure(&flags);
        let count = crate::shell::shell_size(n, h);
        let ratio = measure / (bound_at(h)? * count as f64 * vol);
        rows.push(LargeShellRow { h, count, measure, ratio });
        flags_per_shell.push(flags);
    }
    let mut acc = vec![false; grid.len()];
    let mut tail = Vec::new();
    for (h, flags) in heights.collect::<Vec<_>>().into_iter().zip(flags_per_shell).rev() {
        for (o, f) in acc.iter_mut().zip(flags) {
            *o |= f;
        }
        tail.push((h, grid.measure(&acc)));
    }
    tail.reverse();
    let tail_monotone = tail.windows(2).all(|w| w[0].1 >= w[1].1);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(LargeSetReport { rows, max_ratio, tail, tail_monotone })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRow {
    pub kappa: f64,
    pub l1_measure: f64,
    pub l2_measure: f64,
    /// `|𝓛¹|/(κ|B|)`.
    pub l1_ratio: f64,
    /// `|𝓛²|/(κ|B|)`.
    pub l2_ratio: f64,
    /// `(|𝓛¹| + |𝓛²|)/(κ|B|)`.
    pub combined_ratio: f64,
    /// `𝓛² ⊆ 𝒜_t` on every grid point, `t = ⌊log₂ Q⌋`.
    pub l2_in_a_t: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub q: u64,
    pub t: u32,
    pub rows: Vec<SplitRow>,
    pub c0_hat: f64,
}

impl SplitReport {
    /// `max/min` of the combined ratio across `κ`.
    pub fn variation(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.combined_ratio), hi.max(r.combined_ratio)));
        hi / lo
    }

    pub fn l2_in_a_t(&self) -> bool {
        self.rows.iter().all(|r| r.l2_in_a_t)
    }
}

/// Grid measures of the large- and small-derivative sets at scale `Q`:
/// `|a₀ + (x, x̃A)·a| < κ/Qⁿ`, `0 < ‖a‖ ≤ Q`, gradient at least (resp.
/// below) `√(nd‖a‖)/(2r)`. `𝒜_t` uses `L = 1/(4r²)` and `δ = 0`.
pub fn l1_l2_bound_check(
    sub: &AffineSubspace<f64>,
    ball: &Ball,
    kappas: &[f64],
    q: u64,
    per_axis: usize,
) -> Result<SplitReport> {
    check_dims(sub, ball)?;
    if q < 2 {
        return Err(domain("Q must be at least 2"));
    }
    let (n, d) = (sub.n(), sub.d());
    budget::check(budget::pow_count(2 * q as u128 + 1, n as u32))?;
    let grid = Grid::new(ball.clone(), per_axis)?;
    let view = ShiftView::Affine { value: 0.0, slope: vec![0.0; d] };
    let r = ball.radius();
    let vol = ball.volume();
    let t = 63 - q.leading_zeros();
    let params = FlowParams::new(n, d, t, Rates::auto(n), 1.0 / (4.0 * r * r))?;
    let a_t = mark_window(sub, &grid, &a_t_window(&params))?;
    let mut rows = Vec::new();
    let mut c0_hat = 0.0f64;
    for &kappa in kappas {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(domain("kappa must lie in (0, 1)"));
        }
        let bound = kappa / (q as f64).powi(n as i32);
        let bound_at = |_: u64| Ok(bound);
        let threshold = |h: u64| ((n * d) as f64 * h as f64).sqrt() / (2.0 * r);
        let large = |h: u64, g: f64| g >= threshold(h);
        let small = |h: u64, g: f64| g < threshold(h);
        let l1 = mark_heights(sub, &view, &grid, 1..q + 1, &bound_at, &large)?;
        let l2 = mark_heights(sub, &view, &grid, 1..q + 1, &bound_at, &small)?;
        let l2_in_a_t = l2.iter().zip(&a_t).all(|(s, a)| !s || *a);
        let (m1, m2) = (grid.measure(&l1), grid.measure(&l2));
        let combined = (m1 + m2) / (kappa * vol);
        c0_hat = c0_hat.max(combined);
        rows.push(SplitRow {
            kappa,
            l1_measure: m1,
            l2_measure: m2,
            l1_ratio: m1 / (kappa * vol),
            l2_ratio: m2 / (kappa * vol),
            combined_ratio: combined,
            l2_in_a_t,
        });
    }
    Ok(SplitReport { q, t, rows, c0_hat })
}

/// `τ_ψ`.
pub fn lower_order(psi: &ApproximatingFunction) -> f64 {
    psi.lower_order()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceSum {
    pub partial: f64,
    /// Closed-form prediction for the full series.
    pub divergent: bool,
}

/// `Σ_{k≤K} k^{(d−s)/n} ψ(k)^{s+1−d}`, summed in order of `k`.
pub fn divergence_sum_partial(
    psi: &ApproximatingFunction,
    n: usize,
    d: usize,
    s: f64,
    kmax: u64,
) -> Result<DivergenceSum> {
    let df = d as f64;
    if !(s > df - 1.0) || !s.is_finite() {
        return Err(domain(format!("need s > d - 1, got s = {s}")));
    }
    budget::check(kmax as u128)?;
    let e1 = (df - s) / n as f64;
    let e2 = s + 1.0 - df;
    let mut partial = 0.0;
    for k in 1..=kmax {
        let kf = k as f64;
        partial += kf.powf(e1) * psi.evaluate(kf)?.powf(e2);
    }
    let exponent = |tau: f64| e1 - tau * e2;
    let divergent = match *psi {
        ApproximatingFunction::Dirichlet => exponent(1.0) >= -1.0,
        ApproximatingFunction::Power { .. } => exponent(psi.lower_order()) >= -1.0,
        ApproximatingFunction::PowerLog { sigma, .. } => {
            let e = exponent(psi.lower_order());
            let sigma = num_traits::ToPrimitive::to_f64(&sigma).unwrap_or(f64::NAN);
            e > -1.0 || (e == -1.0 && sigma * e2 <= 1.0)
        }
    };
    Ok(DivergenceSum { partial, divergent })
}

/// `d − 1 + (n+1)/(nτ + 1)`.
pub fn dimension_lower_bound(n: usize, d: usize, tau: f64) -> Result<f64> {
    if d == 0 || d >= n {
        return Err(domain(format!("need 0 < d < n, got n = {n}, d = {d}")));
    }
    if !(tau >= 1.0) || !tau.is_finite() {
        return Err(domain(format!("need 1 <= tau < infinity, got {tau}")));
    }
    Ok(d as f64 - 1.0 + (n as f64 + 1.0) / (n as f64 * tau + 1.0))
}
