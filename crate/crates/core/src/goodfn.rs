//! Empirical `(C, α)`-good checks on grids, the polynomial goodness
//! constants and the contraction function `F_{t,α}`.

use std::f64::consts::PI;

use crate::ball::Ball;
use crate::error::{domain, Error, Result};
use crate::grid::Grid;
use crate::par;
use crate::scalar::sup_norm;
use crate::sets;
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

/// A real function on `R^d` shared across worker threads.
pub type RealFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Which unit ball `V_d` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolumeConvention {
    #[default]
    Euclidean,
    SupNorm,
}

/// Lebesgue volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize, convention: VolumeConvention) -> f64 {
    match convention {
        VolumeConvention::SupNorm => 2f64.powi(d as i32),
        VolumeConvention::Euclidean => {
            // V_0 = 1, V_1 = 2, V_d = V_{d-2} · 2π/d
            let mut v = [1.0, 2.0];
            for k in 2..=d {
                v[k % 2] *= 2.0 * PI / k as f64;
            }
            v[d % 2]
        }
    }
}

/// `(C_{d,l}, 1/(dl))` with `C_{d,l} = 2^{d+1} d l (l+1)^{1/l} / V_d`.
pub fn poly_good_constants(d: usize, l: usize, convention: VolumeConvention) -> Result<(f64, f64)> {
    if d == 0 || l == 0 {
        return Err(domain("d and l must be at least 1"));
    }
    let (df, lf) = (d as f64, l as f64);
    let c = 2f64.powi(d as i32 + 1) * df * lf * (lf + 1.0).powf(1.0 / lf) / unit_ball_volume(d, convention);
    Ok((c, 1.0 / (df * lf)))
}

/// Values of `f` at the midpoints of a grid.
#[derive(Debug, Clone)]
pub struct GridSample {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridSample {
    pub fn new(f: RealFn<'_>, ball: &Ball, per_axis: usize) -> Result<Self> {
        let grid = Grid::new(ball.clone(), per_axis)?;
        let values = par::map_indexed(grid.len(), |i| f(&grid.point(i)));
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("non-finite value at grid point {:?}", grid.point(i))));
        }
        Ok(Self { grid, values })
    }

    pub fn sublevel(&self, eps: f64) -> SublevelEstimate {
        let flags: Vec<bool> = self.values.iter().map(|v| v.abs() < eps).collect();
        SublevelEstimate {
            measure: self.grid.measure(&flags),
            boundary_error: self.grid.boundary_cells(&flags) as f64 * self.grid.cell_volume(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Grid estimate of a sublevel-set measure with the volume of the cells on
/// its boundary as the error scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SublevelEstimate {
    pub measure: f64,
    pub boundary_error: f64,
}

/// `|{x ∈ B : |f(x)| < ε}|` by midpoint sampling.
pub fn sublevel_measure(f: RealFn<'_>, ball: &Ball, eps: f64, per_axis: usize) -> Result<SublevelEstimate> {
    if per_axis < 16 {
        return Err(domain("grid must have at least 16 points per axis"));
    }
    if !(eps > 0.0) {
        return Err(domain("eps must be positive"));
    }
    Ok(GridSample::new(f, ball, per_axis)?.sublevel(eps))
}

/// Ratios within `1 + grid_slack` are not counted as violations.
pub fn grid_slack(d: usize, per_axis: usize) -> f64 {
    4.0 * d as f64 / per_axis as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessRow {
    pub eps: f64,
    pub measure: f64,
    pub bound: f64,
    /// `measure / bound`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodnessReport {
    pub c: f64,
    pub alpha: f64,
    pub trials: usize,
    pub worst_ratio: f64,
    pub violations: usize,
    pub slack: f64,
    pub sup_estimate: f64,
    /// True when the sup comes from the grid alone (no Lipschitz allowance).
    pub sup_grid_estimated: bool,
    pub rows: Vec<GoodnessRow>,
    pub warnings: Vec<String>,
}

/// Compares `|{|f| < ε}|` with `C (ε / sup_B |f|)^α |B|` for each `ε`.
pub fn check_good(
    f: RealFn<'_>,
    ball: &Ball,
    c: f64,
    alpha: f64,
    eps_schedule: &[f64],
    per_axis: usize,
    lipschitz: Option<f64>,
) -> Result<GoodnessReport> {
    let sample = GridSample::new(f, ball, per_axis)?;
    Ok(check_good_sampled(&sample, c, alpha, eps_schedule, lipschitz))
}

/// [`check_good`] on precomputed values.
pub fn check_good_sampled(
    sample: &GridSample,
    c: f64,
    alpha: f64,
    eps_schedule: &[f64],
    lipschitz: Option<f64>,
) -> GoodnessReport {
    let mut warnings = Vec::new();
    if c < 1.0 {
        warnings.push(format!("C = {c} is below 1"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        warnings.push(format!("alpha = {alpha} is outside (0, 1]"));
    }
    let grid = &sample.grid;
    let sup = sample.sup_abs() + lipschitz.map_or(0.0, |l| l * grid.spacing() / 2.0);
    let slack = grid_slack(grid.dim(), grid.per_axis());
    let volume = grid.ball().volume();
    let rows: Vec<GoodnessRow> = eps_schedule
        .iter()
        .map(|&eps| {
            let measure = sample.sublevel(eps).measure;
            let bound = if sup > 0.0 { c * (eps / sup).powf(alpha) * volume } else { f64::INFINITY };
            let ratio = if bound.is_infinite() { 0.0 } else { measure / bound };
            GoodnessRow { eps, measure, bound, ratio }
        })
        .collect();
    let worst_ratio = rows.iter().fold(0.0, |m: f64, r| m.max(r.ratio));
    let violations = rows.iter().filter(|r| r.ratio > 1.0 + slack).count();
    GoodnessReport {
        c,
        alpha,
        trials: rows.len(),
        worst_ratio,
        violations,
        slack,
        sup_estimate: sup,
        sup_grid_estimated: lipschitz.is_none(),
        rows,
        warnings,
    }
}

/// `max{2^{nt} √(ndL) 2^{t/2} |θ̂(x) + a₀ + (x, x̃A)a|, ‖∇(θ̂(x) + (x, x̃A)·a)‖}`.
pub fn f_t_alpha(
    sub: &AffineSubspace<f64>,
    th: &InhomShift<f64>,
    t: u32,
    a: &[i64],
    a0: i64,
    l: f64,
    x: &[f64],
) -> Result<f64> {
    if !(l > 0.0) {
        return Err(domain("L must be positive"));
    }
    let (n, d) = (sub.n() as f64, sub.d() as f64);
    let scale = (n * t as f64 + t as f64 / 2.0).exp2() * (n * d * l).sqrt();
    let r = sets::residual(sub, th, a, a0, x)?.abs();
    let g = sup_norm(&sets::gradient(sub, th, a, x)?);
    Ok((scale * r).max(g))
}
