//! Empirical side of the nondivergence bound: `ρ̂`, the measure table
//! across `ε″`, and the decay of `|Ã_t|` in `t`.

use rand::Rng;

use super::window::{a_tilde_window, mark_window, Window};
use super::{nu_of_subgroup, FlowParams, LatticeElement, Rates};
use crate::ball::Ball;
use crate::error::{domain, Error, Result};
use crate::goodfn::{unit_ball_volume, VolumeConvention};
use crate::grid::Grid;
use crate::rng::stream_rng;
use crate::subspace::AffineSubspace;

pub const CONSTANTS_BANNER: &str =
    "constants are existential: N_d, C, alpha and rho_hat are empirical stand-ins; only the scaling in eps2 is tested";

/// `ν(H(x)Λ)` for `Λ` spanned by `(1, 0)` and `(0, e_i)`.
pub fn lattice_nu(sub: &AffineSubspace<f64>, params: &FlowParams, x: &[f64]) -> Result<f64> {
    let n = sub.n();
    let mut basis = vec![LatticeElement::new(1, vec![0; n])];
    for i in 0..n {
        let mut q = vec![0; n];
        q[i] = 1;
        basis.push(LatticeElement::new(0, q));
    }
    nu_of_subgroup(sub, params, x, &basis)
}

/// The constants `(C, α)` of the goodness condition for the flowed norms:
/// `C = max{2^{d+2+(1+d+n)/(2d)} d / V_d, 1}`, `α = 1/d`.
pub fn flow_good_constants(n: usize, d: usize, convention: VolumeConvention) -> (f64, f64) {
    let df = d as f64;
    let exp = df + 2.0 + (1.0 + df + n as f64) / (2.0 * df);
    let c = (exp.exp2() * df / unit_ball_volume(d, convention)).max(1.0);
    (c, 1.0 / df)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate {
    pub rho_hat: f64,
    pub samples: usize,
    /// Rank of the subgroup attaining the minimum.
    pub argmin_rank: usize,
}

/// `min` over random subgroups (ranks `≤ min(4, n+1)`, entries in `[−3, 3]`)
/// of `sup` over a coarse grid of `ν(H(x)Γ)`.
pub fn estimate_rho(
    sub: &AffineSubspace<f64>,
    params: &FlowParams,
    ball: &Ball,
    coarse: usize,
    samples: usize,
    seed: u64,
) -> Result<RhoEstimate> {
    if samples == 0 {
        return Err(domain("need at least one subgroup sample"));
    }
    let grid = Grid::new(ball.clone(), coarse)?;
    let points = grid.points();
    let n = sub.n();
    let max_rank = (n + 1).min(4);
    let mut best = RhoEstimate { rho_hat: f64::INFINITY, samples, argmin_rank: 0 };
    for s in 0..samples {
        let mut rng = stream_rng(seed, s as u64);
        let rank = rng.random_range(1..=max_rank);
        let mut attempt = 0;
        let sup = loop {
            attempt += 1;
            let basis: Vec<LatticeElement> = (0..rank)
                .map(|_| {
                    LatticeElement::new(rng.random_range(-3..=3), (0..n).map(|_| rng.random_range(-3..=3)).collect())
                })
                .collect();
            let mut sup = 0.0f64;
            let mut degenerate = false;
            for x in &points {
                match nu_of_subgroup(sub, params, x, &basis) {
                    Ok(v) => sup = sup.max(v),
                    Err(Error::Degenerate(_)) => {
                        degenerate = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if !degenerate {
                break Some(sup);
            }
            if attempt >= 64 {
                break None;
            }
        };
        if let Some(sup) = sup {
            if sup < best.rho_hat {
                best.rho_hat = sup;
                best.argmin_rank = rank;
            }
        }
    }
    if !best.rho_hat.is_finite() {
        return Err(Error::Degenerate("every sampled subgroup was degenerate".into()));
    }
    Ok(best)
}

/// `√(1+d+n) 2^{δt} ε · 2^k` for `k = −6..=2`.
pub fn default_eps2_schedule(params: &FlowParams) -> Vec<f64> {
    let base = ((1 + params.d + params.n) as f64).sqrt() * params.flow_radius();
    (-6..=2).map(|k: i32| base * (k as f64).exp2()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondivRow {
    pub eps2: f64,
    pub lhs_measure: f64,
    pub rhs_bound: f64,
    pub ratio: f64,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondivReport {
    pub params: FlowParams,
    pub rho_hat: f64,
    pub c: f64,
    pub alpha: f64,
    pub besicovitch: f64,
    pub ball_volume: f64,
    pub table: Vec<NondivRow>,
    pub banner: &'static str,
}

impl NondivReport {
    /// LHS non-decreasing and RHS increasing along an increasing schedule.
    pub fn monotone(&self) -> bool {
        self.table
            .windows(2)
            .all(|w| w[0].eps2 < w[1].eps2 && w[0].lhs_measure <= w[1].lhs_measure && w[0].rhs_bound < w[1].rhs_bound)
    }
}

/// Tabulates `|{x ∈ B : ν(H(x)λ) < ε″ for some λ ≠ 0}|` on the grid against
/// `k (3^d N_d)^k C (ε″/ρ̂)^α |B|` with `k = n + 1`.
#[allow(clippy::too_many_arguments)]
pub fn verify_nondivergence_bound(
    sub: &AffineSubspace<f64>,
    params: &FlowParams,
    ball: &Ball,
    per_axis: usize,
    eps2_schedule: &[f64],
    rho_hat: f64,
    c: f64,
    alpha: f64,
    besicovitch: f64,
) -> Result<NondivReport> {
    if !(rho_hat > 0.0 && c > 0.0 && alpha > 0.0 && besicovitch > 0.0) {
        return Err(domain("rho_hat, C, alpha and N_d must be positive"));
    }
    let grid = Grid::new(ball.clone(), per_axis)?;
    let k = (params.n + 1) as i32;
    let lead = k as f64 * (3f64.powi(params.d as i32) * besicovitch).powi(k) * c;
    let vol = ball.volume();
    let mut table = Vec::with_capacity(eps2_schedule.len());
    for &eps2 in eps2_schedule {
        if !(eps2 > 0.0) {
            return Err(domain("eps2 must be positive"));
        }
        let flags = mark_window(sub, &grid, &Window::euclidean(params, eps2))?;
        let lhs = grid.measure(&flags);
        let rhs = lead * (eps2 / rho_hat).powf(alpha) * vol;
        table.push(NondivRow { eps2, lhs_measure: lhs, rhs_bound: rhs, ratio: lhs / rhs, vacuous: rhs >= vol });
    }
    Ok(NondivReport {
        params: *params,
        rho_hat,
        c,
        alpha,
        besicovitch,
        ball_volume: vol,
        table,
        banner: CONSTANTS_BANNER,
    })
}

/// Grid measure of `Ã_t`.
pub fn measure_a_tilde(sub: &AffineSubspace<f64>, params: &FlowParams, grid: &Grid) -> Result<f64> {
    Ok(grid.measure(&mark_window(sub, grid, &a_tilde_window(params))?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<(u32, f64)>,
    /// `−slope` of the least-squares line through `(t, log₂|Ã_t|)`.
    pub fitted_rate: f64,
    /// `(1/(2(n+1)) − (β+δ))/d`.
    pub predicted_rate: f64,
    pub rate_ratio: f64,
    pub within_factor_two: bool,
    pub partial_sums: Vec<f64>,
    /// Geometric extrapolation of the unseen tail from the last row.
    pub tail_bound: f64,
    pub converges: bool,
    /// Rows with zero measure, left out of the fit.
    pub zero_rows: usize,
}

/// Measures `|Ã_t|` for each `t` in `ts` and fits a geometric decay.
pub fn decay_fit(
    sub: &AffineSubspace<f64>,
    ball: &Ball,
    per_axis: usize,
    ts: std::ops::RangeInclusive<u32>,
    rates: Rates,
    l: f64,
) -> Result<DecayReport> {
    let grid = Grid::new(ball.clone(), per_axis)?;
    let (n, d) = (sub.n(), sub.d());
    let mut rows = Vec::new();
    for t in ts {
        let p = FlowParams::new(n, d, t, rates, l)?;
        rows.push((t, measure_a_tilde(sub, &p, &grid)?));
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).map(|&(t, m)| (t as f64, m.log2())).collect();
    let zero_rows = rows.len() - pts.len();
    if pts.len() < 2 {
        return Err(domain("need at least two nonzero measurements to fit a decay"));
    }
    let slope = least_squares_slope(&pts);
    let fitted_rate = -slope;
    let predicted_rate = (1.0 / (2.0 * (n as f64 + 1.0)) - (rates.beta + rates.delta)) / d as f64;
    let rate_ratio = fitted_rate / predicted_rate;
    let mut acc = 0.0;
    let partial_sums = rows
        .iter()
        .map(|r| {
            acc += r.1;
            acc
        })
        .collect();
    let q = (-fitted_rate).exp2();
    let last = rows.last().map_or(0.0, |r| r.1);
    let tail_bound = if fitted_rate > 0.0 { last * q / (1.0 - q) } else { f64::INFINITY };
    Ok(DecayReport {
        rows,
        fitted_rate,
        predicted_rate,
        rate_ratio,
        within_factor_two: (0.5..=2.0).contains(&rate_ratio),
        partial_sums,
        tail_bound,
        converges: fitted_rate > 0.0 && tail_bound.is_finite(),
        zero_rows,
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
