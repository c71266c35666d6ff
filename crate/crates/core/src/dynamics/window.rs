//! Sets of `x` admitting a lattice vector `(p, q)` inside a window after
//! flowing. Every window factors as: `q` bounded, the gradient
//! `g = [I_d | A′] q` bounded, and `dist(c₀ + g·x, Z)` below a bound depending
//! only on `q`. Enumeration runs over `q′ = q_{d+1..n}` and the `q_{1..d}` that
//! keep `g` in range.

use super::FlowParams;
use crate::budget;
use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::par;
use crate::subspace::AffineSubspace;

/// Strict windows on `g_t u_x λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `|p + f(x)·q| < residual`, `‖g‖ < gradient`, `‖q‖ < height`.
    Sup { residual: f64, gradient: f64, height: f64, allow_zero_q: bool },
    /// Euclidean norm of `(s_r (p + f(x)·q), s_g g, s_h q)` below `radius`.
    Euclidean { radius: f64, residual_scale: f64, gradient_scale: f64, height_scale: f64 },
}

impl Window {
    /// The Euclidean window of radius `radius` for the flow at `params`.
    pub fn euclidean(params: &FlowParams, radius: f64) -> Self {
        Self::Euclidean {
            radius,
            residual_scale: params.eps / params.delta_prime,
            gradient_scale: params.eps / params.k,
            height_scale: params.eps / params.big_t,
        }
    }

    fn height_bound(&self) -> f64 {
        match *self {
            Self::Sup { height, .. } => height,
            Self::Euclidean { radius, height_scale, .. } => radius / height_scale,
        }
    }

    fn gradient_bound(&self) -> f64 {
        match *self {
            Self::Sup { gradient, .. } => gradient,
            Self::Euclidean { radius, gradient_scale, .. } => radius / gradient_scale,
        }
    }

    /// Bound on `dist(f(x)·q, Z)` for this `q`, or `0` when `q` is excluded.
    fn residual_bound(&self, g: &[f64], q: &[i64]) -> f64 {
        match *self {
            Self::Sup { residual, gradient, height, .. } => {
                let ok_g = g.iter().all(|v| v.abs() < gradient);
                let ok_q = q.iter().all(|&v| (v.abs() as f64) < height);
                if ok_g && ok_q {
                    residual
                } else {
                    0.0
                }
            }
            Self::Euclidean { radius, residual_scale, gradient_scale, height_scale } => {
                let gg: f64 = g.iter().map(|v| v * v).sum();
                let qq: f64 = q.iter().map(|&v| (v as f64) * (v as f64)).sum();
                let rem = radius * radius - gradient_scale * gradient_scale * gg - height_scale * height_scale * qq;
                if rem > 0.0 {
                    rem.sqrt() / residual_scale
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether `λ = (±1, 0)` already lies in the window.
    fn zero_q_hits(&self) -> bool {
        match *self {
            Self::Sup { residual, allow_zero_q, .. } => allow_zero_q && residual > 1.0,
            Self::Euclidean { radius, residual_scale, .. } => residual_scale < radius,
        }
    }
}

/// The window of `Ã_t`: sup norm of `g_t u_x λ` below `2^{δt} ε`.
pub fn a_tilde_window(params: &FlowParams) -> Window {
    let s = (params.rates.delta * params.t as f64).exp2();
    Window::Sup {
        residual: s * params.delta_prime,
        gradient: s * params.k,
        height: s * params.big_t,
        allow_zero_q: true,
    }
}

/// The window of `𝒜_t`: `a ≠ 0`, `‖a‖ < 2^{t+2}`, residual below
/// `2·2^{δt}/2^{nt}`, gradient below `2√(ndL) 2^{δt} 2^{t/2}`.
pub fn a_t_window(params: &FlowParams) -> Window {
    let s = (params.rates.delta * params.t as f64).exp2();
    Window::Sup { residual: s * params.delta_prime, gradient: s * params.k, height: params.big_t, allow_zero_q: false }
}

struct Plan {
    d: usize,
    m: i64,
    side: u64,
    count: u64,
    gradient: f64,
}

fn plan(sub: &AffineSubspace<f64>, w: &Window) -> Result<Plan> {
    let (n, d) = (sub.n(), sub.d());
    let height = w.height_bound();
    let gradient = w.gradient_bound();
    if !(height.is_finite() && gradient.is_finite()) {
        return Err(domain("window bounds must be finite"));
    }
    let m = (height.ceil() as i64 - 1).max(0);
    let side = 2 * m as u64 + 1;
    let free = (n - d) as u32;
    let window = (2.0 * gradient.min(height) + 1.0).ceil() as u128;
    let requested = budget::pow_count(side as u128, free).saturating_mul(budget::pow_count(window, d as u32));
    budget::check(requested)?;
    let count = side.checked_pow(free).ok_or_else(|| domain("window too large"))?;
    Ok(Plan { d, m, side, count, gradient })
}

/// Calls `f(c0, g, bound)` for every admissible `q ≠ 0` with `q′` index in
/// `range`; `f` returns `false` to stop.
fn scan(
    sub: &AffineSubspace<f64>,
    w: &Window,
    p: &Plan,
    range: std::ops::Range<u64>,
    mut f: impl FnMut(f64, &[f64], f64) -> bool,
) {
    let n = sub.n();
    let d = p.d;
    let mut q = vec![0i64; n];
    let mut base = vec![0.0; d];
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut g = vec![0.0; d];
    for idx in range {
        let mut rest = idx;
        for slot in q[d..].iter_mut() {
            *slot = (rest % p.side) as i64 - p.m;
            rest /= p.side;
        }
        let c0 = sub.form_offset(&q);
        let mut empty = false;
        for i in 0..d {
            base[i] = sub.rows()[i + 1].iter().zip(&q[d..]).map(|(c, &k)| c * k as f64).sum();
            let l = ((-base[i] - p.gradient).floor() as i64 + 1).max(-p.m);
            let h = ((-base[i] + p.gradient).ceil() as i64 - 1).min(p.m);
            if l > h {
                empty = true;
            }
            lo[i] = l;
            hi[i] = h;
        }
        if empty {
            continue;
        }
        q[..d].copy_from_slice(&lo);
        loop {
            if q.iter().any(|&v| v != 0) {
                for i in 0..d {
                    g[i] = q[i] as f64 + base[i];
                }
                let bound = w.residual_bound(&g, &q);
                if bound > 0.0 && !f(c0, &g, bound) {
                    return;
                }
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    break;
                }
                if q[axis] < hi[axis] {
                    q[axis] += 1;
                    break;
                }
                q[axis] = lo[axis];
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
    }
}

/// Flags of the grid midpoints lying in the window set.
pub fn mark_window(sub: &AffineSubspace<f64>, grid: &Grid, w: &Window) -> Result<Vec<bool>> {
    if grid.dim() != sub.d() {
        return Err(domain("grid dimension must equal d"));
    }
    if w.zero_q_hits() {
        return Ok(vec![true; grid.len()]);
    }
    let p = plan(sub, w)?;
    let ranges = par::chunk_ranges(p.count as usize, par::worker_hint());
    let parts = par::map_indexed(ranges.len(), |c| {
        let mut out = vec![false; grid.len()];
        let r = ranges[c].clone();
        scan(sub, w, &p, r.start as u64..r.end as u64, |c0, g, bound| {
            grid.mark_near_integer(c0, g, bound, &mut out);
            true
        });
        out
    });
    Ok(par::or_reduce(grid.len(), parts))
}

/// Whether the single point `x` lies in the window set.
pub fn window_contains(sub: &AffineSubspace<f64>, x: &[f64], w: &Window) -> Result<bool> {
    if x.len() != sub.d() {
        return Err(domain("point dimension must equal d"));
    }
    if w.zero_q_hits() {
        return Ok(true);
    }
    let p = plan(sub, w)?;
    let mut hit = false;
    scan(sub, w, &p, 0..p.count, |c0, g, bound| {
        let v = c0 + g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        hit = (v - v.round()).abs() < bound;
        !hit
    });
    Ok(hit)
}

/// `x ∈ Ã_t`: some `λ ≠ 0` with `‖g_t u_x λ‖ < 2^{δt} ε`.
pub fn a_tilde_membership(sub: &AffineSubspace<f64>, params: &FlowParams, x: &[f64]) -> Result<bool> {
    window_contains(sub, x, &a_tilde_window(params))
}

/// `x ∈ 𝒜_t`.
pub fn a_t_membership(sub: &AffineSubspace<f64>, params: &FlowParams, x: &[f64]) -> Result<bool> {
    window_contains(sub, x, &a_t_window(params))
}

#[cfg(test)]
mod tests {
    use super::super::{flow_min_norm, FlowParams, Rates};
    use super::*;
    use crate::ball::Ball;

    #[test]
    fn membership_matches_flow_minimum() {
        let sub = AffineSubspace::golden_line();
        let p = FlowParams::new(2, 1, 4, Rates::auto(2), 1.0).unwrap();
        let radius = p.flow_radius();
        let bound = p.sufficient_search_bound(radius);
        for k in 0..40 {
            let x = [0.013 + k as f64 * 0.0247];
            let m = flow_min_norm(&sub, &p, &x, bound).unwrap();
            assert_eq!(a_tilde_membership(&sub, &p, &x).unwrap(), m.min_norm < radius, "x = {x:?}");
        }
    }

    #[test]
    fn grid_marks_match_pointwise() {
        let sub = AffineSubspace::from_ratios(3, 2, &[&[(1, 3)], &[(2, 7)], &[(-1, 5)]]).unwrap().to_f64();
        let p = FlowParams::new(3, 2, 2, Rates::auto(3), 1.0).unwrap();
        let grid = Grid::new(Ball::new(vec![0.5, 0.5], 0.5).unwrap(), 24).unwrap();
        for w in [a_tilde_window(&p), a_t_window(&p), Window::euclidean(&p, 0.5 * p.flow_radius())] {
            let flags = mark_window(&sub, &grid, &w).unwrap();
            for (i, &f) in flags.iter().enumerate() {
                assert_eq!(f, window_contains(&sub, &grid.point(i), &w).unwrap());
            }
        }
    }

    #[test]
    fn a_t_inside_a_tilde() {
        let sub = AffineSubspace::golden_line();
        let grid = Grid::new(Ball::interval(0.0, 1.0).unwrap(), 512).unwrap();
        for t in 1..8 {
            let p = FlowParams::new(2, 1, t, Rates::new(2, None, None, 0.02).unwrap(), 1.0).unwrap();
            let small = mark_window(&sub, &grid, &a_t_window(&p)).unwrap();
            let big = mark_window(&sub, &grid, &a_tilde_window(&p)).unwrap();
            assert!(small.iter().zip(&big).all(|(s, b)| !s || *b));
        }
    }
}
