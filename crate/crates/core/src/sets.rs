//! The inhomogeneous sets `I_t(α, η)` and homogeneous sets `H_t(α, η)` over
//! `α = (a, a₀)`, with thresholds kept as explicit scalars so that exact runs
//! compare against exactly doubled bounds.

use crate::error::{domain, Result};
use crate::scalar::{sup_norm, sup_norm_int, Scalar};
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

/// Finite-difference step for callable shifts without a gradient.
pub const FD_STEP: f64 = 1e-6;

/// `φ_δ(t) = 2^{δt}`.
pub fn phi(delta: f64, t: u32) -> f64 {
    (delta * t as f64).exp2()
}

/// Strict bounds on the residual and on the gradient sup norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds<S> {
    pub residual: S,
    pub gradient: S,
}

impl Thresholds<f64> {
    /// Bounds of `I_t(α, η)`: `η/2^{nt}` and `√(ndL)·η·2^{t/2}`.
    pub fn inhom(n: usize, d: usize, t: u32, eta: f64, l: f64) -> Self {
        Self {
            residual: eta / (n as f64 * t as f64).exp2(),
            gradient: (n as f64 * d as f64 * l).sqrt() * eta * (t as f64 / 2.0).exp2(),
        }
    }

    /// Exact images of the bounds.
    pub fn to_scalar<S: Scalar>(&self) -> Result<Thresholds<S>> {
        Ok(Thresholds { residual: S::from_f64_value(self.residual)?, gradient: S::from_f64_value(self.gradient)? })
    }
}

impl<S: Scalar> Thresholds<S> {
    /// The bounds of `H_t(·, η)` matching `I_t(·, η)`: both doubled.
    pub fn doubled(&self) -> Self {
        let two = S::from_int(2);
        Self { residual: self.residual.clone() * two.clone(), gradient: self.gradient.clone() * two }
    }
}

/// `θ̂(x) + a₀ + (x, x̃A)·a`.
pub fn residual<S: Scalar>(sub: &AffineSubspace<S>, th: &InhomShift<S>, a: &[i64], a0: i64, x: &[S]) -> Result<S> {
    Ok(th.evaluate(x)? + S::from_int(a0) + sub.form(x, a)?)
}

/// `∇(θ̂(x) + (x, x̃A)·a)`.
pub fn gradient<S: Scalar>(sub: &AffineSubspace<S>, th: &InhomShift<S>, a: &[i64], x: &[S]) -> Result<Vec<S>> {
    let g = th.gradient(x, FD_STEP)?;
    Ok(sub.form_gradient(a).into_iter().zip(g).map(|(u, v)| u + v).collect())
}

/// `2^t ≤ ‖a‖ < 2^{t+1}`.
pub fn in_dyadic_shell(a: &[i64], t: u32) -> bool {
    let h = sup_norm_int(a);
    t < 63 && h >= 1 << t && h < 1 << (t + 1)
}

/// Membership of `x` in `I_t(α, ·)` with the given bounds.
pub fn in_i_t<S: Scalar>(
    sub: &AffineSubspace<S>,
    th: &InhomShift<S>,
    t: u32,
    a: &[i64],
    a0: i64,
    bounds: &Thresholds<S>,
    x: &[S],
) -> Result<bool> {
    if !in_dyadic_shell(a, t) {
        return Ok(false);
    }
    Ok(residual(sub, th, a, a0, x)?.abs() < bounds.residual && sup_norm(&gradient(sub, th, a, x)?) < bounds.gradient)
}

/// Membership of `x` in `H_t(α, ·)` with the given (already doubled) bounds.
pub fn in_h_t<S: Scalar>(
    sub: &AffineSubspace<S>,
    t: u32,
    a: &[i64],
    a0: i64,
    bounds: &Thresholds<S>,
    x: &[S],
) -> Result<bool> {
    if a.iter().all(|&v| v == 0) {
        return Err(domain("H_t is indexed by nonzero a"));
    }
    if t >= 62 || sup_norm_int(a) >= 1 << (t + 2) {
        return Ok(false);
    }
    let r = S::from_int(a0) + sub.form(x, a)?;
    Ok(r.abs() < bounds.residual && sup_norm(&sub.form_gradient(a)) < bounds.gradient)
}
