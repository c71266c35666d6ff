//! Quantitative-nondivergence harness: the lattice `Λ`, the matrices `u_x`
//! and `g_t`, the parameter schedule, flowed minimum norms and `ν` of
//! flowed subgroups.

mod nondiv;
mod transference;
mod window;

pub use nondiv::{
    decay_fit, default_eps2_schedule, estimate_rho, flow_good_constants, lattice_nu, measure_a_tilde,
    verify_nondivergence_bound, DecayReport, NondivReport, NondivRow, RhoEstimate, CONSTANTS_BANNER,
};
pub use transference::{
    check_contraction_property, check_intersection_property, ContractionReport, ContractionRow, IntersectionReport,
};
pub use window::{
    a_t_membership, a_t_window, a_tilde_membership, a_tilde_window, mark_window, window_contains, Window,
};

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::budget;
use crate::error::{domain, Error, Result};
use crate::exterior::{MultiVector, SplitSpace};
use crate::scalar::Scalar;
use crate::shell::{for_each_in_shell, punctured_box_size};
use crate::subspace::AffineSubspace;

/// Rates shared by every `t`: `β` of the schedule, the window `γ`, and `δ` of
/// `φ_δ(t) = 2^{δt}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Rates {
    /// Validates `0 < β < 1/(2(n+1))` (and above `1/(2(n+1)) − 1/n`),
    /// `0 < γ < 1/(2(n+1)) − β` and `0 ≤ δ < γ`. Defaults:
    /// `β = 1/(4(n+1))` and `γ` at the middle of its window.
    pub fn new(n: usize, beta: Option<f64>, gamma: Option<f64>, delta: f64) -> Result<Self> {
        let top = 1.0 / (2.0 * (n as f64 + 1.0));
        let beta = beta.unwrap_or(top / 2.0);
        let lower = (top - 1.0 / n as f64).max(0.0);
        if !(beta > lower && beta < top) {
            return Err(domain(format!("beta = {beta} outside ({lower}, {top})")));
        }
        let gamma = gamma.unwrap_or((top - beta) / 2.0);
        if !(gamma > 0.0 && gamma < top - beta) {
            return Err(domain(format!("gamma = {gamma} outside (0, {})", top - beta)));
        }
        if !(delta >= 0.0 && delta < gamma) {
            return Err(domain(format!("delta = {delta} outside [0, {gamma})")));
        }
        Ok(Self { beta, gamma, delta })
    }

    pub fn auto(n: usize) -> Self {
        Self::new(n, None, None, 0.0).expect("automatic rates are valid")
    }
}

/// `2^{log2} · (√(ndL))^{sqrt_ndl}`, for exact bookkeeping of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monomial {
    pub log2: Rational64,
    pub sqrt_ndl: Rational64,
}

impl Monomial {
    pub fn new(log2: Rational64, sqrt_ndl: Rational64) -> Self {
        Self { log2, sqrt_ndl }
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.log2 + other.log2, self.sqrt_ndl + other.sqrt_ndl)
    }

    pub fn pow(self, e: Rational64) -> Self {
        Self::new(self.log2 * e, self.sqrt_ndl * e)
    }

    pub fn value(self, ndl: f64) -> f64 {
        let f = |r: Rational64| r.to_f64().unwrap_or(f64::NAN);
        f(self.log2).exp2() * ndl.sqrt().powf(f(self.sqrt_ndl))
    }
}

/// The schedule at one `t` in exact form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolicSchedule {
    pub delta_prime: Monomial,
    pub k: Monomial,
    pub big_t: Monomial,
    /// `ε′` from its closed form `(2^{2n} √(ndL))^{1/(n+1)} 2^{−t/(2(n+1))}`.
    pub eps_prime: Monomial,
}

impl SymbolicSchedule {
    /// `ε′^{n+1} = δ′ K T^{n−1}`, compared exactly.
    pub fn identity_holds(&self, n: usize) -> bool {
        let lhs = self.eps_prime.pow(Rational64::from_integer(n as i64 + 1));
        let rhs = self.delta_prime.mul(self.k).mul(self.big_t.pow(Rational64::from_integer(n as i64 - 1)));
        lhs == rhs
    }
}

/// Parameters of the flow at scale `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub n: usize,
    pub d: usize,
    pub t: u32,
    pub rates: Rates,
    pub l: f64,
    /// `δ′ = 2/2^{nt}`.
    pub delta_prime: f64,
    /// `K = 2√(ndL) 2^{t/2}`.
    pub k: f64,
    /// `T = 2^{t+2}`.
    pub big_t: f64,
    pub eps_prime: f64,
    /// `ε = 2^{βt} ε′`.
    pub eps: f64,
}

impl FlowParams {
    pub fn new(n: usize, d: usize, t: u32, rates: Rates, l: f64) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(domain(format!("need 0 < d < n, got n = {n}, d = {d}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(domain("L must be positive and finite"));
        }
        let (nf, tf) = (n as f64, t as f64);
        let ndl = nf * d as f64 * l;
        let delta_prime = (1.0 - nf * tf).exp2();
        let k = 2.0 * ndl.sqrt() * (tf / 2.0).exp2();
        let big_t = (tf + 2.0).exp2();
        let eps_prime = ((2.0 * nf).exp2() * ndl.sqrt()).powf(1.0 / (nf + 1.0)) / (tf / (2.0 * (nf + 1.0))).exp2();
        let eps = (rates.beta * tf).exp2() * eps_prime;
        Ok(Self { n, d, t, rates, l, delta_prime, k, big_t, eps_prime, eps })
    }

    pub fn symbolic(&self) -> SymbolicSchedule {
        let (n, t) = (self.n as i64, self.t as i64);
        let r = |a: i64, b: i64| Rational64::new(a, b);
        SymbolicSchedule {
            delta_prime: Monomial::new(r(1 - n * t, 1), Rational64::zero()),
            k: Monomial::new(r(2 + t, 2), r(1, 1)),
            big_t: Monomial::new(r(t + 2, 1), Rational64::zero()),
            eps_prime: Monomial::new(r(4 * n - t, 2 * (n + 1)), r(1, n + 1)),
        }
    }

    /// Relative gap between `ε′^{n+1}` and `δ′ K T^{n−1}` in binary64.
    pub fn identity_residual(&self) -> f64 {
        let lhs = self.eps_prime.powi(self.n as i32 + 1);
        let rhs = self.delta_prime * self.k * self.big_t.powi(self.n as i32 - 1);
        (lhs - rhs).abs() / rhs
    }

    /// `(ε/δ′, ε/K ×d, ε/T ×n)`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut out = vec![self.eps / self.delta_prime];
        out.extend(std::iter::repeat_n(self.eps / self.k, self.d));
        out.extend(std::iter::repeat_n(self.eps / self.big_t, self.n));
        out
    }

    /// `2^{δt} ε`, the radius defining `Ã_t`.
    pub fn flow_radius(&self) -> f64 {
        (self.rates.delta * self.t as f64).exp2() * self.eps
    }

    /// A sup-norm bound on `q` for every `λ` with `‖g_t u_x λ‖ < threshold`:
    /// the last `n` coordinates are `(ε/T) q`, so `‖q‖ < threshold·T/ε`.
    pub fn sufficient_search_bound(&self, threshold: f64) -> u64 {
        (threshold * self.big_t / self.eps).ceil().max(0.0) as u64
    }
}

/// `g_t` as its diagonal.
pub fn build_g_t(params: &FlowParams) -> Vec<f64> {
    params.diagonal()
}

/// The unipotent matrix `[1 | 0 | f(x); 0 | I_d | ∇f; 0 | 0 | I_n]` with
/// `f(x) = (x, x̃A)` and `∇f = [I_d | A′]`.
pub fn build_u_x<S: Scalar>(sub: &AffineSubspace<S>, x: &[S]) -> Result<Vec<Vec<S>>> {
    let (n, d) = (sub.n(), sub.d());
    let f = sub.parametrize(x)?;
    let dim = 1 + d + n;
    let mut m = vec![vec![S::zero(); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    for (j, fj) in f.into_iter().enumerate() {
        m[0][1 + d + j] = fj;
    }
    for i in 1..=d {
        for j in 0..n {
            m[i][1 + d + j] = if j < d {
                if j + 1 == i {
                    S::one()
                } else {
                    S::zero()
                }
            } else {
                sub.entry(i, j - d).clone()
            };
        }
    }
    Ok(m)
}

/// An element `(p, 0, …, 0, q)` of `Λ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeElement {
    pub p: i64,
    pub q: Vec<i64>,
}

impl LatticeElement {
    pub fn new(p: i64, q: Vec<i64>) -> Self {
        Self { p, q }
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q.iter().all(|&v| v == 0)
    }

    /// Coordinates in `Z^{1+d+n}`.
    pub fn embed(&self, d: usize) -> Vec<i64> {
        let mut out = vec![self.p];
        out.extend(std::iter::repeat_n(0, d));
        out.extend_from_slice(&self.q);
        out
    }
}

/// `g_t u_x λ`.
pub fn flow_vector(
    sub: &AffineSubspace<f64>,
    params: &FlowParams,
    x: &[f64],
    lambda: &LatticeElement,
) -> Result<Vec<f64>> {
    let first = lambda.p as f64 + sub.form(x, &lambda.q)?;
    let grad = sub.form_gradient(&lambda.q);
    let diag = params.diagonal();
    let mut out = Vec::with_capacity(diag.len());
    out.push(diag[0] * first);
    out.extend(grad.iter().map(|g| diag[1] * g));
    out.extend(lambda.q.iter().map(|&q| diag[diag.len() - 1] * q as f64));
    Ok(out)
}

/// Minimizer of `‖g_t u_x λ‖_∞` over `λ ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMinimum {
    pub min_norm: f64,
    pub argmin: LatticeElement,
}

/// Exhaustive over `‖q‖ ≤ search_bound`, with `p` the nearest integer to
/// `−f(x)·q` (or `p = 1` at `q = 0`). Shells beyond the current best are
/// pruned since `‖g_t u_x λ‖ ≥ (ε/T)‖q‖`. Ties go to the lexicographically
/// smallest embedded vector.
pub fn flow_min_norm(
    sub: &AffineSubspace<f64>,
    params: &FlowParams,
    x: &[f64],
    search_bound: u64,
) -> Result<FlowMinimum> {
    let n = sub.n();
    budget::check(punctured_box_size(n, search_bound))?;
    let d = sub.d();
    let mut best =
        FlowMinimum { min_norm: params.eps / params.delta_prime, argmin: LatticeElement::new(1, vec![0; n]) };
    let height_scale = params.eps / params.big_t;
    let mut failure = None;
    for h in 1..=search_bound {
        if height_scale * h as f64 > best.min_norm {
            break;
        }
        for_each_in_shell(n, h, |q| {
            if failure.is_some() {
                return;
            }
            let v = match sub.form(x, q) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let p = (-v).nearest_integer() as i64;
            let candidate = LatticeElement::new(p, q.to_vec());
            let norm = match flow_vector(sub, params, x, &candidate) {
                Ok(vec) => vec.iter().fold(0.0f64, |m, c| m.max(c.abs())),
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            if norm < best.min_norm || (norm == best.min_norm && candidate.embed(d) < best.argmin.embed(d)) {
                best = FlowMinimum { min_norm: norm, argmin: candidate };
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(best)
}

/// `ν(g_t u_x v₁ ∧ … ∧ g_t u_x v_k)` for a basis of a subgroup of `Λ`.
pub fn nu_of_subgroup(
    sub: &AffineSubspace<f64>,
    params: &FlowParams,
    x: &[f64],
    basis: &[LatticeElement],
) -> Result<f64> {
    let (n, d) = (sub.n(), sub.d());
    let space = SplitSpace::new(n, d)?;
    if basis.is_empty() {
        return Err(domain("a subgroup basis needs at least one vector"));
    }
    let mut integer = MultiVector::scalar(space.dim(), 1i64);
    let mut flowed = MultiVector::scalar(space.dim(), 1.0f64);
    for lambda in basis {
        if lambda.q.len() != n {
            return Err(domain(format!("lattice element has {} q-coordinates, expected {n}", lambda.q.len())));
        }
        integer = integer.wedge(&MultiVector::from_vector(&lambda.embed(d)))?;
        flowed = flowed.wedge(&MultiVector::from_vector(&flow_vector(sub, params, x, lambda)?))?;
    }
    if integer.is_zero() {
        return Err(Error::Degenerate("subgroup basis is linearly dependent".into()));
    }
    Ok(space.nu_norm(&flowed))
}
