//! Higher exponents `ω_j(A)` from integer wedges `w ∈ ⋀^j(Z^{n+1})`, compared
//! through `‖R_A c(w)‖` against `‖π_•(w)‖`.

use std::collections::{BTreeMap, HashSet};

use num_integer::Integer;

use crate::budget;
use crate::dual::{dual_records, estimate_from_exponents, estimate_omega, ExponentEstimate};
use crate::error::{domain, Result};
use crate::exterior::{c_map, components_sup_norm, project_bullet, r_a_apply, MultiVector};
use crate::par;
use crate::scalar::Scalar;
use crate::shell::{for_each_in_punctured_box, for_each_in_shell, punctured_box_size};
use crate::shift::InhomShift;
use crate::subspace::AffineSubspace;

/// Nonzero integer vectors in `[−h, h]^k` with gcd 1 and first nonzero entry
/// positive, in shell order.
pub fn primitive_vectors(k: usize, h: u64) -> Result<Vec<Vec<i64>>> {
    budget::check(punctured_box_size(k, h))?;
    let mut out = Vec::new();
    for_each_in_punctured_box(k, h, |v| {
        let first = v.iter().find(|&&x| x != 0).copied().unwrap_or(0);
        let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
        if first > 0 && g == 1 {
            out.push(v.to_vec());
        }
    });
    Ok(out)
}

/// Decomposable wedges `v₁ ∧ … ∧ v_j` of integer vectors with `‖v_i‖ ≤ h` in
/// `Z^{n+1}`, normalized (see [`MultiVector::normalized`]) and deduplicated,
/// in order of first appearance.
///
/// Factors range over primitive sign-normalized vectors, which loses nothing
/// after normalization. The budget counts the `C(N, j)` factor tuples.
pub fn enumerate_wedges(n: usize, j: usize, h: u64) -> Result<Vec<MultiVector<i64>>> {
    if j == 0 || j > n + 1 {
        return Err(domain(format!("grade {j} outside 1..={}", n + 1)));
    }
    if h == 0 {
        return Err(domain("height must be at least 1"));
    }
    let factors = primitive_vectors(n + 1, h)?;
    let count = factors.len() as u128;
    budget::check(budget::binomial(count, j as u128))?;
    let dim = n + 1;
    let singles: Vec<MultiVector<i64>> = factors.iter().map(|v| MultiVector::from_vector(v)).collect();
    if j == 1 {
        return Ok(singles);
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let chunk = 64.max(singles.len() / (8 * par::worker_hint()).max(1));
    let mut start = 0;
    while start < singles.len() {
        let end = (start + chunk).min(singles.len());
        let parts = par::map_indexed(end - start, |offset| {
            let first = start + offset;
            let mut local = Vec::new();
            extend(&singles, &singles[first], first + 1, j - 1, &mut local);
            local
        });
        for w in parts.into_iter().flatten() {
            if seen.insert(w.clone()) {
                out.push(w);
            }
        }
        start = end;
    }
    debug_assert!(out.iter().all(|w| w.dim() == dim));
    Ok(out)
}

fn extend(
    singles: &[MultiVector<i64>],
    partial: &MultiVector<i64>,
    from: usize,
    left: usize,
    out: &mut Vec<MultiVector<i64>>,
) {
    for i in from..singles.len() {
        let next = partial.wedge(&singles[i]).expect("same dimension");
        if next.is_zero() {
            continue;
        }
        if left == 1 {
            out.push(next.normalized());
        } else {
            extend(singles, &next, i + 1, left - 1, out);
        }
    }
}

/// One best-approximation record of grade `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeRecord<S> {
    pub j: usize,
    pub w: MultiVector<i64>,
    pub pibullet_norm: u64,
    pub lhs_norm: S,
    pub vhat: f64,
}

/// Records plus scan diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeScan<S> {
    pub records: Vec<WedgeRecord<S>>,
    /// Wedges with `π_•(w) ≠ 0` that were evaluated.
    pub scanned: usize,
    /// Evaluated wedges with `R_A c(w) = 0`.
    pub vanishing: usize,
}

/// Solves `lhs = pib^{−(v+1−j)/j}` for `v`: `+∞` at `lhs = 0`, NaN below
/// `pib = 2`.
pub fn wedge_exponent<S: Scalar>(j: usize, lhs: &S, pib: u64) -> f64 {
    if lhs.is_zero() {
        return f64::INFINITY;
    }
    if pib < 2 {
        return f64::NAN;
    }
    let j = j as f64;
    j * (-lhs.ln_abs()) / (pib as f64).ln() + j - 1.0
}

/// `‖R_A c(w)‖_∞` for an integer wedge.
pub fn wedge_lhs<S: Scalar>(sub: &AffineSubspace<S>, w: &MultiVector<i64>) -> Result<S> {
    let img = c_map(w)?.map(|&c| S::from_int(c));
    Ok(components_sup_norm(&r_a_apply(sub, &img)?))
}

fn pibullet<S: Scalar>(sub: &AffineSubspace<S>, w: &MultiVector<i64>) -> u64 {
    project_bullet(w, sub.d()).sup_norm().unsigned_abs()
}

/// Best-approximation records of grade `j` along increasing `‖π_•(w)‖ ≤ h`:
/// each height contributes its smallest `‖R_A c(w)‖` when that strictly
/// improves on all earlier records. Stops at `lhs = 0`.
///
/// For `j = 1` the candidates are `w = (p, q)` with `q` in each shell and
/// `p_r ∈ {⌊−(Aq)_r⌋, ⌈−(Aq)_r⌉}`, which contains every per-height minimizer.
/// For `j ≥ 2` the candidates are [`enumerate_wedges`] at factor height `h`.
pub fn higher_exponent_records<S: Scalar>(sub: &AffineSubspace<S>, j: usize, h: u64) -> Result<WedgeScan<S>> {
    let n = sub.n();
    let d = sub.d();
    if j == 0 || j > n - d {
        return Err(domain(format!("grade {j} outside 1..={}", n - d)));
    }
    if h == 0 {
        return Err(domain("height must be at least 1"));
    }
    let (best, scanned, vanishing) = if j == 1 { near_lattice_minima(sub, h)? } else { wedge_minima(sub, j, h)? };
    let mut records: Vec<WedgeRecord<S>> = Vec::new();
    for (pib, (lhs, w)) in best {
        if records.last().is_some_and(|last| lhs >= last.lhs_norm) {
            continue;
        }
        let stop = lhs.is_zero();
        records.push(WedgeRecord { j, vhat: wedge_exponent(j, &lhs, pib), w, pibullet_norm: pib, lhs_norm: lhs });
        if stop {
            break;
        }
    }
    Ok(WedgeScan { records, scanned, vanishing })
}

type Minima<S> = (BTreeMap<u64, (S, MultiVector<i64>)>, usize, usize);

fn near_lattice_minima<S: Scalar>(sub: &AffineSubspace<S>, h: u64) -> Result<Minima<S>> {
    let n = sub.n();
    let d = sub.d();
    budget::check(punctured_box_size(n - d, h).saturating_mul(1u128 << (d + 1)))?;
    let shells = par::map_indexed(h as usize, |i| -> Result<_> {
        let height = i as u64 + 1;
        let mut best: Option<(S, MultiVector<i64>)> = None;
        let mut scanned = 0usize;
        let mut vanishing = 0usize;
        let mut failure = None;
        for_each_in_shell(n - d, height, |q| {
            if failure.is_some() {
                return;
            }
            let v = sub.apply(q);
            let mut choices: Vec<Vec<i64>> = vec![Vec::new()];
            for x in &v {
                let lo = (-x.clone()).floor_value().to_i64_exact();
                let hi = (-x.clone()).ceil_value().to_i64_exact();
                let (Some(lo), Some(hi)) = (lo, hi) else {
                    failure = Some(domain("integer part does not fit in i64"));
                    return;
                };
                choices = choices
                    .into_iter()
                    .flat_map(|c| {
                        let mut out = vec![[c.clone(), vec![lo]].concat()];
                        if hi != lo {
                            out.push([c, vec![hi]].concat());
                        }
                        out
                    })
                    .collect();
            }
            for p in choices {
                let coords: Vec<i64> = p.into_iter().chain(q.iter().copied()).collect();
                let w = MultiVector::from_vector(&coords).normalized();
                if pibullet(sub, &w) != height {
                    continue;
                }
                match wedge_lhs(sub, &w) {
                    Ok(lhs) => {
                        scanned += 1;
                        if lhs.is_zero() {
                            vanishing += 1;
                        }
                        if best.as_ref().is_none_or(|(b, _)| lhs < *b) {
                            best = Some((lhs, w));
                        }
                    }
                    Err(e) => failure = Some(e),
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok((height, best, scanned, vanishing)),
        }
    });
    let mut map = BTreeMap::new();
    let (mut scanned, mut vanishing) = (0, 0);
    for shell in shells {
        let (height, best, s, v) = shell?;
        scanned += s;
        vanishing += v;
        if let Some(b) = best {
            map.insert(height, b);
        }
    }
    Ok((map, scanned, vanishing))
}

fn wedge_minima<S: Scalar>(sub: &AffineSubspace<S>, j: usize, h: u64) -> Result<Minima<S>> {
    let wedges = enumerate_wedges(sub.n(), j, h)?;
    let evaluated = par::map_indexed(wedges.len(), |i| {
        let w = &wedges[i];
        let pib = pibullet(sub, w);
        if pib == 0 {
            return Ok(None);
        }
        wedge_lhs(sub, w).map(|lhs| Some((pib, lhs)))
    });
    let mut map: BTreeMap<u64, (S, MultiVector<i64>)> = BTreeMap::new();
    let (mut scanned, mut vanishing) = (0, 0);
    for (w, item) in wedges.into_iter().zip(evaluated) {
        let Some((pib, lhs)) = item? else { continue };
        scanned += 1;
        if lhs.is_zero() {
            vanishing += 1;
        }
        let replace = match map.get(&pib) {
            Some((cur, cur_w)) => lhs < *cur || (lhs == *cur && w.terms().lt(cur_w.terms())),
            None => true,
        };
        if replace {
            map.insert(pib, (lhs, w));
        }
    }
    Ok((map, scanned, vanishing))
}

pub fn estimate_omega_j<S: Scalar>(records: &[WedgeRecord<S>], tail_fraction: f64) -> Result<ExponentEstimate> {
    let vhats: Vec<f64> = records.iter().map(|r| r.vhat).collect();
    estimate_from_exponents(&vhats, tail_fraction)
}

/// Advisory comparison of the estimated exponents against `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentConditions {
    pub omega: ExponentEstimate,
    /// `ω̂_j` for `j = 1, …, n − d`.
    pub omega_j: Vec<ExponentEstimate>,
    pub n: usize,
    /// `ω̂_j < n` for every `j`.
    pub satisfies_12: bool,
    /// `ω̂(A; 𝜽) < n`.
    pub satisfies_14: bool,
}

impl ExponentConditions {
    pub const CAVEAT: &'static str =
        "advisory: exponents are suprema over infinitely many solutions; finite scans only estimate them";
}

/// Estimates `ω(A; 𝜽)` from dual records up to `hmax` and `ω_j(A)` from wedge
/// records (height `hmax` for `j = 1`, `wedge_height` above).
pub fn check_exponent_conditions<S: Scalar>(
    sub: &AffineSubspace<S>,
    th: &InhomShift<S>,
    hmax: u64,
    wedge_height: u64,
    tail_fraction: f64,
) -> Result<ExponentConditions> {
    let n = sub.n();
    let omega = estimate_omega(&dual_records(sub, th, hmax)?, tail_fraction)?;
    let mut omega_j = Vec::new();
    for j in 1..=n - sub.d() {
        let height = if j == 1 { hmax } else { wedge_height };
        let scan = higher_exponent_records(sub, j, height)?;
        omega_j.push(estimate_omega_j(&scan.records, tail_fraction)?);
    }
    let bound = n as f64;
    Ok(ExponentConditions {
        satisfies_12: omega_j.iter().all(|e| e.value < bound),
        satisfies_14: omega.value < bound,
        omega,
        omega_j,
        n,
    })
}
