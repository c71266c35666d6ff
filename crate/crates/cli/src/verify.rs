//! The cross-module invariant suite behind `dioph verify`.

use dioph_core::dual::{dual_records, verify_linear_identity};
use dioph_core::dynamics::{a_t_membership, a_tilde_membership, lattice_nu, FlowParams, Rates};
use dioph_core::exponents::higher_exponent_records;
use dioph_core::measure::{dimension_lower_bound, divergence_sum_partial};
use dioph_core::rng::stream_rng;
use dioph_core::scalar::ratio;
use dioph_core::{AffineSubspace, ApproximatingFunction, InhomShift, MultiVector, Rational};
use num_traits::Zero;
use rand::Rng;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{write_text, Format, Header, Table};
use crate::{GlobalArgs, OutputArgs};

type Check = fn(u64) -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("schedule-identity", schedule_identity),
    ("linear-shift-identity", linear_shift_identity),
    ("grade-one-records", grade_one_records),
    ("dimension-bound", dimension_bound),
    ("divergence-sum", divergence_sum),
    ("lattice-nu", lattice_nu_floor),
    ("window-inclusion", window_inclusion),
    ("wedge-antisymmetry", wedge_antisymmetry),
];

pub fn run(g: &GlobalArgs, output: &OutputArgs) -> CliResult<()> {
    if g.dry_run {
        println!("verify: {} checks", CHECKS.len());
        return Ok(());
    }
    let seed = g.seed.unwrap_or(0);
    let mut table = Table::new(&["check", "status", "detail"]);
    let mut failures = 0;
    for (name, check) in CHECKS {
        let (status, detail) = match check(seed) {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failures += 1;
                ("FAIL", detail)
            }
        };
        println!("{status} {name}: {detail}");
        table.push(vec![name.to_string(), status.to_string(), detail]);
    }
    if let Some(out) = &output.out {
        let format = Format::resolve(output.format, Some(out), Format::Csv);
        let text = table.render(format, &Header::new("verify", seed, None), json!({"failures": failures}));
        write_text(Some(out), &text)?;
    }
    if failures > 0 {
        return Err(CliError::Violations(failures));
    }
    Ok(())
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.random_range(-9..=9), rng.random_range(1..=7))
}

fn random_exact(rng: &mut impl Rng, n: usize, d: usize) -> AffineSubspace<Rational> {
    let rows = (0..=d).map(|_| (0..n - d).map(|_| random_rational(rng)).collect()).collect();
    AffineSubspace::new(n, d, rows).expect("shape is consistent")
}

fn schedule_identity(_seed: u64) -> Result<String, String> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=5 {
        for d in 1..n {
            for t in 0..=50 {
                let p = FlowParams::new(n, d, t, Rates::auto(n), 1.0).map_err(|e| e.to_string())?;
                if !p.symbolic().identity_holds(n) {
                    return Err(format!("symbolic identity fails at n={n} d={d} t={t}"));
                }
                worst = worst.max(p.identity_residual());
                cases += 1;
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("relative residual {worst:e} exceeds 1e-12"));
    }
    Ok(format!("{cases} cases, worst relative residual {worst:e}"))
}

fn linear_shift_identity(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 1);
    for _ in 0..200 {
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(1..n);
        let sub = random_exact(&mut rng, n, d);
        let th = InhomShift::Linear((0..=d).map(|_| random_rational(&mut rng)).collect());
        let a: Vec<i64> = (0..n).map(|_| rng.random_range(-40..=40)).collect();
        let x: Vec<Rational> = (0..d).map(|_| random_rational(&mut rng)).collect();
        let r = verify_linear_identity(&sub, &th, &a, rng.random_range(-40..=40), &x).map_err(|e| e.to_string())?;
        if !r.is_zero() {
            return Err(format!("residual {r} at a = {a:?}"));
        }
    }
    Ok("200 exact draws, residual 0".into())
}

fn grade_one_records(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 2);
    for _ in 0..3 {
        let n = rng.random_range(2..=3usize);
        let d = rng.random_range(1..n);
        let sub = random_exact(&mut rng, n, d);
        let h = 40;
        let w = higher_exponent_records(&sub, 1, h).map_err(|e| e.to_string())?;
        let r = dual_records(&sub, &InhomShift::Zero, h).map_err(|e| e.to_string())?;
        let a: Vec<_> = w.records.iter().map(|x| (x.pibullet_norm, x.lhs_norm.clone())).collect();
        let b: Vec<_> = r.entries.iter().map(|x| (x.height, x.dist.clone())).collect();
        if a != b {
            return Err(format!("record sets differ for n={n} d={d}"));
        }
    }
    Ok("3 rational subspaces up to height 40".into())
}

fn dimension_bound(_seed: u64) -> Result<String, String> {
    for n in 2..=6 {
        for d in 1..n {
            let v = dimension_lower_bound(n, d, 1.0).map_err(|e| e.to_string())?;
            if v != d as f64 {
                return Err(format!("bound({n}, {d}, 1) = {v}"));
            }
        }
    }
    Ok("tau = 1 gives d for 1 <= d < n <= 6".into())
}

fn divergence_sum(_seed: u64) -> Result<String, String> {
    let families = ["dirichlet", "power:3/2", "powerlog:1:2"];
    for spec in families {
        let psi = ApproximatingFunction::parse(spec).map_err(|e| e.to_string())?;
        let mut plain = 0.0;
        for k in 1..=10_000u64 {
            plain += psi.evaluate(k as f64).map_err(|e| e.to_string())?;
        }
        let got = divergence_sum_partial(&psi, 2, 1, 1.0, 10_000).map_err(|e| e.to_string())?.partial;
        if got.to_bits() != plain.to_bits() {
            return Err(format!("{spec}: {got} != {plain}"));
        }
    }
    Ok(format!("{} families bit-exact at s = d", families.len()))
}

fn lattice_nu_floor(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 3);
    let sub = AffineSubspace::golden_line();
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let t = rng.random_range(0..=20u32);
        let x: f64 = rng.random_range(-1.0..1.0);
        let p = FlowParams::new(2, 1, t, Rates::auto(2), 1.0).map_err(|e| e.to_string())?;
        worst = worst.min(lattice_nu(&sub, &p, &[x]).map_err(|e| e.to_string())?);
    }
    if worst < 1.0 {
        return Err(format!("nu = {worst} below 1"));
    }
    Ok(format!("200 draws, minimum {worst}"))
}

fn window_inclusion(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 4);
    let sub = AffineSubspace::golden_line();
    let mut inside = 0;
    for _ in 0..200 {
        let t = rng.random_range(2..=9u32);
        let x: f64 = rng.random_range(0.0..1.0);
        let p = FlowParams::new(2, 1, t, Rates::auto(2), 1.0).map_err(|e| e.to_string())?;
        if a_t_membership(&sub, &p, &[x]).map_err(|e| e.to_string())? {
            inside += 1;
            if !a_tilde_membership(&sub, &p, &[x]).map_err(|e| e.to_string())? {
                return Err(format!("x = {x} lies in A_t but not in the enlarged set at t = {t}"));
            }
        }
    }
    Ok(format!("200 draws, {inside} inside A_t"))
}

fn wedge_antisymmetry(seed: u64) -> Result<String, String> {
    let mut rng = stream_rng(seed, 5);
    for _ in 0..200 {
        let u: Vec<i64> = (0..5).map(|_| rng.random_range(-5..=5)).collect();
        let v: Vec<i64> = (0..5).map(|_| rng.random_range(-5..=5)).collect();
        let (mu, mv) = (MultiVector::from_vector(&u), MultiVector::from_vector(&v));
        let sum = mu.wedge(&mv).and_then(|a| a.add(&mv.wedge(&mu)?)).map_err(|e| e.to_string())?;
        if !sum.is_zero() {
            return Err(format!("u∧v + v∧u != 0 for {u:?}, {v:?}"));
        }
    }
    Ok("200 pairs".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for (name, check) in CHECKS {
            assert!(check(0).is_ok(), "{name}");
        }
    }
}
