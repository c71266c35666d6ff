use std::path::{Path, PathBuf};

use dioph_core::budget;
use dioph_core::dual::{dual_records, estimate_omega, RecordTable};
use dioph_core::dynamics::{
    default_eps2_schedule, estimate_rho, flow_good_constants, verify_nondivergence_bound, FlowParams, Rates,
};
use dioph_core::exponents::{estimate_omega_j, higher_exponent_records, primitive_vectors, WedgeScan};
use dioph_core::goodfn::{check_good_sampled, poly_good_constants, GridSample};
use dioph_core::measure::{compute_l, dimension_lower_bound, limsup_tail_profile};
use dioph_core::shell::punctured_box_size;
use dioph_core::{AffineSubspace, ApproximatingFunction, Ball, InhomShift, Polynomial, Scalar};
use serde_json::json;

use crate::config::{self, Config, Subspace};
use crate::error::{CliError, CliResult};
use crate::output::{emit_plot_data, ints, num, write_text, Format, Header, PlotData, Table};
use crate::{verify, Cli, Command, GlobalArgs, OutputArgs};

/// Largest `n` and height for `j ≥ 2` without `--allow-large`.
const WEDGE_MAX_N: usize = 4;
const WEDGE_MAX_HEIGHT: u64 = 30;

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let g = cli.global;
    if let Some(k) = g.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second build in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    if let Some(b) = g.budget {
        budget::set_limit(b);
    }
    match cli.command {
        Command::Exponent { config, hmax, tail, out, format, plot } => {
            let out = out.unwrap_or_else(|| PathBuf::from("records.csv"));
            exponent(&g, &config, hmax, tail, &OutputArgs { out: Some(out), format, plot })
        }
        Command::Records { config, hmax, output } => records(&g, &config, hmax, &output),
        Command::HigherExponent { config, j, height, tail, allow_large, output } => {
            higher_exponent(&g, &config, j, height, tail, allow_large, &output)
        }
        Command::GoodCheck { poly, ball, grid, degree, c, alpha, levels, lipschitz, volume, output } => good_check(
            &g,
            GoodCheck { poly: &poly, ball: &ball, grid, degree, c, alpha, levels, lipschitz, volume: volume.into() },
            &output,
        ),
        Command::Nondiv { config, t, beta, gamma, delta, grid, l, samples, coarse, besicovitch, volume, output } => {
            nondiv(
                &g,
                &config,
                Nondiv { t, beta: &beta, gamma, delta, grid, l, samples, coarse, besicovitch, volume: volume.into() },
                &output,
            )
        }
        Command::Measure { config, psi, t0, t1, grid, output } => {
            measure(&g, &config, psi.as_deref(), t0, t1, grid, &output)
        }
        Command::DimBound { n, d, tau } => dim_bound(&g, n, d, tau),
        Command::Verify { output } => verify::run(&g, &output),
    }
}

fn seed_of(g: &GlobalArgs, cfg: Option<&Config>) -> u64 {
    g.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(0)
}

/// Prints the budget line; fails when it exceeds the limit.
fn dry_run(command: &str, requested: u128) -> CliResult<()> {
    let limit = budget::limit();
    println!("{command}: inputs valid");
    println!("budget: {requested} candidates (limit {limit})");
    budget::check(requested)?;
    Ok(())
}

fn finish(
    output: &OutputArgs,
    fallback: Format,
    table: &Table,
    header: &Header,
    extra: serde_json::Value,
    plot: Option<&dyn PlotData>,
) -> CliResult<()> {
    let format = Format::resolve(output.format, output.out.as_deref(), fallback);
    write_text(output.out.as_deref(), &table.render(format, header, extra))?;
    if let (Some(path), Some(report)) = (&output.plot, plot) {
        emit_plot_data(report, path)?;
    }
    Ok(())
}

fn header(command: &'static str, seed: u64, cfg: Option<&Config>) -> Header {
    let h = Header::new(command, seed, cfg.map(|c| c.sha256.clone()));
    match cfg {
        Some(c) => h.with("arithmetic", c.subspace.arithmetic()).with("n", c.subspace.n()).with("d", c.subspace.d()),
        None => h,
    }
}

fn record_rows<S: Scalar>(table: &RecordTable<S>, with_adp: bool) -> Table {
    let mut t = if with_adp {
        Table::new(&["height", "aprime", "adoubleprime", "dist", "vhat"])
    } else {
        Table::new(&["height", "aprime", "dist", "vhat"])
    };
    for r in &table.entries {
        let mut row = vec![r.height.to_string(), ints(&r.aprime)];
        if with_adp {
            row.push(ints(&r.adoubleprime));
        }
        row.push(r.dist.to_string());
        row.push(num(r.vhat));
        t.push(row);
    }
    t
}

fn exponent(g: &GlobalArgs, path: &Path, hmax: u64, tail: f64, output: &OutputArgs) -> CliResult<()> {
    let cfg = config::load(path)?;
    let k = cfg.subspace.n() - cfg.subspace.d();
    if g.dry_run {
        return dry_run("exponent", punctured_box_size(k, hmax));
    }
    let seed = seed_of(g, Some(&cfg));
    fn go<S: Scalar>(
        sub: &AffineSubspace<S>,
        th: &InhomShift<S>,
        hmax: u64,
        tail: f64,
        output: &OutputArgs,
        header: Header,
    ) -> CliResult<()> {
        let table = dual_records(sub, th, hmax)?;
        let est = estimate_omega(&table, tail)?;
        println!("records: {}", table.len());
        println!("omega_hat: {}", num(est.value));
        println!("spread: {}", num(est.spread));
        println!("tail_len: {}", est.tail_len);
        if table.reaches_zero() {
            println!("note: an exact solution was found; the exponent is infinite");
        }
        let header = header.with("hmax", hmax).with("omega_hat", num(est.value)).with("spread", num(est.spread));
        let extra = json!({"omega_hat": num(est.value), "spread": num(est.spread), "tail_len": est.tail_len});
        finish(output, Format::Csv, &record_rows(&table, false), &header, extra, Some(&table))
    }
    let h = header("exponent", seed, Some(&cfg));
    match &cfg.subspace {
        Subspace::Exact(s, t) => go(s, t, hmax, tail, output, h),
        Subspace::Float(s, t) => go(s, t, hmax, tail, output, h),
    }
}

fn records(g: &GlobalArgs, path: &Path, hmax: u64, output: &OutputArgs) -> CliResult<()> {
    let cfg = config::load(path)?;
    if g.dry_run {
        return dry_run("records", punctured_box_size(cfg.subspace.n() - cfg.subspace.d(), hmax));
    }
    fn go<S: Scalar>(
        sub: &AffineSubspace<S>,
        th: &InhomShift<S>,
        hmax: u64,
        output: &OutputArgs,
        h: Header,
    ) -> CliResult<()> {
        let table = dual_records(sub, th, hmax)?;
        finish(output, Format::Csv, &record_rows(&table, true), &h.with("hmax", hmax), json!({}), Some(&table))
    }
    let h = header("records", seed_of(g, Some(&cfg)), Some(&cfg));
    match &cfg.subspace {
        Subspace::Exact(s, t) => go(s, t, hmax, output, h),
        Subspace::Float(s, t) => go(s, t, hmax, output, h),
    }
}

fn wedge_budget(n: usize, d: usize, j: usize, h: u64) -> CliResult<u128> {
    if j == 1 {
        return Ok(punctured_box_size(n - d, h).saturating_mul(1u128 << (d + 1)));
    }
    let factors = primitive_vectors(n + 1, h)?.len() as u128;
    Ok(budget::binomial(factors, j as u128))
}

#[allow(clippy::too_many_arguments)]
fn higher_exponent(
    g: &GlobalArgs,
    path: &Path,
    j: usize,
    height: u64,
    tail: f64,
    allow_large: bool,
    output: &OutputArgs,
) -> CliResult<()> {
    let cfg = config::load(path)?;
    let (n, d) = (cfg.subspace.n(), cfg.subspace.d());
    if j == 0 || j > n - d {
        return Err(CliError::Usage(format!("--j must lie in 1..={}", n - d)));
    }
    if j >= 2 && !allow_large && (n > WEDGE_MAX_N || height > WEDGE_MAX_HEIGHT) {
        return Err(CliError::Usage(format!(
            "wedge scans default to n <= {WEDGE_MAX_N} and height <= {WEDGE_MAX_HEIGHT}; pass --allow-large to go further"
        )));
    }
    if g.dry_run {
        return dry_run("higher-exponent", wedge_budget(n, d, j, height)?);
    }
    fn go<S: Scalar>(
        sub: &AffineSubspace<S>,
        j: usize,
        height: u64,
        tail: f64,
        output: &OutputArgs,
        h: Header,
    ) -> CliResult<()> {
        let WedgeScan { records, scanned, vanishing } = higher_exponent_records(sub, j, height)?;
        let est = estimate_omega_j(&records, tail)?;
        println!("records: {}", records.len());
        println!("scanned: {scanned}");
        println!("vanishing: {vanishing}");
        println!("omega_{j}_hat: {}", num(est.value));
        println!("spread: {}", num(est.spread));
        let mut t = Table::new(&["pibullet_norm", "w", "lhs_norm", "vhat"]);
        for r in &records {
            t.push(vec![
                r.pibullet_norm.to_string(),
                r.w.dump().trim_end().replace('\n', ";"),
                r.lhs_norm.to_string(),
                num(r.vhat),
            ]);
        }
        let h = h.with("j", j).with("height", height).with("omega_j_hat", num(est.value));
        let extra = json!({"omega_j_hat": num(est.value), "spread": num(est.spread), "scanned": scanned, "vanishing": vanishing});
        finish(output, Format::Csv, &t, &h, extra, None)
    }
    let h = header("higher-exponent", seed_of(g, Some(&cfg)), Some(&cfg));
    match &cfg.subspace {
        Subspace::Exact(s, _) => go(s, j, height, tail, output, h),
        Subspace::Float(s, _) => go(s, j, height, tail, output, h),
    }
}

struct GoodCheck<'a> {
    poly: &'a str,
    ball: &'a str,
    grid: usize,
    degree: Option<usize>,
    c: Option<f64>,
    alpha: Option<f64>,
    levels: u32,
    lipschitz: Option<f64>,
    volume: dioph_core::goodfn::VolumeConvention,
}

fn parse_ball(text: &str) -> CliResult<Ball> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--ball: cannot parse {s:?}"))))
        .collect::<CliResult<_>>()?;
    if parts.len() < 2 {
        return Err(CliError::Usage("--ball needs centre coordinates followed by a radius".into()));
    }
    let (center, radius) = parts.split_at(parts.len() - 1);
    Ball::new(center.to_vec(), radius[0]).map_err(|e| CliError::Usage(format!("--ball: {e}")))
}

fn good_check(g: &GlobalArgs, a: GoodCheck<'_>, output: &OutputArgs) -> CliResult<()> {
    let ball = parse_ball(a.ball)?;
    let dim = ball.dim();
    let poly = Polynomial::parse(a.poly)
        .and_then(|p| p.with_vars(dim))
        .map_err(|e| CliError::Usage(format!("--poly: {e}")))?;
    let requested = budget::pow_count(a.grid as u128, dim as u32);
    if g.dry_run {
        return dry_run("good-check", requested);
    }
    budget::check(requested)?;
    let l = a.degree.unwrap_or(poly.degree() as usize).max(1);
    let (c0, alpha0) = poly_good_constants(dim, l, a.volume)?;
    let (c, alpha) = (a.c.unwrap_or(c0), a.alpha.unwrap_or(alpha0));
    let f = |x: &[f64]| poly.eval(x);
    let sample = GridSample::new(&f, &ball, a.grid)?;
    let sup = sample.sup_abs();
    let schedule: Vec<f64> = (1..=a.levels).map(|k| sup * (-(k as f64)).exp2()).collect();
    let report = check_good_sampled(&sample, c, alpha, &schedule, a.lipschitz);
    println!("C: {}", num(report.c));
    println!("alpha: {}", num(report.alpha));
    println!("sup: {}{}", num(report.sup_estimate), if report.sup_grid_estimated { " (grid-estimated)" } else { "" });
    println!("worst_ratio: {}", num(report.worst_ratio));
    println!("violations: {}", report.violations);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    let mut t = Table::new(&["eps", "measure", "bound", "ratio"]);
    for r in &report.rows {
        t.push(vec![num(r.eps), num(r.measure), num(r.bound), num(r.ratio)]);
    }
    let h = Header::new("good-check", seed_of(g, None), None)
        .with("poly", a.poly)
        .with("grid", a.grid)
        .with("slack", num(report.slack));
    let extra = json!({"c": report.c, "alpha": report.alpha, "violations": report.violations, "worst_ratio": num(report.worst_ratio)});
    finish(output, Format::Csv, &t, &h, extra, Some(&report))
}

fn parse_rates(cfg: &Config, beta: &str, gamma: Option<f64>, delta: f64) -> CliResult<Rates> {
    let beta = match beta.trim() {
        "auto" => None,
        s => Some(
            s.parse::<f64>().map_err(|_| CliError::Usage(format!("--beta: expected `auto` or a number, got {s:?}")))?,
        ),
    };
    Ok(Rates::new(cfg.subspace.n(), beta, gamma, delta)?)
}

struct Nondiv<'a> {
    t: u32,
    beta: &'a str,
    gamma: Option<f64>,
    delta: f64,
    grid: usize,
    l: Option<f64>,
    samples: usize,
    coarse: usize,
    besicovitch: f64,
    volume: dioph_core::goodfn::VolumeConvention,
}

fn default_ball(cfg: &Config) -> CliResult<Ball> {
    match &cfg.ball {
        Some(b) => Ok(b.clone()),
        None => Ok(Ball::new(vec![0.5; cfg.subspace.d()], 0.5)?),
    }
}

fn nondiv(g: &GlobalArgs, path: &Path, a: Nondiv<'_>, output: &OutputArgs) -> CliResult<()> {
    let cfg = config::load(path)?;
    let rates = parse_rates(&cfg, a.beta, a.gamma, a.delta)?;
    let (sub, th) = cfg.subspace.float();
    let (n, d) = (sub.n(), sub.d());
    let ball = default_ball(&cfg)?;
    let requested = budget::pow_count(a.grid as u128, d as u32).saturating_mul(9);
    if g.dry_run {
        return dry_run("nondiv", requested);
    }
    let l = match a.l {
        Some(l) => l,
        None => compute_l(&th, &ball)?.value,
    };
    let seed = seed_of(g, Some(&cfg));
    let params = FlowParams::new(n, d, a.t, rates, l)?;
    let rho = estimate_rho(&sub, &params, &ball, a.coarse, a.samples, seed)?;
    let (c, alpha) = flow_good_constants(n, d, a.volume);
    let report = verify_nondivergence_bound(
        &sub,
        &params,
        &ball,
        a.grid,
        &default_eps2_schedule(&params),
        rho.rho_hat,
        c,
        alpha,
        a.besicovitch,
    )?;
    println!("{}", report.banner);
    println!("rho_hat: {}", num(report.rho_hat));
    println!("monotone: {}", report.monotone());
    let mut t = Table::new(&["eps2", "lhs_measure", "rhs_bound", "ratio", "vacuous"]);
    for r in &report.table {
        t.push(vec![num(r.eps2), num(r.lhs_measure), num(r.rhs_bound), num(r.ratio), r.vacuous.to_string()]);
    }
    let p = &report.params;
    let params_json = json!({
        "n": p.n, "d": p.d, "t": p.t, "beta": p.rates.beta, "gamma": p.rates.gamma, "delta": p.rates.delta,
        "l": p.l, "delta_prime": p.delta_prime, "k": p.k, "big_t": p.big_t, "eps_prime": p.eps_prime, "eps": p.eps,
    });
    let extra = json!({
        "params": params_json,
        "rho_hat": report.rho_hat,
        "c": report.c,
        "alpha": report.alpha,
        "besicovitch": report.besicovitch,
        "banner": report.banner,
    });
    let h = header("nondiv", seed, Some(&cfg)).with("t", a.t).with("grid", a.grid);
    finish(output, Format::Json, &t, &h, extra, Some(&report))
}

fn measure(
    g: &GlobalArgs,
    path: &Path,
    psi: Option<&str>,
    t0: u32,
    t1: u32,
    grid: usize,
    output: &OutputArgs,
) -> CliResult<()> {
    let cfg = config::load(path)?;
    let psi = match psi {
        Some(s) => ApproximatingFunction::parse(s).map_err(|e| CliError::Usage(format!("--psi: {e}")))?,
        None => cfg
            .psi
            .clone()
            .ok_or_else(|| CliError::Config(format!("{}: no psi in the config and no --psi", cfg.path)))?,
    };
    if t1 < t0 || t1 > 30 {
        return Err(CliError::Usage("need t0 <= t1 <= 30".into()));
    }
    let (sub, th) = cfg.subspace.float();
    let ball = default_ball(&cfg)?;
    if g.dry_run {
        return dry_run("measure", budget::pow_count((1u128 << (t1 + 2)) - 1, sub.n() as u32));
    }
    let profile = limsup_tail_profile(&sub, &th, &psi, &ball, grid, t0, t1)?;
    println!("monotone: {}", profile.monotone());
    println!("below_cap: {}", profile.below_cap());
    let mut t = Table::new(&["t0", "tail_measure", "bc_cap", "slack"]);
    for r in &profile.rows {
        t.push(vec![r.t0.to_string(), num(r.tail_measure), num(r.bc_cap), num(r.slack)]);
    }
    let h = header("measure", seed_of(g, Some(&cfg)), Some(&cfg)).with("psi", format!("{psi:?}")).with("grid", grid);
    let extra = json!({"t1": profile.t1, "cap_constant": profile.cap_constant, "monotone": profile.monotone(), "below_cap": profile.below_cap()});
    finish(output, Format::Csv, &t, &h, extra, Some(&profile))
}

fn dim_bound(g: &GlobalArgs, n: usize, d: usize, tau: f64) -> CliResult<()> {
    let value = dimension_lower_bound(n, d, tau).map_err(|e| CliError::Usage(e.to_string()))?;
    if g.dry_run {
        return dry_run("dim-bound", 1);
    }
    println!("{}", num(value));
    Ok(())
}
