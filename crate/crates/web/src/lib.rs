//! Browser bindings for a planar line `x ↦ (x, offset + slope·x)`.
//!
//! Each export returns a JSON string; the plain functions behind them are
//! usable and tested natively.

use dioph_core::dual::{dual_records, estimate_omega};
use dioph_core::dynamics::{measure_a_tilde, FlowParams, Rates};
use dioph_core::measure::limsup_tail_profile;
use dioph_core::{AffineSubspace, ApproximatingFunction, Ball, Grid, InhomShift};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Interactive calls stay under these so the page never stalls.
pub const MAX_HEIGHT: u64 = 200_000;
pub const MAX_TAIL_END: u32 = 12;
pub const MAX_DECAY_T: u32 = 10;
pub const MAX_GRID: usize = 4096;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Core(#[from] dioph_core::Error),
    #[error("{0}")]
    Limit(String),
}

fn line(offset: f64, slope: f64) -> Result<AffineSubspace<f64>, DemoError> {
    Ok(AffineSubspace::new(2, 1, vec![vec![offset], vec![slope]])?)
}

fn unit_interval() -> Result<Ball, DemoError> {
    Ok(Ball::interval(0.0, 1.0)?)
}

fn check_grid(grid: usize) -> Result<(), DemoError> {
    if grid > MAX_GRID {
        return Err(DemoError::Limit(format!("grid is capped at {MAX_GRID} in the browser")));
    }
    Ok(())
}

/// Dual records up to `hmax` and the tail-median exponent estimate.
pub fn records_report(offset: f64, slope: f64, hmax: u64, tail: f64) -> Result<Value, DemoError> {
    if hmax > MAX_HEIGHT {
        return Err(DemoError::Limit(format!("hmax is capped at {MAX_HEIGHT} in the browser")));
    }
    let table = dual_records(&line(offset, slope)?, &InhomShift::Zero, hmax)?;
    let est = estimate_omega(&table, tail)?;
    let rows: Vec<Value> =
        table.entries.iter().map(|r| json!({"height": r.height, "dist": r.dist, "vhat": finite(r.vhat)})).collect();
    Ok(json!({"records": rows, "omega_hat": finite(est.value), "spread": finite(est.spread), "tail_len": est.tail_len}))
}

/// Truncated limsup tail measures on `[0, 1]` against the Borel–Cantelli cap.
pub fn tail_report(offset: f64, slope: f64, psi: &str, t0: u32, t1: u32, grid: usize) -> Result<Value, DemoError> {
    check_grid(grid)?;
    if t1 > MAX_TAIL_END {
        return Err(DemoError::Limit(format!("t1 is capped at {MAX_TAIL_END} in the browser")));
    }
    let psi = ApproximatingFunction::parse(psi)?;
    let profile = limsup_tail_profile(&line(offset, slope)?, &InhomShift::Zero, &psi, &unit_interval()?, grid, t0, t1)?;
    let rows: Vec<Value> = profile
        .rows
        .iter()
        .map(|r| json!({"t0": r.t0, "tail_measure": r.tail_measure, "bc_cap": finite(r.bc_cap)}))
        .collect();
    Ok(json!({"t1": profile.t1, "rows": rows, "monotone": profile.monotone(), "below_cap": profile.below_cap()}))
}

/// `|Ã_t|` on `[0, 1]` for `t = 1..=t_max` with the default rates.
pub fn decay_report(offset: f64, slope: f64, t_max: u32, grid: usize) -> Result<Value, DemoError> {
    check_grid(grid)?;
    if t_max > MAX_DECAY_T {
        return Err(DemoError::Limit(format!("t is capped at {MAX_DECAY_T} in the browser")));
    }
    let sub = line(offset, slope)?;
    let grid = Grid::new(unit_interval()?, grid)?;
    let rates = Rates::auto(2);
    let mut rows = Vec::new();
    for t in 1..=t_max {
        let p = FlowParams::new(2, 1, t, rates, 1.0)?;
        rows.push(json!({"t": t, "measure": measure_a_tilde(&sub, &p, &grid)?}));
    }
    let predicted = 1.0 / 6.0 - (rates.beta + rates.delta);
    Ok(json!({"rows": rows, "predicted_rate": predicted}))
}

/// JSON has no infinities; they travel as strings.
fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn to_js(r: Result<Value, DemoError>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn records(offset: f64, slope: f64, hmax: u32, tail: f64) -> Result<String, JsError> {
    to_js(records_report(offset, slope, hmax.into(), tail))
}

#[wasm_bindgen]
pub fn tail_profile(offset: f64, slope: f64, psi: &str, t0: u32, t1: u32, grid: u32) -> Result<String, JsError> {
    to_js(tail_report(offset, slope, psi, t0, t1, grid as usize))
}

#[wasm_bindgen]
pub fn decay(offset: f64, slope: f64, t_max: u32, grid: u32) -> Result<String, JsError> {
    to_js(decay_report(offset, slope, t_max, grid as usize))
}
