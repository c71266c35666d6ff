//! Artifact headers, CSV/JSON tables and plot-data files.

use std::io::Write;
use std::path::Path;

use dioph_core::dual::RecordTable;
use dioph_core::dynamics::NondivReport;
use dioph_core::goodfn::GoodnessReport;
use dioph_core::measure::TailProfile;
use dioph_core::Scalar;
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// The explicit choice, else the output extension, else `fallback`.
    pub fn resolve(explicit: Option<Format>, out: Option<&Path>, fallback: Format) -> Format {
        explicit.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => fallback,
        })
    }
}

/// Provenance lines written ahead of every artifact.
#[derive(Debug, Clone)]
pub struct Header {
    pub command: &'static str,
    pub seed: u64,
    pub config_sha256: Option<String>,
    pub extra: Vec<(String, String)>,
}

/// Seconds since the Unix epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return v;
    }
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl Header {
    pub fn new(command: &'static str, seed: u64, config_sha256: Option<String>) -> Self {
        Self { command, seed, config_sha256, extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.to_string(), value.to_string()));
        self
    }

    fn fields(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("tool".to_string(), format!("dioph {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), self.command.to_string()),
            ("timestamp".to_string(), timestamp().to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("generator".to_string(), dioph_core::rng::GENERATOR.to_string()),
            ("config-sha256".to_string(), self.config_sha256.clone().unwrap_or_else(|| "none".into())),
        ];
        out.extend(self.extra.iter().cloned());
        out
    }

    pub fn comment_block(&self) -> String {
        self.fields().into_iter().map(|(k, v)| format!("# {k}: {v}\n")).collect()
    }

    pub fn json(&self) -> Value {
        Value::Object(self.fields().into_iter().map(|(k, v)| (k, Value::String(v))).collect())
    }
}

/// A rectangular result with named columns; cells are preformatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn csv(&self, header: &Header) -> String {
        let mut s = header.comment_block();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// Rows as objects; numeric-looking cells stay strings so exact
    /// rationals survive.
    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    Value::Object(
                        self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), cell_value(v))).collect::<Map<_, _>>(),
                    )
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format, header: &Header, extra: Value) -> String {
        match format {
            Format::Csv => self.csv(header),
            Format::Json => {
                let mut obj = match extra {
                    Value::Object(m) => m,
                    _ => Map::new(),
                };
                obj.insert("meta".into(), header.json());
                obj.insert("table".into(), self.json_rows());
                pretty(&Value::Object(obj))
            }
        }
    }
}

fn cell_value(s: &str) -> Value {
    if let Ok(k) = s.parse::<i64>() {
        return json!(k);
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => Value::String(s.to_string()),
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

/// Binary64 cell text: shortest round-trip form, `inf`/`nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

pub fn ints(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io("stdout", e))
        }
    }
}

/// Reports that can be flattened into columns for external plotters.
pub trait PlotData {
    fn plot_columns(&self) -> Vec<&'static str>;
    fn plot_rows(&self) -> Vec<Vec<f64>>;
}

impl PlotData for NondivReport {
    fn plot_columns(&self) -> Vec<&'static str> {
        vec!["eps2", "lhs_measure", "rhs_bound"]
    }

    fn plot_rows(&self) -> Vec<Vec<f64>> {
        self.table.iter().map(|r| vec![r.eps2, r.lhs_measure, r.rhs_bound]).collect()
    }
}

impl PlotData for TailProfile {
    fn plot_columns(&self) -> Vec<&'static str> {
        vec!["t0", "tail_measure", "bc_cap"]
    }

    fn plot_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.t0 as f64, r.tail_measure, r.bc_cap]).collect()
    }
}

impl<S: Scalar> PlotData for RecordTable<S> {
    fn plot_columns(&self) -> Vec<&'static str> {
        vec!["height", "dist", "vhat"]
    }

    fn plot_rows(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|r| vec![r.height as f64, r.dist.as_f64(), r.vhat]).collect()
    }
}

impl PlotData for GoodnessReport {
    fn plot_columns(&self) -> Vec<&'static str> {
        vec!["eps", "measure", "bound"]
    }

    fn plot_rows(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| vec![r.eps, r.measure, r.bound]).collect()
    }
}

/// Whitespace-separated columns under a `#` header line; an empty report
/// gives the header alone.
pub fn emit_plot_data(report: &dyn PlotData, path: &Path) -> CliResult<()> {
    let mut s = format!("# {}\n", report.plot_columns().join(" "));
    for row in report.plot_rows() {
        s.push_str(&row.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" "));
        s.push('\n');
    }
    write_text(Some(path), &s)
}
