//! Run configuration: a subspace, an optional shift, ψ, a ball and a seed.
//!
//! ```toml
//! seed = 7
//! psi = "power:3/2"
//! shift = ["1/3", "1/5"]        # one entry: constant; d+1 entries: linear
//!
//! [subspace]
//! n = 2
//! d = 1
//! rows = [["0"], ["phi"]]       # row 0 is the offset row, then one row per x_i
//! arithmetic = "auto"           # auto | exact | float
//!
//! [ball]
//! center = [0.5]
//! radius = 0.5
//! ```
//!
//! Entries are rationals (`"3/7"`, `"-1.25"`), integers, or, in float mode,
//! `"phi"`, `"pi"`, `"e"` and `"sqrt(k)"`.

use std::fmt;
use std::path::Path;

use dioph_core::scalar::parse_rational;
use dioph_core::{AffineSubspace, ApproximatingFunction, Ball, InhomShift, Rational, Scalar};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Int(k) => write!(f, "{k}"),
            Self::Float(x) => write!(f, "{x:?}"),
            Self::Text(s) => f.write_str(s),
        }
    }
}

/// An entry with its location in the source text.
trait Located {
    fn entry(&self) -> &Entry;
    fn offset(&self, source: &str) -> Option<usize>;
}

impl Located for toml::Spanned<Entry> {
    fn entry(&self) -> &Entry {
        self.get_ref()
    }

    fn offset(&self, _source: &str) -> Option<usize> {
        Some(self.span().start)
    }
}

impl Located for Entry {
    fn entry(&self) -> &Entry {
        self
    }

    // serde_json keeps no spans; the first occurrence of the literal is the
    // best available position
    fn offset(&self, source: &str) -> Option<usize> {
        match self {
            Self::Text(s) => source.find(&format!("\"{s}\"")),
            other => source.find(&other.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig<E> {
    seed: Option<u64>,
    psi: Option<String>,
    shift: Option<Vec<E>>,
    subspace: RawSubspace<E>,
    ball: Option<RawBall>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubspace<E> {
    n: usize,
    d: usize,
    rows: Vec<Vec<E>>,
    #[serde(default)]
    arithmetic: Arithmetic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBall {
    center: Vec<f64>,
    radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Auto,
    Exact,
    Float,
}

/// A parsed matrix or shift entry: its binary64 value and, when it is
/// rational, its exact value.
#[derive(Debug, Clone)]
struct Number {
    exact: Option<Rational>,
    value: f64,
}

fn parse_number(entry: &Entry) -> Result<Number, String> {
    match entry {
        Entry::Int(k) => Ok(Number { exact: Some(Rational::from_int(*k)), value: *k as f64 }),
        Entry::Float(x) => {
            let exact = Rational::from_f64_value(*x).map_err(|e| e.to_string())?;
            Ok(Number { exact: Some(exact), value: *x })
        }
        Entry::Text(s) => {
            if let Ok(r) = parse_rational(s) {
                return Ok(Number { value: r.as_f64(), exact: Some(r) });
            }
            let t = s.trim().to_ascii_lowercase();
            let value = match t.as_str() {
                "phi" => (1.0 + 5f64.sqrt()) / 2.0,
                "pi" => std::f64::consts::PI,
                "e" => std::f64::consts::E,
                _ => match t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
                    Some(inner) => {
                        let r = parse_rational(inner).map_err(|e| e.to_string())?;
                        if r < Rational::from_int(0) {
                            return Err(format!("sqrt of a negative number in {s:?}"));
                        }
                        r.as_f64().sqrt()
                    }
                    None => {
                        // reuse the rational parser's message, which names the defect
                        return Err(parse_rational(s).expect_err("checked above").to_string());
                    }
                },
            };
            Ok(Number { exact: None, value })
        }
    }
}

/// The subspace in the arithmetic chosen for the run.
#[derive(Debug, Clone)]
pub enum Subspace {
    Exact(AffineSubspace<Rational>, InhomShift<Rational>),
    Float(AffineSubspace<f64>, InhomShift<f64>),
}

impl Subspace {
    pub fn float(&self) -> (AffineSubspace<f64>, InhomShift<f64>) {
        match self {
            Self::Exact(s, t) => (s.to_f64(), t.to_f64()),
            Self::Float(s, t) => (s.clone(), t.clone()),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Exact(s, _) => s.n(),
            Self::Float(s, _) => s.n(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Exact(s, _) => s.d(),
            Self::Float(s, _) => s.d(),
        }
    }

    pub fn arithmetic(&self) -> &'static str {
        match self {
            Self::Exact(..) => "exact",
            Self::Float(..) => "float",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub path: String,
    pub sha256: String,
    pub seed: Option<u64>,
    pub psi: Option<ApproximatingFunction>,
    pub subspace: Subspace,
    pub ball: Option<Ball>,
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub fn load(path: &Path) -> CliResult<Config> {
    let display = path.display().to_string();
    let source = std::fs::read_to_string(path).map_err(|e| CliError::io(&display, e))?;
    parse(&source, &display, is_json(path))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Parses configuration text; `origin` prefixes diagnostics.
pub fn parse(source: &str, origin: &str, json: bool) -> CliResult<Config> {
    let sha256 = hex::encode(Sha256::digest(source.as_bytes()));
    if json {
        let raw: RawConfig<Entry> = serde_json::from_str(source)
            .map_err(|e| CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        build(raw, source, origin, sha256)
    } else {
        let raw: RawConfig<toml::Spanned<Entry>> = toml::from_str(source).map_err(|e| {
            let (line, col) = e.span().map_or((1, 1), |s| line_col(source, s.start));
            CliError::Config(format!("{origin}:{line}:{col}: {}", e.message().trim()))
        })?;
        build(raw, source, origin, sha256)
    }
}

fn build<E: Located>(raw: RawConfig<E>, source: &str, origin: &str, sha256: String) -> CliResult<Config> {
    let at = |e: &E, msg: String| {
        let (line, col) = e.offset(source).map_or((1, 1), |o| line_col(source, o));
        CliError::Config(format!("{origin}:{line}:{col}: {msg}"))
    };
    let plain = |msg: String| CliError::Config(format!("{origin}: {msg}"));
    let RawSubspace { n, d, rows, arithmetic } = raw.subspace;
    if rows.len() != d + 1 {
        return Err(plain(format!("subspace.rows has {} rows, expected d+1 = {}", rows.len(), d + 1)));
    }
    let mut matrix: Vec<Vec<Number>> = Vec::with_capacity(rows.len());
    for row in &rows {
        if row.len() != n.saturating_sub(d) {
            let msg = format!("row has {} entries, expected n-d = {}", row.len(), n.saturating_sub(d));
            return Err(match row.first() {
                Some(e) => at(e, msg),
                None => plain(msg),
            });
        }
        let parsed =
            row.iter().map(|e| parse_number(e.entry()).map_err(|m| at(e, m))).collect::<CliResult<Vec<_>>>()?;
        matrix.push(parsed);
    }
    let shift: Vec<Number> = match &raw.shift {
        Some(entries) => {
            if entries.len() != 1 && entries.len() != d + 1 {
                let msg = format!("shift has {} entries, expected 1 or d+1 = {}", entries.len(), d + 1);
                return Err(match entries.first() {
                    Some(e) => at(e, msg),
                    None => plain(msg),
                });
            }
            entries.iter().map(|e| parse_number(e.entry()).map_err(|m| at(e, m))).collect::<CliResult<_>>()?
        }
        None => Vec::new(),
    };
    let all_exact = matrix.iter().flatten().chain(&shift).all(|x| x.exact.is_some());
    let exact = match arithmetic {
        Arithmetic::Auto => all_exact,
        Arithmetic::Exact if !all_exact => {
            return Err(plain("arithmetic = \"exact\" needs every entry to be rational".into()));
        }
        Arithmetic::Exact => true,
        Arithmetic::Float => false,
    };
    let subspace = if exact {
        let rows: Vec<Vec<Rational>> =
            matrix.iter().map(|r| r.iter().map(|x| x.exact.clone().expect("checked")).collect()).collect();
        let th = make_shift(shift.iter().map(|x| x.exact.clone().expect("checked")).collect());
        Subspace::Exact(AffineSubspace::new(n, d, rows).map_err(|e| plain(e.to_string()))?, th)
    } else {
        let rows: Vec<Vec<f64>> = matrix.iter().map(|r| r.iter().map(|x| x.value).collect()).collect();
        let th = make_shift(shift.iter().map(|x| x.value).collect());
        Subspace::Float(AffineSubspace::new(n, d, rows).map_err(|e| plain(e.to_string()))?, th)
    };
    let psi =
        raw.psi.as_deref().map(ApproximatingFunction::parse).transpose().map_err(|e| plain(format!("psi: {e}")))?;
    let ball = raw
        .ball
        .map(|b| {
            if b.center.len() != d {
                return Err(plain(format!("ball.center has {} coordinates, expected d = {d}", b.center.len())));
            }
            Ball::new(b.center, b.radius).map_err(|e| plain(format!("ball: {e}")))
        })
        .transpose()?;
    Ok(Config { path: origin.to_string(), sha256, seed: raw.seed, psi, subspace, ball })
}

fn make_shift<S: Scalar>(mut v: Vec<S>) -> InhomShift<S> {
    match v.len() {
        0 => InhomShift::Zero,
        1 => InhomShift::Constant(v.remove(0)),
        _ => InhomShift::Linear(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "[subspace]\nn = 2\nd = 1\nrows = [[\"0\"], [\"phi\"]]\n";

    #[test]
    fn golden_line_is_float() {
        let c = parse(GOLDEN, "g.toml", false).unwrap();
        assert_eq!(c.subspace.arithmetic(), "float");
        let (s, _) = c.subspace.float();
        assert!((s.entry(1, 0) - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn rational_rows_are_exact() {
        let c =
            parse("shift = [\"1/3\"]\n[subspace]\nn = 2\nd = 1\nrows = [[0], [\"3/7\"]]\n", "r.toml", false).unwrap();
        match c.subspace {
            Subspace::Exact(s, InhomShift::Constant(t)) => {
                assert_eq!(s.entry(1, 0), &dioph_core::scalar::ratio(3, 7));
                assert_eq!(t, dioph_core::scalar::ratio(1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_denominator_points_at_the_entry() {
        let src = "[subspace]\nn = 2\nd = 1\nrows = [[\"0\"],\n        [\"1/0\"]]\n";
        let err = parse(src, "bad.toml", false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("bad.toml:5:10:"), "{msg}");
        assert!(msg.contains("zero denominator"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn json_diagnostics_carry_positions() {
        let src = "{\"subspace\": {\"n\": 2, \"d\": 1,\n \"rows\": [[\"0\"], [\"1/0\"]]}}";
        let msg = parse(src, "bad.json", true).unwrap_err().to_string();
        assert!(msg.starts_with("bad.json:2:19:"), "{msg}");
        let msg = parse("{\"subspace\": ", "x.json", true).unwrap_err().to_string();
        assert!(msg.starts_with("x.json:1:"), "{msg}");
    }

    #[test]
    fn syntax_errors_report_line_and_column() {
        let msg = parse("[subspace]\nn = = 2\n", "s.toml", false).unwrap_err().to_string();
        assert!(msg.starts_with("s.toml:2:"), "{msg}");
    }

    #[test]
    fn shape_mismatches_are_config_errors() {
        let src = "[subspace]\nn = 3\nd = 1\nrows = [[\"0\"], [\"1\"]]\n";
        assert_eq!(parse(src, "m.toml", false).unwrap_err().exit_code(), 2);
        let src = "[subspace]\nn = 2\nd = 1\nrows = [[\"phi\"], [\"1\"]]\narithmetic = \"exact\"\n";
        assert!(parse(src, "m.toml", false).is_err());
    }
}
