//! Affine subspaces of `R^n` written as graphs `x ↦ (x, x̃A)` with `x̃ = (1, x)`.

use crate::error::{shape, Result};
use crate::scalar::{Rational, Scalar};

/// The slope matrix `A` with `d + 1` rows and `n − d` columns. Row 0 is the
/// offset; rows `1..=d` form the linear part.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace<S> {
    n: usize,
    d: usize,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> AffineSubspace<S> {
    pub fn new(n: usize, d: usize, rows: Vec<Vec<S>>) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(shape(format!("need 1 <= d < n, got n={n}, d={d}")));
        }
        if rows.len() != d + 1 {
            return Err(shape(format!("matrix has {} rows, expected d+1 = {}", rows.len(), d + 1)));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n - d {
                return Err(shape(format!("row {r} has {} entries, expected n-d = {}", row.len(), n - d)));
            }
        }
        Ok(Self { n, d, rows })
    }

    /// The subspace with all-zero slope matrix.
    pub fn zero(n: usize, d: usize) -> Result<Self> {
        Self::new(n, d, vec![vec![S::zero(); n.saturating_sub(d)]; d + 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `n − d`, the number of dependent coordinates.
    pub fn codim(&self) -> usize {
        self.n - self.d
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn entry(&self, row: usize, col: usize) -> &S {
        &self.rows[row][col]
    }

    fn check_point(&self, x: &[S]) -> Result<()> {
        if x.len() != self.d {
            return Err(shape(format!("point has length {}, expected d = {}", x.len(), self.d)));
        }
        Ok(())
    }

    /// `(x, x̃A)`.
    pub fn parametrize(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_point(x)?;
        let mut y = x.to_vec();
        for col in 0..self.codim() {
            let mut v = self.rows[0][col].clone();
            for (i, xi) in x.iter().enumerate() {
                v = v + xi.clone() * self.rows[i + 1][col].clone();
            }
            y.push(v);
        }
        Ok(y)
    }

    /// `(x, x̃A) · a`.
    pub fn form(&self, x: &[S], a: &[i64]) -> Result<S> {
        if a.len() != self.n {
            return Err(shape(format!("integer vector has length {}, expected n = {}", a.len(), self.n)));
        }
        let y = self.parametrize(x)?;
        Ok(y.into_iter().zip(a).fold(S::zero(), |acc, (yi, &ai)| acc + yi * S::from_int(ai)))
    }

    /// The constant term `a₀ · a′` of `(x, x̃A) · a`.
    pub fn form_offset(&self, a: &[i64]) -> S {
        self.rows[0].iter().zip(&a[self.d..]).fold(S::zero(), |acc, (c, &ak)| acc + c.clone() * S::from_int(ak))
    }

    /// Gradient `[Id_d | A′] a` of `x ↦ (x, x̃A) · a`; constant in `x`.
    pub fn form_gradient(&self, a: &[i64]) -> Vec<S> {
        (0..self.d)
            .map(|i| {
                self.rows[i + 1]
                    .iter()
                    .zip(&a[self.d..])
                    .fold(S::from_int(a[i]), |acc, (c, &ak)| acc + c.clone() * S::from_int(ak))
            })
            .collect()
    }

    /// `A a′` for `a′` of length `n − d`, a vector of length `d + 1`.
    pub fn apply(&self, aprime: &[i64]) -> Vec<S> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(aprime).fold(S::zero(), |acc, (c, &ak)| acc + c.clone() * S::from_int(ak)))
            .collect()
    }

    pub fn to_f64(&self) -> AffineSubspace<f64> {
        AffineSubspace {
            n: self.n,
            d: self.d,
            rows: self.rows.iter().map(|r| r.iter().map(Scalar::as_f64).collect()).collect(),
        }
    }
}

impl AffineSubspace<f64> {
    /// The line `x ↦ (x, slope·x)` in the plane.
    pub fn line_through_origin(slope: f64) -> Self {
        Self { n: 2, d: 1, rows: vec![vec![0.0], vec![slope]] }
    }

    /// The golden-ratio line `x ↦ (x, φx)`.
    pub fn golden_line() -> Self {
        Self::line_through_origin((1.0 + 5f64.sqrt()) / 2.0)
    }
}

impl AffineSubspace<Rational> {
    /// Converts from an exact subspace entry by entry.
    pub fn from_ratios(n: usize, d: usize, rows: &[&[(i64, i64)]]) -> Result<Self> {
        let rows = rows.iter().map(|r| r.iter().map(|&(p, q)| crate::scalar::ratio(p, q)).collect()).collect();
        Self::new(n, d, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn golden_parametrization() {
        let s = AffineSubspace::golden_line();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(s.parametrize(&[2.0]).unwrap(), vec![2.0, 2.0 * phi]);
    }

    #[test]
    fn origin_picks_offset_row() {
        let s = AffineSubspace::from_ratios(3, 1, &[&[(1, 2), (1, 3)], &[(1, 5), (1, 7)]]).unwrap();
        let y = s.parametrize(&[Rational::from_int(0)]).unwrap();
        assert_eq!(y, vec![Rational::from_int(0), ratio(1, 2), ratio(1, 3)]);
    }

    #[test]
    fn exact_parametrization() {
        let s = AffineSubspace::from_ratios(3, 1, &[&[(1, 2), (1, 3)], &[(1, 5), (1, 7)]]).unwrap();
        let y = s.parametrize(&[Rational::from_int(1)]).unwrap();
        assert_eq!(y, vec![Rational::from_int(1), ratio(7, 10), ratio(10, 21)]);
    }

    #[test]
    fn shape_errors() {
        assert!(AffineSubspace::<f64>::new(2, 1, vec![vec![0.0]]).is_err());
        assert!(AffineSubspace::<f64>::new(2, 1, vec![vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(AffineSubspace::<f64>::new(2, 2, vec![]).is_err());
        assert!(AffineSubspace::golden_line().parametrize(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn form_matches_parametrization() {
        let s = AffineSubspace::from_ratios(3, 1, &[&[(1, 2), (1, 3)], &[(1, 5), (1, 7)]]).unwrap();
        let x = [ratio(2, 3)];
        let a = [3, -1, 4];
        let y = s.parametrize(&x).unwrap();
        let direct = y[0].clone() * Rational::from_int(3) - y[1].clone() + y[2].clone() * Rational::from_int(4);
        assert_eq!(s.form(&x, &a).unwrap(), direct);
        let grad = s.form_gradient(&a);
        let offset = s.form_offset(&a);
        assert_eq!(offset + grad[0].clone() * x[0].clone(), direct);
    }
}
