//! Inhomogeneous shifts restricted to the subspace, as functions of the
//! parameter `x ∈ R^d`.

use std::fmt;
use std::sync::Arc;

use crate::error::{shape, Error, Result};
use crate::scalar::Scalar;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> std::result::Result<Vec<f64>, String> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&[f64]) -> std::result::Result<Vec<Vec<f64>>, String> + Send + Sync>;

/// A black-box shift with optional analytic derivatives. Analyticity is the
/// caller's obligation; nothing here checks it.
#[derive(Clone)]
pub struct Callable {
    pub label: String,
    pub value: ValueFn,
    pub gradient: Option<GradientFn>,
    pub hessian: Option<HessianFn>,
}

impl Callable {
    pub fn new(label: impl Into<String>, value: ValueFn) -> Self {
        Self { label: label.into(), value, gradient: None, hessian: None }
    }

    pub fn with_gradient(mut self, gradient: GradientFn) -> Self {
        self.gradient = Some(gradient);
        self
    }

    pub fn with_hessian(mut self, hessian: HessianFn) -> Self {
        self.hessian = Some(hessian);
        self
    }

    fn call(&self, x: &[f64]) -> Result<f64> {
        let v = (self.value)(x).map_err(Error::Evaluation)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("{} returned {v} at {x:?}", self.label)))
        }
    }
}

impl fmt::Debug for Callable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Callable")
            .field("label", &self.label)
            .field("gradient", &self.gradient.is_some())
            .field("hessian", &self.hessian.is_some())
            .finish()
    }
}

/// `θ̂(x)`: zero, a constant, `θ₀ + θ₁x₁ + … + θ_d x_d`, or a callable.
#[derive(Debug, Clone)]
pub enum InhomShift<S> {
    Zero,
    Constant(S),
    Linear(Vec<S>),
    Callable(Callable),
}

impl<S: Scalar> InhomShift<S> {
    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        match self {
            Self::Zero => Ok(S::zero()),
            Self::Constant(c) => Ok(c.clone()),
            Self::Linear(theta) => {
                if theta.len() != x.len() + 1 {
                    return Err(shape(format!(
                        "linear shift has {} coefficients, expected d+1 = {}",
                        theta.len(),
                        x.len() + 1
                    )));
                }
                Ok(x.iter().zip(&theta[1..]).fold(theta[0].clone(), |acc, (xi, ti)| acc + xi.clone() * ti.clone()))
            }
            Self::Callable(c) => {
                let xf: Vec<f64> = x.iter().map(Scalar::as_f64).collect();
                S::from_f64_value(c.call(&xf)?)
            }
        }
    }

    /// The column `𝜽 ∈ R^{d+1}` for affine shifts; `None` for callables.
    pub fn column(&self, d: usize) -> Option<Vec<S>> {
        match self {
            Self::Zero => Some(vec![S::zero(); d + 1]),
            Self::Constant(c) => {
                let mut v = vec![S::zero(); d + 1];
                v[0] = c.clone();
                Some(v)
            }
            Self::Linear(theta) if theta.len() == d + 1 => Some(theta.clone()),
            _ => None,
        }
    }

    pub fn is_affine(&self) -> bool {
        !matches!(self, Self::Callable(_))
    }

    /// `∇θ̂(x)`; callables without a gradient use central differences with
    /// step `step`.
    pub fn gradient(&self, x: &[S], step: f64) -> Result<Vec<S>> {
        let d = x.len();
        match self {
            Self::Zero | Self::Constant(_) => Ok(vec![S::zero(); d]),
            Self::Linear(theta) => {
                if theta.len() != d + 1 {
                    return Err(shape("linear shift length does not match d+1"));
                }
                Ok(theta[1..].to_vec())
            }
            Self::Callable(c) => {
                let xf: Vec<f64> = x.iter().map(Scalar::as_f64).collect();
                let g = match &c.gradient {
                    Some(g) => g(&xf).map_err(Error::Evaluation)?,
                    None => central_gradient(c, &xf, step)?,
                };
                if g.len() != d {
                    return Err(shape("callable gradient has the wrong length"));
                }
                g.into_iter().map(S::from_f64_value).collect()
            }
        }
    }

    /// Matrix of second partials at `x` (zero for affine shifts).
    pub fn hessian(&self, x: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
        let d = x.len();
        match self {
            Self::Callable(c) => match &c.hessian {
                Some(h) => h(x).map_err(Error::Evaluation),
                None => central_hessian(c, x, step),
            },
            _ => Ok(vec![vec![0.0; d]; d]),
        }
    }

    pub fn to_f64(&self) -> InhomShift<f64> {
        match self {
            Self::Zero => InhomShift::Zero,
            Self::Constant(c) => InhomShift::Constant(c.as_f64()),
            Self::Linear(t) => InhomShift::Linear(t.iter().map(Scalar::as_f64).collect()),
            Self::Callable(c) => InhomShift::Callable(c.clone()),
        }
    }
}

fn central_gradient(c: &Callable, x: &[f64], step: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = c.call(&probe)?;
            probe[i] = x[i] - step;
            let down = c.call(&probe)?;
            probe[i] = x[i];
            Ok((up - down) / (2.0 * step))
        })
        .collect()
}

fn central_hessian(c: &Callable, x: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
    let d = x.len();
    let mut h = vec![vec![0.0; d]; d];
    let mut probe = x.to_vec();
    let at = |probe: &mut Vec<f64>, i: usize, di: f64, j: usize, dj: f64| -> Result<f64> {
        probe[i] += di;
        probe[j] += dj;
        let v = c.call(probe);
        probe[i] = x[i];
        probe[j] = x[j];
        v
    };
    for i in 0..d {
        for j in i..d {
            let v = if i == j {
                let f0 = c.call(x)?;
                (at(&mut probe, i, step, i, 0.0)? - 2.0 * f0 + at(&mut probe, i, -step, i, 0.0)?) / (step * step)
            } else {
                (at(&mut probe, i, step, j, step)?
                    - at(&mut probe, i, step, j, -step)?
                    - at(&mut probe, i, -step, j, step)?
                    + at(&mut probe, i, -step, j, -step)?)
                    / (4.0 * step * step)
            };
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    #[test]
    fn catalog_examples() {
        assert_eq!(InhomShift::<f64>::Zero.evaluate(&[0.3]).unwrap(), 0.0);
        let lin = InhomShift::Linear(vec![Rational::from_int(1), Rational::from_int(2)]);
        assert_eq!(lin.evaluate(&[Rational::from_int(3)]).unwrap(), Rational::from_int(7));
        let c = InhomShift::Constant(ratio(1, 2));
        assert_eq!(c.evaluate(&[ratio(1, 10), ratio(9, 10)]).unwrap(), ratio(1, 2));
    }

    #[test]
    fn callable_errors_propagate() {
        let bad = Callable::new("fails", Arc::new(|_: &[f64]| Err("boom".to_string())));
        let shift = InhomShift::<f64>::Callable(bad);
        assert_eq!(shift.evaluate(&[0.0]), Err(Error::Evaluation("boom".into())));
        let nan = Callable::new("nan", Arc::new(|_: &[f64]| Ok(f64::NAN)));
        assert!(InhomShift::<f64>::Callable(nan).evaluate(&[0.0]).is_err());
    }

    #[test]
    fn finite_difference_derivatives() {
        let quad = Callable::new("x^2 y", Arc::new(|x: &[f64]| Ok(x[0] * x[0] * x[1])));
        let s = InhomShift::<f64>::Callable(quad);
        let g = s.gradient(&[1.5, 2.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6 && (g[1] - 2.25).abs() < 1e-6);
        let h = s.hessian(&[1.5, 2.0], 1e-4).unwrap();
        assert!((h[0][0] - 4.0).abs() < 1e-4);
        assert!((h[0][1] - 3.0).abs() < 1e-4);
        assert!(h[1][1].abs() < 1e-4);
    }
}
