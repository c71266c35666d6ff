//! Open sup-norm balls in `R^d`.

use crate::error::{domain, shape, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(shape("ball needs at least one coordinate"));
        }
        if !(radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(domain(format!("invalid ball: center {center:?}, radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// The interval `(lo, hi)`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo + hi) / 2.0], (hi - lo) / 2.0)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Same center, radius scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.center.clone(), self.radius * factor)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.center).all(|(xi, ci)| (xi - ci).abs() < self.radius)
    }

    /// Lebesgue measure `(2r)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.radius).powi(self.dim() as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.radius
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_keeps_center() {
        let b = Ball::new(vec![0.5, -1.0], 0.25).unwrap();
        let s = b.scaled(5.0).unwrap();
        assert_eq!(s.center(), b.center());
        assert_eq!(s.radius(), 1.25);
    }

    #[test]
    fn membership_is_strict_sup_norm() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.99, -0.99]));
        assert!(!b.contains(&[1.0, 0.0]));
        assert!(!b.contains(&[0.0]));
        assert_eq!(b.volume(), 4.0);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(Ball::new(vec![0.0], 0.0).is_err());
        assert!(Ball::new(vec![0.0], f64::INFINITY).is_err());
        assert!(Ball::new(vec![], 1.0).is_err());
    }
}
