//! Midpoint grids on balls, grid quadrature of indicator sets, and
//! low-discrepancy sampling.

use rand::Rng;

use crate::ball::Ball;
use crate::error::{domain, Result};
use crate::rng::seeded_rng;

/// `per_axis^d` cell midpoints of a ball, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    ball: Ball,
    per_axis: usize,
    len: usize,
}

impl Grid {
    pub fn new(ball: Ball, per_axis: usize) -> Result<Self> {
        if per_axis == 0 {
            return Err(domain("grid needs at least one point per axis"));
        }
        let len = (per_axis as u128).pow(ball.dim() as u32);
        if len > 1 << 32 {
            return Err(domain(format!("grid of {len} points is too large")));
        }
        Ok(Self { ball, per_axis, len: len as usize })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn dim(&self) -> usize {
        self.ball.dim()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.ball.radius() / self.per_axis as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim() as i32)
    }

    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        self.ball.lower(axis) + (k as f64 + 0.5) * self.spacing()
    }

    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut x = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            x[axis] = self.coord(axis, rest % self.per_axis);
            rest /= self.per_axis;
        }
        x
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// Measure of the cells whose midpoints are flagged.
    pub fn measure(&self, flags: &[bool]) -> f64 {
        flags.iter().filter(|&&f| f).count() as f64 * self.cell_volume()
    }

    /// Cells with an axis neighbour of the opposite flag. Their volume bounds
    /// the quadrature error for sets with regular boundary.
    pub fn boundary_cells(&self, flags: &[bool]) -> usize {
        let n = self.per_axis;
        let mut count = 0;
        for (index, &f) in flags.iter().enumerate() {
            let mut stride = 1;
            let mut differs = false;
            for _ in 0..self.dim() {
                let k = (index / stride) % n;
                if (k > 0 && flags[index - stride] != f) || (k + 1 < n && flags[index + stride] != f) {
                    differs = true;
                    break;
                }
                stride *= n;
            }
            if differs {
                count += 1;
            }
        }
        count
    }

    /// Flags every midpoint `x` with `dist(c0 + g·x, Z) < bound`.
    pub fn mark_near_integer(&self, c0: f64, g: &[f64], bound: f64, out: &mut [bool]) {
        let n = self.per_axis;
        let last = self.dim() - 1;
        let lines = self.len / n;
        for line in 0..lines {
            let mut offset = c0;
            let mut rest = line;
            for axis in (0..last).rev() {
                offset += g[axis] * self.coord(axis, rest % n);
                rest /= n;
            }
            let lo = self.ball.lower(last);
            mark_line(lo, self.spacing(), offset, g[last], bound, &mut out[line * n..(line + 1) * n]);
        }
    }
}

fn near(v: f64, bound: f64) -> bool {
    (v - v.round()).abs() < bound
}

/// One-dimensional kernel of [`Grid::mark_near_integer`] on midpoints
/// `lo + (k + 1/2) h`. Walks the integers crossed by the affine map instead of
/// the points when the map is shallow; both paths test the same predicate.
fn mark_line(lo: f64, h: f64, c: f64, g: f64, bound: f64, out: &mut [bool]) {
    let n = out.len();
    let value = |k: usize| c + g * (lo + (k as f64 + 0.5) * h);
    if bound <= 0.0 {
        return;
    }
    if bound >= 0.25 || g.abs() * h > 0.5 || g == 0.0 {
        for (k, o) in out.iter_mut().enumerate() {
            if near(value(k), bound) {
                *o = true;
            }
        }
        return;
    }
    let (v0, v1) = (value(0), value(n - 1));
    let (vmin, vmax) = if v0 <= v1 { (v0, v1) } else { (v1, v0) };
    let first = (vmin - bound).ceil() as i64;
    let last = (vmax + bound).floor() as i64;
    let inv_g = 1.0 / g;
    let inv_h = 1.0 / h;
    let band = bound * inv_g.abs() * inv_h + 1e-6;
    let top = (n - 1) as f64;
    for m in first..=last {
        let kc = ((m as f64 - c) * inv_g - lo) * inv_h - 0.5;
        let kl = (kc - band).floor();
        let kr = (kc + band).ceil();
        if kr < 0.0 || kl > top {
            continue;
        }
        let kl = kl.max(0.0) as usize;
        let kr = kr.min(top) as usize;
        for k in kl..=kr {
            if !out[k] && near(value(k), bound) {
                out[k] = true;
            }
        }
    }
}

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    acc
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// `count` Halton points in the ball with a seeded Cranley–Patterson shift.
pub fn halton_points(ball: &Ball, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let d = ball.dim();
    if d > PRIMES.len() {
        return Err(domain(format!("Halton sampler supports d <= {}", PRIMES.len())));
    }
    let mut rng = seeded_rng(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    Ok((1..=count as u64)
        .map(|i| {
            (0..d)
                .map(|axis| {
                    let u = (radical_inverse(i, PRIMES[axis]) + shift[axis]).fract();
                    ball.lower(axis) + 2.0 * ball.radius() * u
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_midpoints() {
        let g = Grid::new(Ball::interval(0.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(g.points(), vec![vec![0.125], vec![0.375], vec![0.625], vec![0.875]]);
        let g2 = Grid::new(Ball::new(vec![0.0, 0.0], 1.0).unwrap(), 2).unwrap();
        assert_eq!(g2.point(1), vec![-0.5, 0.5]);
        assert_eq!(g2.cell_volume(), 1.0);
    }

    #[test]
    fn interval_marking_matches_direct_scan() {
        let g = Grid::new(Ball::interval(-1.0, 3.0).unwrap(), 997).unwrap();
        for &(c, slope, bound) in &[(0.1, 7.3, 0.01), (-2.4, -31.0, 0.003), (0.5, 0.2, 0.2), (0.0, 180.0, 1e-4)] {
            let mut fast = vec![false; g.len()];
            g.mark_near_integer(c, &[slope], bound, &mut fast);
            let direct: Vec<bool> = g.points().iter().map(|x| near(c + slope * x[0], bound)).collect();
            assert_eq!(fast, direct, "c={c} slope={slope}");
        }
    }

    #[test]
    fn two_dimensional_marking_matches_direct_scan() {
        let g = Grid::new(Ball::new(vec![0.2, -0.1], 0.7).unwrap(), 64).unwrap();
        let (c, slope) = (0.37, [3.1, -0.9]);
        let mut fast = vec![false; g.len()];
        g.mark_near_integer(c, &slope, 0.02, &mut fast);
        let direct: Vec<bool> = g.points().iter().map(|x| near(c + slope[0] * x[0] + slope[1] * x[1], 0.02)).collect();
        assert_eq!(fast, direct);
    }

    #[test]
    fn boundary_cells_of_an_interval() {
        let g = Grid::new(Ball::interval(0.0, 1.0).unwrap(), 10).unwrap();
        let flags: Vec<bool> = (0..10).map(|k| (3..6).contains(&k)).collect();
        assert_eq!(g.boundary_cells(&flags), 4);
    }

    #[test]
    fn halton_points_lie_in_ball() {
        let b = Ball::new(vec![1.0, 2.0, 3.0], 0.5).unwrap();
        let pts = halton_points(&b, 200, 9).unwrap();
        assert!(pts.iter().all(|p| p.iter().zip(b.center()).all(|(x, c)| (x - c).abs() <= 0.5)));
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}
