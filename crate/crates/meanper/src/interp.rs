//! Piecewise-cubic local interpolation (4-point Lagrange) used for sampled
//! functions and for re-evaluating synthesized extensions inside residual
//! integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Locate the cell index `i` with `grid[i] <= t <= grid[i+1]`.
fn locate(grid: &[f64], t: f64) -> Result<usize> {
    let n = grid.len();
    let eps = 1e-12 * (1.0 + t.abs());
    if n < 2 || t < grid[0] - eps || t > grid[n - 1] + eps {
        return Err(Error::Domain(format!(
            "t = {t} outside the sample grid [{}, {}]",
            grid.first().copied().unwrap_or(f64::NAN),
            grid.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let mut lo = 0usize;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if grid[mid] <= t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Cubic Lagrange evaluation over the four points around `t`.
/// Falls back to the available stencil near the grid ends.
pub fn cubic_eval(grid: &[f64], values: &[Complex64], t: f64) -> Result<Complex64> {
    debug_assert_eq!(grid.len(), values.len());
    if grid.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    if grid.len() < 4 {
        // Linear fallback for tiny grids.
        let i = locate(grid, t)?;
        let w = (t - grid[i]) / (grid[i + 1] - grid[i]);
        return Ok(values[i] * (1.0 - w) + values[i + 1] * w);
    }
    let cell = locate(grid, t)?;
    let start = cell.saturating_sub(1).min(grid.len() - 4);
    let xs = &grid[start..start + 4];
    let ys = &values[start..start + 4];
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..4 {
        let mut l = 1.0;
        for k in 0..4 {
            if k != j {
                l *= (t - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += ys[j] * l;
    }
    Ok(acc)
}

/// Interpolant over a uniform grid described by its extent, avoiding an
/// explicit abscissa vector.
pub struct UniformSamples<'a> {
    pub left: f64,
    pub right: f64,
    pub values: &'a [Complex64],
}

impl<'a> UniformSamples<'a> {
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let n = self.values.len();
        if n < 4 {
            return Err(Error::InsufficientData("need at least 4 samples".into()));
        }
        let h = (self.right - self.left) / (n - 1) as f64;
        let eps = 1e-12 * (1.0 + t.abs());
        if t < self.left - eps || t > self.right + eps {
            return Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.left, self.right
            )));
        }
        let cell = (((t - self.left) / h).floor() as isize)
            .clamp(0, n as isize - 2) as usize;
        let start = cell.saturating_sub(1).min(n - 4);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let xj = self.left + (start + j) as f64 * h;
            let mut l = 1.0;
            for k in 0..4 {
                if k != j {
                    let xk = self.left + (start + k) as f64 * h;
                    l *= (t - xk) / (xj - xk);
                }
            }
            acc += self.values[start + j] * l;
        }
        Ok(acc)
    }
}
