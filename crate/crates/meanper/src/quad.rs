//! Gauss–Legendre quadrature and the endpoint-weighted integrals used by
//! every transform and coefficient computation.
//!
//! The algebraic endpoint singularity of the weight `(r^2 - t^2)^(alpha - 1/2)`
//! is removed by the substitution `t = r cos(theta)`, which turns the weight
//! into `sin(theta)^(2 alpha)` on `[0, pi]`.  Plain Gauss–Legendre in `theta`
//! then converges fast for every `alpha > -1/2`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::convolver::{Convolver, ConvolverKind};
use crate::error::{Error, Result};

/// A Gauss–Legendre rule on `[-1, 1]`.
///
/// Nodes are strictly increasing and exactly symmetric about 0; weights are
/// positive, symmetric, and sum to 2.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrate `f` over `[a, b]` by the affine-mapped rule.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

/// Legendre polynomial value and its predecessor at `x` (recurrence).
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn build_rule(n: usize) -> QuadratureRule {
    if n == 1 {
        return QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        // Tricomi-style initial guess, largest root first.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(n, x);
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, pm1) = legendre_pair(n, 0.0);
        let dp = n as f64 * (-pm1) / (-1.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    QuadratureRule { nodes, weights }
}

static RULE_CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();

/// The `order`-point Gauss–Legendre rule on `[-1, 1]`, cached per order.
pub fn gauss_legendre(order: usize) -> Result<Arc<QuadratureRule>> {
    if order == 0 {
        return Err(Error::invalid("quadrature order must be at least 1"));
    }
    let cache = RULE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    Ok(Arc::clone(
        map.entry(order).or_insert_with(|| Arc::new(build_rule(order))),
    ))
}

/// Single-rule evaluation of `int_{-r}^{r} (r^2 - t^2)^(alpha - 1/2) g(t) dt`
/// via the cosine substitution.  No error estimate; see [`integrate_weighted`].
pub fn integrate_weighted_single<F>(mut g: F, alpha: f64, r: f64, order: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    if alpha <= -0.5 {
        return Err(Error::invalid(format!(
            "alpha = {alpha} gives a non-integrable weight (need alpha > -1/2)"
        )));
    }
    if r <= 0.0 {
        return Err(Error::invalid("support radius r must be positive"));
    }
    let rule = gauss_legendre(order)?;
    let scale = r.powf(2.0 * alpha);
    let value = rule.integrate(0.0, PI, |theta| {
        let s = theta.sin();
        let w = if alpha == 0.5 { s } else { s.powf(2.0 * alpha) };
        g(r * theta.cos()) * w
    });
    Ok(value * scale)
}

/// `int_{-r}^{r} (r^2 - t^2)^(alpha - 1/2) g(t) dt` with a Richardson-style
/// error estimate taken as the difference between the `order` and `2*order`
/// evaluations.  The finer value is returned.
pub fn integrate_weighted<F>(mut g: F, alpha: f64, r: f64, order: usize) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Complex64,
{
    let coarse = integrate_weighted_single(&mut g, alpha, r, order)?;
    let fine = integrate_weighted_single(&mut g, alpha, r, 2 * order)?;
    Ok((fine, (fine - coarse).norm()))
}

/// Nodes per oscillation panel in the cumulative integrals.
const PANEL_ORDER: usize = 20;

/// Integral of `T(s) e^{-i lambda s}` over one grid cell `[ta, tb]` of a
/// weighted convolver, computed in the `theta` variable.  The cell is split
/// into enough panels that the phase change per panel stays below pi.
fn weighted_cell(conv: &Convolver, lambda: Complex64, ta: f64, tb: f64) -> Result<Complex64> {
    let r = conv.r();
    let alpha = conv.alpha();
    let rule = gauss_legendre(PANEL_ORDER)?;
    let clamp = |t: f64| (t / r).clamp(-1.0, 1.0);
    // theta decreases as t increases.
    let theta_hi = clamp(ta).acos();
    let theta_lo = clamp(tb).acos();
    let phase = lambda.norm() * (tb - ta);
    let panels = ((phase / PI).ceil() as usize).max(1);
    let scale = r.powf(2.0 * alpha);
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let dtheta = (theta_hi - theta_lo) / panels as f64;
    for p in 0..panels {
        let a = theta_lo + p as f64 * dtheta;
        let b = a + dtheta;
        acc += rule.integrate(a, b, |theta| {
            let s = theta.sin();
            let w = if alpha == 0.5 { s } else { s.powf(2.0 * alpha) };
            let t = r * theta.cos();
            (-i * lambda * t).exp() * (w * conv.h_eval(t))
        });
    }
    Ok(acc * scale)
}

/// Same cell integral for the tent profile, directly in `t` with a split at 0.
fn tent_cell(conv: &Convolver, lambda: Complex64, ta: f64, tb: f64) -> Result<Complex64> {
    let rule = gauss_legendre(PANEL_ORDER)?;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(2);
    if ta < 0.0 && tb > 0.0 {
        pieces.push((ta, 0.0));
        pieces.push((0.0, tb));
    } else {
        pieces.push((ta, tb));
    }
    for (a0, b0) in pieces {
        let phase = lambda.norm() * (b0 - a0);
        let panels = ((phase / PI).ceil() as usize).max(1);
        let dt = (b0 - a0) / panels as f64;
        for p in 0..panels {
            let a = a0 + p as f64 * dt;
            let b = a + dt;
            acc += rule.integrate(a, b, |t| (-i * lambda * t).exp() * conv.eval(t));
        }
    }
    Ok(acc)
}

/// Running antiderivative `G0(t_i) = int_{-r}^{t_i} T(s) e^{-i lambda s} ds`
/// at every grid point.  The grid must be sorted, inside the support, and
/// non-empty; panel counts scale with the oscillation of `lambda`.
pub fn cumulative_weighted(
    conv: &Convolver,
    lambda: Complex64,
    grid: &[f64],
) -> Result<Vec<Complex64>> {
    let r = conv.r();
    if grid.is_empty() {
        return Err(Error::invalid("cumulative grid is empty"));
    }
    let eps = 1e-9 * r.max(1.0);
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("cumulative grid is not strictly increasing"));
        }
    }
    if grid[0] < -r - eps || grid[grid.len() - 1] > r + eps {
        return Err(Error::invalid(format!(
            "cumulative grid exceeds the support [-{r}, {r}]"
        )));
    }

    let cell = |a: f64, b: f64| -> Result<Complex64> {
        if b - a <= 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match conv.kind() {
            ConvolverKind::Tent => tent_cell(conv, lambda, a, b),
            _ => weighted_cell(conv, lambda, a, b),
        }
    };

    let mut out = Vec::with_capacity(grid.len());
    let mut acc = cell(-r, grid[0].min(r).max(-r))?;
    out.push(acc);
    for w in grid.windows(2) {
        acc += cell(w[0].clamp(-r, r), w[1].clamp(-r, r))?;
        out.push(acc);
    }
    Ok(out)
}
