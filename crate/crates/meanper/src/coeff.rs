//! Biorthogonal coefficient machinery: the recursion sequences
//! `a_j^{lambda,eta}`, the sigma weights, the interpolating entire
//! functions, the kernels `T_{lambda,0}`, and coefficient extraction by
//! kernel convolution at probe points.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::convolver::Convolver;
use crate::error::{Error, Result};
use crate::interp::{cubic_eval, UniformSamples};
use crate::par_map;
use crate::quad;
use crate::spectrum::{SpectralPoint, Spectrum};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One exponential-monomial term `c (it)^m e^{i lambda t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub lambda: Complex64,
    pub m: usize,
    pub c: Complex64,
}

/// A mean-periodic candidate: an explicit exponential sum, or samples on a
/// symmetric interval with declared smoothness.
#[derive(Debug, Clone)]
pub enum FunctionSpec {
    ExponentialSum {
        terms: Vec<ExpTerm>,
        /// Declared half-width of the interval where f is considered given;
        /// `None` means the whole line.
        half_width: Option<f64>,
    },
    Sampled {
        grid: Vec<f64>,
        values: Vec<Complex64>,
        smoothness_k: usize,
    },
}

impl FunctionSpec {
    pub fn exponential_sum(terms: Vec<ExpTerm>, half_width: Option<f64>) -> Result<Self> {
        for (i, a) in terms.iter().enumerate() {
            for b in &terms[i + 1..] {
                if (a.lambda - b.lambda).norm() < 1e-12 && a.m == b.m {
                    return Err(Error::invalid(format!(
                        "duplicate exponential term key (lambda {}, m {})",
                        a.lambda, a.m
                    )));
                }
            }
        }
        if let Some(h) = half_width {
            if !(h > 0.0) {
                return Err(Error::invalid("half_width must be positive"));
            }
        }
        Ok(FunctionSpec::ExponentialSum { terms, half_width })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<Complex64>, smoothness_k: usize) -> Result<Self> {
        if grid.len() < 4 || grid.len() != values.len() {
            return Err(Error::invalid(
                "sampled function needs at least 4 (t, value) pairs of equal length",
            ));
        }
        for w in grid.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("sample grid must be strictly increasing"));
            }
        }
        let hw = grid[grid.len() - 1];
        if (grid[0] + hw).abs() > 1e-12 * (1.0 + hw) {
            return Err(Error::invalid(
                "sample grid must span a symmetric interval [-r', r']",
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("sample values must be finite"));
        }
        Ok(FunctionSpec::Sampled {
            grid,
            values,
            smoothness_k,
        })
    }

    /// Half-width of the interval on which f is given.
    pub fn domain_half_width(&self) -> f64 {
        match self {
            FunctionSpec::ExponentialSum { half_width, .. } => {
                half_width.unwrap_or(f64::INFINITY)
            }
            FunctionSpec::Sampled { grid, .. } => grid[grid.len() - 1],
        }
    }

    /// Declared smoothness order `k` (exponential sums are C-infinity).
    pub fn smoothness(&self) -> Option<usize> {
        match self {
            FunctionSpec::ExponentialSum { .. } => None,
            FunctionSpec::Sampled { smoothness_k, .. } => Some(*smoothness_k),
        }
    }

    /// Rough bound on the oscillation frequency of f, used to size panels.
    pub fn max_frequency(&self) -> f64 {
        match self {
            FunctionSpec::ExponentialSum { terms, .. } => terms
                .iter()
                .map(|t| t.lambda.re.abs())
                .fold(0.0, f64::max),
            FunctionSpec::Sampled { grid, .. } => {
                let min_h = grid
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                PI / min_h
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        match self {
            FunctionSpec::ExponentialSum { terms, half_width } => {
                if let Some(h) = half_width {
                    if t.abs() > h + 1e-12 * (1.0 + h) {
                        return Err(Error::Domain(format!(
                            "t = {t} outside the declared interval [-{h}, {h}]"
                        )));
                    }
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for term in terms {
                    acc += term.c * (I * t).powu(term.m as u32) * (I * term.lambda * t).exp();
                }
                Ok(acc)
            }
            FunctionSpec::Sampled { grid, values, .. } => cubic_eval(grid, values, t),
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn kronecker(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The recursion sequence `a_0..a_{n-1}` for one spectral point and one
/// `eta in {0, ..., m}`, transcribed from the cached transform derivatives.
pub fn a_sequence(sp: &SpectralPoint, eta: usize) -> Result<Vec<Complex64>> {
    let n = sp.multiplicity;
    if eta > sp.m() {
        return Err(Error::invalid(format!(
            "eta = {eta} exceeds m(lambda, T) = {}",
            sp.m()
        )));
    }
    if sp.derivs.len() < 2 * n {
        return Err(Error::invalid(
            "spectral point lacks cached derivatives through order 2n - 1",
        ));
    }
    let dn = sp.derivs[n];
    if dn.norm() < 1e-12 * dn.norm().max(1.0) {
        return Err(Error::DegenerateZero {
            lambda: sp.lambda,
            order: n,
            magnitude: dn.norm(),
        });
    }
    let lead = factorial(n) / dn;
    let mut a = Vec::with_capacity(n);
    a.push(lead * kronecker(0, eta));
    for j in 1..n {
        let mut tail = Complex64::new(0.0, 0.0);
        for (s, a_s) in a.iter().enumerate() {
            let ord = n - s + j;
            tail += a_s * sp.derivs[ord] / factorial(ord);
        }
        a.push(lead * (kronecker(j, eta) / factorial(j) - tail));
    }
    Ok(a)
}

/// `sigma_lambda(T̂) = sum_j |a_j^{lambda,0}|`.
pub fn sigma_value(sp: &SpectralPoint) -> Result<f64> {
    Ok(a_sequence(sp, 0)?.iter().map(|a| a.norm()).sum())
}

/// Compute and store sigma for every point of a spectrum.
pub fn populate_sigma(spectrum: &mut Spectrum) -> Result<()> {
    let sigmas: Vec<Result<f64>> = par_map(&spectrum.points, sigma_value);
    for (p, s) in spectrum.points.iter_mut().zip(sigmas) {
        p.sigma = Some(s?);
    }
    Ok(())
}

/// Radius below which the removable singularity is evaluated by the local
/// Taylor development of `T̂` at `lambda`.
const NEAR_FIELD: f64 = 0.25;

/// The interpolating entire function
/// `a^{lambda,eta}(T̂, z) = sum_j a_j T̂(z) / (z - lambda)^{n-j}`.
pub fn interpolating_entire(
    conv: &Convolver,
    sp: &SpectralPoint,
    eta: usize,
    z: Complex64,
    order: usize,
) -> Result<Complex64> {
    let n = sp.multiplicity;
    let a = a_sequence(sp, eta)?;
    let u = z - sp.lambda;
    if u.norm() < NEAR_FIELD {
        // T̂(z) = sum_p derivs[p]/p! u^p; dividing by u^{n-j} term-wise gives
        // a polynomial whose q-th coefficient is sum_j a_j T_{q+n-j}.
        let taylor: Vec<Complex64> = sp
            .derivs
            .iter()
            .enumerate()
            .map(|(p, d)| d / factorial(p))
            .collect();
        let qmax = taylor.len() - n;
        let mut acc = Complex64::new(0.0, 0.0);
        for q in (0..qmax).rev() {
            let mut coef = Complex64::new(0.0, 0.0);
            for (j, aj) in a.iter().enumerate() {
                coef += aj * taylor[q + n - j];
            }
            acc = acc * u + coef;
        }
        Ok(acc)
    } else {
        let that = conv.fourier_value(z, order);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, aj) in a.iter().enumerate() {
            acc += aj * that / u.powu((n - j) as u32);
        }
        Ok(acc)
    }
}

/// Sampled biorthogonal kernel `T_{lambda,0}` on a uniform grid.
#[derive(Debug, Clone)]
pub struct BiorthogonalKernel {
    pub lambda: Complex64,
    pub grid: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Leading recursion coefficient used in the construction.
    pub a0: Complex64,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Build `T_{lambda,0}` by the antiderivative construction:
/// `FT(i e^{i lambda t} int_{-r}^t T e^{-i lambda s} ds) = T̂(z)/(z - lambda)`,
/// applied once (simple zero) or twice (double zero).
pub fn build_kernel(
    conv: &Convolver,
    sp: &SpectralPoint,
    grid_size: usize,
) -> Result<BiorthogonalKernel> {
    let n = sp.multiplicity;
    if n > 2 {
        return Err(Error::UnsupportedMultiplicity(n));
    }
    if grid_size < 5 {
        return Err(Error::invalid("kernel grid needs at least 5 points"));
    }
    let r = conv.r();
    let lambda = sp.lambda;
    let a = a_sequence(sp, 0)?;
    let grid = linspace(-r, r, grid_size);
    let values = if n == 1 {
        let g0 = quad::cumulative_weighted(conv, lambda, &grid)?;
        grid.iter()
            .zip(&g0)
            .map(|(&t, g)| I * a[0] * (I * lambda * t).exp() * g)
            .collect()
    } else {
        // Dense grid with midpoints so the second antiderivative comes out
        // of exact Simpson pairs.
        let dense = linspace(-r, r, 2 * (grid_size - 1) + 1);
        let g0d = quad::cumulative_weighted(conv, lambda, &dense)?;
        let h = grid[1] - grid[0];
        let mut g1 = Vec::with_capacity(grid_size);
        g1.push(Complex64::new(0.0, 0.0));
        for j in 1..grid_size {
            let inc = (g0d[2 * j - 2] + 4.0 * g0d[2 * j - 1] + g0d[2 * j]) * (h / 6.0);
            g1.push(g1[j - 1] + inc);
        }
        grid.iter()
            .enumerate()
            .map(|(j, &t)| {
                let e = (I * lambda * t).exp();
                a[0] * (-e * g1[j]) + a[1] * (I * e * g0d[2 * j])
            })
            .collect()
    };
    Ok(BiorthogonalKernel {
        lambda,
        grid,
        values,
        a0: a[0],
    })
}

/// One extracted coefficient with its probe spread.
#[derive(Debug, Clone, Copy)]
pub struct CoeffEntry {
    pub c: Complex64,
    pub spread: f64,
}

/// Extracted coefficients keyed by (spectral index, eta).
#[derive(Debug, Clone, Default)]
pub struct CoefficientTable {
    pub entries: BTreeMap<(usize, usize), CoeffEntry>,
}

impl CoefficientTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, index: usize, eta: usize, c: Complex64, spread: f64) {
        self.entries.insert((index, eta), CoeffEntry { c, spread });
    }

    pub fn get(&self, index: usize, eta: usize) -> Option<&CoeffEntry> {
        self.entries.get(&(index, eta))
    }

    /// `max_eta |c_{lambda,eta}|` for one spectral index.
    pub fn max_abs(&self, index: usize) -> f64 {
        self.entries
            .range((index, 0)..(index + 1, 0))
            .map(|(_, e)| e.c.norm())
            .fold(0.0, f64::max)
    }
}

/// Integration nodes and weights over `[-r, r]` with panel counts scaled to
/// the combined oscillation of the kernel and the function.
fn convolution_nodes(r: f64, freq: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = quad::gauss_legendre(16)?;
    let panels = ((freq * r / PI).ceil() as usize + 8).max(8);
    let mut nodes = Vec::with_capacity(panels * 16);
    let mut weights = Vec::with_capacity(panels * 16);
    let dt = 2.0 * r / panels as f64;
    for p in 0..panels {
        let a = -r + p as f64 * dt;
        let mid = a + 0.5 * dt;
        let half = 0.5 * dt;
        for (x, w) in rule.nodes().iter().zip(rule.weights()) {
            nodes.push(mid + half * x);
            weights.push(w * half);
        }
    }
    Ok((nodes, weights))
}

fn extract_one(
    f: &FunctionSpec,
    conv: &Convolver,
    sp: &SpectralPoint,
    probes: &[f64],
) -> Result<Vec<(usize, Complex64, f64)>> {
    let n = sp.multiplicity;
    if n > 2 {
        return Err(Error::UnsupportedMultiplicity(n));
    }
    if probes.len() < n {
        return Err(Error::invalid(format!(
            "need at least {n} probes for multiplicity {n}"
        )));
    }
    let r = conv.r();
    let lambda = sp.lambda;
    let a = a_sequence(sp, 0)?;
    let freq = lambda.norm() + f.max_frequency();
    let (nodes, weights) = convolution_nodes(r, freq)?;
    let g0 = quad::cumulative_weighted(conv, lambda, &nodes)?;

    // Kernel values at the quadrature nodes.
    let kernel: Vec<Complex64> = if n == 1 {
        nodes
            .iter()
            .zip(&g0)
            .map(|(&s, g)| I * a[0] * (I * lambda * s).exp() * g)
            .collect()
    } else {
        // Second antiderivative on a dense uniform grid, interpolated back
        // to the quadrature nodes.
        let dense_n = 4097;
        let dense = linspace(-r, r, dense_n);
        let g0d = quad::cumulative_weighted(conv, lambda, &dense)?;
        let h = dense[1] - dense[0];
        let coarse_n = (dense_n - 1) / 2 + 1;
        let mut g1 = Vec::with_capacity(coarse_n);
        g1.push(Complex64::new(0.0, 0.0));
        for j in 1..coarse_n {
            let inc = (g0d[2 * j - 2] + 4.0 * g0d[2 * j - 1] + g0d[2 * j]) * (2.0 * h / 6.0);
            g1.push(g1[j - 1] + inc);
        }
        let g1i = UniformSamples {
            left: -r,
            right: r,
            values: &g1,
        };
        nodes
            .iter()
            .zip(&g0)
            .map(|(&s, g)| {
                let e = (I * lambda * s).exp();
                Ok(a[0] * (-e * g1i.eval(s)?) + a[1] * (I * e * g))
            })
            .collect::<Result<Vec<_>>>()?
    };

    // (f * T_{lambda,0})(t_p) at every probe.
    let mut conv_vals = Vec::with_capacity(probes.len());
    for &t in probes {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, w), k) in nodes.iter().zip(&weights).zip(&kernel) {
            acc += f.eval(t - s)? * k * *w;
        }
        conv_vals.push(acc);
    }

    if n == 1 {
        let vals: Vec<Complex64> = probes
            .iter()
            .zip(&conv_vals)
            .map(|(&t, v)| v * (-I * lambda * t).exp())
            .collect();
        let c = vals.iter().sum::<Complex64>() / vals.len() as f64;
        let spread = vals.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
        let allowed = 1e-4 * (1.0 + c.norm());
        if spread > allowed {
            return Err(Error::InconsistentProbe {
                lambda,
                spread,
                allowed,
            });
        }
        Ok(vec![(0, c, spread)])
    } else {
        // Solve for (c0, c1) against the basis {e^{i lambda t}, i t e^{i lambda t}}
        // at the first two probes; remaining probes check consistency.
        let basis = |t: f64| {
            let e = (I * lambda * t).exp();
            (e, I * t * e)
        };
        let (b00, b01) = basis(probes[0]);
        let (b10, b11) = basis(probes[1]);
        let det = b00 * b11 - b01 * b10;
        if det.norm() < 1e-14 {
            return Err(Error::invalid(
                "degenerate probe pair for multiplicity-2 extraction",
            ));
        }
        let c0 = (conv_vals[0] * b11 - b01 * conv_vals[1]) / det;
        let c1 = (b00 * conv_vals[1] - conv_vals[0] * b10) / det;
        let cmax = c0.norm().max(c1.norm());
        let mut spread = 0.0f64;
        for (p, &t) in probes.iter().enumerate().skip(2) {
            let (e0, e1) = basis(t);
            spread = spread.max((c0 * e0 + c1 * e1 - conv_vals[p]).norm());
        }
        let allowed = 1e-4 * (1.0 + cmax);
        if spread > allowed {
            return Err(Error::InconsistentProbe {
                lambda,
                spread,
                allowed,
            });
        }
        Ok(vec![(0, c0, spread), (1, c1, spread)])
    }
}

/// Extract `c_{lambda,eta}(T, f)` for every spectral point by convolving f
/// with the biorthogonal kernels at the probe points.
pub fn extract_coefficients(
    f: &FunctionSpec,
    conv: &Convolver,
    spectrum: &Spectrum,
    probes: &[f64],
) -> Result<CoefficientTable> {
    if probes.is_empty() {
        return Err(Error::invalid("need at least one probe"));
    }
    let r = conv.r();
    let hw = f.domain_half_width();
    for &t in probes {
        if t.abs() + r > hw + 1e-9 {
            return Err(Error::Domain(format!(
                "probe {t} needs [t - r, t + r] inside the domain of f (half-width {hw})"
            )));
        }
    }
    let per_point: Vec<Result<Vec<(usize, Complex64, f64)>>> =
        par_map(&spectrum.points, |sp| extract_one(f, conv, sp, probes));
    let mut table = CoefficientTable::new();
    for (sp, res) in spectrum.points.iter().zip(per_point) {
        for (eta, c, spread) in res? {
            table.insert(sp.index, eta, c, spread);
        }
    }
    Ok(table)
}

/// Least-squares slope diagnostic for the coefficient decay estimate.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    pub slope: f64,
    pub max_residual: f64,
    pub points_used: usize,
}

/// Slope of `log(|c_lambda| |lambda|^k / sigma_lambda)` against
/// `log |lambda|` over the largest half of the spectrum.
pub fn decay_report(table: &CoefficientTable, spectrum: &Spectrum, k: usize) -> Result<DecayReport> {
    let n = spectrum.points.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for sp in spectrum.points.iter().skip(n / 2) {
        let c = table.max_abs(sp.index);
        let sigma = sp
            .sigma
            .ok_or_else(|| Error::invalid("sigma not populated; run populate_sigma first"))?;
        if c <= 0.0 || sigma <= 0.0 {
            continue;
        }
        let lam = sp.lambda.norm();
        xs.push(lam.ln());
        ys.push((c * lam.powi(k as i32) / sigma).ln());
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 4 usable points, have {}",
            xs.len()
        )));
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(DecayReport {
        slope,
        max_residual,
        points_used: xs.len(),
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}
