//! Series synthesis and the extension pipeline: exponential monomials, the
//! `B(R, lambda, q)` growth weights, the gate and convergence functionals,
//! smoothness budgets, sampling of the extension, and residual verification.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::{self, CoefficientTable, FunctionSpec};
use crate::convolver::{Convolver, ConvolverKind};
use crate::error::{Error, Result};
use crate::interp::UniformSamples;
use crate::par_map_idx;
use crate::quad;
use crate::spectrum::{self, Spectrum};
use crate::{tail_ratio, tail_verdict, TailVerdict};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest derivative order `d` accepted by [`synthesize`]; higher orders are
/// not validated against finite differences, so they are refused outright.
pub const MAX_DERIVATIVE: usize = 6;

/// The exponential monomial `e^{z,m}(t) = (it)^m e^{izt}`.
pub fn e_monomial(z: Complex64, m: usize, t: f64) -> Complex64 {
    (I * t).powu(m as u32) * (I * z * t).exp()
}

/// The piecewise growth weight `B(R, lambda, q)`.
pub fn b_weight(big_r: f64, m: usize, q: usize) -> f64 {
    if (big_r - 1.0).abs() < 1e-12 {
        (m + 1) as f64
    } else if big_r > 1.0 {
        big_r.powi(m as i32)
    } else {
        ((q + 1).min(m + 1)) as f64
    }
}

/// Sup of `(|Im lambda| + m) / ln(2 + |lambda|)` over points with
/// `|lambda| > n_cut`, compared against `1/(R - r)`.
pub fn lemma_gate(spectrum: &Spectrum, n_cut: f64, big_r: f64, r: f64) -> Result<(f64, bool)> {
    if !(big_r > r) {
        return Err(Error::invalid(format!(
            "gate needs R > r, got R = {big_r}, r = {r}"
        )));
    }
    if spectrum.points.is_empty() {
        return Err(Error::invalid("gate needs a nonempty spectrum"));
    }
    let mut sup = 0.0f64;
    for p in &spectrum.points {
        let abs = p.lambda.norm();
        if abs <= n_cut {
            continue;
        }
        sup = sup.max((p.lambda.im.abs() + p.m() as f64) / (2.0 + abs).ln());
    }
    Ok((sup, sup < 1.0 / (big_r - r)))
}

/// Running sums of `max_eta |c| * B(R, lambda, q) * (|lambda|+1)^q * e^{R |Im lambda|}`
/// over |lambda|-ascending points, with `sigma_lambda` multiplied in when
/// `use_sigma` is set. Returns the partial sums and their tail ratio.
pub fn convergence_functional(
    table: &CoefficientTable,
    spectrum: &Spectrum,
    big_r: f64,
    q: usize,
    use_sigma: bool,
) -> Result<(Vec<f64>, f64)> {
    if table.entries.is_empty() {
        return Ok((vec![0.0], 0.0));
    }
    let mut sums = Vec::with_capacity(spectrum.points.len());
    let mut acc = 0.0f64;
    for p in &spectrum.points {
        let c = table.max_abs(p.index);
        let abs = p.lambda.norm();
        let mut term = c
            * b_weight(big_r, p.m(), q)
            * (abs + 1.0).powi(q as i32)
            * (big_r * p.lambda.im.abs()).exp();
        if use_sigma {
            let sigma = p
                .sigma
                .ok_or_else(|| Error::invalid("sigma not populated; run populate_sigma first"))?;
            term *= sigma;
        }
        acc += term;
        sums.push(acc);
    }
    let ratio = tail_ratio(&sums);
    Ok((sums, ratio))
}

fn largest_q_below(bound: f64) -> Option<usize> {
    // Largest integer q >= 0 with q strictly below `bound`.
    if bound <= 0.0 {
        return None;
    }
    let q = (bound - 1e-9).floor();
    if q < 0.0 {
        None
    } else {
        Some(q as usize)
    }
}

/// Proposition arithmetic: largest `q >= 0` with `q < k - (alpha + 3/2)`.
pub fn smoothness_budget(k: usize, alpha: f64) -> Option<usize> {
    largest_q_below(k as f64 - (alpha + 1.5))
}

/// Extension-theorem arithmetic: largest `q >= 0` with `q < k - 2 - gamma`.
pub fn theorem_budget(k: usize, gamma: f64) -> Option<usize> {
    largest_q_below(k as f64 - 2.0 - gamma)
}

/// `d`-th derivative of `c (it)^eta e^{i lambda t}` by the product rule.
fn term_derivative(c: Complex64, lambda: Complex64, eta: usize, d: usize, t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0f64;
    for j in 0..=d.min(eta) {
        // falling factorial eta (eta-1) ... (eta-j+1)
        let fall: f64 = (0..j).map(|s| (eta - s) as f64).product();
        acc += binom * fall * I.powu(j as u32) * (I * t).powu((eta - j) as u32)
            * (I * lambda).powu((d - j) as u32);
        binom *= (d - j) as f64 / (j + 1) as f64;
    }
    c * acc * (I * lambda * t).exp()
}

pub fn uniform_grid(big_r: f64, grid_size: usize) -> Vec<f64> {
    (0..grid_size)
        .map(|k| -big_r + 2.0 * big_r * k as f64 / (grid_size - 1) as f64)
        .collect()
}

/// Sample the term-wise `d`-th derivative of the synthesis series
/// `sum c_{lambda,eta} (it)^eta e^{i lambda t}` on a uniform grid over
/// `[-R, R]`. The spectral sum at each point runs in the fixed
/// |lambda|-ascending point order, so reductions are deterministic.
pub fn synthesize(
    table: &CoefficientTable,
    spectrum: &Spectrum,
    big_r: f64,
    grid_size: usize,
    d: usize,
) -> Result<Vec<Complex64>> {
    if grid_size < 2 {
        return Err(Error::invalid("synthesis grid needs at least 2 points"));
    }
    if d > MAX_DERIVATIVE {
        return Err(Error::invalid(format!(
            "derivative order {d} exceeds the supported cap {MAX_DERIVATIVE}"
        )));
    }
    let grid = uniform_grid(big_r, grid_size);
    let values = par_map_idx(grid_size, |k| {
        let t = grid[k];
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &spectrum.points {
            for eta in 0..=p.m() {
                if let Some(e) = table.get(p.index, eta) {
                    acc += term_derivative(e.c, p.lambda, eta, d, t);
                }
            }
        }
        acc
    });
    Ok(values)
}

/// Sup over probes of `|(f_ext * T)(t)|`, with `f_ext` read from the uniform
/// samples on `[-R, R]` by local cubic interpolation.
pub fn residual(
    samples: &[Complex64],
    big_r: f64,
    conv: &Convolver,
    probes: &[f64],
) -> Result<f64> {
    if samples.len() < 4 {
        return Err(Error::invalid("residual needs at least 4 extension samples"));
    }
    let r = conv.r();
    let f = UniformSamples {
        left: -big_r,
        right: big_r,
        values: samples,
    };
    let order = 128usize;
    let mut sup = 0.0f64;
    for &t in probes {
        if t.abs() >= big_r - r {
            return Err(Error::invalid(format!(
                "probe {t} outside the admissible range (-{0}, {0})",
                big_r - r
            )));
        }
        let value = match conv.kind() {
            ConvolverKind::Tent => {
                let rule = quad::gauss_legendre(order)?;
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in [(-r, 0.0), (0.0, r)] {
                    acc += rule.integrate(a, b, |s| {
                        (1.0 - s.abs() / r) * f.eval(t - s).unwrap_or_default()
                    });
                }
                acc
            }
            _ => quad::integrate_weighted_single(
                |s| conv.h_eval(s) * f.eval(t - s).unwrap_or_default(),
                conv.alpha(),
                r,
                order,
            )?,
        };
        sup = sup.max(value.norm());
    }
    Ok(sup)
}

/// Probe points admissible for any function given on half-width `hw`
/// against a convolver of support radius `r`.
pub fn default_probes(hw: f64, r: f64) -> Vec<f64> {
    if hw.is_finite() {
        let d = 0.5 * (hw - r);
        vec![0.0, d, -d]
    } else {
        vec![0.0, 0.5 * r, -0.5 * r]
    }
}

/// Parameters of one extension run.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionRequest {
    /// Target half-width; the extension is sampled on `[-R, R]`.
    pub big_r: f64,
    /// Requested derivative order entering the convergence functional.
    pub q: usize,
    /// Declared smoothness order of the input.
    pub k: usize,
    /// The abstract exponent of the theorem arithmetic.
    pub gamma: f64,
    pub grid_size: usize,
    /// Number of spectral points (per sign) to include.
    pub cutoff: usize,
    pub quad_order: usize,
    /// Probe points for coefficient extraction; defaults derived from the
    /// domain of f when empty.
    pub probes: Vec<f64>,
    /// Lower cut `N` of the gate sup.
    pub lemma_n: f64,
}

impl ExtensionRequest {
    pub fn new(big_r: f64, q: usize, k: usize, gamma: f64) -> Self {
        ExtensionRequest {
            big_r,
            q,
            k,
            gamma,
            grid_size: 801,
            cutoff: 64,
            quad_order: 256,
            probes: Vec::new(),
            lemma_n: 0.0,
        }
    }
}

/// The recorded verdicts and samples of one extension run. Gates are
/// advisory: a failed gate annotates the report, it never aborts the run.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub big_r: f64,
    pub lemma_sup: f64,
    pub lemma_pass: bool,
    pub budget_q: Option<usize>,
    pub theorem_q: Option<usize>,
    /// `|lambda|` per functional term, aligned with the partial sums.
    pub functional_abs_lambda: Vec<f64>,
    pub functional_partial_sums: Vec<f64>,
    pub tail_ratio: f64,
    pub tail_verdict: TailVerdict,
    pub residual_sup: f64,
    pub grid: Vec<f64>,
    pub samples: Vec<Complex64>,
}

/// Full pipeline: spectrum, sigma weights, coefficient extraction, gates,
/// budgets, synthesis at `d = 0`, and residual verification.
pub fn extend(f: &FunctionSpec, conv: &Convolver, req: &ExtensionRequest) -> Result<ExtensionReport> {
    let r = conv.r();
    let hw = f.domain_half_width();
    if hw.is_finite() {
        if !(hw > r) {
            return Err(Error::invalid(format!(
                "f must be given on a half-width r' = {hw} exceeding r = {r}"
            )));
        }
        if !(req.big_r > hw) {
            return Err(Error::invalid(format!(
                "target R = {} must exceed the given half-width {hw}",
                req.big_r
            )));
        }
    }
    if req.grid_size < 2 {
        return Err(Error::invalid("grid_size must be at least 2"));
    }

    let mut spec = spectrum::build_spectrum(conv, req.cutoff, 1e-12, req.quad_order)?;
    coeff::populate_sigma(&mut spec)?;

    let probes: Vec<f64> = if !req.probes.is_empty() {
        req.probes.clone()
    } else {
        default_probes(hw, r)
    };
    let table = coeff::extract_coefficients(f, conv, &spec, &probes)?;

    let (lemma_sup, lemma_pass) = lemma_gate(&spec, req.lemma_n, req.big_r, r)?;
    let (sums, ratio) = convergence_functional(&table, &spec, req.big_r, req.q, true)?;
    let verdict = tail_verdict(ratio);

    let budget_q = if conv.alpha().is_finite() {
        smoothness_budget(req.k, conv.alpha())
    } else {
        None
    };
    let theorem_q = theorem_budget(req.k, req.gamma);

    let samples = synthesize(&table, &spec, req.big_r, req.grid_size, 0)?;
    let grid = uniform_grid(req.big_r, req.grid_size);

    let span = 0.9 * (req.big_r - r);
    let res_probes: Vec<f64> = (-4..=4).map(|j| span * j as f64 / 4.0).collect();
    let residual_sup = residual(&samples, req.big_r, conv, &res_probes)?;

    Ok(ExtensionReport {
        big_r: req.big_r,
        lemma_sup,
        lemma_pass,
        budget_q,
        theorem_q,
        functional_abs_lambda: spec
            .points
            .iter()
            .take(sums.len())
            .map(|p| p.lambda.norm())
            .collect(),
        functional_partial_sums: sums,
        tail_ratio: ratio,
        tail_verdict: verdict,
        residual_sup,
        grid,
        samples,
    })
}
