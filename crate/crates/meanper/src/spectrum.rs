//! Location of the zero set of `T̂` with multiplicities.
//!
//! Seeds come from the asymptotic zero formulas of the convolver families,
//! Newton refinement runs in complex arithmetic, and multiplicities are
//! certified by the argument principle on small circles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::convolver::{Convolver, ConvolverKind, DERIVATIVE_CAP};
use crate::error::{Error, Result};
use crate::{par_map, tail_ratio, tail_verdict, TailVerdict};

/// A zero of `T̂` with its cached local data.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    /// Multiplicity `n_lambda >= 1`.
    pub multiplicity: usize,
    /// Cached `T̂^{(j)}(lambda)` for `j = 0..=DERIVATIVE_CAP`.
    /// Empty for synthetic points used in gate tests.
    pub derivs: Vec<Complex64>,
    /// `sigma_lambda(T̂)`; filled by the coefficient module.
    pub sigma: Option<f64>,
    /// Ordinal in `|lambda|`-ascending order (`+` before `-`).
    pub index: usize,
}

impl SpectralPoint {
    /// `m(lambda, T) = n_lambda - 1`.
    pub fn m(&self) -> usize {
        self.multiplicity - 1
    }

    /// A point with no cached transform data, for gate diagnostics on
    /// constructed spectra.
    pub fn synthetic(lambda: Complex64, multiplicity: usize) -> Self {
        SpectralPoint {
            lambda,
            multiplicity,
            derivs: Vec::new(),
            sigma: None,
            index: 0,
        }
    }
}

/// The ordered zero set of one convolver's transform.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub points: Vec<SpectralPoint>,
    pub convolver: Convolver,
    pub count_requested: usize,
}

impl Spectrum {
    /// Assemble a spectrum from explicit points (sorted and re-indexed).
    pub fn from_points(mut points: Vec<SpectralPoint>, convolver: Convolver) -> Self {
        sort_points(&mut points);
        let count_requested = points.len() / 2;
        Spectrum {
            points,
            convolver,
            count_requested,
        }
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.lambda.norm())
            .fold(0.0, f64::max)
    }
}

fn sort_points(points: &mut [SpectralPoint]) {
    points.sort_by(|a, b| {
        let ka = (a.lambda.norm(), -a.lambda.re.signum(), -a.lambda.im.signum());
        let kb = (b.lambda.norm(), -b.lambda.re.signum(), -b.lambda.im.signum());
        ka.partial_cmp(&kb).unwrap()
    });
    for (i, p) in points.iter_mut().enumerate() {
        p.index = i;
    }
}

/// Asymptotic seeds for the positive half of the spectrum.
///
/// Gegenbauer: `pi (m + (2 alpha - 1)/4) / r`, `m = 1..count` (zeros of
/// `J_alpha(rz)`).  Weighted: `pi (3/2 + alpha + 2n) / (2r)`, `n = 0..count-1`.
/// Tent: `2 pi m / r`.
pub fn predict_zeros(conv: &Convolver, count: usize) -> Vec<Complex64> {
    let r = conv.r();
    (0..count)
        .map(|k| {
            let x = match conv.kind() {
                ConvolverKind::Gegenbauer => {
                    let m = (k + 1) as f64;
                    PI * (m + (2.0 * conv.alpha() - 1.0) / 4.0) / r
                }
                ConvolverKind::Weighted => {
                    let n = k as f64;
                    PI * (1.5 + conv.alpha() + 2.0 * n) / (2.0 * r)
                }
                ConvolverKind::Tent => 2.0 * PI * (k + 1) as f64 / r,
            };
            Complex64::new(x, 0.0)
        })
        .collect()
}

/// Newton refinement of one seed, damped when the residual grows.
pub fn refine_zero(
    conv: &Convolver,
    seed: Complex64,
    tol: f64,
    max_iter: usize,
    order: usize,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("refine_zero needs tol > 0"));
    }
    let mut z = seed;
    let mut f = conv.fourier_value(z, order);
    for _ in 0..max_iter {
        let fp = conv.fourier_derivative_value(z, 1, order)?;
        let scale = fp.norm().max(1.0);
        if f.norm() <= tol * scale {
            return Ok(z);
        }
        let mut step = f / fp;
        let mut z_new = z - step;
        let mut f_new = conv.fourier_value(z_new, order);
        let mut halvings = 0;
        while f_new.norm() > f.norm() && halvings < 8 {
            step *= 0.5;
            z_new = z - step;
            f_new = conv.fourier_value(z_new, order);
            halvings += 1;
        }
        let done = step.norm() < tol * (1.0 + z.norm());
        z = z_new;
        f = f_new;
        if done && f.norm() <= tol.sqrt() {
            return Ok(z);
        }
    }
    let fp = conv.fourier_derivative_value(z, 1, order)?;
    if f.norm() <= tol * fp.norm().max(1.0) {
        return Ok(z);
    }
    Err(Error::NoConvergence {
        seed,
        last: z,
        residual: f.norm(),
        iterations: max_iter,
    })
}

/// Winding number of `T̂` around the circle `|z - lambda| = radius`,
/// i.e. the number of enclosed zeros counted with multiplicity, by the
/// trapezoid rule on the argument-principle integral.
pub fn multiplicity(
    conv: &Convolver,
    lambda: Complex64,
    radius: f64,
    nodes: usize,
    order: usize,
) -> Result<usize> {
    if !(radius > 0.0) || nodes < 8 {
        return Err(Error::invalid("multiplicity needs radius > 0 and nodes >= 8"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let theta = 2.0 * PI * k as f64 / nodes as f64;
        let dir = Complex64::new(theta.cos(), theta.sin());
        let z = lambda + radius * dir;
        let f = conv.fourier_value(z, order);
        let fp = conv.fourier_derivative_value(z, 1, order)?;
        acc += fp / f * dir;
    }
    // (1/2 pi i) contour integral reduces to the mean of (T'/T) rho e^{i theta}.
    let winding = acc * radius / nodes as f64;
    let rounded = winding.re.round();
    let defect = (winding - Complex64::new(rounded, 0.0)).norm();
    if defect >= 0.1 || rounded < 0.0 {
        return Err(Error::AmbiguousCount {
            center: lambda,
            value: winding.re,
            defect,
        });
    }
    Ok(rounded as usize)
}

/// Contour sampling count used by `build_spectrum`.
pub const CONTOUR_NODES: usize = 512;

/// Build the spectrum: seed, refine, deduplicate, certify multiplicity,
/// cache transform derivatives, mirror to `-lambda`, sort.
pub fn build_spectrum(conv: &Convolver, count: usize, tol: f64, order: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::invalid("build_spectrum needs count >= 1"));
    }
    let seeds = predict_zeros(conv, count);
    let refined: Vec<Result<Complex64>> =
        par_map(&seeds, |s| refine_zero(conv, *s, tol, 60, order));
    let mut zeros = Vec::with_capacity(count);
    for z in refined {
        zeros.push(z?);
    }
    zeros.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());

    // Absolute dedup; fixture zero spacing is at least pi/(2r).
    let mut unique: Vec<Complex64> = Vec::with_capacity(zeros.len());
    for z in zeros {
        if unique.last().is_none_or(|u| (z - u).norm() > 1e-6) {
            unique.push(z);
        }
    }

    // Half distance to the nearest neighbour bounds the contour radius.
    let radii: Vec<f64> = unique
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let mut d = f64::INFINITY;
            if i > 0 {
                d = d.min((z - unique[i - 1]).norm());
            }
            if i + 1 < unique.len() {
                d = d.min((unique[i + 1] - z).norm());
            }
            (0.5 * d).min(0.5)
        })
        .collect();

    let built: Vec<Result<SpectralPoint>> = par_map_indexed(&unique, |i, z| {
        let mult = multiplicity(conv, *z, radii[i], CONTOUR_NODES, order)?;
        if mult == 0 {
            return Err(Error::AmbiguousCount {
                center: *z,
                value: 0.0,
                defect: 1.0,
            });
        }
        let mut derivs = Vec::with_capacity(DERIVATIVE_CAP + 1);
        for j in 0..=DERIVATIVE_CAP {
            derivs.push(conv.fourier_derivative_value(*z, j, order)?);
        }
        Ok(SpectralPoint {
            lambda: *z,
            multiplicity: mult,
            derivs,
            sigma: None,
            index: 0,
        })
    });

    let mut points = Vec::with_capacity(2 * unique.len());
    for p in built {
        let p = p?;
        // Mirror: for even real convolvers T̂ is even, so
        // T̂^{(j)}(-lambda) = (-1)^j T̂^{(j)}(lambda).
        let mirrored = SpectralPoint {
            lambda: -p.lambda,
            multiplicity: p.multiplicity,
            derivs: p
                .derivs
                .iter()
                .enumerate()
                .map(|(j, d)| if j % 2 == 0 { *d } else { -*d })
                .collect(),
            sigma: None,
            index: 0,
        };
        points.push(p);
        points.push(mirrored);
    }
    sort_points(&mut points);
    Ok(Spectrum {
        points,
        convolver: conv.clone(),
        count_requested: count,
    })
}

fn par_map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    crate::par_map_idx(items.len(), |i| f(i, &items[i]))
}

/// Running partial sums of the density series `sum n_lambda / |lambda|^(1+eps)`
/// with a tail-ratio convergence verdict.
pub fn zero_density_diagnostic(
    spectrum: &Spectrum,
    epsilon: f64,
) -> Result<(Vec<f64>, f64, TailVerdict)> {
    if spectrum.points.is_empty() {
        return Err(Error::InsufficientData("empty spectrum".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("zero_density_diagnostic needs epsilon > 0"));
    }
    let mut sums = Vec::with_capacity(spectrum.points.len());
    let mut acc = 0.0;
    for p in &spectrum.points {
        acc += p.multiplicity as f64 / p.lambda.norm().powf(1.0 + epsilon);
        sums.push(acc);
    }
    let ratio = tail_ratio(&sums);
    Ok((sums, ratio, tail_verdict(ratio)))
}
