//! Convolver profiles and their Fourier transforms.
//!
//! Three compactly supported even profiles are implemented:
//!
//! * `Gegenbauer` — `(r^2 - t^2)^(alpha - 1/2)` on `[-r, r]`;
//! * `Weighted` — the same weight times an even polynomial `h(t)`;
//! * `Tent` — `max(0, 1 - |t|/r)`, the multiplicity-2 fixture whose
//!   transform has double zeros at `2 pi m / r`.
//!
//! The transform is `T̂(z) = ⟨T, e^{-izt}⟩`, evaluated by the weighted
//! quadrature of [`crate::quad`]; for the Gegenbauer family the closed
//! Bessel form is available for cross-validation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// Highest transform derivative the quadrature path will compute.
pub const DERIVATIVE_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolverKind {
    Gegenbauer,
    Weighted,
    Tent,
}

impl std::fmt::Display for ConvolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConvolverKind::Gegenbauer => "gegenbauer",
            ConvolverKind::Weighted => "weighted",
            ConvolverKind::Tent => "tent",
        };
        f.write_str(s)
    }
}

/// A compactly supported even convolver profile.
#[derive(Debug, Clone)]
pub struct Convolver {
    kind: ConvolverKind,
    alpha: f64,
    r: f64,
    h_coeffs: Vec<f64>,
}

/// Transform value together with a Richardson-style error estimate.
#[derive(Debug, Clone, Copy)]
pub struct TransformValue {
    pub value: Complex64,
    pub error_estimate: f64,
}

impl Convolver {
    pub fn gegenbauer(alpha: f64, r: f64) -> Result<Self> {
        validate_alpha_r(alpha, r)?;
        Ok(Convolver {
            kind: ConvolverKind::Gegenbauer,
            alpha,
            r,
            h_coeffs: vec![1.0],
        })
    }

    /// `h(t) = sum_j h_coeffs[j] t^{2j}` must be even by construction.
    pub fn weighted(alpha: f64, r: f64, h_coeffs: Vec<f64>) -> Result<Self> {
        validate_alpha_r(alpha, r)?;
        if h_coeffs.is_empty() {
            return Err(Error::invalid("h_coeffs must contain at least one coefficient"));
        }
        Ok(Convolver {
            kind: ConvolverKind::Weighted,
            alpha,
            r,
            h_coeffs,
        })
    }

    pub fn tent(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::invalid("support radius r must be positive"));
        }
        Ok(Convolver {
            kind: ConvolverKind::Tent,
            alpha: f64::NAN,
            r,
            h_coeffs: Vec::new(),
        })
    }

    pub fn kind(&self) -> ConvolverKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn h_coeffs(&self) -> &[f64] {
        &self.h_coeffs
    }

    /// The even polynomial factor; identically 1 for Gegenbauer and Tent.
    pub fn h_eval(&self, t: f64) -> f64 {
        match self.kind {
            ConvolverKind::Weighted => {
                let t2 = t * t;
                let mut acc = 0.0;
                for &c in self.h_coeffs.iter().rev() {
                    acc = acc * t2 + c;
                }
                acc
            }
            _ => 1.0,
        }
    }

    /// Profile value `T(t)`; 0 outside the support.
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() > self.r {
            return 0.0;
        }
        match self.kind {
            ConvolverKind::Tent => (1.0 - t.abs() / self.r).max(0.0),
            _ => {
                let base = self.r * self.r - t * t;
                let w = if self.alpha == 0.5 {
                    1.0
                } else {
                    base.max(0.0).powf(self.alpha - 0.5)
                };
                w * self.h_eval(t)
            }
        }
    }

    /// Quadrature order that resolves the oscillation of `e^{-izt}` over the
    /// support.  Never below the caller's requested order.
    fn effective_order(&self, z: Complex64, order: usize) -> usize {
        let osc = (0.75 * z.re.abs() * self.r).ceil() as usize + 60;
        order.max(osc)
    }

    fn transform_single(&self, z: Complex64, n: usize, order: usize) -> Result<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        match self.kind {
            ConvolverKind::Tent => self.tent_transform(z, n, order),
            _ => quad::integrate_weighted_single(
                |t| {
                    let monomial = (-i * t).powu(n as u32);
                    (-i * z * t).exp() * monomial * self.h_eval(t)
                },
                self.alpha,
                self.r,
                order,
            ),
        }
    }

    /// Piecewise panel integration of the tent profile; the kink at 0 and
    /// the support endpoints are panel boundaries.
    fn tent_transform(&self, z: Complex64, n: usize, order: usize) -> Result<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let rule = quad::gauss_legendre(order.clamp(8, 64))?;
        let panels_per_half =
            ((z.re.abs() * self.r / PI).ceil() as usize).max(order / 16).max(2);
        let mut acc = Complex64::new(0.0, 0.0);
        for (a0, b0) in [(-self.r, 0.0), (0.0, self.r)] {
            let dt = (b0 - a0) / panels_per_half as f64;
            for p in 0..panels_per_half {
                let a = a0 + p as f64 * dt;
                let b = a + dt;
                acc += rule.integrate(a, b, |t| {
                    let monomial = (-i * t).powu(n as u32);
                    (-i * z * t).exp() * monomial * self.eval(t)
                });
            }
        }
        Ok(acc)
    }

    /// `T̂(z)` with a Richardson error estimate from an order-doubled pass.
    pub fn fourier(&self, z: Complex64, order: usize) -> TransformValue {
        let n = self.effective_order(z, order);
        let coarse = self.transform_single(z, 0, n).expect("valid convolver");
        let fine = self.transform_single(z, 0, 2 * n).expect("valid convolver");
        TransformValue {
            value: fine,
            error_estimate: (fine - coarse).norm(),
        }
    }

    /// Fast path without the error estimate (Newton iterations, contours).
    pub fn fourier_value(&self, z: Complex64, order: usize) -> Complex64 {
        let n = self.effective_order(z, order);
        self.transform_single(z, 0, n).expect("valid convolver")
    }

    /// `T̂^{(n)}(z) = int T(t) (-it)^n e^{-izt} dt`.
    pub fn fourier_derivative(&self, z: Complex64, n: usize, order: usize) -> Result<TransformValue> {
        if n > DERIVATIVE_CAP {
            return Err(Error::invalid(format!(
                "derivative order {n} exceeds the cap {DERIVATIVE_CAP}"
            )));
        }
        let m = self.effective_order(z, order);
        let coarse = self.transform_single(z, n, m)?;
        let fine = self.transform_single(z, n, 2 * m)?;
        Ok(TransformValue {
            value: fine,
            error_estimate: (fine - coarse).norm(),
        })
    }

    pub fn fourier_derivative_value(&self, z: Complex64, n: usize, order: usize) -> Result<Complex64> {
        if n > DERIVATIVE_CAP {
            return Err(Error::invalid(format!(
                "derivative order {n} exceeds the cap {DERIVATIVE_CAP}"
            )));
        }
        let m = self.effective_order(z, order);
        self.transform_single(z, n, m)
    }

    /// Closed Bessel form `sqrt(pi) Gamma(alpha + 1/2) (2r)^alpha J_alpha(rz) / z^alpha`
    /// for the Gegenbauer family.  Supported on the positive real axis,
    /// where the principal branch of `z^alpha` is unambiguous.
    pub fn fourier_closed_form(&self, z: Complex64) -> Result<Complex64> {
        if self.kind != ConvolverKind::Gegenbauer {
            return Err(Error::invalid(
                "closed Bessel form only exists for the Gegenbauer kind",
            ));
        }
        if z.norm() == 0.0 {
            return Err(Error::invalid(
                "closed form is singular at z = 0; use the quadrature transform",
            ));
        }
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) || z.re <= 0.0 {
            return Err(Error::invalid(
                "closed form is evaluated on the positive real axis only",
            ));
        }
        let x = z.re;
        let c = PI.sqrt() * gamma_fn(self.alpha + 0.5)? * (2.0 * self.r).powf(self.alpha);
        let value = c * bessel_j(self.alpha, self.r * x)? / x.powf(self.alpha);
        Ok(Complex64::new(value, 0.0))
    }
}

fn validate_alpha_r(alpha: f64, r: f64) -> Result<()> {
    if !(alpha > -0.5) {
        return Err(Error::invalid(format!("alpha = {alpha}; need alpha > -1/2")));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("support radius r must be positive"));
    }
    Ok(())
}

/// Bessel function `J_nu(x)` for `nu >= 0`, `x > 0`.
///
/// Ascending power series for `x <= nu + 12`, Hankel large-argument
/// asymptotics (optimally truncated) beyond.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::invalid("bessel_j requires nu >= 0"));
    }
    if !(x > 0.0) {
        return Err(Error::invalid("bessel_j requires x > 0"));
    }
    if nu > 150.0 {
        return Err(Error::Range(format!("bessel_j order {nu} too large")));
    }
    if x <= nu + 12.0 {
        bessel_series(nu, x)
    } else {
        Ok(bessel_hankel(nu, x))
    }
}

fn bessel_series(nu: f64, x: f64) -> Result<f64> {
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma_fn(nu + 1.0)?;
    let q = -half * half;
    let mut sum = term;
    for k in 1..400 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

fn bessel_hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let chi = x - (0.5 * nu + 0.25) * PI;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut u = 1.0; // a_k(nu) / x^k
    let mut prev = f64::INFINITY;
    for j in 0..60usize {
        if j > 0 {
            let jf = j as f64;
            let odd = 2.0 * jf - 1.0;
            u *= (mu - odd * odd) / (8.0 * jf * x);
        }
        if u.abs() >= prev {
            break; // asymptotic series started diverging
        }
        prev = u.abs();
        if j % 2 == 0 {
            let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
            p += sign * u;
        } else {
            let sign = if ((j - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            q += sign * u;
        }
        if u.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * x)).sqrt() * (chi.cos() * p - chi.sin() * q)
}

/// Derivative `J'_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x)`; stays within
/// non-negative orders.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    Ok((nu / x) * bessel_j(nu, x)? - bessel_j(nu + 1.0, x)?)
}

// Lanczos g = 7, 9-term coefficient set.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)] // published coefficient set, kept verbatim
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Gamma(x)` for `x > 0` by the Lanczos approximation (relative error
/// well below 1e-12 over the fixture range).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::invalid("gamma_fn requires x > 0 (poles unsupported)"));
    }
    if x < 0.5 {
        // Reflection keeps the core approximation in its accurate range.
        return Ok(PI / ((PI * x).sin() * gamma_fn(1.0 - x)?));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc)
}
