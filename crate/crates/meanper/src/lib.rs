//! Numerical engine for extending solutions of one-dimensional convolution
//! equations `f * T = 0` by spectral synthesis over the zeros of the
//! convolver's Fourier transform.
//!
//! The pipeline runs bottom-up:
//!
//! * [`quad`] — Gauss–Legendre rules and the endpoint-weighted integrals
//!   every transform relies on;
//! * [`convolver`] — the convolver families and `T̂(z)` with derivatives,
//!   plus Bessel/Gamma special functions for cross-validation;
//! * [`spectrum`] — zero location with multiplicities (asymptotic seeds,
//!   Newton refinement, argument-principle counting);
//! * [`coeff`] — the biorthogonal coefficient machinery: recursion
//!   sequences, sigma weights, kernels, and coefficient extraction;
//! * [`synth`] — series synthesis, convergence gates, smoothness budgets,
//!   and the full extension pipeline;
//! * [`cli`] / [`config`] — the batch front door with deterministic CSV
//!   and JSON artifacts.
//!
//! With the default `parallel` feature the data-parallel inner loops
//! (zero refinement, coefficient extraction, grid synthesis) run on
//! rayon; disable it for a fully sequential build.

// Validation deliberately writes `!(x > y)` so NaN inputs fail the check
// instead of slipping through an inverted comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeff;
pub mod config;
pub mod convolver;
pub mod error;
pub(crate) mod interp;
pub mod quad;
pub mod spectrum;
pub mod synth;

pub use error::{Error, Result};

use serde::Serialize;

/// Verdict attached to a tail ratio of running partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailVerdict {
    Converging,
    Marginal,
    Diverging,
}

impl std::fmt::Display for TailVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TailVerdict::Converging => "converging",
            TailVerdict::Marginal => "marginal",
            TailVerdict::Diverging => "diverging",
        };
        f.write_str(s)
    }
}

/// Ratio of the increment over the last geometric window of a partial-sum
/// list to the increment over the preceding window.  Close to 1 for
/// logarithmically divergent sums, well below 1 for convergent ones.
pub fn tail_ratio(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 4 {
        return 0.0;
    }
    let last = partial_sums[n - 1] - partial_sums[n / 2 - 1];
    let prev = partial_sums[n / 2 - 1] - partial_sums[n / 4 - 1];
    if prev <= 0.0 {
        if last <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        last / prev
    }
}

/// Thresholds fixed by the synthesis module: below 0.9 the tail is
/// treated as converging, at or above 0.97 as diverging.
pub fn tail_verdict(ratio: f64) -> TailVerdict {
    if ratio < 0.9 {
        TailVerdict::Converging
    } else if ratio >= 0.97 {
        TailVerdict::Diverging
    } else {
        TailVerdict::Marginal
    }
}

/// Map `f` over `items`, in parallel when the `parallel` feature is on.
/// Output order always matches input order.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Same as [`par_map`] over an index range.
pub(crate) fn par_map_idx<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
