//! Randomized structural properties: quadrature exactness, transform
//! symmetries, spectrum closure, and reality of synthesized series.

use num_complex::Complex64;
use proptest::prelude::*;

use meanper::coeff::CoefficientTable;
use meanper::convolver::Convolver;
use meanper::quad::gauss_legendre;
use meanper::spectrum::{build_spectrum, SpectralPoint, Spectrum};
use meanper::synth::synthesize;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // An order-n Gauss-Legendre rule integrates monomials up to degree
    // 2n - 1 exactly.
    #[test]
    fn gauss_legendre_is_exact_on_polynomials(order in 2usize..12, degree in 0usize..8) {
        let degree = degree.min(2 * order - 1);
        let rule = gauss_legendre(order).unwrap();
        let value = rule.integrate_real(-1.0, 1.0, |t| t.powi(degree as i32));
        let exact = if degree % 2 == 1 {
            0.0
        } else {
            2.0 / (degree as f64 + 1.0)
        };
        prop_assert!((value - exact).abs() < 1e-12);
    }

    // Even real profiles have even transforms that are real on the real axis.
    #[test]
    fn transform_is_even_and_real_on_axis(x in 0.3f64..20.0, alpha in 0.0f64..2.0) {
        let conv = Convolver::gegenbauer(0.5 + alpha, 1.0).unwrap();
        let plus = conv.fourier_value(c64(x, 0.0), 64);
        let minus = conv.fourier_value(c64(-x, 0.0), 64);
        prop_assert!((plus - minus).norm() < 1e-10 * (1.0 + plus.norm()));
        prop_assert!(plus.im.abs() < 1e-10 * (1.0 + plus.norm()));
    }

    // Conjugate-symmetric coefficient tables synthesize real samples.
    #[test]
    fn conjugate_tables_give_real_series(re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
        let s = build_spectrum(&conv, 2, 1e-12, 64).unwrap();
        let mut table = CoefficientTable::new();
        for p in &s.points {
            let c = if p.lambda.re > 0.0 { c64(re, im) } else { c64(re, -im) };
            table.insert(p.index, 0, c, 0.0);
        }
        let vals = synthesize(&table, &s, 3.0, 101, 0).unwrap();
        let max_re = vals.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let max_im = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        prop_assert!(max_im <= 1e-8 * max_re.max(1e-12));
    }

    // Spectra of even profiles are closed under negation.
    #[test]
    fn spectrum_negation_closure(count in 1usize..6) {
        let conv = Convolver::gegenbauer(1.0, 1.0).unwrap();
        let s = build_spectrum(&conv, count, 1e-12, 64).unwrap();
        for p in &s.points {
            let has_partner = s
                .points
                .iter()
                .any(|q| (q.lambda + p.lambda).norm() < 1e-8);
            prop_assert!(has_partner);
        }
    }

    // Synthetic spectra keep their |lambda|-ascending order after indexing.
    #[test]
    fn from_points_sorts_ascending(count in 2usize..30) {
        let pts = (1..=count)
            .rev()
            .map(|m| SpectralPoint::synthetic(c64(m as f64, 0.0), 1))
            .collect();
        let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
        let s = Spectrum::from_points(pts, conv);
        for w in s.points.windows(2) {
            prop_assert!(w[0].lambda.norm() <= w[1].lambda.norm() + 1e-12);
        }
        for (i, p) in s.points.iter().enumerate() {
            prop_assert_eq!(p.index, i);
        }
    }
}
