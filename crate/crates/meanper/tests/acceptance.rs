//! End-to-end acceptance gate: twelve checks, each printing a single
//! pass/fail line with its measured quantity. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;

use meanper::coeff::{
    self, a_sequence, extract_coefficients, CoefficientTable, ExpTerm, FunctionSpec,
};
use meanper::cli::run_command;
use meanper::config::parse_config;
use meanper::convolver::Convolver;
use meanper::spectrum::{build_spectrum, predict_zeros, refine_zero, SpectralPoint, Spectrum};
use meanper::synth::{
    self, convergence_functional, lemma_gate, residual, smoothness_budget, theorem_budget,
    ExtensionRequest,
};
use meanper::{tail_verdict, TailVerdict};

fn verdict(n: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {name}: {detail}");
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn criterion_01_closed_form_spectrum() {
    let start = Instant::now();
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let s = build_spectrum(&conv, 50, 1e-12, 64).unwrap();
    let mut worst = 0.0f64;
    for p in &s.points {
        let m = (p.lambda.re / PI).round();
        worst = worst.max((p.lambda - c64(PI * m, 0.0)).norm());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "indicator zeros match the pi lattice",
        s.points.len() == 100 && worst < 1e-9 && secs < 5.0,
        &format!("max error {worst:.3e}, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_bessel_cross_validation() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &alpha in &[0.5, 1.0, 1.5] {
        let conv = Convolver::gegenbauer(alpha, 1.0).unwrap();
        for j in 0..40 {
            let z = 0.1 + (50.0 - 0.1) * j as f64 / 39.0;
            let zc = c64(z, 0.0);
            let quad = conv.fourier_value(zc, 64);
            let closed = conv.fourier_closed_form(zc).unwrap();
            worst = worst.max((quad - closed).norm() / (1.0 + closed.norm()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        2,
        "quadrature transform vs Bessel closed form",
        worst <= 1e-8 && secs < 10.0,
        &format!("max relative defect {worst:.3e}, {secs:.2} s"),
    );
}

#[test]
fn criterion_03_zero_asymptotic_rates() {
    let fixtures: Vec<(String, Convolver)> = vec![
        (
            "gegenbauer alpha=3/2".into(),
            Convolver::gegenbauer(1.5, 1.0).unwrap(),
        ),
        (
            "weighted h=1+t^2".into(),
            Convolver::weighted(0.5, 1.0, vec![1.0, 1.0]).unwrap(),
        ),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (name, conv) in &fixtures {
        let seeds = predict_zeros(conv, 50);
        let mut rates = Vec::new();
        for (i, &seed) in seeds.iter().enumerate() {
            let m = i + 1;
            if m < 5 {
                continue;
            }
            let refined = refine_zero(conv, seed, 1e-12, 60, 64).unwrap();
            rates.push(m as f64 * (refined - seed).norm());
        }
        let max = rates.iter().cloned().fold(0.0, f64::max);
        let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        pass &= max <= 1.2 * min;
        detail.push_str(&format!("{name}: m|seed-refined| in [{min:.3e}, {max:.3e}]; "));
    }
    verdict(3, "seed drift m|seed - refined| stays flat", pass, &detail);
}

#[test]
fn criterion_04_sigma_growth_slopes() {
    let fixtures: Vec<(String, f64, Convolver)> = vec![
        ("gegenbauer 1/2".into(), 0.5, Convolver::gegenbauer(0.5, 1.0).unwrap()),
        ("gegenbauer 1".into(), 1.0, Convolver::gegenbauer(1.0, 1.0).unwrap()),
        ("gegenbauer 3/2".into(), 1.5, Convolver::gegenbauer(1.5, 1.0).unwrap()),
        (
            "weighted 1/2, h=1+t^2".into(),
            0.5,
            Convolver::weighted(0.5, 1.0, vec![1.0, 1.0]).unwrap(),
        ),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (name, alpha, conv) in &fixtures {
        let seeds = predict_zeros(conv, 200);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for m in (50..=200usize).step_by(5) {
            let zeta = refine_zero(conv, seeds[m - 1], 1e-12, 60, 64).unwrap();
            // Simple zero: sigma = |a_0| = 1 / |T'(zeta)|.
            let d1 = conv.fourier_derivative_value(zeta, 1, 64).unwrap();
            xs.push((m as f64).ln());
            ys.push((1.0 / d1.norm()).ln());
        }
        let s = slope(&xs, &ys);
        let target = alpha + 0.5;
        pass &= (s - target).abs() <= 0.1;
        detail.push_str(&format!("{name}: slope {s:.3} (target {target}); "));
    }
    verdict(4, "sigma growth exponent alpha + 1/2", pass, &detail);
}

#[test]
fn criterion_05_biorthogonality() {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let s = build_spectrum(&conv, 20, 1e-12, 64).unwrap();
    let probes = [0.0, 0.4, -0.4];
    let mut worst_diag = 0.0f64;
    let mut worst_off = 0.0f64;
    for j in 0..s.points.len() {
        let f = FunctionSpec::exponential_sum(
            vec![ExpTerm {
                lambda: s.points[j].lambda,
                m: 0,
                c: c64(1.0, 0.0),
            }],
            None,
        )
        .unwrap();
        let table = extract_coefficients(&f, &conv, &s, &probes).unwrap();
        for p in &s.points {
            let c = table.get(p.index, 0).unwrap().c;
            if p.index == s.points[j].index {
                worst_diag = worst_diag.max((c - c64(1.0, 0.0)).norm());
            } else {
                worst_off = worst_off.max(c.norm());
            }
        }
    }
    verdict(
        5,
        "kernel extraction is biorthogonal",
        worst_diag < 1e-7 && worst_off < 1e-7,
        &format!("|c_jj - 1| max {worst_diag:.3e}, off-diagonal max {worst_off:.3e}"),
    );
}

#[test]
fn criterion_06_extension_fidelity() {
    let start = Instant::now();
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let f = FunctionSpec::exponential_sum(
        vec![
            ExpTerm {
                lambda: c64(PI, 0.0),
                m: 0,
                c: c64(0.0, -0.5),
            },
            ExpTerm {
                lambda: c64(-PI, 0.0),
                m: 0,
                c: c64(0.0, 0.5),
            },
        ],
        Some(2.0),
    )
    .unwrap();
    let mut req = ExtensionRequest::new(5.0, 0, 4, 1.0);
    req.cutoff = 16;
    let report = synth::extend(&f, &conv, &req).unwrap();
    let mut sup = 0.0f64;
    for (t, v) in report.grid.iter().zip(&report.samples) {
        sup = sup.max((v - c64((PI * t).sin(), 0.0)).norm());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        6,
        "sin(pi t) extends from [-2,2] to [-5,5]",
        sup < 1e-6 && report.residual_sup < 1e-6 && secs < 30.0,
        &format!(
            "sup error {sup:.3e}, residual {:.3e}, {secs:.2} s",
            report.residual_sup
        ),
    );
}

#[test]
fn criterion_07_multiplicity_two_machinery() {
    let tent = Convolver::tent(1.0).unwrap();
    let s = build_spectrum(&tent, 1, 1e-12, 64).unwrap();
    let sp = s
        .points
        .iter()
        .find(|p| (p.lambda.re - 2.0 * PI).abs() < 1e-6)
        .unwrap();
    let mult_ok = s.points.iter().all(|p| p.multiplicity == 2);

    // Taylor oracle at 2 pi: a^{2pi,0} = (4 pi^2, 4 pi), a^{2pi,1} = (0, 4 pi^2).
    let a0 = a_sequence(sp, 0).unwrap();
    let a1 = a_sequence(sp, 1).unwrap();
    let rec_defect = (a0[0] - c64(4.0 * PI * PI, 0.0))
        .norm()
        .max((a0[1] - c64(4.0 * PI, 0.0)).norm())
        .max(a1[0].norm())
        .max((a1[1] - c64(4.0 * PI * PI, 0.0)).norm());

    // Interpolating entire functions: q-th Taylor coefficient delta_{q,eta}.
    let h = 1e-3;
    let mut interp_defect = 0.0f64;
    for eta in 0..2usize {
        let at = |dz: f64| {
            coeff::interpolating_entire(&tent, sp, eta, sp.lambda + c64(dz, 0.0), 64).unwrap()
        };
        let v0 = at(0.0);
        let d1 = (at(h) - at(-h)) / (2.0 * h);
        let want0 = if eta == 0 { 1.0 } else { 0.0 };
        let want1 = 1.0 - want0;
        interp_defect = interp_defect
            .max((v0 - c64(want0, 0.0)).norm())
            .max((d1 - c64(want1, 0.0)).norm());
    }
    verdict(
        7,
        "tent double-zero machinery",
        mult_ok && rec_defect < 1e-6 && interp_defect < 1e-6,
        &format!(
            "multiplicities 2: {mult_ok}, recursion defect {rec_defect:.3e}, Taylor defect {interp_defect:.3e}"
        ),
    );
}

#[test]
fn criterion_08_budget_arithmetic() {
    let prop_ok = smoothness_budget(5, 0.5) == Some(2)
        && smoothness_budget(2, 0.5).is_none()
        && smoothness_budget(6, 1.5) == Some(2)
        && smoothness_budget(3, 0.5) == Some(0);
    let theo_ok = theorem_budget(10, 1.5) == Some(6)
        && theorem_budget(3, 1.0).is_none()
        && theorem_budget(4, 0.5) == Some(1);
    verdict(
        8,
        "proposition and theorem budget tables",
        prop_ok && theo_ok,
        &format!("proposition table {prop_ok}, theorem table {theo_ok}"),
    );
}

fn power_law_fixture(count: usize, p: i32) -> (Spectrum, CoefficientTable) {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let pts = (1..=count)
        .map(|m| SpectralPoint::synthetic(c64(PI * m as f64, 0.0), 1))
        .collect();
    let s = Spectrum::from_points(pts, conv);
    let mut table = CoefficientTable::new();
    for sp in &s.points {
        let m = (sp.lambda.re / PI).round();
        table.insert(sp.index, 0, c64(m.powi(p), 0.0), 0.0);
    }
    (s, table)
}

#[test]
fn criterion_09_functional_discrimination() {
    let (s4, t4) = power_law_fixture(2000, -4);
    let (_, r4) = convergence_functional(&t4, &s4, 3.0, 1, false).unwrap();
    let (s2, t2) = power_law_fixture(2000, -2);
    let (_, r2) = convergence_functional(&t2, &s2, 3.0, 1, false).unwrap();
    verdict(
        9,
        "tail ratio separates m^-4 from m^-2",
        tail_verdict(r4) == TailVerdict::Converging && tail_verdict(r2) == TailVerdict::Diverging,
        &format!("m^-4 ratio {r4:.3} (<0.9), m^-2 ratio {r2:.3} (>=0.97)"),
    );
}

#[test]
fn criterion_10_lemma_gate() {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let s = build_spectrum(&conv, 8, 1e-12, 64).unwrap();
    let (sup_real, pass_real) = lemma_gate(&s, 0.0, 100.0, 1.0).unwrap();

    // Points placed so Im lambda = ln(2 + |lambda|) exactly.
    let pts = (1..=20usize)
        .map(|m| {
            let l = PI * m as f64;
            let y = (2.0 + l).ln();
            let x = (l * l - y * y).sqrt();
            SpectralPoint::synthetic(c64(x, y), 1)
        })
        .collect();
    let log_s = Spectrum::from_points(pts, conv);
    let (_, fail_wide) = lemma_gate(&log_s, 0.0, 3.0, 1.0).unwrap(); // R - r = 2
    let (_, pass_narrow) = lemma_gate(&log_s, 0.0, 1.5, 1.0).unwrap(); // R - r = 1/2
    verdict(
        10,
        "gate sup arithmetic",
        sup_real == 0.0 && pass_real && !fail_wide && pass_narrow,
        &format!(
            "real spectrum sup {sup_real}, log spectrum fails at R-r=2 ({}) and passes at R-r=0.5 ({})",
            !fail_wide, pass_narrow
        ),
    );
}

#[test]
fn criterion_11_negative_control() {
    let conv = Convolver::gegenbauer(0.5, 1.0).unwrap();
    let s = build_spectrum(&conv, 4, 1e-12, 64).unwrap();
    let grid: Vec<f64> = (0..=400).map(|k| -2.0 + k as f64 / 100.0).collect();
    let values: Vec<Complex64> = grid.iter().map(|&t| c64(t, 0.0)).collect();
    let f = FunctionSpec::sampled(grid, values, 3).unwrap();
    let err = extract_coefficients(&f, &conv, &s, &[0.0, 0.5, -0.5]).unwrap_err();
    let rejected = err.to_string().contains("not mean-periodic");

    let ones = vec![c64(1.0, 0.0); 801];
    let res = residual(&ones, 5.0, &conv, &[0.0, 1.5, -2.5]).unwrap();
    verdict(
        11,
        "non-solutions are detected",
        rejected && (res - 2.0).abs() < 1e-8,
        &format!("f(t)=t rejected: {rejected}; f=1 residual {res} (want 2r = 2)"),
    );
}

#[test]
fn criterion_12_determinism() {
    let config = "\
[convolver]
kind = gegenbauer
alpha = 0.5
r = 1

[function]
variant = exponential_sum
term = 3.141592653589793, 0, 0, 0, -0.5
term = -3.141592653589793, 0, 0, 0, 0.5
half_width = 2

[run]
command = extend
R = 4
k = 4
cutoff = 8
grid_size = 401
";
    let cfg = parse_config(config).unwrap();
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut codes = Vec::new();
    for (threads, dir) in [1usize, 4].iter().zip(&dirs) {
        let code = rayon::ThreadPoolBuilder::new()
            .num_threads(*threads)
            .build()
            .unwrap()
            .install(|| run_command(&cfg, dir.path()).unwrap());
        codes.push(code);
    }
    // Advisory gate warnings (exit 2) are fine; the codes must agree.
    assert_eq!(codes[0], codes[1]);
    let mut identical = true;
    let mut detail = String::new();
    for name in ["extension.csv", "functional.csv", "report.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        let same = a == b;
        identical &= same;
        detail.push_str(&format!("{name}: {}; ", if same { "identical" } else { "DIFFERS" }));
    }
    verdict(12, "byte-identical output across thread counts", identical, &detail);
}
