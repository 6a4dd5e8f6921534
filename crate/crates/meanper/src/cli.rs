//! Batch front door: argument parsing, command dispatch, and the CSV/JSON
//! report writers. All numeric output uses the shortest round-trip decimal
//! representation so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::coeff::{self, CoefficientTable};
use crate::config::{parse_config, Command, RunConfig, VerifySuite};
use crate::convolver::{bessel_j, Convolver};
use crate::error::{Error, Result};
use crate::spectrum::{self, Spectrum};
use crate::synth::{self, ExtensionReport, ExtensionRequest};
use crate::TailVerdict;

#[derive(Debug, Parser)]
#[command(
    name = "meanper",
    about = "Spectral-synthesis engine for one-dimensional convolution equations f*T = 0",
    version
)]
pub struct Cli {
    /// Path to the run configuration (`key = value` sections).
    pub config: PathBuf,

    /// Output directory (overrides MEANPER_OUT and the config key).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Worker thread bound; results are identical for any value.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Override the [run] command.
    #[arg(long)]
    pub command: Option<String>,

    /// Override the verify suite.
    #[arg(long)]
    pub suite: Option<String>,

    /// Override the target half-width R.
    #[arg(long = "R")]
    pub big_r: Option<f64>,

    #[arg(long)]
    pub q: Option<usize>,

    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long)]
    pub gamma: Option<f64>,

    #[arg(long)]
    pub cutoff: Option<usize>,

    #[arg(long)]
    pub grid_size: Option<usize>,

    #[arg(long)]
    pub quad_order: Option<usize>,
}

fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) -> Result<()> {
    if let Some(cmd) = &cli.command {
        cfg.command = match cmd.as_str() {
            "spectrum" => Command::Spectrum,
            "coeffs" => Command::Coeffs,
            "extend" => Command::Extend,
            "verify" => Command::Verify,
            "bounds" => Command::Bounds,
            other => return Err(Error::invalid(format!("unknown command `{other}`"))),
        };
    }
    if let Some(s) = &cli.suite {
        cfg.verify_suite = Some(match s.as_str() {
            "bessel" => VerifySuite::Bessel,
            "tent" => VerifySuite::Tent,
            "weighted" => VerifySuite::Weighted,
            other => return Err(Error::invalid(format!("unknown verify suite `{other}`"))),
        });
    }
    if cfg.command == Command::Verify && cfg.verify_suite.is_none() {
        return Err(Error::invalid("verify needs --suite bessel|tent|weighted"));
    }
    if let Some(v) = cli.big_r {
        cfg.big_r = v;
    }
    if let Some(v) = cli.q {
        cfg.q = v;
    }
    if let Some(v) = cli.k {
        cfg.k = v;
    }
    if let Some(v) = cli.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = cli.cutoff {
        cfg.cutoff = v;
    }
    if let Some(v) = cli.grid_size {
        cfg.grid_size = v;
    }
    if let Some(v) = cli.quad_order {
        cfg.quad_order = v;
    }
    Ok(())
}

/// Resolve the output directory: flag > MEANPER_OUT > config key.
fn resolve_out_dir(cfg: &RunConfig, cli: &Cli) -> PathBuf {
    if let Some(d) = &cli.out_dir {
        return d.clone();
    }
    if let Ok(d) = std::env::var("MEANPER_OUT") {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    PathBuf::from(&cfg.out_dir)
}

/// Entry point used by the binary: returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config `{}`: {e}", cli.config.display());
            return 1;
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, cli) {
        eprintln!("error: {e}");
        return 1;
    }
    let out_dir = resolve_out_dir(&cfg, cli);

    let exec = || match run_command(&cfg, &out_dir) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };

    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        return match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(exec),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                1
            }
        };
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;
    exec()
}

/// Dispatch one validated configuration, writing artifacts under `out_dir`.
/// Exit code 0 on success, 2 when an advisory gate fails.
pub fn run_command(cfg: &RunConfig, out_dir: &Path) -> Result<i32> {
    std::fs::create_dir_all(out_dir)?;
    match cfg.command {
        Command::Spectrum => {
            let mut s = spectrum::build_spectrum(
                &cfg.convolver,
                cfg.cutoff,
                1e-12,
                cfg.quad_order,
            )?;
            coeff::populate_sigma(&mut s)?;
            write_spectrum_csv(&s, &out_dir.join("spectrum.csv"))?;
            Ok(0)
        }
        Command::Coeffs => {
            let f = cfg
                .function
                .as_ref()
                .ok_or_else(|| Error::invalid("coeffs needs a [function] block"))?;
            let mut s = spectrum::build_spectrum(
                &cfg.convolver,
                cfg.cutoff,
                1e-12,
                cfg.quad_order,
            )?;
            coeff::populate_sigma(&mut s)?;
            let probes =
                synth::default_probes(f.domain_half_width(), cfg.convolver.r());
            let table = coeff::extract_coefficients(f, &cfg.convolver, &s, &probes)?;
            write_spectrum_csv(&s, &out_dir.join("spectrum.csv"))?;
            write_coeffs_csv(&table, &s, &out_dir.join("coeffs.csv"))?;
            Ok(0)
        }
        Command::Extend => {
            let f = cfg
                .function
                .as_ref()
                .ok_or_else(|| Error::invalid("extend needs a [function] block"))?;
            let mut req = ExtensionRequest::new(cfg.big_r, cfg.q, cfg.k, cfg.gamma);
            req.cutoff = cfg.cutoff;
            req.grid_size = cfg.grid_size;
            req.quad_order = cfg.quad_order;
            let report = synth::extend(f, &cfg.convolver, &req)?;
            write_extension_csv(&report, &out_dir.join("extension.csv"))?;
            write_functional_csv(&report, &out_dir.join("functional.csv"))?;
            std::fs::write(
                out_dir.join("report.json"),
                serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::invalid(format!("report serialization: {e}")))?,
            )?;
            println!(
                "extend: lemma_sup {} (pass {}), tail {} ({}), residual {}",
                report.lemma_sup,
                report.lemma_pass,
                report.tail_ratio,
                report.tail_verdict,
                report.residual_sup
            );
            let gate_warn =
                !report.lemma_pass || report.tail_verdict == TailVerdict::Diverging;
            Ok(if gate_warn { 2 } else { 0 })
        }
        Command::Verify => {
            let suite = cfg
                .verify_suite
                .ok_or_else(|| Error::invalid("verify needs a suite"))?;
            let ok = match suite {
                VerifySuite::Bessel => verify_bessel(cfg)?,
                VerifySuite::Tent => verify_tent(cfg)?,
                VerifySuite::Weighted => verify_weighted(cfg)?,
            };
            Ok(if ok { 0 } else { 1 })
        }
        Command::Bounds => {
            let alpha = cfg.convolver.alpha();
            let mut csv = String::from("# k,proposition_q,theorem_q\n");
            println!("budgets for alpha = {alpha}, gamma = {}", cfg.gamma);
            for k in 0..=10usize {
                let prop = synth::smoothness_budget(k, alpha);
                let theo = synth::theorem_budget(k, cfg.gamma);
                let fmt = |o: Option<usize>| {
                    o.map(|q| q.to_string()).unwrap_or_else(|| "none".into())
                };
                println!("  k = {k:2}: proposition q = {}, theorem q = {}", fmt(prop), fmt(theo));
                writeln!(csv, "{k},{},{}", fmt(prop), fmt(theo)).unwrap();
            }
            std::fs::write(out_dir.join("bounds.csv"), csv)?;
            Ok(0)
        }
    }
}

fn check(name: &str, pass: bool, detail: &str) -> bool {
    if pass {
        println!("ok - {name}");
    } else {
        println!("FAIL - {name}: {detail}");
    }
    pass
}

fn verify_bessel(cfg: &RunConfig) -> Result<bool> {
    let mut all = true;
    for &alpha in &[0.5, 1.0, 1.5] {
        let conv = Convolver::gegenbauer(alpha, 1.0)?;
        let mut worst = 0.0f64;
        for j in 0..15 {
            let z = 0.1 + 49.9 * j as f64 / 14.0;
            let zc = num_complex::Complex64::new(z, 0.0);
            let quad = conv.fourier_value(zc, cfg.quad_order);
            let closed = conv.fourier_closed_form(zc)?;
            worst = worst.max((quad - closed).norm() / (1.0 + closed.norm()));
        }
        all &= check(
            &format!("quadrature vs Bessel closed form, alpha = {alpha}"),
            worst <= 1e-8,
            &format!("relative defect {worst:.3e}"),
        );
    }
    // Independent sinc oracle at alpha = 1/2.
    let conv = Convolver::gegenbauer(0.5, 1.0)?;
    let mut worst = 0.0f64;
    for j in 1..=20 {
        let z = 0.5 * j as f64;
        let zc = num_complex::Complex64::new(z, 0.0);
        let exact = 2.0 * z.sin() / z;
        worst = worst.max((conv.fourier_value(zc, cfg.quad_order).re - exact).abs());
    }
    all &= check("indicator transform vs 2 sin z / z", worst <= 1e-9, &format!("defect {worst:.3e}"));
    // First Bessel zero j_{1,1}.
    let j11 = 3.8317059702075125f64;
    let v = bessel_j(1.0, j11)?;
    all &= check("J_1 vanishes at its first zero", v.abs() < 1e-9, &format!("J_1 {v:.3e}"));
    Ok(all)
}

fn verify_tent(cfg: &RunConfig) -> Result<bool> {
    use std::f64::consts::PI;
    let tent = Convolver::tent(1.0)?;
    let mut all = true;
    let two_pi = num_complex::Complex64::new(2.0 * PI, 0.0);
    let at = tent.fourier_value(two_pi, cfg.quad_order);
    all &= check("transform vanishes at 2 pi", at.norm() < 1e-10, &format!("|T| {:.3e}", at.norm()));
    let d2 = tent.fourier_derivative_value(two_pi, 2, cfg.quad_order)?;
    let oracle = 1.0 / (2.0 * PI * PI);
    all &= check(
        "second derivative at the double zero",
        (d2.re - oracle).abs() < 1e-8 && d2.im.abs() < 1e-8,
        &format!("got {d2}, oracle {oracle}"),
    );
    let s = spectrum::build_spectrum(&tent, 3, 1e-12, cfg.quad_order)?;
    all &= check(
        "every detected zero has multiplicity 2",
        s.points.iter().all(|p| p.multiplicity == 2),
        "mixed multiplicities",
    );
    let plus = s
        .points
        .iter()
        .find(|p| (p.lambda.re - 2.0 * PI).abs() < 1e-6)
        .ok_or_else(|| Error::invalid("zero near 2 pi not found"))?;
    let a = coeff::a_sequence(plus, 0)?;
    let defect = (a[0].re - 4.0 * PI * PI).abs() + (a[1].re - 4.0 * PI).abs();
    all &= check(
        "recursion coefficients at 2 pi",
        defect < 1e-4,
        &format!("defect {defect:.3e}"),
    );
    Ok(all)
}

fn verify_weighted(cfg: &RunConfig) -> Result<bool> {
    let conv = Convolver::weighted(0.5, 1.0, vec![1.0, 1.0])?;
    let mut all = true;
    let seeds = spectrum::predict_zeros(&conv, 30);
    let mut rates = Vec::new();
    for (m, &seed) in seeds.iter().enumerate().skip(4) {
        let refined = spectrum::refine_zero(&conv, seed, 1e-12, 60, cfg.quad_order)?;
        rates.push((m + 1) as f64 * (refined - seed).norm());
    }
    let max = rates.iter().cloned().fold(0.0, f64::max);
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    all &= check(
        "zero predictor drift m |seed - refined| stays bounded",
        max < 1.3 * min.max(1e-12) || max < 1e-9,
        &format!("max {max:.3e}, min {min:.3e}"),
    );
    let s = spectrum::build_spectrum(&conv, 8, 1e-12, cfg.quad_order)?;
    let worst = s
        .points
        .iter()
        .map(|p| conv.fourier_value(p.lambda, cfg.quad_order).norm())
        .fold(0.0, f64::max);
    all &= check(
        "refined zeros annihilate the transform",
        worst < 1e-8,
        &format!("max |T| {worst:.3e}"),
    );
    Ok(all)
}

fn write_spectrum_csv(s: &Spectrum, path: &Path) -> Result<()> {
    let mut out = String::from("# index,re_lambda,im_lambda,multiplicity,sigma\n");
    for p in &s.points {
        let sigma = p
            .sigma
            .map(|v| v.to_string())
            .unwrap_or_else(|| "nan".into());
        writeln!(
            out,
            "{},{},{},{},{}",
            p.index, p.lambda.re, p.lambda.im, p.multiplicity, sigma
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_coeffs_csv(table: &CoefficientTable, s: &Spectrum, path: &Path) -> Result<()> {
    let mut out = String::from("# index,re_lambda,im_lambda,eta,re_c,im_c,spread\n");
    for ((index, eta), e) in &table.entries {
        let p = &s.points[*index];
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            index, p.lambda.re, p.lambda.im, eta, e.c.re, e.c.im, e.spread
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_extension_csv(report: &ExtensionReport, path: &Path) -> Result<()> {
    let mut out = String::from("# t,re_f,im_f\n");
    for (t, v) in report.grid.iter().zip(&report.samples) {
        writeln!(out, "{},{},{}", t, v.re, v.im).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_functional_csv(report: &ExtensionReport, path: &Path) -> Result<()> {
    let mut out = String::from("# index,abs_lambda,term,partial_sum\n");
    let mut prev = 0.0;
    for (i, (lam, s)) in report
        .functional_abs_lambda
        .iter()
        .zip(&report.functional_partial_sums)
        .enumerate()
    {
        writeln!(out, "{},{},{},{}", i, lam, s - prev, s).unwrap();
        prev = *s;
    }
    std::fs::write(path, out)?;
    Ok(())
}
