//! Strict `key = value` run configuration with `[convolver]`, `[function]`,
//! and `[run]` sections. Unknown keys are rejected; every diagnostic names
//! the offending line.

use num_complex::Complex64;

use crate::coeff::{ExpTerm, FunctionSpec};
use crate::convolver::Convolver;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Coeffs,
    Extend,
    Verify,
    Bounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifySuite {
    Bessel,
    Tent,
    Weighted,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub convolver: Convolver,
    pub function: Option<FunctionSpec>,
    pub command: Command,
    pub verify_suite: Option<VerifySuite>,
    pub big_r: f64,
    pub q: usize,
    pub k: usize,
    pub gamma: f64,
    pub cutoff: usize,
    pub grid_size: usize,
    pub quad_order: usize,
    pub out_dir: String,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{key}: expected a number, got `{v}`")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("{key}: expected a nonnegative integer, got `{v}`")))
}

#[derive(Default)]
struct ConvolverBlock {
    kind: Option<(usize, String)>,
    alpha: Option<(usize, f64)>,
    r: Option<(usize, f64)>,
    h_coeffs: Option<(usize, Vec<f64>)>,
}

#[derive(Default)]
struct FunctionBlock {
    variant: Option<(usize, String)>,
    terms: Vec<(usize, ExpTerm)>,
    half_width: Option<(usize, f64)>,
    sample_file: Option<(usize, String)>,
    smoothness_k: Option<(usize, usize)>,
}

#[derive(Default)]
struct RunBlock {
    command: Option<(usize, String)>,
    suite: Option<(usize, String)>,
    big_r: Option<(usize, f64)>,
    q: Option<(usize, usize)>,
    k: Option<(usize, usize)>,
    gamma: Option<(usize, f64)>,
    cutoff: Option<(usize, usize)>,
    grid_size: Option<(usize, usize)>,
    quad_order: Option<(usize, usize)>,
    out_dir: Option<(usize, String)>,
}

fn parse_term(line: usize, v: &str) -> Result<ExpTerm> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(parse_err(
            line,
            "term: expected 5 comma-separated fields `lam_re, lam_im, m, c_re, c_im`",
        ));
    }
    Ok(ExpTerm {
        lambda: Complex64::new(
            parse_f64(line, "term.lam_re", parts[0])?,
            parse_f64(line, "term.lam_im", parts[1])?,
        ),
        m: parse_usize(line, "term.m", parts[2])?,
        c: Complex64::new(
            parse_f64(line, "term.c_re", parts[3])?,
            parse_f64(line, "term.c_im", parts[4])?,
        ),
    })
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(line, key, s))
        .collect()
}

/// Read a two-column `t, value` CSV (real values, strictly increasing t).
pub fn read_samples(text: &str) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(parse_err(i + 1, "sample row: expected `t, value`"));
        }
        grid.push(parse_f64(i + 1, "t", parts[0])?);
        values.push(Complex64::new(parse_f64(i + 1, "value", parts[1])?, 0.0));
    }
    Ok((grid, values))
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut section = String::new();
    let mut cb = ConvolverBlock::default();
    let mut fb = FunctionBlock::default();
    let mut rb = RunBlock::default();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(ln, "unterminated section header"))?
                .trim();
            match name {
                "convolver" | "function" | "run" => section = name.to_string(),
                other => return Err(parse_err(ln, format!("unknown section `[{other}]`"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(ln, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("convolver", "kind") => cb.kind = Some((ln, value.to_string())),
            ("convolver", "alpha") => cb.alpha = Some((ln, parse_f64(ln, key, value)?)),
            ("convolver", "r") => cb.r = Some((ln, parse_f64(ln, key, value)?)),
            ("convolver", "h_coeffs") => {
                cb.h_coeffs = Some((ln, parse_f64_list(ln, key, value)?))
            }
            ("function", "variant") => fb.variant = Some((ln, value.to_string())),
            ("function", "term") => fb.terms.push((ln, parse_term(ln, value)?)),
            ("function", "half_width") => {
                fb.half_width = Some((ln, parse_f64(ln, key, value)?))
            }
            ("function", "sample_file") => fb.sample_file = Some((ln, value.to_string())),
            ("function", "smoothness_k") => {
                fb.smoothness_k = Some((ln, parse_usize(ln, key, value)?))
            }
            ("run", "command") => rb.command = Some((ln, value.to_string())),
            ("run", "suite") => rb.suite = Some((ln, value.to_string())),
            ("run", "R") => rb.big_r = Some((ln, parse_f64(ln, key, value)?)),
            ("run", "q") => rb.q = Some((ln, parse_usize(ln, key, value)?)),
            ("run", "k") => rb.k = Some((ln, parse_usize(ln, key, value)?)),
            ("run", "gamma") => rb.gamma = Some((ln, parse_f64(ln, key, value)?)),
            ("run", "cutoff") => rb.cutoff = Some((ln, parse_usize(ln, key, value)?)),
            ("run", "grid_size") => rb.grid_size = Some((ln, parse_usize(ln, key, value)?)),
            ("run", "quad_order") => rb.quad_order = Some((ln, parse_usize(ln, key, value)?)),
            ("run", "out_dir") => rb.out_dir = Some((ln, value.to_string())),
            ("", k) => return Err(parse_err(ln, format!("key `{k}` outside any section"))),
            (s, k) => return Err(parse_err(ln, format!("unknown key `{k}` in [{s}]"))),
        }
    }

    // Convolver block.
    let (kline, kind) = cb
        .kind
        .ok_or_else(|| parse_err(0, "missing [convolver] kind"))?;
    let r = cb
        .r
        .ok_or_else(|| parse_err(kline, "missing [convolver] r"))?
        .1;
    let convolver = match kind.as_str() {
        "gegenbauer" => {
            let alpha = cb
                .alpha
                .ok_or_else(|| parse_err(kline, "gegenbauer needs alpha"))?;
            Convolver::gegenbauer(alpha.1, r)
                .map_err(|e| parse_err(alpha.0, e.to_string()))?
        }
        "weighted" => {
            let alpha = cb
                .alpha
                .ok_or_else(|| parse_err(kline, "weighted needs alpha"))?;
            let h = cb
                .h_coeffs
                .ok_or_else(|| parse_err(kline, "weighted needs h_coeffs"))?;
            Convolver::weighted(alpha.1, r, h.1).map_err(|e| parse_err(h.0, e.to_string()))?
        }
        "tent" => {
            if let Some((l, _)) = cb.alpha {
                return Err(parse_err(l, "tent takes no alpha"));
            }
            Convolver::tent(r).map_err(|e| parse_err(kline, e.to_string()))?
        }
        other => return Err(parse_err(kline, format!("unknown convolver kind `{other}`"))),
    };

    // Function block (optional for spectrum / verify / bounds).
    let function = match fb.variant {
        None => {
            if !fb.terms.is_empty() {
                return Err(parse_err(
                    fb.terms[0].0,
                    "term given without `variant = exponential_sum`",
                ));
            }
            None
        }
        Some((vline, v)) => match v.as_str() {
            "exponential_sum" => {
                if let Some((l, _)) = &fb.sample_file {
                    return Err(parse_err(*l, "exponential_sum takes no sample_file"));
                }
                let terms = fb.terms.iter().map(|(_, t)| *t).collect();
                let hw = fb.half_width.map(|(_, h)| h);
                Some(
                    FunctionSpec::exponential_sum(terms, hw)
                        .map_err(|e| parse_err(vline, e.to_string()))?,
                )
            }
            "sampled" => {
                let (fline, path) = fb
                    .sample_file
                    .ok_or_else(|| parse_err(vline, "sampled needs sample_file"))?;
                let k = fb
                    .smoothness_k
                    .ok_or_else(|| parse_err(vline, "sampled needs smoothness_k"))?
                    .1;
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    parse_err(fline, format!("cannot read sample_file `{path}`: {e}"))
                })?;
                let (grid, values) = read_samples(&text)?;
                Some(
                    FunctionSpec::sampled(grid, values, k)
                        .map_err(|e| parse_err(fline, e.to_string()))?,
                )
            }
            other => return Err(parse_err(vline, format!("unknown function variant `{other}`"))),
        },
    };

    // Run block with documented defaults.
    let (cline, cmd) = rb
        .command
        .ok_or_else(|| parse_err(0, "missing [run] command"))?;
    let command = match cmd.as_str() {
        "spectrum" => Command::Spectrum,
        "coeffs" => Command::Coeffs,
        "extend" => Command::Extend,
        "verify" => Command::Verify,
        "bounds" => Command::Bounds,
        other => return Err(parse_err(cline, format!("unknown command `{other}`"))),
    };
    let verify_suite = match rb.suite {
        None => {
            if command == Command::Verify {
                return Err(parse_err(cline, "verify needs `suite = bessel|tent|weighted`"));
            }
            None
        }
        Some((sline, s)) => Some(match s.as_str() {
            "bessel" => VerifySuite::Bessel,
            "tent" => VerifySuite::Tent,
            "weighted" => VerifySuite::Weighted,
            other => return Err(parse_err(sline, format!("unknown verify suite `{other}`"))),
        }),
    };

    let big_r = rb.big_r.map(|(_, v)| v).unwrap_or(2.0 * r);
    let grid_size = rb.grid_size.map(|(_, v)| v).unwrap_or(801);
    if let Some((l, g)) = rb.grid_size {
        if g < 2 {
            return Err(parse_err(l, "grid_size must be at least 2"));
        }
    }
    let quad_order = rb.quad_order.map(|(_, v)| v).unwrap_or(256);
    if quad_order == 0 {
        return Err(parse_err(rb.quad_order.unwrap().0, "quad_order must be positive"));
    }
    if command == Command::Extend && !(big_r > r) {
        let l = rb.big_r.map(|(l, _)| l).unwrap_or(cline);
        return Err(parse_err(l, format!("R = {big_r} must exceed r = {r}")));
    }

    Ok(RunConfig {
        convolver,
        function,
        command,
        verify_suite,
        big_r,
        q: rb.q.map(|(_, v)| v).unwrap_or(0),
        k: rb.k.map(|(_, v)| v).unwrap_or(3),
        gamma: rb.gamma.map(|(_, v)| v).unwrap_or(1.0),
        cutoff: rb.cutoff.map(|(_, v)| v).unwrap_or(64),
        grid_size,
        quad_order,
        out_dir: rb.out_dir.map(|(_, v)| v).unwrap_or_else(|| ".".into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_defaults() {
        let cfg = parse_config(
            "[convolver]\nkind = gegenbauer\nalpha = 0.5\nr = 1\n[run]\ncommand = spectrum\n",
        )
        .unwrap();
        assert_eq!(cfg.quad_order, 256);
        assert_eq!(cfg.cutoff, 64);
        assert_eq!(cfg.grid_size, 801);
        assert!(cfg.function.is_none());
    }

    #[test]
    fn alpha_constraint_reported_with_line() {
        let err = parse_config(
            "[convolver]\nkind = gegenbauer\nalpha = -0.6\nr = 1\n[run]\ncommand = spectrum\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("-1/2"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config(
            "[convolver]\nkind = gegenbauer\nalpha_ = 0.5\nr = 1\n[run]\ncommand = spectrum\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha_") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn exponential_sum_terms() {
        let cfg = parse_config(
            "[convolver]\nkind = gegenbauer\nalpha = 0.5\nr = 1\n\
             [function]\nvariant = exponential_sum\nterm = 3.14, 0, 0, 1, 0\n\
             term = -3.14, 0, 0, 1, 0\nhalf_width = 2\n\
             [run]\ncommand = extend\nR = 5\n",
        )
        .unwrap();
        match cfg.function.unwrap() {
            FunctionSpec::ExponentialSum { terms, half_width } => {
                assert_eq!(terms.len(), 2);
                assert_eq!(half_width, Some(2.0));
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn comments_and_weighted_kind() {
        let cfg = parse_config(
            "# run card\n[convolver]\nkind = weighted # polynomial profile\n\
             alpha = 0.5\nr = 1\nh_coeffs = 1, 1\n[run]\ncommand = spectrum\n",
        )
        .unwrap();
        assert_eq!(cfg.convolver.h_coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn sample_rows_parse() {
        let (grid, values) = read_samples("# t, value\n-1, 0.5\n0, 1.0\n1, 0.5\n").unwrap();
        assert_eq!(grid, vec![-1.0, 0.0, 1.0]);
        assert_eq!(values[1].re, 1.0);
        assert!(read_samples("0, 1, 2\n").is_err());
    }

    #[test]
    fn verify_requires_suite() {
        let err = parse_config(
            "[convolver]\nkind = tent\nr = 1\n[run]\ncommand = verify\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("suite"));
        let cfg = parse_config(
            "[convolver]\nkind = tent\nr = 1\n[run]\ncommand = verify\nsuite = tent\n",
        )
        .unwrap();
        assert_eq!(cfg.verify_suite, Some(VerifySuite::Tent));
    }
}
