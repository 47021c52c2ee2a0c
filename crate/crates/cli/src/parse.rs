//! Text forms of kernels, norms and transforms used on the command line and
//! in config files.
//!
//! - kernels: `gaussian:<width>`, `laplacian:<scale>`, `polynomial:<degree>:<offset>`, `linear`
//! - transforms: `identity`, `diff`, `file:<path>` (square CSV matrix)
//! - norms: `l1`, `l2`, `linf`, `lp:<p>`, `weighted:<w1>,<w2>,...`,
//!   `transformed(<norm>; <transform>)`,
//!   `composite(<outer>; <dim> <norm>; <dim> <norm>; ...)`

use std::path::Path;

use banach_rep::duality::NormSpec;
use banach_rep::kernel::KernelSpec;
use banach_rep::sparse::forward_difference;
use banach_rep::{Matrix64, Vector64};

use crate::data::read_matrix;
use crate::error::{CliError, CliResult};

fn number(text: &str, what: &str) -> CliResult<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| CliError::config(format!("cannot parse {what} {text:?} as a number")))
}

pub fn kernel(text: &str) -> CliResult<KernelSpec<f64>> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    let spec = match parts.as_slice() {
        ["linear"] => KernelSpec::Linear,
        ["gaussian", w] => KernelSpec::gaussian(number(w, "Gaussian width")?)?,
        ["laplacian", s] => KernelSpec::laplacian(number(s, "Laplacian scale")?)?,
        ["polynomial", d, c] => {
            let degree = d
                .trim()
                .parse::<u32>()
                .map_err(|_| CliError::config(format!("polynomial degree {d:?} is not a positive integer")))?;
            KernelSpec::polynomial(degree, number(c, "polynomial offset")?)?
        }
        _ => {
            return Err(CliError::config(format!(
                "unknown kernel {text:?}; expected gaussian:<w>, laplacian:<s>, polynomial:<d>:<c> or linear"
            )))
        }
    };
    Ok(spec)
}

/// Builds the `n × n` matrix named by a transform string.
pub fn transform(text: &str, n: usize) -> CliResult<Matrix64> {
    let text = text.trim();
    match text {
        "identity" => Ok(Matrix64::identity(n, n)),
        "diff" => Ok(forward_difference(n)),
        _ => match text.strip_prefix("file:") {
            Some(path) => {
                let m = read_matrix(Path::new(path))?;
                if m.shape() != (n, n) {
                    return Err(CliError::config(format!(
                        "transform {path} is {}×{}, expected {n}×{n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m)
            }
            None => Err(CliError::config(format!(
                "unknown transform {text:?}; expected identity, diff or file:<path>"
            ))),
        },
    }
}

/// Splits on `sep` at parenthesis depth zero.
fn split_top(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

/// Parses a norm for vectors of length `n`.
pub fn norm(text: &str, n: usize) -> CliResult<NormSpec<f64>> {
    let text = text.trim();
    if let Some(body) = call(text, "composite") {
        let parts = split_top(body, ';');
        let (outer_text, comps) = parts
            .split_first()
            .ok_or_else(|| CliError::config("composite norm needs an outer norm"))?;
        let mut components = Vec::new();
        for c in comps {
            let c = c.trim();
            let (dim, inner) = c
                .split_once(char::is_whitespace)
                .ok_or_else(|| CliError::config(format!("composite component {c:?} must read '<dim> <norm>'")))?;
            let dim: usize = dim
                .parse()
                .map_err(|_| CliError::config(format!("component dimension {dim:?} is not an integer")))?;
            components.push((dim, norm(inner, dim)?));
        }
        let total: usize = components.iter().map(|(d, _)| d).sum();
        if total != n {
            return Err(CliError::config(format!("composite norm covers {total} coordinates, data has {n}")));
        }
        let outer = norm(outer_text, components.len())?;
        return Ok(NormSpec::composite(components, outer)?);
    }
    if let Some(body) = call(text, "transformed") {
        let parts = split_top(body, ';');
        let [base, t] = parts.as_slice() else {
            return Err(CliError::config("transformed norm must read transformed(<norm>; <transform>)"));
        };
        return Ok(NormSpec::transformed(norm(base, n)?, transform(t, n)?)?);
    }
    let spec = match text {
        "l1" => NormSpec::l1(),
        "l2" => NormSpec::l2(),
        "linf" => NormSpec::linf(),
        _ => {
            if let Some(p) = text.strip_prefix("lp:") {
                let p = p.trim();
                if p == "inf" {
                    NormSpec::linf()
                } else {
                    NormSpec::lp(number(p, "exponent")?)?
                }
            } else if let Some(ws) = text.strip_prefix("weighted:") {
                let w = ws.split(',').map(|v| number(v, "weight")).collect::<CliResult<Vec<_>>>()?;
                if w.len() != n {
                    return Err(CliError::config(format!("{} weights given for dimension {n}", w.len())));
                }
                NormSpec::weighted_euclidean(Vector64::from_vec(w))?
            } else {
                return Err(CliError::config(format!("unknown norm {text:?}")));
            }
        }
    };
    Ok(spec)
}
