//! Plot-ready prediction grids.

use std::io::Write;
use std::path::Path;

use banach_rep::kernel::KernelModel;
use banach_rep::Vector64;

use crate::error::{CliError, CliResult};

/// Uniform grid of `points` abscissae on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn abscissae(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// Fitted model that can be evaluated along a one-dimensional grid.
#[derive(Debug, Clone)]
pub enum GridModel {
    /// Kernel expansion on one-dimensional inputs.
    Kernel(KernelModel<f64>),
    /// Grid function on `[lo, hi]`, read piecewise constant (`step`) or
    /// piecewise linear between nodes.
    Spline { lo: f64, hi: f64, values: Vec<f64>, step: bool },
    /// Signal components indexed by sample position `0..N`.
    Components(Vec<Vector64>),
}

impl GridModel {
    /// Per-component columns are emitted for models with more than one component.
    pub fn component_count(&self) -> usize {
        match self {
            GridModel::Kernel(m) => m.kernel.kernels().len(),
            GridModel::Spline { .. } => 1,
            GridModel::Components(c) => c.len(),
        }
    }

    /// `(f(x), [f_1(x), …])`; the component list is empty for single-component models.
    pub fn evaluate(&self, x: f64) -> CliResult<(f64, Vec<f64>)> {
        let multi = self.component_count() > 1;
        match self {
            GridModel::Kernel(m) => {
                let p = Vector64::from_element(1, x);
                let f = m.predict(&p)?;
                let parts = if multi { m.predict_components(&p)? } else { Vec::new() };
                Ok((f, parts))
            }
            GridModel::Spline { lo, hi, values, step } => {
                let last = values.len() - 1;
                let t = if hi > lo { (x - lo) / (hi - lo) * last as f64 } else { 0.0 };
                let t = t.clamp(0.0, last as f64);
                // nodes computed from the same formula can land a hair below an integer
                let below = ((t + 1e-9).floor() as usize).min(last);
                let f = if *step || below == last {
                    values[below]
                } else {
                    let w = (t - below as f64).max(0.0);
                    values[below] * (1.0 - w) + values[below + 1] * w
                };
                Ok((f, Vec::new()))
            }
            GridModel::Components(parts) => {
                let n = parts.first().map_or(0, |p| p.len());
                if n == 0 {
                    return Err(CliError::config("empty component model"));
                }
                let i = (x.round().max(0.0) as usize).min(n - 1);
                let vals: Vec<f64> = parts.iter().map(|p| p[i]).collect();
                let f = vals.iter().sum();
                Ok((f, if multi { vals } else { Vec::new() }))
            }
        }
    }
}

/// Writes `x,f[,f_1,…,f_N]` rows for every grid abscissa, in increasing order.
pub fn emit_prediction_grid(model: &GridModel, grid: &GridSpec, path: &Path) -> CliResult<()> {
    if let GridModel::Kernel(m) = model {
        if m.input_dim() != 1 {
            return Err(CliError::config(format!(
                "prediction grids need one-dimensional inputs, model has {}",
                m.input_dim()
            )));
        }
    }
    let n = model.component_count();
    let mut out = String::from("x,f");
    if n > 1 {
        for k in 1..=n {
            out.push_str(&format!(",f_{k}"));
        }
    }
    out.push('\n');
    for x in grid.abscissae() {
        let (f, parts) = model.evaluate(x)?;
        out.push_str(&format!("{x:e},{f:e}"));
        for p in parts {
            out.push_str(&format!(",{p:e}"));
        }
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_spline_reads_node_values() {
        let model = GridModel::Spline {
            lo: 0.0,
            hi: 3.0,
            values: vec![1.0, 1.0, 5.0, 5.0],
            step: true,
        };
        assert_eq!(model.evaluate(1.0).unwrap().0, 1.0);
        assert_eq!(model.evaluate(1.9).unwrap().0, 1.0);
        assert_eq!(model.evaluate(2.0).unwrap().0, 5.0);
        let linear = GridModel::Spline {
            lo: 0.0,
            hi: 3.0,
            values: vec![0.0, 1.0, 2.0, 3.0],
            step: false,
        };
        assert!((linear.evaluate(1.5).unwrap().0 - 1.5).abs() < 1e-12);
    }

    #[test]
    fn grid_endpoints() {
        let g = GridSpec { lo: -1.0, hi: 1.0, points: 5 };
        assert_eq!(g.abscissae(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
