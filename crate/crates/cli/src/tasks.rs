//! Solver dispatch for the fitting verbs and the objective recomputation
//! shared with round-trip checks.

use std::collections::BTreeMap;
use std::path::PathBuf;

use banach_rep::duality::{dual_norm_eval, duality_map, is_conjugate_pair, norm_eval, NormSpec};
use banach_rep::kernel::{KernelModel, MultiKernel};
use banach_rep::multikernel::{
    component_norms, fit_l1_multikernel, fit_weighted_l2, MultiKernelProblem, OuterRegularizer,
};
use banach_rep::sparse::{lasso_objective, mixed_objective, solve_mixed_two_component, DictionaryProblem};
use banach_rep::spline::{
    fit_gtv_spline, fit_hilbert_seminorm, gtv_objective, interpolation_matrix, SplineOperator,
};
use banach_rep::{Matrix64, Vector64};

use crate::config::{RunConfig, Task, DEFAULT_GRID};
use crate::data::{read_matrix, read_observations, read_regression, read_table};
use crate::error::{CliError, CliResult};
use crate::grid::{GridModel, GridSpec};
use crate::output::{Certificates, OutputDoc};
use crate::parse;

/// Result of one fitting task, before timing is attached.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub doc: OutputDoc,
    pub model: Option<(GridModel, GridSpec)>,
}

enum Penalty {
    TotalVariation,
    Quadratic,
}

struct SplineData {
    h: Matrix64,
    y: Vector64,
    op: SplineOperator,
    penalty: Penalty,
    lambda: f64,
    grid: usize,
    lo: f64,
    hi: f64,
}

struct MixedData {
    h: Matrix64,
    l1: Matrix64,
    l2: Matrix64,
    y: Vector64,
    lambda1: f64,
    lambda2: f64,
}

/// Problem data reconstructed from a configuration.
enum Loaded {
    Kernel(MultiKernelProblem<f64>),
    Dict(DictionaryProblem<f64>),
    Mixed(MixedData),
    Spline(SplineData),
    Dual { rows: Vec<Vector64>, norm: String },
}

fn input(cfg: &RunConfig) -> CliResult<PathBuf> {
    cfg.require(&cfg.settings.input, "input")
}

fn load(cfg: &RunConfig) -> CliResult<Loaded> {
    let s = &cfg.settings;
    match cfg.task {
        Task::FitKernel => {
            let data = read_regression(&input(cfg)?)?;
            let kernel = parse::kernel(&cfg.require(&s.kernel, "kernel")?)?;
            let lambda = cfg.require(&s.lambda, "lambda")?;
            let outer = OuterRegularizer::WeightedL2(Vector64::from_element(1, lambda));
            Ok(Loaded::Kernel(MultiKernelProblem::new(data.points, data.y, vec![kernel], outer)?))
        }
        Task::FitMultikernel => {
            let data = read_regression(&input(cfg)?)?;
            let kernels = cfg
                .require(&s.kernels, "kernels")?
                .iter()
                .map(|k| parse::kernel(k))
                .collect::<CliResult<Vec<_>>>()?;
            let outer = match s.outer.as_deref().unwrap_or("l2") {
                "l2" => {
                    let lambdas = cfg.require(&s.lambdas, "lambdas")?;
                    if lambdas.len() != kernels.len() {
                        return Err(CliError::config(format!(
                            "{} lambdas given for {} kernels",
                            lambdas.len(),
                            kernels.len()
                        )));
                    }
                    OuterRegularizer::WeightedL2(Vector64::from_vec(lambdas))
                }
                "l1" => OuterRegularizer::L1(cfg.require(&s.lambda, "lambda")?),
                other => return Err(CliError::config(format!("unknown outer norm {other:?}; expected l2 or l1"))),
            };
            Ok(Loaded::Kernel(MultiKernelProblem::new(data.points, data.y, kernels, outer)?))
        }
        Task::FitDict => {
            let y = read_observations(&input(cfg)?)?;
            let h = read_matrix(&cfg.require(&s.matrix, "matrix")?)?;
            check_rows(&h, &y)?;
            let transforms = cfg
                .require(&s.transforms, "transforms")?
                .iter()
                .map(|t| parse::transform(t, h.ncols()))
                .collect::<CliResult<Vec<_>>>()?;
            let lambda = cfg.require(&s.lambda, "lambda")?;
            Ok(Loaded::Dict(DictionaryProblem::new(h, y, transforms, lambda)?))
        }
        Task::FitMixed => {
            let y = read_observations(&input(cfg)?)?;
            let h = read_matrix(&cfg.require(&s.matrix, "matrix")?)?;
            check_rows(&h, &y)?;
            let names = cfg.require(&s.transforms, "transforms")?;
            let [t1, t2] = names.as_slice() else {
                return Err(CliError::config(format!(
                    "fit-mixed needs exactly two transforms, got {}",
                    names.len()
                )));
            };
            Ok(Loaded::Mixed(MixedData {
                l1: parse::transform(t1, h.ncols())?,
                l2: parse::transform(t2, h.ncols())?,
                lambda1: cfg.require(&s.lambda1, "lambda1")?,
                lambda2: cfg.require(&s.lambda2, "lambda2")?,
                h,
                y,
            }))
        }
        Task::FitSpline => {
            let path = input(cfg)?;
            let data = read_regression(&path)?;
            if data.points[0].len() != 1 {
                return Err(CliError::config("fit-spline needs one input column besides y"));
            }
            let xs: Vec<f64> = data.points.iter().map(|p| p[0]).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo && hi.is_finite() && lo.is_finite()) {
                return Err(CliError::io(&path, "sample positions must span an interval"));
            }
            let grid = s.grid.unwrap_or(DEFAULT_GRID);
            if grid < 3 {
                return Err(CliError::config("--grid must be at least 3"));
            }
            let positions: Vec<f64> = xs
                .iter()
                .map(|x| ((x - lo) / (hi - lo) * (grid - 1) as f64).clamp(0.0, (grid - 1) as f64))
                .collect();
            let penalty = match s.penalty.as_deref().unwrap_or("tv") {
                "tv" => Penalty::TotalVariation,
                "quadratic" | "hilbert" => Penalty::Quadratic,
                other => {
                    return Err(CliError::config(format!(
                        "unknown penalty {other:?}; expected tv or quadratic"
                    )))
                }
            };
            Ok(Loaded::Spline(SplineData {
                h: interpolation_matrix(grid, &positions)?,
                y: data.y,
                op: s.operator.as_deref().unwrap_or("D").parse()?,
                penalty,
                lambda: cfg.require(&s.lambda, "lambda")?,
                grid,
                lo,
                hi,
            }))
        }
        Task::Dual => {
            let table = read_table(&input(cfg)?)?;
            let rows = table.rows.into_iter().map(Vector64::from_vec).collect();
            Ok(Loaded::Dual {
                rows,
                norm: cfg.require(&s.norm, "norm")?,
            })
        }
        Task::Verify => Err(CliError::config("verify is not a fitting task")),
    }
}

fn check_rows(h: &Matrix64, y: &Vector64) -> CliResult<()> {
    if h.nrows() != y.len() {
        return Err(CliError::config(format!(
            "measurement matrix has {} rows but there are {} observations",
            h.nrows(),
            y.len()
        )));
    }
    Ok(())
}

fn vector(coeffs: &BTreeMap<String, Vec<f64>>, name: &str) -> CliResult<Vector64> {
    coeffs
        .get(name)
        .map(|v| Vector64::from_column_slice(v))
        .ok_or_else(|| CliError::config(format!("missing coefficient vector {name:?}")))
}

fn kernel_model(problem: &MultiKernelProblem<f64>, coeffs: &BTreeMap<String, Vec<f64>>) -> CliResult<KernelModel<f64>> {
    let kernel = MultiKernel::new(problem.kernels().to_vec(), vector(coeffs, "alpha")?)?;
    Ok(KernelModel::new(kernel, problem.points().to_vec(), vector(coeffs, "a")?)?)
}

fn spline_values(d: &SplineData, coeffs: &BTreeMap<String, Vec<f64>>) -> CliResult<Vector64> {
    match d.penalty {
        Penalty::TotalVariation => {
            let p = d.op.null_basis::<f64>(d.grid)?;
            let c = d.op.green::<f64>(d.grid)?;
            Ok(p * vector(coeffs, "b")? + c * vector(coeffs, "u")?)
        }
        Penalty::Quadratic => vector(coeffs, "f"),
    }
}

fn objective(loaded: &Loaded, coeffs: &BTreeMap<String, Vec<f64>>) -> CliResult<Option<f64>> {
    Ok(Some(match loaded {
        Loaded::Kernel(problem) => problem.objective(&kernel_model(problem, coeffs)?)?,
        Loaded::Dict(problem) => {
            lasso_objective(&problem.synthesis_matrix(), problem.y(), problem.lambda(), &vector(coeffs, "c")?)
        }
        Loaded::Mixed(d) => mixed_objective(
            &d.h,
            &d.l1,
            &d.l2,
            &d.y,
            d.lambda1,
            d.lambda2,
            &vector(coeffs, "x1")?,
            &vector(coeffs, "x2")?,
        ),
        Loaded::Spline(d) => {
            let f = spline_values(d, coeffs)?;
            match d.penalty {
                Penalty::TotalVariation => gtv_objective(&d.h, &d.y, d.op, d.lambda, &f)?,
                Penalty::Quadratic => {
                    let l = d.op.matrix::<f64>(d.grid)?;
                    (&d.y - &d.h * &f).norm_squared() + d.lambda * (l * &f).norm_squared()
                }
            }
        }
        Loaded::Dual { .. } => return Ok(None),
    }))
}

/// Re-evaluates the objective of an output document from its coefficients
/// and the inputs named in its configuration echo.
pub fn recompute_objective(doc: &OutputDoc) -> CliResult<Option<f64>> {
    objective(&load(&doc.config_echo)?, &doc.coefficients)
}

fn nonzero(v: &Vector64) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] != 0.0).collect()
}

fn coeff_map(entries: Vec<(&str, &Vector64)>) -> BTreeMap<String, Vec<f64>> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.iter().copied().collect()))
        .collect()
}

/// Runs a fitting task (everything except `verify`).
pub fn run_task(cfg: &RunConfig) -> CliResult<FitOutcome> {
    let loaded = load(cfg)?;
    let mut knots = None;
    let mut maps = Vec::new();
    let (coefficients, support, certificates, model) = match &loaded {
        Loaded::Kernel(problem) => fit_kernel(cfg, problem)?,
        Loaded::Dict(problem) => {
            let sol = problem.solve(cfg.max_iter(), cfg.tol())?;
            let mut coeffs = coeff_map(vec![("c", &sol.sparse.c)]);
            for (i, x) in sol.components.iter().enumerate() {
                coeffs.insert(format!("x{}", i + 1), x.iter().copied().collect());
            }
            let n = problem.h().ncols();
            let certs = Certificates {
                kkt_residual: Some(sol.sparse.kkt_residual),
                conjugacy_gaps: Vec::new(),
                converged: sol.sparse.converged,
                iterations: Some(sol.sparse.iterations),
            };
            let grid = GridSpec { lo: 0.0, hi: (n - 1) as f64, points: n };
            (coeffs, sol.sparse.support.clone(), certs, Some((GridModel::Components(sol.components), grid)))
        }
        Loaded::Mixed(d) => {
            let sol = solve_mixed_two_component(&d.h, &d.l1, &d.l2, &d.y, d.lambda1, d.lambda2, cfg.max_iter(), cfg.tol())?;
            let coeffs = coeff_map(vec![("x1", &sol.x1), ("x2", &sol.x2), ("c1", &sol.c1)]);
            let certs = Certificates {
                kkt_residual: Some(sol.kkt_residual),
                conjugacy_gaps: Vec::new(),
                converged: sol.converged,
                iterations: Some(sol.iterations),
            };
            let n = d.h.ncols();
            let grid = GridSpec { lo: 0.0, hi: (n - 1) as f64, points: n };
            let model = GridModel::Components(vec![sol.x1.clone(), sol.x2.clone()]);
            (coeffs, nonzero(&sol.c1), certs, Some((model, grid)))
        }
        Loaded::Spline(d) => {
            let grid = GridSpec { lo: d.lo, hi: d.hi, points: d.grid };
            let to_x = |loc: usize| d.lo + (d.hi - d.lo) * loc as f64 / (d.grid - 1) as f64;
            match d.penalty {
                Penalty::TotalVariation => {
                    let fit = fit_gtv_spline(d.grid, &d.h, &d.y, d.op, d.lambda, cfg.max_iter(), cfg.tol())?;
                    knots = Some(fit.knot_locations().into_iter().map(to_x).collect());
                    let coeffs = coeff_map(vec![("b", &fit.b), ("u", &fit.u), ("f", &fit.f)]);
                    let certs = Certificates {
                        kkt_residual: Some(fit.kkt_residual),
                        conjugacy_gaps: Vec::new(),
                        converged: fit.converged,
                        iterations: Some(fit.iterations),
                    };
                    let model = GridModel::Spline {
                        lo: d.lo,
                        hi: d.hi,
                        values: fit.f.iter().copied().collect(),
                        step: d.op == SplineOperator::D,
                    };
                    (coeffs, fit.knots.clone(), certs, Some((model, grid)))
                }
                Penalty::Quadratic => {
                    let p = d.op.null_basis(d.grid)?;
                    let l = d.op.matrix(d.grid)?;
                    let fit = fit_hilbert_seminorm(&d.h, &d.y, &p, &l, d.lambda)?;
                    let coeffs = coeff_map(vec![("a", &fit.a), ("b", &fit.b), ("f", &fit.f)]);
                    let certs = Certificates {
                        kkt_residual: Some(fit.gradient_residual),
                        conjugacy_gaps: Vec::new(),
                        converged: fit.gradient_residual <= 1e-8 * (1.0 + d.y.norm()),
                        iterations: None,
                    };
                    let model = GridModel::Spline {
                        lo: d.lo,
                        hi: d.hi,
                        values: fit.f.iter().copied().collect(),
                        step: false,
                    };
                    (coeffs, Vec::new(), certs, Some((model, grid)))
                }
            }
        }
        Loaded::Dual { rows, norm } => {
            let mut norms = Vec::with_capacity(rows.len());
            let mut duals = Vec::with_capacity(rows.len());
            let mut gaps = Vec::with_capacity(rows.len());
            let mut spec_cache: Option<(usize, NormSpec<f64>)> = None;
            for x in rows {
                let spec = match &spec_cache {
                    Some((n, s)) if *n == x.len() => s.clone(),
                    _ => {
                        let s = parse::norm(norm, x.len())?;
                        spec_cache = Some((x.len(), s.clone()));
                        s
                    }
                };
                let xstar = duality_map(x, &spec)?;
                let report = is_conjugate_pair(x, &xstar, &spec, 1e-9)?;
                norms.push(norm_eval(x, &spec)?);
                duals.push(dual_norm_eval(x, &spec)?);
                gaps.push(report.norm_gap.max(report.pairing_gap));
                maps.push(xstar.iter().copied().collect());
            }
            let coeffs = BTreeMap::from([("norm".to_string(), norms), ("dual_norm".to_string(), duals)]);
            let certs = Certificates {
                kkt_residual: None,
                conjugacy_gaps: gaps,
                converged: true,
                iterations: None,
            };
            (coeffs, Vec::new(), certs, None)
        }
    };
    let objective = objective(&loaded, &coefficients)?;
    Ok(FitOutcome {
        doc: OutputDoc {
            task: cfg.task.name().to_string(),
            config_echo: cfg.clone(),
            coefficients,
            support,
            knots,
            maps,
            objective,
            certificates,
            timing_ms: None,
        },
        model,
    })
}

type Parts = (BTreeMap<String, Vec<f64>>, Vec<usize>, Certificates, Option<(GridModel, GridSpec)>);

fn fit_kernel(cfg: &RunConfig, problem: &MultiKernelProblem<f64>) -> CliResult<Parts> {
    let (model, certs) = match problem.outer() {
        OuterRegularizer::WeightedL2(lambdas) => {
            let fit = fit_weighted_l2(problem)?;
            // kernel weights must equal z_n / z*_n with z*_n the outer conjugate of the component norms
            let z = Vector64::from_vec(component_norms(&fit.model)?);
            let zstar = duality_map(&z, &NormSpec::weighted_euclidean(lambdas.clone())?)?;
            let scale = z.amax().max(f64::MIN_POSITIVE);
            let gaps = (0..z.len())
                .map(|n| (fit.model.kernel.weights()[n] * zstar[n] - z[n]).abs() / scale)
                .collect();
            let certs = Certificates {
                kkt_residual: Some(fit.gradient_norm),
                conjugacy_gaps: gaps,
                converged: true,
                iterations: None,
            };
            (fit.model, certs)
        }
        OuterRegularizer::L1(_) => {
            let fit = fit_l1_multikernel(problem, cfg.max_iter(), cfg.tol(), cfg.seed())?;
            let certs = Certificates {
                kkt_residual: Some(fit.kkt_residual),
                conjugacy_gaps: Vec::new(),
                converged: fit.converged,
                iterations: Some(fit.iterations),
            };
            (fit.model, certs)
        }
    };
    let alpha = model.kernel.weights().clone();
    let coeffs = coeff_map(vec![("a", &model.coefficients), ("alpha", &alpha)]);
    let support = if problem.kernels().len() > 1 { nonzero(&alpha) } else { nonzero(&model.coefficients) };
    let grid = if model.input_dim() == 1 {
        let xs: Vec<f64> = model.centers.iter().map(|c| c[0]).collect();
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(GridSpec {
            lo,
            hi,
            points: cfg.settings.grid.unwrap_or(DEFAULT_GRID),
        })
    } else {
        None
    };
    let model = grid.map(|g| (GridModel::Kernel(model), g));
    Ok((coeffs, support, certs, model))
}
