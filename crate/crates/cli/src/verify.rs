//! Randomized invariant suites behind the `verify` verb.
//!
//! Every trial draws its data from its own seeded generator, so trials run in
//! any order on any number of threads and the tallies come out identical.

use std::path::Path;

use banach_rep::duality::{composite_conjugate, duality_map, is_conjugate_pair, NormSpec};
use banach_rep::kernel::KernelSpec;
use banach_rep::multikernel::{component_norms, fit_weighted_l2, MultiKernelProblem, OuterRegularizer};
use banach_rep::oracle::{brute_force_dual_norm, smoothing_spline_block_system, verify_representer_membership};
use banach_rep::random::{self, SeededRng};
use banach_rep::sparse::{
    analysis_objective, forward_difference, kkt_tolerance, reduce_to_extreme, solve_mixed_two_component, tikhonov,
    DictionaryProblem,
};
use banach_rep::spline::{
    build_biortho, fit_gtv_spline, fit_hilbert_seminorm, gtv_lambda_max, interpolation_matrix, SplineOperator,
};
use banach_rep::{linalg, Matrix64, Vector64};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Suites in the order `all` runs them.
pub const SUITES: [&str; 10] = [
    "duality",
    "composite",
    "membership",
    "multikernel",
    "lasso",
    "extreme",
    "biortho",
    "spline",
    "hilbert",
    "mixed",
];

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BANACH_REP_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantTally {
    pub suite: String,
    pub invariant: String,
    pub passed: usize,
    pub total: usize,
    /// Trial indices that failed, capped at ten.
    pub failures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub tallies: Vec<InvariantTally>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.tallies.iter().all(|t| t.passed == t.total)
    }

    pub fn lines(&self) -> Vec<String> {
        self.tallies
            .iter()
            .map(|t| format!("{} {} {}/{}", t.suite, t.invariant, t.passed, t.total))
            .collect()
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::io(path, e))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

type Outcome = Vec<(&'static str, bool)>;

fn trial_seed(seed: u64, suite: usize, trial: usize) -> u64 {
    // splitmix64 finalizer over the packed indices
    let mut z = seed ^ ((suite as u64) << 48) ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn thread_cap() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Expands `all` and checks suite names.
pub fn select_suites(name: &str) -> CliResult<Vec<&'static str>> {
    if name == "all" {
        return Ok(SUITES.to_vec());
    }
    SUITES
        .iter()
        .find(|s| **s == name)
        .map(|s| vec![*s])
        .ok_or_else(|| CliError::config(format!("unknown suite {name:?}; expected one of {} or all", SUITES.join(", "))))
}

pub fn run_suites(suite: &str, trials: usize, seed: u64) -> CliResult<VerifyReport> {
    let suites = select_suites(suite)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let mut tallies = Vec::new();
    for name in suites {
        let index = SUITES.iter().position(|s| *s == name).unwrap_or(0);
        let outcomes: Vec<Outcome> = pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(|t| run_trial(name, &mut random::seeded(trial_seed(seed, index, t))))
                .collect()
        });
        let mut suite_tallies: Vec<InvariantTally> = Vec::new();
        for (t, outcome) in outcomes.iter().enumerate() {
            for &(invariant, ok) in outcome {
                let pos = match suite_tallies.iter().position(|x| x.invariant == invariant) {
                    Some(p) => p,
                    None => {
                        suite_tallies.push(InvariantTally {
                            suite: name.to_string(),
                            invariant: invariant.to_string(),
                            passed: 0,
                            total: 0,
                            failures: Vec::new(),
                        });
                        suite_tallies.len() - 1
                    }
                };
                let tally = &mut suite_tallies[pos];
                tally.total += 1;
                if ok {
                    tally.passed += 1;
                } else if tally.failures.len() < 10 {
                    tally.failures.push(t);
                }
            }
        }
        tallies.extend(suite_tallies);
    }
    Ok(VerifyReport { seed, trials, tallies })
}

fn run_trial(suite: &str, rng: &mut SeededRng) -> Outcome {
    let result = match suite {
        "duality" => duality_trial(rng),
        "composite" => composite_trial(rng),
        "membership" => membership_trial(rng),
        "multikernel" => multikernel_trial(rng),
        "lasso" => lasso_trial(rng),
        "extreme" => extreme_trial(rng),
        "biortho" => biortho_trial(rng),
        "spline" => spline_trial(rng),
        "hilbert" => hilbert_trial(rng),
        "mixed" => mixed_trial(rng),
        _ => Ok(vec![]),
    };
    // a solver error inside a trial counts as a failure of that trial
    result.unwrap_or_else(|_| vec![("no-solver-error", false)])
}

type TrialResult = Result<Outcome, banach_rep::Error>;

fn relative(gap: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        gap / scale
    } else {
        gap
    }
}

fn random_spec(rng: &mut SeededRng, n: usize) -> Result<NormSpec<f64>, banach_rep::Error> {
    Ok(match rng.random_range(0..5) {
        0 => NormSpec::lp(1.2)?,
        1 => NormSpec::l2(),
        2 => NormSpec::lp(3.7)?,
        3 => NormSpec::weighted_euclidean(random::uniform_vector(rng, n, 0.2, 3.0))?,
        _ => NormSpec::transformed(NormSpec::l2(), random::well_conditioned_matrix(rng, n))?,
    })
}

fn duality_trial(rng: &mut SeededRng) -> TrialResult {
    let n = rng.random_range(2..=10);
    let spec = random_spec(rng, n)?;
    let x: Vector64 = random::normal_vector(rng, n);
    let xstar = duality_map(&x, &spec)?;
    let report = is_conjugate_pair(&x, &xstar, &spec, 1e-9)?;
    let scale = rng.random_range(0.1..10.0);
    let scaled = duality_map(&(&x * scale), &spec)?;
    Ok(vec![
        ("norm-preservation", relative(report.norm_gap, report.norm_primal) <= 1e-9),
        ("sharp-duality-bound", relative(report.pairing_gap, report.pairing.abs()) <= 1e-9),
        ("homogeneity", (scaled - &xstar * scale).amax() <= 1e-9 * (1.0 + scale * xstar.amax())),
    ])
}

fn composite_trial(rng: &mut SeededRng) -> TrialResult {
    let outer = match rng.random_range(0..3) {
        0 => NormSpec::l1(),
        1 => NormSpec::l2(),
        _ => NormSpec::weighted_euclidean(random::uniform_vector(rng, 2, 0.2, 3.0))?,
    };
    let inner = [NormSpec::lp(rng.random_range(1.5..4.0))?, NormSpec::l2()];
    let parts: Vec<(Vector64, NormSpec<f64>)> =
        inner.iter().map(|s| (random::normal_vector(rng, 2), s.clone())).collect();
    let images = composite_conjugate(&parts, &outer)?;
    let spec = NormSpec::composite(inner.iter().map(|s| (2, s.clone())).collect(), outer)?;
    let x = Vector64::from_iterator(4, parts.iter().flat_map(|(v, _)| v.iter().copied()));
    let xstar = Vector64::from_iterator(4, images.iter().flat_map(|v| v.iter().copied()));
    let report = is_conjugate_pair(&x, &xstar, &spec, 1e-9)?;
    let exact = spec.dual().norm(&x)?;
    let bound = brute_force_dual_norm(&x, &spec, 200, rng.random())?;
    Ok(vec![
        ("conjugate-pair", report.is_conjugate),
        ("dual-norm-bound", bound <= exact * (1.0 + 1e-12) && exact - bound <= 1e-6 * exact.max(1.0)),
    ])
}

fn membership_trial(rng: &mut SeededRng) -> TrialResult {
    let h: Matrix64 = random::normal_matrix(rng, 4, 20);
    let y: Vector64 = random::normal_vector(rng, 4);
    let lambda = rng.random_range(0.01..2.0);
    let gram = &h * h.transpose() + Matrix64::identity(4, 4) * lambda;
    let ridge = h.transpose() * linalg::solve_spd(&gram, &y)?;
    let spec = NormSpec::l2();
    let member = verify_representer_membership(&ridge, &h, &spec, 1e-10)?;
    let mut e: Vector64 = random::normal_vector(rng, 20);
    e -= h.transpose() * linalg::lstsq(&h.transpose(), &e);
    e *= 0.1 * ridge.norm().max(1e-3) / e.norm();
    let off = verify_representer_membership(&(ridge + e), &h, &spec, 1e-6)?;
    Ok(vec![("ridge-member", member.is_member), ("perturbed-rejected", !off.is_member)])
}

fn multikernel_trial(rng: &mut SeededRng) -> TrialResult {
    let m = rng.random_range(3..=10);
    let points: Vec<Vector64> = (0..m).map(|_| random::uniform_vector(rng, 1, -1.0, 1.0)).collect();
    let y: Vector64 = random::normal_vector(rng, m);
    let kernels = vec![
        KernelSpec::gaussian(rng.random_range(0.2..1.0))?,
        KernelSpec::laplacian(rng.random_range(0.5..2.0))?,
        KernelSpec::polynomial(2, 1.0)?,
    ];
    let lambdas: Vector64 = random::uniform_vector(rng, 3, 0.1, 2.0);
    let problem = MultiKernelProblem::new(points, y, kernels, OuterRegularizer::WeightedL2(lambdas.clone()))?;
    let fit = fit_weighted_l2(&problem)?;
    let z = Vector64::from_vec(component_norms(&fit.model)?);
    let zstar = duality_map(&z, &NormSpec::weighted_euclidean(lambdas)?)?;
    let alpha = fit.model.kernel.weights();
    let relation = (0..3).all(|n| (alpha[n] * zstar[n] - z[n]).abs() <= 1e-8 * (1.0 + z.amax()));
    // the fit must not be improved by small coefficient perturbations
    let base = problem.objective(&fit.model)?;
    let mut optimal = true;
    for _ in 0..4 {
        let mut trial = fit.model.clone();
        trial.coefficients += random::normal_vector::<f64, _>(rng, m) * 1e-4;
        optimal &= problem.objective(&trial)? >= base - 1e-10 * (1.0 + base);
    }
    Ok(vec![("alpha-relation", relation), ("local-optimality", optimal)])
}

fn lasso_trial(rng: &mut SeededRng) -> TrialResult {
    let n = 8;
    let h = random::normal_matrix(rng, 5, n);
    let y = random::normal_vector(rng, 5);
    let lambda = rng.random_range(0.05..1.0);
    let problem = DictionaryProblem::new(h, y, vec![Matrix64::identity(n, n), forward_difference(n)], lambda)?;
    let sol = problem.solve(20_000, 1e-12)?;
    let analysis = analysis_objective(&problem, &sol.components)?;
    Ok(vec![
        ("kkt-certificate", sol.sparse.kkt_residual <= kkt_tolerance(lambda)),
        ("analysis-synthesis", (analysis - sol.sparse.objective).abs() <= 1e-6),
    ])
}

fn extreme_trial(rng: &mut SeededRng) -> TrialResult {
    let a: Matrix64 = random::normal_matrix(rng, 3, 20);
    let c: Vector64 = random::normal_vector(rng, 20);
    let red = reduce_to_extreme(&a, &c, 1e-10)?;
    let out = &red.coefficients;
    Ok(vec![
        ("support-bound", out.iter().filter(|v| **v != 0.0).count() <= 3),
        ("l1-nonincrease", out.lp_norm(1) <= c.lp_norm(1) * (1.0 + 1e-12)),
        ("measurement-drift", (&a * out - &a * &c).amax() <= 1e-9),
    ])
}

fn biortho_trial(rng: &mut SeededRng) -> TrialResult {
    let v: Matrix64 = random::normal_matrix(rng, 6, 2);
    let sys = build_biortho(&v, None)?;
    Ok(vec![
        ("identity", sys.identity_defect() <= 1e-12),
        ("annihilation", sys.annihilation_defect() <= 1e-12),
    ])
}

fn positions(rng: &mut SeededRng, m: usize, g: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.0..(g - 1) as f64)).collect()
}

fn spline_trial(rng: &mut SeededRng) -> TrialResult {
    let g = 200;
    let op = if rng.random::<bool>() { SplineOperator::D } else { SplineOperator::D2 };
    let h: Matrix64 = interpolation_matrix(g, &positions(rng, 8, g))?;
    let y: Vector64 = random::normal_vector(rng, 8);
    let lambda = gtv_lambda_max(g, &h, &y, op)? * rng.random_range(0.01..0.9);
    let fit = fit_gtv_spline(g, &h, &y, op, lambda, 20_000, 1e-10)?;
    Ok(vec![
        ("knot-bound", fit.knots.len() <= 8 - op.null_dim()),
        ("kkt-certificate", fit.converged),
    ])
}

fn hilbert_trial(rng: &mut SeededRng) -> TrialResult {
    let g = 60;
    let op = if rng.random::<bool>() { SplineOperator::D } else { SplineOperator::D2 };
    let nu: Matrix64 = interpolation_matrix(g, &positions(rng, 7, g))?;
    let y: Vector64 = random::normal_vector(rng, 7);
    let (p, l) = (op.null_basis(g)?, op.matrix(g)?);
    let lambda = rng.random_range(0.01..2.0);
    let fit = fit_hilbert_seminorm(&nu, &y, &p, &l, lambda)?;
    let reference = smoothing_spline_block_system(&nu, &y, &p, &l, lambda)?;
    Ok(vec![("block-system", (&fit.f - reference).amax() <= 1e-8)])
}

fn mixed_trial(rng: &mut SeededRng) -> TrialResult {
    let h: Matrix64 = random::normal_matrix(rng, 4, 6);
    let y: Vector64 = random::normal_vector(rng, 4);
    let (l1, l2) = (Matrix64::identity(6, 6), forward_difference(6));
    let lam2 = rng.random_range(0.1..1.0);
    let sol = solve_mixed_two_component(&h, &l1, &l2, &y, rng.random_range(0.1..1.0), lam2, 20_000, 1e-12)?;
    let big = 2.0 * h.column_iter().map(|c| c.norm()).fold(0.0, f64::max) * y.norm() + 1.0;
    let limit = solve_mixed_two_component(&h, &l1, &l2, &y, big, lam2, 20_000, 1e-12)?;
    let reference = tikhonov(&h, &l2, &y, lam2)?;
    Ok(vec![
        ("kkt-certificate", sol.converged),
        ("tikhonov-limit", (&limit.x2 - reference).amax() <= 1e-6 && limit.x1.amax() == 0.0),
    ])
}
