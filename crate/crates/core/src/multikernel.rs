//! Multi-component RKHS regression with squared loss.
//!
//! The regularizer is an outer norm applied to the vector of component
//! RKHS norms `(‖f_1‖, …, ‖f_N‖)`. Two outer norms are supported:
//!
//! * weighted Euclidean `Σ λ_n ‖f_n‖²`, whose minimizer is a single kernel
//!   expansion over the data with the combined kernel `Σ r_n / λ_n`;
//! * `λ Σ ‖f_n‖`, solved by alternating between the closed-form expansion
//!   coefficients and the kernel weights. The weights live on the simplex
//!   scaled by a level, through the identity
//!   `λ Σ‖f_n‖ = min_{η ≥ 0} (λ/2)(Σ ‖f_n‖²/η_n + Σ η_n)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{combine, gram, KernelModel, KernelSpec, MultiKernel};
use crate::linalg;
use crate::random;
use crate::scalar::Real;

pub const DEFAULT_MAX_ITER: usize = 5000;
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum OuterRegularizer<T> {
    /// `Σ λ_n ‖f_n‖²`
    WeightedL2(DVector<T>),
    /// `λ Σ ‖f_n‖`
    L1(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiKernelProblem<T> {
    points: Vec<DVector<T>>,
    y: DVector<T>,
    kernels: Vec<KernelSpec<T>>,
    outer: OuterRegularizer<T>,
}

impl<T: Real> MultiKernelProblem<T> {
    pub fn new(
        points: Vec<DVector<T>>,
        y: DVector<T>,
        kernels: Vec<KernelSpec<T>>,
        outer: OuterRegularizer<T>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPoints);
        }
        if points.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: y.len(),
            });
        }
        let d = points[0].len();
        if let Some(bad) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        if kernels.is_empty() {
            return Err(Error::InvalidParameter("at least one kernel is required".into()));
        }
        match &outer {
            OuterRegularizer::WeightedL2(l) => {
                if l.len() != kernels.len() {
                    return Err(Error::DimensionMismatch {
                        expected: kernels.len(),
                        got: l.len(),
                    });
                }
                if l.iter().any(|&v| !(v > T::zero())) {
                    return Err(Error::InvalidParameter("regularization weights must be > 0".into()));
                }
            }
            OuterRegularizer::L1(l) => {
                if !(*l > T::zero()) {
                    return Err(Error::InvalidParameter("lambda must be > 0".into()));
                }
            }
        }
        Ok(MultiKernelProblem {
            points,
            y,
            kernels,
            outer,
        })
    }

    pub fn points(&self) -> &[DVector<T>] {
        &self.points
    }
    pub fn y(&self) -> &DVector<T> {
        &self.y
    }
    pub fn kernels(&self) -> &[KernelSpec<T>] {
        &self.kernels
    }
    pub fn outer(&self) -> &OuterRegularizer<T> {
        &self.outer
    }

    pub fn grams(&self) -> Result<Vec<DMatrix<T>>> {
        self.kernels.iter().map(|k| gram(k, &self.points)).collect()
    }

    /// Objective of a kernel-expansion model centred on the data:
    /// `‖y − f(x)‖² + regularizer(‖f_1‖, …, ‖f_N‖)`.
    pub fn objective(&self, model: &KernelModel<T>) -> Result<T> {
        let grams = self.grams()?;
        Ok(objective_from_grams(self, &grams, model.kernel.weights(), &model.coefficients))
    }
}

fn objective_from_grams<T: Real>(
    problem: &MultiKernelProblem<T>,
    grams: &[DMatrix<T>],
    weights: &DVector<T>,
    a: &DVector<T>,
) -> T {
    let r = combine(grams, weights);
    let resid = &problem.y - &r * a;
    let quad: Vec<T> = grams.iter().map(|g| a.dot(&(g * a)).max(T::zero())).collect();
    let reg = match &problem.outer {
        OuterRegularizer::WeightedL2(l) => quad
            .iter()
            .zip(weights.iter())
            .zip(l.iter())
            .fold(T::zero(), |acc, ((&q, &w), &ln)| acc + ln * w * w * q),
        OuterRegularizer::L1(l) => {
            *l * quad
                .iter()
                .zip(weights.iter())
                .fold(T::zero(), |acc, (&q, &w)| acc + w * q.sqrt())
        }
    };
    resid.norm_squared() + reg
}

#[derive(Debug, Clone)]
pub struct WeightedL2Fit<T> {
    pub model: KernelModel<T>,
    pub objective: T,
    /// `‖∇_a(‖y − Ra‖² + aᵀRa)‖` at the returned coefficients.
    pub gradient_norm: T,
    /// Condition number of `R + I`.
    pub condition: f64,
    pub ridge_added: bool,
}

/// Closed-form weighted-ℓ2 fit: kernel weights `α_n = 1/λ_n` and
/// coefficients solving `(R + I) a = y` with `R = Σ α_n G_n`.
pub fn fit_weighted_l2<T: Real>(problem: &MultiKernelProblem<T>) -> Result<WeightedL2Fit<T>> {
    let lambdas = match &problem.outer {
        OuterRegularizer::WeightedL2(l) => l,
        OuterRegularizer::L1(_) => {
            return Err(Error::InvalidParameter("fit_weighted_l2 needs a weighted-L2 outer norm".into()))
        }
    };
    let grams = problem.grams()?;
    let weights = lambdas.map(|l| T::one() / l);
    let mut r = combine(&grams, &weights);
    let m = r.nrows();
    let mut system = &r + DMatrix::identity(m, m);
    let condition = linalg::condition_number(&system);
    let ridge_added = !(condition <= linalg::MAX_CONDITION);
    if ridge_added {
        r += DMatrix::identity(m, m) * T::lit(1e-10);
        system = &r + DMatrix::identity(m, m);
    }
    let a = linalg::solve_spd(&system, &problem.y)?;
    let gradient = (&r * (&system * &a - &problem.y)) * T::lit(2.0);
    let objective = objective_from_grams(problem, &grams, &weights, &a);
    let model = KernelModel::new(
        MultiKernel::new(problem.kernels.clone(), weights)?,
        problem.points.clone(),
        a,
    )?;
    Ok(WeightedL2Fit {
        model,
        objective,
        gradient_norm: gradient.norm(),
        condition,
        ridge_added,
    })
}

#[derive(Debug, Clone)]
pub struct L1Fit<T> {
    pub model: KernelModel<T>,
    /// Kernel selection on the probability simplex.
    pub simplex_weights: DVector<T>,
    /// Model kernel weights are `level · simplex_weights`.
    pub level: T,
    pub objective: T,
    /// Value of the variational surrogate at every iteration (non-increasing).
    pub history: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Projected-gradient optimality residual of the kernel weights, relative to λ.
    pub kkt_residual: T,
}

struct Surrogate<'a, T: Real> {
    grams: &'a [DMatrix<T>],
    y: &'a DVector<T>,
    lambda: T,
}

struct Eval<T: Real> {
    value: T,
    coeffs: DVector<T>,
    /// `∂G/∂η_n`
    grad: DVector<T>,
}

impl<T: Real> Surrogate<'_, T> {
    /// `G(η) = yᵀ(I + (2/λ)Σ η_n G_n)^{-1} y + (λ/2) Σ η_n`.
    fn eval(&self, eta: &DVector<T>) -> Result<Eval<T>> {
        let two = T::lit(2.0);
        let w = eta * (two / self.lambda);
        let m = self.y.len();
        let system = combine(self.grams, &w) + DMatrix::identity(m, m);
        let a = linalg::solve_spd(&system, self.y)?;
        let half = self.lambda / two;
        let value = self.y.dot(&a) + half * eta.sum();
        let grad = DVector::from_iterator(
            self.grams.len(),
            self.grams.iter().map(|g| half - two / self.lambda * a.dot(&(g * &a))),
        );
        Ok(Eval { value, coeffs: a, grad })
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex<T: Real>(v: &DVector<T>) -> DVector<T> {
    let n = v.len();
    let mut u: Vec<T> = v.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - T::one()) / T::from_usize_lossy(j + 1);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    DVector::from_fn(n, |i, _| (v[i] - theta).max(T::zero()))
}

/// `λ Σ‖f_n‖` fit by alternating minimization over expansion coefficients,
/// simplex kernel weights and their level. Non-convergence is reported in
/// the result, never as an error.
pub fn fit_l1_multikernel<T: Real>(
    problem: &MultiKernelProblem<T>,
    max_iter: usize,
    tol: T,
    seed: u64,
) -> Result<L1Fit<T>> {
    let lambda = match &problem.outer {
        OuterRegularizer::L1(l) => *l,
        OuterRegularizer::WeightedL2(_) => {
            return Err(Error::InvalidParameter("fit_l1_multikernel needs an L1 outer norm".into()))
        }
    };
    let grams = problem.grams()?;
    let n = grams.len();
    let sur = Surrogate {
        grams: &grams,
        y: &problem.y,
        lambda,
    };

    let mut rng = random::seeded(seed);
    let mut alpha = DVector::from_fn(n, |_, _| T::lit(rng.random_range(0.5..1.5)));
    alpha /= alpha.sum();
    let mut level = T::zero();
    let mut cur = sur.eval(&(&alpha * level))?;
    let (lv, ev) = minimize_level(&sur, &alpha, level)?;
    level = lv;
    cur = if ev.value <= cur.value { ev } else { cur };

    let mut history = vec![cur.value];
    let mut step = T::one();
    let mut converged = false;
    let mut iterations = 0;
    let tiny = T::default_epsilon() * T::lit(10.0);

    for it in 1..=max_iter {
        iterations = it;
        let before = cur.value;

        // kernel-weight block on the simplex
        if level > T::zero() {
            let g = &cur.grad * level;
            step *= T::lit(2.0);
            let mut accepted = false;
            for _ in 0..60 {
                let cand = project_simplex(&(&alpha - &g * step));
                let diff = &cand - &alpha;
                if diff.norm() <= tiny {
                    break;
                }
                let ev = sur.eval(&(&cand * level))?;
                let bound = cur.value + g.dot(&diff) + diff.norm_squared() / (T::lit(2.0) * step);
                if ev.value <= bound && ev.value <= cur.value {
                    alpha = cand;
                    cur = ev;
                    accepted = true;
                    break;
                }
                step *= T::lit(0.5);
            }
            if !accepted {
                step = step.max(T::lit(1e-30));
            }
        } else {
            // at η = 0 the weights are free: move to the steepest coordinate
            let (best, &gmin) = cur
                .grad
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .expect("at least one kernel");
            if gmin < T::zero() {
                alpha = DVector::from_fn(n, |i, _| if i == best { T::one() } else { T::zero() });
            }
        }

        // level block
        let (lv, ev) = minimize_level(&sur, &alpha, level)?;
        if ev.value <= cur.value {
            level = lv;
            cur = ev;
        }
        history.push(cur.value);

        let change = (before - cur.value).abs();
        let kkt = kkt_residual(&(&alpha * level), &cur.grad, lambda);
        if change <= tol * (T::one() + cur.value.abs()) && kkt <= tol.sqrt() {
            converged = true;
            break;
        }
    }

    let eta = &alpha * level;
    let kkt = kkt_residual(&eta, &cur.grad, lambda);
    let weights = &eta * (T::lit(2.0) / lambda);
    let coeffs = if level > T::zero() {
        cur.coeffs.clone()
    } else {
        DVector::zeros(problem.y.len())
    };
    let objective = objective_from_grams(problem, &grams, &weights, &coeffs);
    let model = KernelModel::new(
        MultiKernel::new(problem.kernels.clone(), weights.clone())?,
        problem.points.clone(),
        coeffs,
    )?;
    let level_out = weights.sum();
    let simplex_weights = if level_out > T::zero() {
        &weights / level_out
    } else {
        alpha
    };
    Ok(L1Fit {
        model,
        simplex_weights,
        level: level_out,
        objective,
        history,
        iterations,
        converged,
        kkt_residual: kkt,
    })
}

fn kkt_residual<T: Real>(eta: &DVector<T>, grad: &DVector<T>, lambda: T) -> T {
    eta.iter()
        .zip(grad.iter())
        .fold(T::zero(), |acc, (&e, &g)| {
            let r = if e > T::zero() { g.abs() } else { (-g).max(T::zero()) };
            acc.max(r)
        })
        / lambda
}

/// Minimizes the convex map `τ ↦ G(τ α)` over `τ >= 0` by bisection on its
/// monotone derivative `Σ α_n ∂G/∂η_n`.
fn minimize_level<T: Real>(sur: &Surrogate<'_, T>, alpha: &DVector<T>, start: T) -> Result<(T, Eval<T>)> {
    let deriv = |e: &Eval<T>| alpha.dot(&e.grad);
    let at_zero = sur.eval(&(alpha * T::zero()))?;
    if deriv(&at_zero) >= T::zero() {
        return Ok((T::zero(), at_zero));
    }
    let mut lo = T::zero();
    let mut hi = if start > T::zero() { start } else { sur.lambda.max(T::one()) };
    let mut hi_eval = sur.eval(&(alpha * hi))?;
    let mut guard = 0;
    while deriv(&hi_eval) < T::zero() && guard < 200 {
        lo = hi;
        hi *= T::lit(2.0);
        hi_eval = sur.eval(&(alpha * hi))?;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi || hi - lo <= T::default_epsilon() * hi {
            break;
        }
        let e = sur.eval(&(alpha * mid))?;
        if deriv(&e) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lo_eval = sur.eval(&(alpha * lo))?;
    let hi_eval = sur.eval(&(alpha * hi))?;
    Ok(if lo_eval.value <= hi_eval.value {
        (lo, lo_eval)
    } else {
        (hi, hi_eval)
    })
}

/// Component RKHS norms `‖f_n‖ = α_n sqrt(aᵀ G_n a)` of a fitted model.
pub fn component_norms<T: Real>(model: &KernelModel<T>) -> Result<Vec<T>> {
    let grams = model.kernel.component_grams(&model.centers)?;
    let a = &model.coefficients;
    Ok(grams
        .iter()
        .zip(model.kernel.weights().iter())
        .map(|(g, &w)| w * a.dot(&(g * a)).max(T::zero()).sqrt())
        .collect())
}
