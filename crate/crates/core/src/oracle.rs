//! Independent ground-truth machinery: a generic subgradient solver, sampled
//! dual norms and representer-form membership checks.
//!
//! Nothing here calls into the specialized solvers, so the two can be used to
//! cross-check each other.

use nalgebra::{DMatrix, DVector};

use crate::duality::{duality_map, NormSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::random;
use crate::scalar::Real;
use rand::Rng;

/// Maximum dimension accepted by the sampling-based dual norm.
pub const MAX_SAMPLED_DIM: usize = 8;

type Oracle<'a, T, R> = Box<dyn Fn(&DVector<T>) -> R + 'a>;

/// Convex objective given by value and subgradient oracles.
pub struct GenericConvexProblem<'a, T> {
    pub dim: usize,
    objective: Oracle<'a, T, T>,
    subgradient: Oracle<'a, T, DVector<T>>,
    /// Optional box `|x_i| <= bound`.
    pub bound: Option<T>,
}

impl<'a, T: Real> GenericConvexProblem<'a, T> {
    pub fn new(
        dim: usize,
        objective: impl Fn(&DVector<T>) -> T + 'a,
        subgradient: impl Fn(&DVector<T>) -> DVector<T> + 'a,
    ) -> Self {
        GenericConvexProblem {
            dim,
            objective: Box::new(objective),
            subgradient: Box::new(subgradient),
            bound: None,
        }
    }

    pub fn with_bound(mut self, bound: T) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn objective(&self, x: &DVector<T>) -> T {
        (self.objective)(x)
    }

    pub fn subgradient(&self, x: &DVector<T>) -> DVector<T> {
        (self.subgradient)(x)
    }

    fn project(&self, x: &mut DVector<T>) {
        if let Some(b) = self.bound {
            x.apply(|v| *v = v.max(-b).min(b));
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenericSolution<T> {
    pub x: DVector<T>,
    pub objective: T,
    /// Running best objective recorded at the end of every epoch.
    pub best_history: Vec<T>,
    pub iterations: usize,
}

const EPOCH: usize = 64;

/// Restarted subgradient method with iterate averaging.
///
/// Iterations are grouped in epochs of constant step; each epoch restarts
/// from the better of its running average and its best iterate. The step is
/// halved whenever an epoch spends a quarter or more of its steps going
/// uphill. The best point seen is returned.
pub fn solve_generic<T: Real>(problem: &GenericConvexProblem<'_, T>, iterations: usize, seed: u64) -> GenericSolution<T> {
    let iterations = iterations.max(1);
    let mut rng = random::seeded(seed);
    let mut x: DVector<T> = random::normal_vector::<T, _>(&mut rng, problem.dim) * T::lit(1e-3);
    problem.project(&mut x);
    let mut fx = problem.objective(&x);
    let mut best_x = x.clone();
    let mut best_f = fx;
    let mut history = Vec::with_capacity(iterations / EPOCH + 1);

    let mut step = initial_step(problem, &x, fx);
    let mut done = 0;
    while done < iterations {
        let len = EPOCH.min(iterations - done);
        let mut avg = DVector::zeros(problem.dim);
        let mut uphill = 0;
        for _ in 0..len {
            let g = problem.subgradient(&x);
            x -= g * step;
            problem.project(&mut x);
            let f_new = problem.objective(&x);
            if !(f_new <= fx) {
                uphill += 1;
            }
            fx = f_new;
            if fx < best_f {
                best_f = fx;
                best_x.copy_from(&x);
            }
            avg += &x;
        }
        done += len;
        avg /= T::from_usize_lossy(len);
        let f_avg = problem.objective(&avg);
        if f_avg < best_f {
            best_f = f_avg;
            best_x.copy_from(&avg);
        }
        x.copy_from(&best_x);
        fx = best_f;
        if 4 * uphill >= len {
            step *= T::lit(0.5);
        }
        history.push(best_f);
    }
    GenericSolution {
        x: best_x,
        objective: best_f,
        best_history: history,
        iterations: done,
    }
}

fn initial_step<T: Real>(problem: &GenericConvexProblem<'_, T>, x: &DVector<T>, fx: T) -> T {
    let g = problem.subgradient(x);
    let gg = g.norm_squared();
    if gg == T::zero() {
        return T::one();
    }
    let mut step = T::one();
    for _ in 0..80 {
        let mut cand = x - &g * step;
        problem.project(&mut cand);
        if problem.objective(&cand) <= fx - step * gg * T::lit(0.5) {
            return step;
        }
        step *= T::lit(0.5);
    }
    step
}

/// Lower bound on the dual norm `sup ⟨x,u⟩/‖u‖` from `samples` random
/// directions plus the conjugate direction of `x`; exact up to rounding
/// whenever the conjugate direction is available.
pub fn brute_force_dual_norm<T: Real>(x: &DVector<T>, spec: &NormSpec<T>, samples: usize, seed: u64) -> Result<T> {
    check_sampled_dim(x.len())?;
    spec.check_dim(x.len())?;
    let mut best = sampled_ratio(x, spec, samples, seed, false)?;
    let u = duality_map(x, &spec.dual())?;
    let nu = spec.norm(&u)?;
    if nu > T::zero() {
        best = best.max(x.dot(&u) / nu);
    }
    Ok(best)
}

/// Dual norm estimated purely by search: random directions followed by a
/// shrinking-radius local refinement around the best direction found.
pub fn sampled_dual_norm<T: Real>(x: &DVector<T>, spec: &NormSpec<T>, samples: usize, seed: u64) -> Result<T> {
    check_sampled_dim(x.len())?;
    spec.check_dim(x.len())?;
    sampled_ratio(x, spec, samples, seed, true)
}

fn check_sampled_dim(n: usize) -> Result<()> {
    if n > MAX_SAMPLED_DIM {
        return Err(Error::InvalidParameter(format!(
            "sampled dual norms need dimension <= {MAX_SAMPLED_DIM}, got {n}"
        )));
    }
    Ok(())
}

fn sampled_ratio<T: Real>(x: &DVector<T>, spec: &NormSpec<T>, samples: usize, seed: u64, refine: bool) -> Result<T> {
    let n = x.len();
    let mut rng = random::seeded(seed);
    let ratio = |u: &DVector<T>| -> Result<T> {
        let nu = spec.norm(u)?;
        Ok(if nu > T::zero() { x.dot(u) / nu } else { T::zero() })
    };
    let mut best = T::zero();
    let mut best_u = DVector::zeros(n);
    for _ in 0..samples {
        let u: DVector<T> = random::normal_vector(&mut rng, n);
        let r = ratio(&u)?;
        if r > best {
            best = r;
            best_u = u;
        }
    }
    if refine && best > T::zero() {
        best_u /= best_u.norm();
        let mut radius = T::lit(0.5);
        let rounds = samples.max(1000) * 4;
        let mut fails = 0;
        for _ in 0..rounds {
            // alternate isotropic moves with single-coordinate moves, which can
            // reach maximizers lying on a face of the unit ball
            let step = if rng.random::<bool>() {
                random::normal_vector::<T, _>(&mut rng, n) * radius
            } else {
                let mut e = DVector::zeros(n);
                e[rng.random_range(0..n)] = if rng.random::<bool>() { radius } else { -radius };
                e
            };
            let mut cand = &best_u + step;
            let nc = cand.norm();
            if nc == T::zero() {
                continue;
            }
            cand /= nc;
            let r = ratio(&cand)?;
            if r > best {
                best = r;
                best_u = cand;
                fails = 0;
            } else {
                fails += 1;
                if fails >= 60 {
                    radius *= T::lit(0.5);
                    fails = 0;
                }
            }
            if radius < T::lit(1e-12) {
                break;
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T> {
    pub is_member: bool,
    /// `‖ν₀ − Π_{row(H)} ν₀‖ / ‖ν₀‖`
    pub residual: T,
    /// Coefficients `a` with `ν₀ ≈ Hᵀ a`.
    pub coefficients: DVector<T>,
}

/// Checks that `f0` is the conjugate of some `ν₀ = Σ a_m h_m` in the row space of `H`.
///
/// Only defined when the duality mapping of the regularizer space is
/// single-valued; for ℓ1-type norms the solutions are described through
/// extremal points instead.
pub fn verify_representer_membership<T: Real>(
    f0: &DVector<T>,
    h: &DMatrix<T>,
    spec: &NormSpec<T>,
    tol: T,
) -> Result<Membership<T>> {
    if !spec.is_strictly_convex() || !spec.has_single_valued_map() {
        return Err(Error::Unsupported(
            "representer membership needs a strictly convex, smooth norm; \
             non-strictly-convex regularizers are characterized by extremal points"
                .into(),
        ));
    }
    if h.ncols() != f0.len() {
        return Err(Error::DimensionMismatch {
            expected: h.ncols(),
            got: f0.len(),
        });
    }
    let nu0 = duality_map(f0, spec)?;
    let ht = h.transpose();
    let a = linalg::lstsq(&ht, &nu0);
    let scale = nu0.norm();
    let residual = if scale > T::zero() {
        (&nu0 - &ht * &a).norm() / scale
    } else {
        T::zero()
    };
    Ok(Membership {
        is_member: residual <= tol,
        residual,
        coefficients: a,
    })
}

/// Central-cut ellipsoid method started from the ball of radius `radius`
/// around `center`, which must contain a minimizer.
///
/// Uses only the objective and subgradient oracles. The ellipsoid volume
/// shrinks by a constant factor per step, so the best objective converges
/// linearly, unlike [`solve_generic`]; this makes it the reference of choice
/// for tight comparisons on small non-smooth problems. Stops early once the
/// ellipsoid has collapsed to rounding level.
pub fn solve_ellipsoid<T: Real>(
    problem: &GenericConvexProblem<'_, T>,
    center: &DVector<T>,
    radius: T,
    iterations: usize,
) -> Result<GenericSolution<T>> {
    let n = problem.dim;
    if center.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: center.len() });
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter("radius must be > 0".into()));
    }
    let nf = T::from_usize_lossy(n);
    // the ellipsoid is {x + B v : ‖v‖ ≤ 1}; updating the factor B instead of
    // B Bᵀ keeps the shape positive semidefinite under rounding
    let mut factor = DMatrix::identity(n, n) * radius;
    let shrink = if n == 1 { T::zero() } else { T::one() - ((nf - T::one()) / (nf + T::one())).sqrt() };
    let scale = if n == 1 { T::lit(0.5) } else { nf / (nf * nf - T::one()).sqrt() };
    let mut x = center.clone();
    let mut best_x = x.clone();
    let mut best_f = problem.objective(&x);
    let mut history = Vec::new();
    let mut done = 0;
    while done < iterations {
        done += 1;
        let g = problem.subgradient(&x);
        let p = factor.tr_mul(&g);
        let width = p.norm();
        if !(width > T::default_epsilon() * (T::one() + best_f.abs())) {
            break;
        }
        let dir = p / width;
        let bd = &factor * &dir;
        x -= &bd / (nf + T::one());
        if n == 1 {
            factor *= scale;
        } else {
            factor -= &bd * dir.transpose() * shrink;
            factor *= scale;
        }
        problem.project(&mut x);
        let fx = problem.objective(&x);
        if fx < best_f {
            best_f = fx;
            best_x.copy_from(&x);
        }
        if done % EPOCH == 0 {
            history.push(best_f);
        }
    }
    Ok(GenericSolution {
        x: best_x,
        objective: best_f,
        best_history: history,
        iterations: done,
    })
}

/// Smoothing spline through the classic saddle-point system
///
/// ```text
/// [K + λI   V] [c]   [y]
/// [Vᵀ       0] [b] = [0],   K = ν (LᵀL)⁺ νᵀ,  V = ν P,
/// ```
///
/// returning the grid values `f = (LᵀL)⁺ νᵀ c + P b`. The pseudo-inverse is
/// taken from an SVD.
pub fn smoothing_spline_block_system<T: Real>(
    nu: &DMatrix<T>,
    y: &DVector<T>,
    p: &DMatrix<T>,
    l: &DMatrix<T>,
    lambda: T,
) -> Result<DVector<T>> {
    let m = nu.nrows();
    let n0 = p.ncols();
    let ltl = l.transpose() * l;
    let hi = linalg::singular_values(&ltl).first().copied().unwrap_or(T::zero());
    let pinv = ltl
        .pseudo_inverse(T::lit(1e-12) * hi)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let k = nu * &pinv * nu.transpose();
    let v = nu * p;
    let mut sys = DMatrix::zeros(m + n0, m + n0);
    sys.view_mut((0, 0), (m, m)).copy_from(&(k + DMatrix::identity(m, m) * lambda));
    sys.view_mut((0, m), (m, n0)).copy_from(&v);
    sys.view_mut((m, 0), (n0, m)).copy_from(&v.transpose());
    let mut rhs = DVector::zeros(m + n0);
    rhs.rows_mut(0, m).copy_from(y);
    let sol = linalg::solve_general(&sys, &rhs)?;
    let c = sol.rows(0, m).into_owned();
    let b = sol.rows(m, n0).into_owned();
    Ok(pinv * nu.transpose() * c + p * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    #[test]
    fn least_squares_to_target() {
        let y = v(&[1.0, -2.0, 0.5]);
        let yy = y.clone();
        let prob = GenericConvexProblem::new(3, move |x: &DVector<f64>| (x - &y).norm_squared(), move |x| (x - &yy) * 2.0);
        let sol = solve_generic(&prob, 100_000, 0);
        assert!((sol.x - v(&[1.0, -2.0, 0.5])).norm() < 1e-4);
        assert!(sol.best_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn heavy_l1_penalty_drives_to_zero() {
        let y = v(&[0.3, -0.2]);
        let yy = y.clone();
        let lambda = 10.0;
        let prob = GenericConvexProblem::new(
            2,
            move |x: &DVector<f64>| (x - &y).norm_squared() + lambda * x.lp_norm(1),
            move |x| (x - &yy) * 2.0 + x.map(|t| lambda * crate::scalar::sign(t)),
        );
        let sol = solve_generic(&prob, 50_000, 1);
        assert!(sol.x.norm() < 1e-4);
    }

    #[test]
    fn brute_force_dual_norms() {
        let b = brute_force_dual_norm(&v(&[1.0, 1.0]), &NormSpec::l2(), 100, 0).unwrap();
        assert!((b - 2.0_f64.sqrt()).abs() < 1e-15);
        let b = brute_force_dual_norm(&v(&[1.0, -2.0, 3.0]), &NormSpec::l1(), 100, 0).unwrap();
        assert!((b - 3.0).abs() < 1e-15);
        assert!(brute_force_dual_norm(&DVector::<f64>::zeros(9), &NormSpec::l2(), 10, 0).is_err());
    }

    #[test]
    fn ridge_solution_is_member() {
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.5, -0.3, 2.0, 0.0, 1.0, 1.0, -1.0]);
        let y = v(&[1.0, 2.0]);
        let f0 = h.transpose() * (&h * h.transpose() + DMatrix::identity(2, 2) * 0.1).try_inverse().unwrap() * y;
        let m = verify_representer_membership(&f0, &h, &NormSpec::l2(), 1e-10).unwrap();
        assert!(m.is_member && m.residual <= 1e-10);
        let perp = crate::linalg::null_space(&h, 1e-12).column(0).into_owned() * 0.1;
        let m = verify_representer_membership(&(f0 + perp), &h, &NormSpec::l2(), 1e-10).unwrap();
        assert!(!m.is_member);
    }

    #[test]
    fn l1_membership_is_unsupported() {
        let h = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            verify_representer_membership(&v(&[1.0, 0.0]), &h, &NormSpec::l1(), 1e-8),
            Err(Error::Unsupported(_))
        ));
    }
}
