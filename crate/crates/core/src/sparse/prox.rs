//! Accelerated proximal gradient for `smooth(x) + λ‖x‖₁`.

use nalgebra::DVector;

use crate::scalar::{sign, soft_threshold, Real};

/// Value and gradient of the smooth part.
pub(crate) trait Smooth<T: Real> {
    fn eval(&mut self, x: &DVector<T>) -> (T, DVector<T>);
}

impl<T: Real, F: FnMut(&DVector<T>) -> (T, DVector<T>)> Smooth<T> for F {
    fn eval(&mut self, x: &DVector<T>) -> (T, DVector<T>) {
        self(x)
    }
}

pub(crate) struct ProxState<T: Real> {
    pub x: DVector<T>,
    pub iterations: usize,
}

/// FISTA with backtracking on the Lipschitz estimate and adaptive restart.
///
/// `stop(x, ∇smooth(x), iteration)` is polled after every step; returning
/// `true` ends the run.
pub(crate) fn fista_l1<T, S>(
    smooth: &mut S,
    lambda: T,
    x0: DVector<T>,
    lipschitz: T,
    max_iter: usize,
    mut stop: impl FnMut(&DVector<T>, &DVector<T>, usize) -> bool,
) -> ProxState<T>
where
    T: Real,
    S: Smooth<T>,
{
    let two = T::lit(2.0);
    let mut lip = lipschitz.max(T::lit(1e-12));
    let mut x = x0;
    let (mut fx, mut gx) = smooth.eval(&x);
    let mut y = x.clone();
    let mut theta = T::one();
    let mut iterations = 0;
    if stop(&x, &gx, 0) {
        return ProxState { x, iterations };
    }
    for it in 1..=max_iter {
        iterations = it;
        let (fy, gy) = smooth.eval(&y);
        let (x_new, f_new, g_new) = loop {
            let t = T::one() / lip;
            let cand = (&y - &gy * t).map(|v| soft_threshold(v, lambda * t));
            let (fc, gc) = smooth.eval(&cand);
            let d = &cand - &y;
            let model = fy + gy.dot(&d) + d.norm_squared() * lip / two;
            let slack = T::default_epsilon() * T::lit(10.0) * (T::one() + fy.abs());
            if fc <= model + slack || lip > T::lit(1e30) {
                break (cand, fc, gc);
            }
            lip *= two;
        };
        let total_new = f_new + lambda * x_new.lp_norm(1);
        let total_old = fx + lambda * x.lp_norm(1);
        let restart = total_new > total_old || (&y - &x_new).dot(&(&x_new - &x)) > T::zero();
        let theta_next = (T::one() + (T::one() + T::lit(4.0) * theta * theta).sqrt()) / two;
        let beta = if restart { T::zero() } else { (theta - T::one()) / theta_next };
        theta = if restart { T::one() } else { theta_next };
        y = &x_new + (&x_new - &x) * beta;
        x = x_new;
        fx = f_new;
        gx = g_new;
        if stop(&x, &gx, it) {
            break;
        }
    }
    ProxState { x, iterations }
}

/// Largest violation of the `ℓ1` optimality conditions given the smooth gradient:
/// `|g_j + λ sign(c_j)|` on the support, `(|g_j| − λ)₊` off it.
pub fn l1_kkt_residual<T: Real>(c: &DVector<T>, grad: &DVector<T>, lambda: T) -> T {
    c.iter().zip(grad.iter()).fold(T::zero(), |acc, (&cj, &gj)| {
        let r = if cj != T::zero() {
            (gj + lambda * sign(cj)).abs()
        } else {
            (gj.abs() - lambda).max(T::zero())
        };
        acc.max(r)
    })
}
