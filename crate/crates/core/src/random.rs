//! Seeded random helpers used by the randomized checks and the oracles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Real;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<T> {
    DVector::from_fn(n, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

pub fn normal_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

pub fn uniform_vector<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> DVector<T> {
    DVector::from_fn(n, |_, _| T::lit(rng.random_range(lo..hi)))
}

/// Random matrix `I + δ·Q` with `δ` small enough that the result is well conditioned.
pub fn well_conditioned_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<T> {
    let g: DMatrix<T> = normal_matrix(rng, n, n);
    let scale = T::lit(0.5) / T::lit((n as f64).sqrt().max(1.0));
    DMatrix::identity(n, n) + g * scale
}
