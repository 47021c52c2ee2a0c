//! Finite-dimensional representer-theorem solvers.
//!
//! The crate covers regularized linear inverse problems whose regularizer is
//! a norm (or semi-norm) on a sum or product of finite-dimensional Banach
//! spaces:
//!
//! - [`duality`]: `ℓp`, weighted, transformed and composite norms, their dual
//!   norms, duality mappings, conjugate-pair certificates and extremal points;
//! - [`kernel`] and [`multikernel`]: Gram matrices, multi-kernel models and
//!   the two multi-kernel regression solvers (weighted `ℓ2` and `ℓ1` outer norms);
//! - [`sparse`]: union-dictionary LASSO, extreme-point reduction and the
//!   sparse-plus-smooth two-component problem;
//! - [`spline`]: biorthogonal splitting of measurement space, quadratic
//!   semi-norm fits and sparse (gTV) splines on a grid;
//! - [`oracle`]: slow, independent reference solvers used for cross-checks.
//!
//! Everything is generic over the scalar type through [`Real`]; the
//! `*64`/`*32` aliases below fix it to `f64`/`f32`.
//!
//! ```
//! use banach_rep::{duality, NormSpec64, Vector64};
//!
//! let norm = NormSpec64::lp(3.0)?;
//! let x = Vector64::from_vec(vec![1.0, -2.0, 0.5]);
//! let xstar = duality::duality_map(&x, &norm)?;
//! let report = duality::is_conjugate_pair(&x, &xstar, &norm, 1e-10)?;
//! assert!(report.is_conjugate);
//! # Ok::<(), banach_rep::Error>(())
//! ```

// `!(a <= b)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod duality;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod multikernel;
pub mod oracle;
pub mod random;
pub mod scalar;
pub mod sparse;
pub mod spline;

pub use error::{Error, Result};
pub use scalar::Real;

pub type NormSpec64 = duality::NormSpec<f64>;
pub type NormSpec32 = duality::NormSpec<f32>;
pub type KernelSpec64 = kernel::KernelSpec<f64>;
pub type KernelModel64 = kernel::KernelModel<f64>;
pub type MultiKernel64 = kernel::MultiKernel<f64>;
pub type MultiKernelProblem64 = multikernel::MultiKernelProblem<f64>;
pub type DictionaryProblem64 = sparse::DictionaryProblem<f64>;
pub type SparseSolution64 = sparse::SparseSolution<f64>;
pub type MixedSolution64 = sparse::MixedSolution<f64>;
pub type BiorthoSystem64 = spline::BiorthoSystem<f64>;
pub type SplineFit64 = spline::SplineFit<f64>;
pub type HilbertFit64 = spline::HilbertFit<f64>;
pub type Matrix64 = nalgebra::DMatrix<f64>;
pub type Vector64 = nalgebra::DVector<f64>;
pub type Matrix32 = nalgebra::DMatrix<f32>;
pub type Vector32 = nalgebra::DVector<f32>;
