//! Semi-norm regularized fitting on a grid: biorthogonal splitting of the
//! measurement space, quadratic (Hilbert) semi-norm fits and sparse
//! (generalized total-variation) splines with unpenalized null space.

mod biortho;
mod gtv;
mod hilbert;
mod operators;

pub use biortho::{build_biortho, check_rank, reduce_measurements, BiorthoSystem, RANK_TOL};
pub use gtv::{fit_gtv_spline, gtv_lambda_max, gtv_objective, SplineFit, KNOT_REL_TOL};
pub use hilbert::{fit_hilbert_seminorm, seminorm_pseudo_inverse, HilbertFit};
pub use operators::{interpolation_matrix, projector_coeffs, NullSpaceSystem, SplineOperator};
