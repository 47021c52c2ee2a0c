//! Norms, dual norms, duality mappings and extremal points for finite-dimensional
//! ℓp, weighted, transformed and direct-product spaces.

mod extremal;
mod map;
mod norm;

pub use extremal::{check_extremal_product, extremal_atoms, is_extremal};
pub use map::{composite_conjugate, duality_map, is_conjugate_pair, ConjugateReport};
pub use norm::{
    check_absolute, dual_norm_eval, norm_eval, Component, Composite, Exponent, NormSpec, Transformed,
    ABSOLUTENESS_PROBES,
};
