//! Multi-dictionary sparse recovery: union dictionaries, synthesis LASSO,
//! reduction to extreme points and the two-component sparse-plus-smooth problem.

mod dictionary;
mod extreme;
mod lasso;
mod mixed;
mod prox;

pub use dictionary::{
    analysis_objective, build_union_dictionary, forward_difference, DictionaryProblem, DictionarySolution,
};
pub use extreme::{reduce_to_extreme, Reduction};
pub use lasso::{
    active_set_refine, kkt_tolerance, lasso_kkt, lasso_objective, polish, solve_synthesis_lasso, support_of, SparseSolution,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
pub use mixed::{mixed_objective, solve_mixed_two_component, tikhonov, MixedSolution};
pub use prox::l1_kkt_residual;
