//! Weak-form machinery: boundary lifting, stiffness assembly over the trained
//! subspace, rank-aware solve, and evaluation of the approximate solution.

pub mod form;
pub mod lift;
pub mod system;

pub use form::BilinearForm;
pub use lift::{lift, BasisEval, LiftedBasis};
pub use system::{
    assemble, evaluate_uh, evaluate_uh_grid, evaluate_uh_jet, GalerkinSystem, DEFAULT_RANK_TOL,
};
