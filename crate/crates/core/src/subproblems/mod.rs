//! Linear-algebra kernels: the trust-region subproblem, regularized solves,
//! null-space reduction for tangential steps and the contraction λ-searches.

pub mod nullspace;
pub mod search;
pub mod tangential;
pub mod trs;

pub use nullspace::{null_space_basis, projected_gradient, NullBasis};
pub use search::{f_contract_lambda_search, v_contract_lambda_search, RatioSearch};
pub use tangential::{solve_tangential, solve_tangential_regularized, TangentialSolution};
pub use trs::{quadratic_value, solve_regularized, solve_trs, TrsSolution};
