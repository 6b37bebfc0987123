//! Convex solvers: a dense simplex LP backend, a primal-dual first-order
//! backend for the self-expressive models, projections, NNLS and nonnegative
//! L1 regression.

mod firstorder;
mod l1;
mod lp;
mod nnls;
mod projection;
mod simplex;

pub use firstorder::{
    project_dual_ball, project_l1_ball, shrink_columns_linf, solve_first_order, FirstOrderOptions,
    FirstOrderProblem, FirstOrderSolution, FirstOrderStatus, ResidualTerm,
};
pub use l1::solve_l1_regression_nonneg;
pub use lp::{LinearProgram, LpSolution, LpStatus, Sense};
pub use nnls::{least_squares_subset, solve_nnls, NnlsSolution};
pub use projection::{
    model_p_violation, project_capsets, project_model_p_dykstra, project_model_p_feasible,
    project_row_capset,
};
pub use simplex::{solve_lp_simplex, SimplexOptions};
