//! Self-contained MILP kernel: expression-based modeller, bounded-variable
//! primal simplex, branch-and-bound over binary variables, and LP-file
//! import/export for cross-checks against external solvers.

mod branch;
mod expr;
mod lpfile;
mod model;
mod simplex;

pub use branch::{solve_milp, MilpOptions, MilpSolution, MilpStatus};
pub use expr::LinExpr;
pub use lpfile::{export_lp, export_lp_file, import_lp, import_lp_file};
pub use model::{Constraint, MilpError, MilpProblem, Sense, VarId, VarKind, Variable};
pub use simplex::{solve_lp, solve_lp_bounded, LpSolution, LpStatus};

/// Feasibility tolerance of the LP solver.
pub const FEAS_TOL: f64 = 1e-7;
/// Optimality (reduced-cost) tolerance of the LP solver.
pub const OPT_TOL: f64 = 1e-7;
/// A binary is considered integral within this distance of 0 or 1.
pub const INT_TOL: f64 = 1e-6;
/// Default absolute bound-gap tolerance of branch-and-bound.
pub const GAP_TOL: f64 = 1e-6;
