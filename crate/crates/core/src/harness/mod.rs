//! Experiment harness: cases, error computation, runs, config, CSV output.

pub mod cases;
pub mod config;
pub mod csvfmt;
pub mod errors;
pub mod exact;
pub mod runs;

pub use cases::Case;
pub use config::CaseConfig;
pub use errors::{compute_errors, rate_dof, rate_h, ErrorComponents};
pub use exact::{l_shape_solution, linear_solution, square_solution, ExactSolution};
pub use runs::{run_adaptive, run_convergence, run_precond_sweep, run_solve, solve_case, ConvergenceRow};
