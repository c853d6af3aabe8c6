//! Divergence-conforming finite elements for the steady coupling of a linear
//! elastic body with a Biot poroelastic body across a fixed interface.
//!
//! The displacement lives in an H(div)-conforming BDM space with tangential
//! jumps controlled by a symmetric interior penalty, the fluid pressure in a
//! continuous or discontinuous Lagrange space on the poroelastic subdomain,
//! and the total pressure (Herrmann pressure on the elastic side) in a
//! discontinuous space on the whole domain. On top of the discretisation the
//! crate provides residual a posteriori error indicators with adaptive
//! refinement, and a parameter-robust block-diagonal preconditioner for
//! MINRES.

pub mod adapt;
pub mod elements;
pub mod estimate;
pub mod forms;
pub mod harness;
pub mod io;
pub mod mesh;
pub mod quadrature;
pub mod solve;
pub mod sparse;
pub mod system;

use thiserror::Error;

/// Errors surfaced by mesh construction, assembly, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("degenerate cell {cell}: |det J| = {det:e}")]
    DegenerateCell { cell: usize, det: f64 },
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("matrix block is not positive definite: {0}")]
    NotSpd(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("all indicators are zero")]
    AllZero,
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
