//! Linear solvers: sparse direct LDL^T and preconditioned MINRES.

mod condition;
mod dd;
mod ldlt;
mod minres;
mod precond;

pub use condition::{condition_estimate, ConditionEstimate};
pub use ldlt::{rcm_order, Definiteness, EnvelopeLdlt};
pub use minres::{minres, IdentityPrecond, PreconditionerOp};
pub use precond::{build_preconditioner, Preconditioner};

use crate::system::{BlockSystem, Solution};
use crate::{Error, Result};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Final relative (unpreconditioned) residual.
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
}

/// Direct solve through the envelope LDL^T, with iterative refinement to
/// push the relative residual under 1e-10 when conditioning allows.
pub fn solve_direct(system: &BlockSystem) -> Result<(Solution, SolveReport)> {
    let t0 = Instant::now();
    let n = system.n();
    let pinned: Vec<usize> = if system.has_mean_constraint { vec![n - 1] } else { Vec::new() };
    let factor = EnvelopeLdlt::new(&system.matrix, &pinned, Definiteness::Indefinite).map_err(|e| match e {
        Error::SingularSystem(msg) => Error::SingularSystem(format!(
            "{msg}; a pressure field without essential boundary or mean constraint leaves a free constant"
        )),
        other => other,
    })?;
    let b_norm = system.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = factor.solve(&system.rhs);
    let mut residual = 0.0;
    for _ in 0..4 {
        let ax = system.matrix.matvec_alloc(&x);
        let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        residual = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual <= 1e-12 * b_norm.max(1e-300) {
            break;
        }
        let dx = factor.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    let report = SolveReport {
        iterations: 1,
        residual: if b_norm > 0.0 { residual / b_norm } else { 0.0 },
        seconds: t0.elapsed().as_secs_f64(),
        converged: b_norm == 0.0 || residual <= 1e-10 * b_norm,
    };
    Ok((system.split_solution(&x), report))
}

/// Preconditioned MINRES on the block system.
pub fn solve_minres(
    system: &BlockSystem,
    precond: &dyn PreconditionerOp,
    rtol: f64,
    maxit: usize,
) -> (Solution, Result<SolveReport>) {
    let (x, report) = minres(&system.matrix, &system.rhs, precond, rtol, maxit);
    (system.split_solution(&x), report)
}
