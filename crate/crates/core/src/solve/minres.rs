//! Preconditioned MINRES (Paige-Saunders recurrences).
//!
//! Convergence is declared on the Euclidean norm of the unpreconditioned
//! residual of the whole system, reduced by the requested factor; the
//! residual is recomputed explicitly each iteration.

use super::SolveReport;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use std::time::Instant;

pub trait PreconditionerOp {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Identity preconditioner, for oracle comparisons.
pub struct IdentityPrecond;

impl PreconditionerOp for IdentityPrecond {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve the symmetric (possibly indefinite) system with preconditioned
/// MINRES. The preconditioner must be symmetric positive definite.
pub fn minres(
    matrix: &CsrMatrix,
    rhs: &[f64],
    precond: &dyn PreconditionerOp,
    rtol: f64,
    maxit: usize,
) -> (Vec<f64>, Result<SolveReport>) {
    let t0 = Instant::now();
    let n = matrix.nrows;
    let mut x = vec![0.0; n];
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return (
            x,
            Ok(SolveReport { iterations: 0, residual: 0.0, seconds: t0.elapsed().as_secs_f64(), converged: true }),
        );
    }
    let target = rtol * b_norm;

    let r1 = rhs.to_vec();
    let mut y = precond.apply(&r1);
    let beta1 = dot(&r1, &y);
    assert!(beta1 > 0.0, "preconditioner is not positive definite");
    let beta1 = beta1.sqrt();

    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut r1 = r1;
    let mut r2 = r1.clone();

    let mut residual = b_norm;
    for iter in 1..=maxit {
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| yi * s).collect();
        let mut ay = matrix.matvec_alloc(&v);
        if iter >= 2 {
            let c = beta / oldb;
            for (a, r) in ay.iter_mut().zip(&r1) {
                *a -= c * r;
            }
        }
        let alfa = dot(&v, &ay);
        let c = alfa / beta;
        for (a, r) in ay.iter_mut().zip(&r2) {
            *a -= c * r;
        }
        r1 = std::mem::replace(&mut r2, ay);
        y = precond.apply(&r2);
        oldb = beta;
        let beta2 = dot(&r2, &y);
        assert!(beta2 >= 0.0, "preconditioner is not positive definite");
        beta = beta2.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, std::mem::take(&mut w));
        w = (0..n).map(|i| (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma).collect();
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi += phi * wi;
        }

        // explicit unpreconditioned residual for the stopping rule
        let ax = matrix.matvec_alloc(&x);
        residual = (0..n).map(|i| (rhs[i] - ax[i]).powi(2)).sum::<f64>().sqrt();
        if residual <= target {
            return (
                x,
                Ok(SolveReport {
                    iterations: iter,
                    residual: residual / b_norm,
                    seconds: t0.elapsed().as_secs_f64(),
                    converged: true,
                }),
            );
        }
    }
    (x, Err(Error::NoConvergence { iterations: maxit, residual: residual / b_norm }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    /// Dense reference MINRES with the identity preconditioner, kept
    /// independent of the sparse implementation above.
    fn dense_minres(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DVector<f64>, iters: usize) -> Vec<nalgebra::DVector<f64>> {
        // Lanczos + least squares on the Krylov basis; returns iterates
        let n = b.len();
        let mut qs = vec![b / b.norm()];
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut iterates = Vec::new();
        for j in 0..iters {
            let mut v = a * &qs[j];
            if j > 0 {
                v -= &qs[j - 1] * betas[j - 1];
            }
            let alpha = qs[j].dot(&v);
            v -= &qs[j] * alpha;
            alphas.push(alpha);
            let beta = v.norm();
            betas.push(beta);
            // T is (j+2) x (j+1)
            let m = j + 1;
            let mut t = nalgebra::DMatrix::<f64>::zeros(m + 1, m);
            for i in 0..m {
                t[(i, i)] = alphas[i];
                if i + 1 <= m {
                    t[(i + 1, i)] = betas[i];
                }
                if i + 1 < m {
                    t[(i, i + 1)] = betas[i];
                }
            }
            let mut e1 = nalgebra::DVector::zeros(m + 1);
            e1[0] = b.norm();
            let yj = t.clone().svd(true, true).solve(&e1, 1e-14).unwrap();
            let mut xj = nalgebra::DVector::zeros(n);
            for i in 0..m {
                xj += &qs[i] * yj[i];
            }
            iterates.push(xj);
            if beta < 1e-14 {
                break;
            }
            qs.push(v / beta);
        }
        iterates
    }

    #[test]
    fn matches_dense_reference_iterates() {
        // small SPD-definite diagonal-dominant matrix
        let n = 12;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 3.0 + (i as f64 * 0.5).sin());
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        let a = t.to_csr();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).cos()).collect();
        let ad = a.to_dense();
        let bd = nalgebra::DVector::from_vec(b.clone());
        let reference = dense_minres(&ad, &bd, 8);
        for (it, xref) in reference.iter().enumerate() {
            let (x, _) = minres_fixed_iterations(&a, &b, it + 1);
            for i in 0..n {
                assert!(
                    (x[i] - xref[i]).abs() < 1e-10,
                    "iterate {} component {i}: {} vs {}",
                    it + 1,
                    x[i],
                    xref[i]
                );
            }
        }
    }

    /// Run exactly `iters` iterations (no early exit) for the oracle test.
    fn minres_fixed_iterations(a: &CsrMatrix, b: &[f64], iters: usize) -> (Vec<f64>, f64) {
        let (x, rep) = minres(a, b, &IdentityPrecond, 0.0, iters);
        let res = match rep {
            Ok(r) => r.residual,
            Err(Error::NoConvergence { residual, .. }) => residual,
            Err(e) => panic!("{e}"),
        };
        (x, res)
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let mut t = Triplets::new(3, 3);
        for i in 0..3 {
            t.push(i, i, 1.0);
        }
        let a = t.to_csr();
        let (x, rep) = minres(&a, &[0.0; 3], &IdentityPrecond, 1e-8, 10);
        assert!(rep.unwrap().converged);
        assert_eq!(x, vec![0.0; 3]);
    }
}
