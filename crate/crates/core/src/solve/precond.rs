//! Block-diagonal Riesz-map preconditioner.
//!
//! Three SPD blocks: the norm-realizing displacement operator (volume plus
//! penalty terms), the fluid-pressure block tilde_a2 + a2, and the total
//! pressure mass weighted with 1/lambda + 1/(2 mu). Each block is factored
//! once; application is one triangular solve per block per iteration. When
//! the system carries the mean-value constraint row, the multiplier entry is
//! preconditioned with the dual norm of the constraint functional.

use super::ldlt::{Definiteness, EnvelopeLdlt};
use super::minres::PreconditionerOp;
use crate::forms::{assemble_ahat1, weighted_z_mass, Discretization, ModelParameters};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;
use crate::system::{pressure_block, BlockSystem};
use crate::Result;

pub struct Preconditioner {
    n_u: usize,
    n_p: usize,
    n_z: usize,
    block_u: EnvelopeLdlt,
    block_p: EnvelopeLdlt,
    block_z: EnvelopeLdlt,
    multiplier_weight: Option<f64>,
}

fn identity_on_constrained(matrix: &mut CsrMatrix, constrained: &[usize]) {
    let n = matrix.nrows;
    let mut is_c = vec![false; n];
    for &c in constrained {
        is_c[c] = true;
    }
    for i in 0..n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col_idx[k];
            if is_c[i] || is_c[j] {
                matrix.values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
}

pub fn build_preconditioner(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    system: &BlockSystem,
) -> Result<Preconditioner> {
    let scale = system.scaling.unwrap_or(1.0);
    let mut a_hat = assemble_ahat1(mesh, disc, params).matrix;
    let mut c1 = pressure_block(mesh, disc, params);
    let mut c2 = weighted_z_mass(mesh, disc, &|cell| {
        let tag = mesh.cell_tag[cell];
        1.0 / params.lambda(tag) + 1.0 / (2.0 * params.mu(tag))
    });
    if system.scaling.is_some() {
        for v in a_hat.values.iter_mut() {
            *v /= scale;
        }
        for v in c1.values.iter_mut() {
            *v *= scale;
        }
        for v in c2.values.iter_mut() {
            *v *= scale;
        }
    }
    identity_on_constrained(&mut a_hat, &disc.v.dofmap.constrained);
    identity_on_constrained(&mut c1, &disc.q.dofmap.constrained);
    let block_u = EnvelopeLdlt::new(&a_hat, &[], Definiteness::PositiveDefinite)?;
    let block_p = EnvelopeLdlt::new(&c1, &[], Definiteness::PositiveDefinite)?;
    let block_z = EnvelopeLdlt::new(&c2, &[], Definiteness::PositiveDefinite)?;
    let multiplier_weight = if system.has_mean_constraint {
        let ell: Vec<f64> =
            crate::forms::z_integral_vector(mesh, disc).iter().map(|v| v * scale).collect();
        let z = block_z.solve(&ell);
        Some(ell.iter().zip(&z).map(|(a, b)| a * b).sum())
    } else {
        None
    };
    Ok(Preconditioner {
        n_u: system.n_u,
        n_p: system.n_p,
        n_z: system.n_z,
        block_u,
        block_p,
        block_z,
        multiplier_weight,
    })
}

impl PreconditionerOp for Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let (n_u, n_p, n_z) = (self.n_u, self.n_p, self.n_z);
        let mut z = Vec::with_capacity(r.len());
        z.extend(self.block_u.solve(&r[..n_u]));
        z.extend(self.block_p.solve(&r[n_u..n_u + n_p]));
        z.extend(self.block_z.solve(&r[n_u + n_p..n_u + n_p + n_z]));
        if let Some(w) = self.multiplier_weight {
            z.push(r[n_u + n_p + n_z] / w);
        }
        z
    }
}
