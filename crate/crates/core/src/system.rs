//! The 3x3 block saddle-point system for either formulation.
//!
//! Block layout (after multiplying the mass-conservation equation by -1 so
//! the monolithic matrix is symmetric indefinite):
//!
//! ```text
//!   [ A1h   0    B1^T ] [ u ]   [ F ]
//!   [ 0    -C1   B2^T ] [ p ] = [ dt G ]
//!   [ B1    B2  -C2   ] [ phi]  [ 0 ]
//! ```
//!
//! with C1 = tilde_a2 + dt a2 (or the SIP variant), C2 the 1/lambda mass.
//! Dirichlet dofs are eliminated symmetrically. A mean-value row for the
//! total pressure can be appended, and the system can be rescaled by the
//! maximal shear modulus for conditioning.

use crate::forms::{
    assemble_a1h, assemble_a2_cg, assemble_a2h_dg, assemble_a3, assemble_b1, assemble_b2,
    assemble_rhs, assemble_tilde_a2, z_integral_vector, Discretization, Formulation,
    ModelParameters, ProblemData,
};
use crate::mesh::Mesh;
use crate::sparse::{CsrMatrix, Triplets};
use crate::Result;

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub phi: Vec<f64>,
    pub multiplier: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub n_u: usize,
    pub n_p: usize,
    pub n_z: usize,
    pub formulation: Formulation,
    /// Eliminated monolithic dofs with their prescribed (physical) values.
    pub constrained: Vec<(usize, f64)>,
    pub has_mean_constraint: bool,
    /// The factor mu0 when the system has been rescaled.
    pub scaling: Option<f64>,
}

impl BlockSystem {
    pub fn n(&self) -> usize {
        self.matrix.nrows
    }

    pub fn offset_p(&self) -> usize {
        self.n_u
    }

    pub fn offset_z(&self) -> usize {
        self.n_u + self.n_p
    }

    /// Split a solution vector into fields, undoing the pressure rescale.
    pub fn split_solution(&self, x: &[f64]) -> Solution {
        let s = self.scaling.unwrap_or(1.0);
        let u = x[..self.n_u].to_vec();
        let p = x[self.n_u..self.n_u + self.n_p].iter().map(|v| v * s).collect();
        let phi = x[self.offset_z()..self.offset_z() + self.n_z].iter().map(|v| v * s).collect();
        let multiplier = if self.has_mean_constraint { Some(x[self.n() - 1]) } else { None };
        Solution { u, p, phi, multiplier }
    }
}

/// The fluid-pressure diagonal block tilde_a2 + dt a2 (SIP variant for the
/// discontinuous formulation); also the middle preconditioner block.
pub fn pressure_block(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> CsrMatrix {
    let a2 = match disc.formulation {
        Formulation::CgPressure => assemble_a2_cg(mesh, disc, params),
        Formulation::DgPressure => assemble_a2h_dg(mesh, disc, params),
    };
    let tilde = assemble_tilde_a2(mesh, disc, params);
    let mut t = Triplets::new(a2.matrix.nrows, a2.matrix.ncols);
    t.push_block(0, 0, &tilde.matrix, false, 1.0);
    t.push_block(0, 0, &a2.matrix, false, params.dt);
    t.to_csr()
}

pub fn build_system(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    data: &dyn ProblemData,
) -> Result<BlockSystem> {
    params.validate()?;
    let (n_u, n_p, n_z) = (disc.v.n_dofs(), disc.q.n_dofs(), disc.z.n_dofs());
    let n = n_u + n_p + n_z;
    let a1 = assemble_a1h(mesh, disc, params);
    let c1 = pressure_block(mesh, disc, params);
    let b1 = assemble_b1(mesh, disc, params);
    let b2 = assemble_b2(mesh, disc, params);
    let a3 = assemble_a3(mesh, disc, params);
    let (f, g) = assemble_rhs(mesh, disc, params, data)?;

    let (off_p, off_z) = (n_u, n_u + n_p);
    let mut trips = Triplets::new(n, n);
    trips.push_block(0, 0, &a1.matrix, false, 1.0);
    trips.push_block(off_z, 0, &b1.matrix, false, 1.0);
    trips.push_block(0, off_z, &b1.matrix, true, 1.0);
    trips.push_block(off_p, off_p, &c1, false, -1.0);
    trips.push_block(off_z, off_p, &b2.matrix, false, 1.0);
    trips.push_block(off_p, off_z, &b2.matrix, true, 1.0);
    trips.push_block(off_z, off_z, &a3.matrix, false, -1.0);
    let mut matrix = trips.to_csr();

    let mut rhs = vec![0.0; n];
    rhs[..n_u].copy_from_slice(&f);
    for (i, v) in g.iter().enumerate() {
        rhs[off_p + i] = params.dt * v;
    }

    // symmetric elimination of Dirichlet dofs
    let mut constrained = Vec::new();
    for (dof, value) in crate::forms::displacement_constraint_values(mesh, disc, data) {
        constrained.push((dof, value));
    }
    for (dof, value) in crate::forms::pressure_constraint_values(mesh, disc, data) {
        constrained.push((off_p + dof, value));
    }
    eliminate(&mut matrix, &mut rhs, &constrained);

    Ok(BlockSystem {
        matrix,
        rhs,
        n_u,
        n_p,
        n_z,
        formulation: disc.formulation,
        constrained,
        has_mean_constraint: false,
        scaling: None,
    })
}

fn eliminate(matrix: &mut CsrMatrix, rhs: &mut [f64], constrained: &[(usize, f64)]) {
    let n = matrix.nrows;
    let mut is_c = vec![false; n];
    let mut value = vec![0.0; n];
    for &(dof, v) in constrained {
        is_c[dof] = true;
        value[dof] = v;
    }
    // move known columns to the right-hand side (symmetry: use rows)
    for &(dof, v) in constrained {
        for k in matrix.row_ptr[dof]..matrix.row_ptr[dof + 1] {
            let j = matrix.col_idx[k];
            if !is_c[j] {
                rhs[j] -= matrix.values[k] * v;
            }
        }
    }
    for i in 0..n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col_idx[k];
            if is_c[i] || is_c[j] {
                matrix.values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    for &(dof, v) in constrained {
        rhs[dof] = v;
    }
}

/// Append the real Lagrange multiplier row constraining the mean of the
/// total pressure to `mean_value`. Must come after any rescaling.
pub fn attach_mean_constraint(
    system: &BlockSystem,
    mesh: &Mesh,
    disc: &Discretization,
    mean_value: f64,
) -> BlockSystem {
    assert!(!system.has_mean_constraint, "mean constraint already attached");
    let n = system.n();
    let integral = z_integral_vector(mesh, disc);
    let col_scale = system.scaling.unwrap_or(1.0);
    let mut trips = Triplets::new(n + 1, n + 1);
    trips.push_block(0, 0, &system.matrix, false, 1.0);
    let off_z = system.offset_z();
    for (i, &v) in integral.iter().enumerate() {
        // the unknown is phi / mu0 in the scaled system
        trips.push(n, off_z + i, v * col_scale);
        trips.push(off_z + i, n, v * col_scale);
    }
    let matrix = trips.to_csr();
    let mut rhs = system.rhs.clone();
    rhs.push(mean_value);
    BlockSystem {
        matrix,
        rhs,
        n_u: system.n_u,
        n_p: system.n_p,
        n_z: system.n_z,
        formulation: system.formulation,
        constrained: system.constrained.clone(),
        has_mean_constraint: true,
        scaling: system.scaling,
    }
}

/// Rescale the system by the maximal shear modulus: momentum rows by 1/mu0
/// and both pressure unknowns by mu0 (so the returned system solves for
/// p/mu0 and phi/mu0). Symmetry is preserved by the block structure.
pub fn apply_scaling(system: &BlockSystem, params: &ModelParameters) -> BlockSystem {
    assert!(!system.has_mean_constraint, "scale before attaching the mean constraint");
    assert!(system.scaling.is_none(), "system already scaled");
    let mu0 = params.mu0();
    let n = system.n();
    let mut dl = vec![1.0; n];
    let mut dr = vec![1.0; n];
    for d in dl.iter_mut().take(system.n_u) {
        *d = 1.0 / mu0;
    }
    for d in dr.iter_mut().skip(system.n_u) {
        *d = mu0;
    }
    let mut matrix = system.matrix.clone();
    matrix.scale(&dl, &dr);
    let mut rhs = system.rhs.clone();
    for (i, r) in rhs.iter_mut().enumerate() {
        *r *= dl[i];
    }
    BlockSystem {
        matrix,
        rhs,
        n_u: system.n_u,
        n_p: system.n_p,
        n_z: system.n_z,
        formulation: system.formulation,
        constrained: system.constrained.clone(),
        has_mean_constraint: false,
        scaling: Some(mu0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ZeroData;
    use crate::mesh::{build_mesh, GeometrySpec};

    fn example_disc(k: usize, formulation: Formulation) -> (crate::mesh::Mesh, Discretization, ModelParameters) {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let disc = Discretization::new(&mesh, k, formulation);
        (mesh, disc, ModelParameters::example1(k))
    }

    #[test]
    fn monolithic_system_is_symmetric_with_zero_a12() {
        for formulation in [Formulation::CgPressure, Formulation::DgPressure] {
            let (mesh, disc, params) = example_disc(0, formulation);
            let sys = build_system(&mesh, &disc, &params, &ZeroData).unwrap();
            let (asym, amax) = sys.matrix.symmetry_error();
            assert!(asym <= 1e-12 * amax, "asym {asym} vs max {amax}");
            // displacement-pressure coupling block is identically zero
            for i in 0..sys.n_u {
                for k in sys.matrix.row_ptr[i]..sys.matrix.row_ptr[i + 1] {
                    let j = sys.matrix.col_idx[k];
                    if j >= sys.offset_p() && j < sys.offset_z() {
                        assert_eq!(sys.matrix.values[k], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn scaling_is_identity_when_mu0_is_one() {
        let mesh = build_mesh(&GeometrySpec::unit_square_split(), 2).unwrap();
        let disc = Discretization::new(&mesh, 0, Formulation::CgPressure);
        let mut params = ModelParameters::example1(0);
        params.mu_e = 1.0;
        params.mu_p = 1.0;
        let sys = build_system(&mesh, &disc, &params, &ZeroData).unwrap();
        let scaled = apply_scaling(&sys, &params);
        for (a, b) in sys.matrix.values.iter().zip(&scaled.matrix.values) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn mean_constraint_row_integrates_constants() {
        let (mesh, disc, params) = example_disc(0, Formulation::CgPressure);
        let sys = build_system(&mesh, &disc, &params, &ZeroData).unwrap();
        let with = attach_mean_constraint(&sys, &mesh, &disc, 0.0);
        let n = with.n() - 1;
        // constraint row applied to the constant-one total pressure
        let mut x = vec![0.0; with.n()];
        for i in with.offset_z()..with.offset_z() + with.n_z {
            x[i] = 1.0;
        }
        let y = with.matrix.matvec_alloc(&x);
        assert!((y[n] - 1.0).abs() < 1e-12, "area of unit square, got {}", y[n]);
    }
}
