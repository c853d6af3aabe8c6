//! Discrete spaces: BDM displacement, Lagrange fluid pressure (continuous or
//! discontinuous) on the poroelastic subdomain, discontinuous total pressure.

mod dofmap;
mod interpolate;
mod reference;

pub use dofmap::{build_dofmap, DofEntity, DofMap};
pub use interpolate::{interpolate_scalar, interpolate_vector};
pub use reference::{legendre01, monomials, ref_edge, BdmElement, LagrangeElement, ScalarTabulation, VectorTabulation};

use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    BdmHdiv,
    LagrangeCg,
    LagrangeDg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    Whole,
    PoroOnly,
}

/// Specification of one discrete space. `degree` is the polynomial degree of
/// the element itself (the BDM displacement and the fluid pressure use k+1,
/// the total pressure uses k, where k is the method order).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceSpec {
    pub family: Family,
    pub degree: usize,
    pub restriction: Restriction,
}

impl SpaceSpec {
    pub fn displacement(k: usize) -> Self {
        SpaceSpec { family: Family::BdmHdiv, degree: k + 1, restriction: Restriction::Whole }
    }

    pub fn pressure_cg(k: usize) -> Self {
        SpaceSpec { family: Family::LagrangeCg, degree: k + 1, restriction: Restriction::PoroOnly }
    }

    pub fn pressure_dg(k: usize) -> Self {
        SpaceSpec { family: Family::LagrangeDg, degree: k + 1, restriction: Restriction::PoroOnly }
    }

    pub fn total_pressure(k: usize) -> Self {
        SpaceSpec { family: Family::LagrangeDg, degree: k, restriction: Restriction::Whole }
    }

    pub fn poro_only(&self) -> bool {
        self.restriction == Restriction::PoroOnly
    }
}

enum Element {
    Bdm(BdmElement),
    Lagrange(LagrangeElement),
}

/// A discrete space bound to a mesh: reference element plus dof map.
pub struct Space {
    pub spec: SpaceSpec,
    pub dofmap: DofMap,
    element: Element,
}

impl Space {
    pub fn new(spec: SpaceSpec, mesh: &Mesh) -> Self {
        let element = match spec.family {
            Family::BdmHdiv => Element::Bdm(BdmElement::new(spec.degree)),
            Family::LagrangeCg | Family::LagrangeDg => Element::Lagrange(LagrangeElement::new(spec.degree)),
        };
        let dofmap = build_dofmap(&spec, mesh);
        Space { spec, dofmap, element }
    }

    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    pub fn bdm(&self) -> &BdmElement {
        match &self.element {
            Element::Bdm(el) => el,
            _ => panic!("not a BDM space"),
        }
    }

    pub fn lagrange(&self) -> &LagrangeElement {
        match &self.element {
            Element::Lagrange(el) => el,
            _ => panic!("not a Lagrange space"),
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.element, Element::Bdm(_))
    }

    /// Tabulate the reference element at the given reference points.
    pub fn tabulate_vector(&self, points: &[[f64; 2]]) -> VectorTabulation {
        self.bdm().tabulate(points)
    }

    pub fn tabulate_scalar(&self, points: &[[f64; 2]]) -> ScalarTabulation {
        self.lagrange().tabulate(points)
    }
}

/// Affine geometry of one cell: x = v0 + J xi.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub verts: [[f64; 2]; 3],
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    pub diameter: f64,
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, cell: usize) -> Result<Self> {
        let verts = mesh.cell_vertices(cell);
        let [a, b, c] = verts;
        let jac = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac[0][0].abs().max(jac[0][1].abs()).max(jac[1][0].abs()).max(jac[1][1].abs());
        if det.abs() <= 1e-14 * scale * scale {
            return Err(Error::DegenerateCell { cell, det });
        }
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Ok(CellGeometry { verts, jac, inv, det, area: 0.5 * det, diameter: mesh.cell_diameter(cell) })
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.verts[0][0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.verts[0][1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let dx = [x[0] - self.verts[0][0], x[1] - self.verts[0][1]];
        [self.inv[0][0] * dx[0] + self.inv[0][1] * dx[1], self.inv[1][0] * dx[0] + self.inv[1][1] * dx[1]]
    }
}

/// Physical basis values of a vector (BDM) space on one cell.
pub struct MappedVector {
    pub n_dofs: usize,
    pub n_points: usize,
    /// value[dof * n_points + q]
    pub value: Vec<[f64; 2]>,
    /// grad[dof * n_points + q][a][b] = d v_a / d x_b
    pub grad: Vec<[[f64; 2]; 2]>,
    pub div: Vec<f64>,
}

/// Contravariant Piola map of a reference tabulation.
pub fn map_vector(tab: &VectorTabulation, geo: &CellGeometry, signs: &[f64]) -> MappedVector {
    let n = tab.n_dofs;
    let np = tab.n_points;
    let mut value = vec![[0.0; 2]; n * np];
    let mut grad = vec![[[0.0; 2]; 2]; n * np];
    let mut div = vec![0.0; n * np];
    let j = geo.jac;
    let inv = geo.inv;
    let s = 1.0 / geo.det;
    for i in 0..n {
        let sign = signs[i] * s;
        for q in 0..np {
            let v = tab.value[i * np + q];
            value[i * np + q] =
                [sign * (j[0][0] * v[0] + j[0][1] * v[1]), sign * (j[1][0] * v[0] + j[1][1] * v[1])];
            let g = tab.grad[i * np + q];
            // dv_a/dx_b = sign/det * J[a][i] ghat[i][j] inv[j][b]
            let mut gp = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    let mut acc = 0.0;
                    for ii in 0..2 {
                        for jj in 0..2 {
                            acc += j[a][ii] * g[ii][jj] * inv[jj][b];
                        }
                    }
                    gp[a][b] = sign * acc;
                }
            }
            grad[i * np + q] = gp;
            div[i * np + q] = gp[0][0] + gp[1][1];
        }
    }
    MappedVector { n_dofs: n, n_points: np, value, grad, div }
}

/// Physical second derivatives of BDM basis functions on one cell,
/// hess[dof * n_points + q][a][b][c] = d^2 v_a / (dx_b dx_c).
pub fn map_vector_hessian(
    hess: &[[[[f64; 2]; 2]; 2]],
    n_dofs: usize,
    n_points: usize,
    geo: &CellGeometry,
    signs: &[f64],
) -> Vec<[[[f64; 2]; 2]; 2]> {
    let mut out = vec![[[[0.0; 2]; 2]; 2]; n_dofs * n_points];
    let j = geo.jac;
    let inv = geo.inv;
    for i in 0..n_dofs {
        let sign = signs[i] / geo.det;
        for q in 0..n_points {
            let h = hess[i * n_points + q];
            let mut hp = [[[0.0; 2]; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let mut acc = 0.0;
                        for ii in 0..2 {
                            for jj in 0..2 {
                                for kk in 0..2 {
                                    acc += j[a][ii] * h[ii][jj][kk] * inv[jj][b] * inv[kk][c];
                                }
                            }
                        }
                        hp[a][b][c] = sign * acc;
                    }
                }
            }
            out[i * n_points + q] = hp;
        }
    }
    out
}

/// Physical basis values of a scalar (Lagrange) space on one cell.
pub struct MappedScalar {
    pub n_dofs: usize,
    pub n_points: usize,
    pub value: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<[[f64; 2]; 2]>,
}

pub fn map_scalar(tab: &ScalarTabulation, geo: &CellGeometry) -> MappedScalar {
    let n = tab.n_dofs;
    let np = tab.n_points;
    let mut grad = vec![[0.0; 2]; n * np];
    let mut hess = vec![[[0.0; 2]; 2]; n * np];
    let inv = geo.inv;
    for i in 0..n * np {
        let g = tab.grad[i];
        grad[i] = [inv[0][0] * g[0] + inv[1][0] * g[1], inv[0][1] * g[0] + inv[1][1] * g[1]];
        let h = tab.hess[i];
        let mut hp = [[0.0; 2]; 2];
        for b in 0..2 {
            for c in 0..2 {
                let mut acc = 0.0;
                for jj in 0..2 {
                    for kk in 0..2 {
                        acc += h[jj][kk] * inv[jj][b] * inv[kk][c];
                    }
                }
                hp[b][c] = acc;
            }
        }
        hess[i] = hp;
    }
    MappedScalar { n_dofs: n, n_points: np, value: tab.value.clone(), grad, hess }
}

/// Value and gradient of a discrete vector field on a cell at ref points.
pub fn eval_vector_field(
    space: &Space,
    mesh: &Mesh,
    cell: usize,
    points: &[[f64; 2]],
    coeffs: &[f64],
) -> Vec<([f64; 2], [[f64; 2]; 2])> {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let tab = space.tabulate_vector(points);
    let mapped = map_vector(&tab, &geo, &space.dofmap.cell_signs[cell]);
    let dofs = &space.dofmap.cell_dofs[cell];
    let np = points.len();
    let mut out = vec![([0.0; 2], [[0.0; 2]; 2]); np];
    for (i, &g) in dofs.iter().enumerate() {
        let c = coeffs[g];
        for q in 0..np {
            let v = mapped.value[i * np + q];
            out[q].0[0] += c * v[0];
            out[q].0[1] += c * v[1];
            let gr = mapped.grad[i * np + q];
            for a in 0..2 {
                for b in 0..2 {
                    out[q].1[a][b] += c * gr[a][b];
                }
            }
        }
    }
    out
}

/// Value and gradient of a discrete scalar field on a cell at ref points.
pub fn eval_scalar_field(
    space: &Space,
    mesh: &Mesh,
    cell: usize,
    points: &[[f64; 2]],
    coeffs: &[f64],
) -> Vec<(f64, [f64; 2])> {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let tab = space.tabulate_scalar(points);
    let mapped = map_scalar(&tab, &geo);
    let dofs = &space.dofmap.cell_dofs[cell];
    let np = points.len();
    let mut out = vec![(0.0, [0.0; 2]); np];
    for (i, &g) in dofs.iter().enumerate() {
        let c = coeffs[g];
        for q in 0..np {
            out[q].0 += c * mapped.value[i * np + q];
            let gr = mapped.grad[i * np + q];
            out[q].1[0] += c * gr[0];
            out[q].1[1] += c * gr[1];
        }
    }
    out
}

#[cfg(test)]
mod tests;
