//! Interpolation of analytic fields into the discrete spaces.
//!
//! BDM interpolation evaluates the facet normal moments against the global
//! Legendre orientation plus the interior reference moments of the Piola
//! pullback, which gives the canonical commuting interpolant. Lagrange
//! interpolation is nodal.

use super::{legendre01, CellGeometry, Family, Space};
use crate::mesh::Mesh;
use crate::quadrature::edge_rule;

/// Interpolate a vector field into a BDM space.
pub fn interpolate_vector(space: &Space, mesh: &Mesh, f: &dyn Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    assert_eq!(space.spec.family, Family::BdmHdiv);
    let r = space.spec.degree;
    let el = space.bdm();
    let per_facet = r + 1;
    let mut coeffs = vec![0.0; space.n_dofs()];
    // facet moments against shifted Legendre polynomials in the global
    // direction, with the physical arc measure
    let (ts, ws) = edge_rule(2 * r + 6);
    for (fi, facet) in mesh.facets.iter().enumerate() {
        let a = mesh.vertices[facet.v[0]];
        let b = mesh.vertices[facet.v[1]];
        let len = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        for m in 0..per_facet {
            let mut acc = 0.0;
            for (&t, &w) in ts.iter().zip(&ws) {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let v = f(x);
                acc += w * len * legendre01(m, t) * (v[0] * normal[0] + v[1] * normal[1]);
            }
            coeffs[fi * per_facet + m] = acc;
        }
    }
    // interior moments of the pullback
    let n_int = el.n_interior_dofs();
    if n_int > 0 {
        let base = mesh.n_facets() * per_facet;
        let rule = &el.interior_rule;
        for cell in 0..mesh.n_cells() {
            let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
            for (i, wts) in el.interior_weights.iter().enumerate() {
                let mut acc = 0.0;
                for (q, (&xi, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let x = geo.to_physical(xi);
                    let v = f(x);
                    // pullback: vhat = det * J^{-1} v
                    let vh = [
                        geo.det * (geo.inv[0][0] * v[0] + geo.inv[0][1] * v[1]),
                        geo.det * (geo.inv[1][0] * v[0] + geo.inv[1][1] * v[1]),
                    ];
                    acc += w * (vh[0] * wts[q][0] + vh[1] * wts[q][1]);
                }
                coeffs[base + cell * n_int + i] = acc;
            }
        }
    }
    coeffs
}

/// Nodal interpolation into a Lagrange (CG or DG) space.
pub fn interpolate_scalar(space: &Space, mesh: &Mesh, f: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
    let el = space.lagrange();
    let nodes = el.nodes.clone();
    let mut coeffs = vec![0.0; space.n_dofs()];
    for cell in 0..mesh.n_cells() {
        let dofs = &space.dofmap.cell_dofs[cell];
        if dofs.is_empty() {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        for (i, &g) in dofs.iter().enumerate() {
            coeffs[g] = f(geo.to_physical(nodes[i]));
        }
    }
    coeffs
}
