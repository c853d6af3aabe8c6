//! Cell- and facet-wise assembly of the discrete bilinear forms.
//!
//! The displacement form is the symmetric interior penalty applied to the
//! broken elastic energy: volume term, consistency and symmetry facet terms
//! over interior and displacement-Dirichlet facets, and tangential jump
//! penalties weighted with the subdomain shear modulus (the larger modulus
//! on the interface). Contributions are accumulated cell/facet by index
//! order, so assembly is bit-reproducible.

use super::{Discretization, FormMatrix, ModelParameters, SpaceId};
use crate::elements::{map_scalar, map_vector, CellGeometry, MappedScalar, MappedVector, Space};
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::quadrature::{edge_rule, triangle_rule};
use crate::sparse::Triplets;

/// Reference tabulations of a space on every (local edge, direction) pair at
/// a fixed set of facet quadrature parameters.
pub struct FacetCache {
    pub ts: Vec<f64>,
    pub ws: Vec<f64>,
    vector: Option<Vec<crate::elements::VectorTabulation>>,
    scalar: Option<Vec<crate::elements::ScalarTabulation>>,
}

fn edge_points(l: usize, ts: &[f64], reversed: bool) -> Vec<[f64; 2]> {
    let (a, b, _, _) = crate::elements::ref_edge(l);
    ts.iter()
        .map(|&t| {
            let tl = if reversed { 1.0 - t } else { t };
            [a[0] + tl * (b[0] - a[0]), a[1] + tl * (b[1] - a[1])]
        })
        .collect()
}

impl FacetCache {
    pub fn vector(space: &Space, degree: usize) -> Self {
        let (ts, ws) = edge_rule(degree);
        let mut tabs = Vec::with_capacity(6);
        for l in 0..3 {
            for rev in 0..2 {
                tabs.push(space.tabulate_vector(&edge_points(l, &ts, rev == 1)));
            }
        }
        FacetCache { ts, ws, vector: Some(tabs), scalar: None }
    }

    pub fn scalar(space: &Space, degree: usize) -> Self {
        let (ts, ws) = edge_rule(degree);
        let mut tabs = Vec::with_capacity(6);
        for l in 0..3 {
            for rev in 0..2 {
                tabs.push(space.tabulate_scalar(&edge_points(l, &ts, rev == 1)));
            }
        }
        FacetCache { ts, ws, scalar: Some(tabs), vector: None }
    }

    pub fn n_points(&self) -> usize {
        self.ts.len()
    }

    fn vector_tab(&self, l: usize, reversed: bool) -> &crate::elements::VectorTabulation {
        &self.vector.as_ref().unwrap()[2 * l + usize::from(reversed)]
    }

    fn scalar_tab(&self, l: usize, reversed: bool) -> &crate::elements::ScalarTabulation {
        &self.scalar.as_ref().unwrap()[2 * l + usize::from(reversed)]
    }
}

/// One side of a facet: mapped basis values aligned with the global facet
/// parametrization, plus the orientation factor of the outward normal.
pub struct FacetSide {
    pub cell: usize,
    /// +1 on the minus side (outward normal = global normal), -1 otherwise.
    pub orient: f64,
    pub mapped: MappedVector,
    pub dofs: Vec<usize>,
}

pub struct ScalarFacetSide {
    pub cell: usize,
    pub orient: f64,
    pub mapped: MappedScalar,
    pub dofs: Vec<usize>,
}

/// Gather the (one or two) vector-valued sides of a facet.
pub fn facet_sides(mesh: &Mesh, space: &Space, cache: &FacetCache, fi: usize) -> Vec<FacetSide> {
    let facet = &mesh.facets[fi];
    let mut sides = Vec::with_capacity(2);
    let mut cells = vec![(facet.cell_minus, 1.0)];
    if let Some(cp) = facet.cell_plus {
        cells.push((cp, -1.0));
    }
    for (cell, orient) in cells {
        let l = mesh.local_facet_index(cell, fi);
        let reversed = mesh.local_edge_vertices(cell, l)[0] != facet.v[0];
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_vector(cache.vector_tab(l, reversed), &geo, &space.dofmap.cell_signs[cell]);
        sides.push(FacetSide { cell, orient, mapped, dofs: space.dofmap.cell_dofs[cell].clone() });
    }
    sides
}

pub fn scalar_facet_sides(mesh: &Mesh, space: &Space, cache: &FacetCache, fi: usize) -> Vec<ScalarFacetSide> {
    let facet = &mesh.facets[fi];
    let mut sides = Vec::with_capacity(2);
    let mut cells = vec![(facet.cell_minus, 1.0)];
    if let Some(cp) = facet.cell_plus {
        cells.push((cp, -1.0));
    }
    for (cell, orient) in cells {
        if !space.dofmap.is_active(cell) {
            continue;
        }
        let l = mesh.local_facet_index(cell, fi);
        let reversed = mesh.local_edge_vertices(cell, l)[0] != facet.v[0];
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_scalar(cache.scalar_tab(l, reversed), &geo);
        sides.push(ScalarFacetSide { cell, orient, mapped, dofs: space.dofmap.cell_dofs[cell].clone() });
    }
    sides
}

pub fn sym_grad(g: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let off = 0.5 * (g[0][1] + g[1][0]);
    [[g[0][0], off], [off, g[1][1]]]
}

fn eps_dot(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Facets over which the displacement SIP terms act.
fn sip_facet(tag: FacetTag) -> bool {
    tag.is_interior() || tag.is_dirichlet()
}

/// SIP elasticity form with tangential jump penalties; symmetric.
pub fn assemble_a1h(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    assemble_displacement_form(mesh, disc, params, true)
}

/// The norm-realizing displacement operator: volume term plus penalty terms
/// only (no consistency/symmetry terms).
pub fn assemble_ahat1(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    assemble_displacement_form(mesh, disc, params, false)
}

fn assemble_displacement_form(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    with_consistency: bool,
) -> FormMatrix {
    let space = &disc.v;
    let n = space.n_dofs();
    let mut trips = Triplets::new(n, n);

    // volume term 2 mu (eps(u), eps(v))
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let ref_tab = space.tabulate_vector(&rule.points);
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_vector(&ref_tab, &geo, &space.dofmap.cell_signs[cell]);
        let dofs = &space.dofmap.cell_dofs[cell];
        let mu = params.mu(mesh.cell_tag[cell]);
        let nd = dofs.len();
        let eps: Vec<[[f64; 2]; 2]> = (0..nd * nq).map(|i| sym_grad(&mapped.grad[i])).collect();
        for i in 0..nd {
            for j in 0..nd {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * eps_dot(&eps[i * nq + q], &eps[j * nq + q]);
                }
                trips.push(dofs[i], dofs[j], 2.0 * mu * geo.det * acc);
            }
        }
    }

    // facet terms
    let cache = FacetCache::vector(space, disc.facet_degree());
    let nq = cache.n_points();
    for fi in 0..mesh.n_facets() {
        let tag = mesh.facet_tag[fi];
        if !sip_facet(tag) {
            continue;
        }
        let h_e = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        let sides = facet_sides(mesh, space, &cache, fi);
        let interior = sides.len() == 2;
        let mean_c = if interior { 0.5 } else { 1.0 };
        let mu_pen = if tag == FacetTag::Sigma { params.mu0() } else { params.mu(mesh.cell_tag[sides[0].cell]) };
        let pen = 2.0 * params.beta_u / h_e * mu_pen;
        for si in &sides {
            let mu_i = params.mu(mesh.cell_tag[si.cell]);
            for sj in &sides {
                let mu_j = params.mu(mesh.cell_tag[sj.cell]);
                for (i, &gi) in si.dofs.iter().enumerate() {
                    for (j, &gj) in sj.dofs.iter().enumerate() {
                        let mut acc = 0.0;
                        for q in 0..nq {
                            let w = cache.ws[q] * h_e;
                            let vi = si.mapped.value[i * nq + q];
                            let vj = sj.mapped.value[j * nq + q];
                            if with_consistency {
                                // -2<{mu eps(u)}, [[v x n]]> - 2<{mu eps(v)}, [[u x n]]>
                                let ei = sym_grad(&si.mapped.grad[i * nq + q]);
                                let ej = sym_grad(&sj.mapped.grad[j * nq + q]);
                                let tin = [
                                    mean_c * mu_i * (ei[0][0] * normal[0] + ei[0][1] * normal[1]),
                                    mean_c * mu_i * (ei[1][0] * normal[0] + ei[1][1] * normal[1]),
                                ];
                                let tjn = [
                                    mean_c * mu_j * (ej[0][0] * normal[0] + ej[0][1] * normal[1]),
                                    mean_c * mu_j * (ej[1][0] * normal[0] + ej[1][1] * normal[1]),
                                ];
                                acc -= 2.0 * w * sj.orient * (tin[0] * vj[0] + tin[1] * vj[1]);
                                acc -= 2.0 * w * si.orient * (tjn[0] * vi[0] + tjn[1] * vi[1]);
                            }
                            acc += w * pen * si.orient * sj.orient * (vi[0] * vj[0] + vi[1] * vj[1]);
                        }
                        trips.push(gi, gj, acc);
                    }
                }
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::Displacement, cols: SpaceId::Displacement }
}

/// Darcy stiffness (kappa/eta)(grad p, grad q) for the continuous pressure.
pub fn assemble_a2_cg(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    let space = &disc.q;
    let n = space.n_dofs();
    let mut trips = Triplets::new(n, n);
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let ref_tab = space.tabulate_scalar(&rule.points);
    let w_coef = params.kappa / params.eta;
    for cell in 0..mesh.n_cells() {
        if !space.dofmap.is_active(cell) {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_scalar(&ref_tab, &geo);
        let dofs = &space.dofmap.cell_dofs[cell];
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    let a = mapped.grad[i * nq + q];
                    let b = mapped.grad[j * nq + q];
                    acc += rule.weights[q] * (a[0] * b[0] + a[1] * b[1]);
                }
                trips.push(gi, gj, w_coef * geo.det * acc);
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::Pressure, cols: SpaceId::Pressure }
}

/// SIP Darcy form for the discontinuous pressure: interior poroelastic
/// facets plus the essential pressure boundary.
pub fn assemble_a2h_dg(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    let space = &disc.q;
    let n = space.n_dofs();
    let mut trips = Triplets::new(n, n);
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let ref_tab = space.tabulate_scalar(&rule.points);
    let w_coef = params.kappa / params.eta;
    for cell in 0..mesh.n_cells() {
        if !space.dofmap.is_active(cell) {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_scalar(&ref_tab, &geo);
        let dofs = &space.dofmap.cell_dofs[cell];
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    let a = mapped.grad[i * nq + q];
                    let b = mapped.grad[j * nq + q];
                    acc += rule.weights[q] * (a[0] * b[0] + a[1] * b[1]);
                }
                trips.push(gi, gj, w_coef * geo.det * acc);
            }
        }
    }
    let cache = FacetCache::scalar(space, disc.facet_degree());
    let nq = cache.n_points();
    for fi in 0..mesh.n_facets() {
        let tag = mesh.facet_tag[fi];
        if !(tag == FacetTag::IntP || tag.is_pressure_dirichlet()) {
            continue;
        }
        let h_e = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        let sides = scalar_facet_sides(mesh, space, &cache, fi);
        let interior = sides.len() == 2;
        let mean_c = if interior { 0.5 } else { 1.0 };
        let pen = params.beta_p / h_e * w_coef;
        for si in &sides {
            for sj in &sides {
                for (i, &gi) in si.dofs.iter().enumerate() {
                    for (j, &gj) in sj.dofs.iter().enumerate() {
                        let mut acc = 0.0;
                        for q in 0..nq {
                            let w = cache.ws[q] * h_e;
                            let vi = si.mapped.value[i * nq + q];
                            let vj = sj.mapped.value[j * nq + q];
                            let dgi = si.mapped.grad[i * nq + q];
                            let dgj = sj.mapped.grad[j * nq + q];
                            let fni = mean_c * w_coef * (dgi[0] * normal[0] + dgi[1] * normal[1]);
                            let fnj = mean_c * w_coef * (dgj[0] * normal[0] + dgj[1] * normal[1]);
                            acc -= w * (fni * sj.orient * vj + fnj * si.orient * vi);
                            acc += w * pen * si.orient * sj.orient * vi * vj;
                        }
                        trips.push(gi, gj, acc);
                    }
                }
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::Pressure, cols: SpaceId::Pressure }
}

/// Divergence coupling b1(v, psi) = -(psi, div v); rows in the total
/// pressure space, columns in the displacement space.
pub fn assemble_b1(mesh: &Mesh, disc: &Discretization, _params: &ModelParameters) -> FormMatrix {
    let v_space = &disc.v;
    let z_space = &disc.z;
    let mut trips = Triplets::new(z_space.n_dofs(), v_space.n_dofs());
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let v_tab = v_space.tabulate_vector(&rule.points);
    let z_tab = z_space.tabulate_scalar(&rule.points);
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped_v = map_vector(&v_tab, &geo, &v_space.dofmap.cell_signs[cell]);
        let v_dofs = &v_space.dofmap.cell_dofs[cell];
        let z_dofs = &z_space.dofmap.cell_dofs[cell];
        for (i, &gi) in z_dofs.iter().enumerate() {
            for (j, &gj) in v_dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * z_tab.value[i * nq + q] * mapped_v.div[j * nq + q];
                }
                trips.push(gi, gj, -geo.det * acc);
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::TotalPressure, cols: SpaceId::Displacement }
}

/// Pressure coupling b2(p, psi) = (alpha/lambda^P)(p, psi) on the
/// poroelastic subdomain; rows in the total pressure space.
pub fn assemble_b2(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    let q_space = &disc.q;
    let z_space = &disc.z;
    let mut trips = Triplets::new(z_space.n_dofs(), q_space.n_dofs());
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let q_tab = q_space.tabulate_scalar(&rule.points);
    let z_tab = z_space.tabulate_scalar(&rule.points);
    let coef = params.alpha / params.lambda_p;
    for cell in 0..mesh.n_cells() {
        if !q_space.dofmap.is_active(cell) {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let q_dofs = &q_space.dofmap.cell_dofs[cell];
        let z_dofs = &z_space.dofmap.cell_dofs[cell];
        for (i, &gi) in z_dofs.iter().enumerate() {
            for (j, &gj) in q_dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * z_tab.value[i * nq + q] * q_tab.value[j * nq + q];
                }
                trips.push(gi, gj, coef * geo.det * acc);
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::TotalPressure, cols: SpaceId::Pressure }
}

/// Total pressure mass weighted with 1/lambda (subdomain-wise).
pub fn assemble_a3(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    let m = weighted_z_mass(mesh, disc, &|cell| 1.0 / params.lambda(mesh.cell_tag[cell]));
    FormMatrix { matrix: m, rows: SpaceId::TotalPressure, cols: SpaceId::TotalPressure }
}

/// Fluid pressure mass weighted with c0 + alpha^2/lambda^P.
pub fn assemble_tilde_a2(mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> FormMatrix {
    let space = &disc.q;
    let n = space.n_dofs();
    let mut trips = Triplets::new(n, n);
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let tab = space.tabulate_scalar(&rule.points);
    let coef = params.storage();
    for cell in 0..mesh.n_cells() {
        if !space.dofmap.is_active(cell) {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let dofs = &space.dofmap.cell_dofs[cell];
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * tab.value[i * nq + q] * tab.value[j * nq + q];
                }
                trips.push(gi, gj, coef * geo.det * acc);
            }
        }
    }
    FormMatrix { matrix: trips.to_csr(), rows: SpaceId::Pressure, cols: SpaceId::Pressure }
}

/// Mass matrix on the total pressure space with a per-cell weight.
pub fn weighted_z_mass(mesh: &Mesh, disc: &Discretization, weight: &dyn Fn(usize) -> f64) -> crate::sparse::CsrMatrix {
    let space = &disc.z;
    let mut trips = Triplets::new(space.n_dofs(), space.n_dofs());
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let tab = space.tabulate_scalar(&rule.points);
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let dofs = &space.dofmap.cell_dofs[cell];
        let w_cell = weight(cell);
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * tab.value[i * nq + q] * tab.value[j * nq + q];
                }
                trips.push(gi, gj, w_cell * geo.det * acc);
            }
        }
    }
    trips.to_csr()
}

/// Vector mass matrix on the displacement space with a per-cell weight,
/// realizing || sqrt(w) v ||^2.
pub fn weighted_v_mass(mesh: &Mesh, disc: &Discretization, weight: &dyn Fn(usize) -> f64) -> crate::sparse::CsrMatrix {
    let space = &disc.v;
    let mut trips = Triplets::new(space.n_dofs(), space.n_dofs());
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let tab = space.tabulate_vector(&rule.points);
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let mapped = map_vector(&tab, &geo, &space.dofmap.cell_signs[cell]);
        let dofs = &space.dofmap.cell_dofs[cell];
        let w_cell = weight(cell);
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    let a = mapped.value[i * nq + q];
                    let b = mapped.value[j * nq + q];
                    acc += rule.weights[q] * (a[0] * b[0] + a[1] * b[1]);
                }
                trips.push(gi, gj, w_cell * geo.det * acc);
            }
        }
    }
    trips.to_csr()
}

/// Integral of every total-pressure basis function, the row of the
/// mean-value constraint.
pub fn z_integral_vector(mesh: &Mesh, disc: &Discretization) -> Vec<f64> {
    let space = &disc.z;
    let rule = triangle_rule(disc.volume_degree());
    let nq = rule.points.len();
    let tab = space.tabulate_scalar(&rule.points);
    let mut out = vec![0.0; space.n_dofs()];
    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        for (i, &gi) in space.dofmap.cell_dofs[cell].iter().enumerate() {
            let mut acc = 0.0;
            for q in 0..nq {
                acc += rule.weights[q] * tab.value[i * nq + q];
            }
            out[gi] += geo.det * acc;
        }
    }
    out
}

/// Subdomain of a cell, re-exported for the facet helpers.
pub fn cell_subdomain(mesh: &Mesh, cell: usize) -> Subdomain {
    mesh.cell_tag[cell]
}
