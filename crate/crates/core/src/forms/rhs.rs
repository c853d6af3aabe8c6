//! Right-hand-side assembly: body loads, boundary data lifts, and the
//! interface stress-jump correction for manufactured solutions.

use super::{Discretization, Formulation, ModelParameters};
use super::assembly::{facet_sides, scalar_facet_sides, sym_grad, FacetCache};
use crate::elements::{map_vector, CellGeometry};
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::quadrature::triangle_rule;
use crate::{Error, Result};

/// Data of one problem instance. Defaults describe the homogeneous problem.
pub trait ProblemData {
    fn body_load(&self, _x: [f64; 2], _sub: Subdomain) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Volumetric fluid source on the poroelastic subdomain.
    fn source(&self, _x: [f64; 2]) -> f64 {
        0.0
    }

    /// Dirichlet displacement data.
    fn displacement(&self, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Essential fluid pressure data (on the pressure-Dirichlet boundary).
    fn pressure(&self, _x: [f64; 2]) -> f64 {
        0.0
    }

    /// Traction data (total stress times outward normal) on Neumann facets.
    fn traction(&self, _x: [f64; 2], _n: [f64; 2], _sub: Subdomain) -> [f64; 2] {
        [0.0, 0.0]
    }

    /// Normal flux datum (kappa/eta)(grad p - rho g) . n on flux facets,
    /// with the outward normal of the poroelastic subdomain.
    fn flux(&self, _x: [f64; 2], _n: [f64; 2]) -> f64 {
        0.0
    }

    /// Interface flux datum with the normal pointing from P into E; zero for
    /// the physical transmission conditions.
    fn interface_flux(&self, _x: [f64; 2], _n: [f64; 2]) -> f64 {
        0.0
    }

    /// Jump of the total stress across the interface, (sigma^P - sigma^E) n
    /// with n pointing from P into E. `None` when no manufactured solution
    /// is available.
    fn interface_stress_jump(&self, _x: [f64; 2], _n: [f64; 2]) -> Option<[f64; 2]> {
        None
    }

    /// Whether the manufactured interface correction must be added.
    fn needs_interface_correction(&self) -> bool {
        false
    }

    /// Prescribed mean of the total pressure for the constraint row.
    fn mean_total_pressure(&self) -> f64 {
        0.0
    }
}

/// The homogeneous problem.
pub struct ZeroData;

impl ProblemData for ZeroData {}

/// Assemble the displacement and pressure load vectors (F, G). G carries the
/// sign of the negated mass-conservation equation and is not yet scaled by
/// the time-step.
pub fn assemble_rhs(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    data: &dyn ProblemData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut f = vec![0.0; disc.v.n_dofs()];
    let mut g = vec![0.0; disc.q.n_dofs()];
    let rule = triangle_rule(disc.data_degree());
    let nq = rule.points.len();
    let v_tab = disc.v.tabulate_vector(&rule.points);
    let q_tab = disc.q.tabulate_scalar(&rule.points);

    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell)?;
        let sub = mesh.cell_tag[cell];
        let mapped_v = map_vector(&v_tab, &geo, &disc.v.dofmap.cell_signs[cell]);
        let phys: Vec<[f64; 2]> = rule.points.iter().map(|&xi| geo.to_physical(xi)).collect();
        let loads: Vec<[f64; 2]> = phys.iter().map(|&x| data.body_load(x, sub)).collect();
        for (i, &gi) in disc.v.dofmap.cell_dofs[cell].iter().enumerate() {
            let mut acc = 0.0;
            for q in 0..nq {
                let v = mapped_v.value[i * nq + q];
                acc += rule.weights[q] * (loads[q][0] * v[0] + loads[q][1] * v[1]);
            }
            f[gi] += geo.det * acc;
        }
        if sub == Subdomain::Poro && disc.q.dofmap.is_active(cell) {
            let src: Vec<f64> = phys.iter().map(|&x| data.source(x)).collect();
            for (i, &gi) in disc.q.dofmap.cell_dofs[cell].iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * q_tab.value[i * nq + q] * src[q];
                }
                g[gi] -= geo.det * acc;
            }
        }
    }

    let facet_degree = disc.facet_degree() + 4;
    let v_cache = FacetCache::vector(&disc.v, facet_degree);
    let q_cache = FacetCache::scalar(&disc.q, facet_degree);
    let nqf = v_cache.n_points();
    let w_coef = params.kappa / params.eta;

    for fi in 0..mesh.n_facets() {
        let tag = mesh.facet_tag[fi];
        let h_e = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        let facet = &mesh.facets[fi];
        let a = mesh.vertices[facet.v[0]];
        let b = mesh.vertices[facet.v[1]];
        let phys: Vec<[f64; 2]> = v_cache.ts.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect();

        match tag {
            FacetTag::NeuE | FacetTag::NeuP => {
                // traction data on the displacement; nothing for the fluid
                // pressure (its essential boundary under the matching rule)
                let sides = facet_sides(mesh, &disc.v, &v_cache, fi);
                let sub = mesh.cell_tag[sides[0].cell];
                let tract: Vec<[f64; 2]> = phys.iter().map(|&x| data.traction(x, normal, sub)).collect();
                for (i, &gi) in sides[0].dofs.iter().enumerate() {
                    let mut acc = 0.0;
                    for q in 0..nqf {
                        let v = sides[0].mapped.value[i * nqf + q];
                        acc += v_cache.ws[q] * (tract[q][0] * v[0] + tract[q][1] * v[1]);
                    }
                    f[gi] += h_e * acc;
                }
                if tag == FacetTag::NeuP && disc.formulation == Formulation::DgPressure {
                    // Nitsche lifts of the essential pressure datum, with the
                    // sign of the negated equation
                    let qs = scalar_facet_sides(mesh, &disc.q, &q_cache, fi);
                    let side = &qs[0];
                    let p_d: Vec<f64> = phys.iter().map(|&x| data.pressure(x)).collect();
                    for (i, &gi) in side.dofs.iter().enumerate() {
                        let mut acc = 0.0;
                        for q in 0..nqf {
                            let w = q_cache.ws[q] * h_e;
                            let grad = side.mapped.grad[i * nqf + q];
                            let val = side.mapped.value[i * nqf + q];
                            let flux_i = w_coef * (grad[0] * normal[0] + grad[1] * normal[1]);
                            acc += w * (flux_i * p_d[q] - params.beta_p / h_e * w_coef * p_d[q] * val);
                        }
                        g[gi] += acc;
                    }
                }
            }
            FacetTag::DirE | FacetTag::DirP => {
                // Nitsche lift of the tangential displacement datum
                let sides = facet_sides(mesh, &disc.v, &v_cache, fi);
                let side = &sides[0];
                let mu = params.mu(mesh.cell_tag[side.cell]);
                let gd: Vec<[f64; 2]> = phys.iter().map(|&x| data.displacement(x)).collect();
                for (i, &gi) in side.dofs.iter().enumerate() {
                    let mut acc = 0.0;
                    for q in 0..nqf {
                        let w = v_cache.ws[q] * h_e;
                        let v = side.mapped.value[i * nqf + q];
                        let eps = sym_grad(&side.mapped.grad[i * nqf + q]);
                        let tn = [
                            mu * (eps[0][0] * normal[0] + eps[0][1] * normal[1]),
                            mu * (eps[1][0] * normal[0] + eps[1][1] * normal[1]),
                        ];
                        acc -= 2.0 * w * (tn[0] * gd[q][0] + tn[1] * gd[q][1]);
                        acc += 2.0 * w * params.beta_u / h_e * mu * (gd[q][0] * v[0] + gd[q][1] * v[1]);
                    }
                    f[gi] += acc;
                }
                if tag == FacetTag::DirP {
                    // natural flux datum for the fluid pressure
                    let qs = scalar_facet_sides(mesh, &disc.q, &q_cache, fi);
                    if let Some(side) = qs.first() {
                        let flux: Vec<f64> = phys.iter().map(|&x| data.flux(x, normal)).collect();
                        for (i, &gi) in side.dofs.iter().enumerate() {
                            let mut acc = 0.0;
                            for q in 0..nqf {
                                acc += q_cache.ws[q] * flux[q] * side.mapped.value[i * nqf + q];
                            }
                            g[gi] -= h_e * acc;
                        }
                    }
                }
            }
            FacetTag::Sigma => {
                // manufactured interface stress-jump correction <{v}, [[sigma n]]>
                if data.needs_interface_correction() {
                    let sides = facet_sides(mesh, &disc.v, &v_cache, fi);
                    let jump: Vec<[f64; 2]> = phys
                        .iter()
                        .map(|&x| {
                            data.interface_stress_jump(x, normal).ok_or_else(|| {
                                Error::MissingData("interface correction requested without an exact solution".into())
                            })
                        })
                        .collect::<Result<_>>()?;
                    for side in &sides {
                        for (i, &gi) in side.dofs.iter().enumerate() {
                            let mut acc = 0.0;
                            for q in 0..nqf {
                                let v = side.mapped.value[i * nqf + q];
                                acc += v_cache.ws[q] * 0.5 * (jump[q][0] * v[0] + jump[q][1] * v[1]);
                            }
                            f[gi] += h_e * acc;
                        }
                    }
                }
                // interface flux datum (zero for the physical transmission
                // conditions); the pressure trace is taken from the P side
                let qs = scalar_facet_sides(mesh, &disc.q, &q_cache, fi);
                if let Some(side) = qs.first() {
                    debug_assert_eq!(mesh.cell_tag[side.cell], Subdomain::Poro);
                    let flux: Vec<f64> = phys.iter().map(|&x| data.interface_flux(x, normal)).collect();
                    if flux.iter().any(|&v| v != 0.0) {
                        for (i, &gi) in side.dofs.iter().enumerate() {
                            let mut acc = 0.0;
                            for q in 0..nqf {
                                acc += q_cache.ws[q] * flux[q] * side.mapped.value[i * nqf + q];
                            }
                            g[gi] -= h_e * acc;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok((f, g))
}

/// Constrained-dof values: facet normal moments of the Dirichlet
/// displacement datum.
pub fn displacement_constraint_values(
    mesh: &Mesh,
    disc: &Discretization,
    data: &dyn ProblemData,
) -> Vec<(usize, f64)> {
    let r = disc.v.spec.degree;
    let per_facet = r + 1;
    let (ts, ws) = crate::quadrature::edge_rule(2 * r + 6);
    let mut out = Vec::new();
    for fi in 0..mesh.n_facets() {
        if !mesh.facet_tag[fi].is_dirichlet() {
            continue;
        }
        let facet = &mesh.facets[fi];
        let a = mesh.vertices[facet.v[0]];
        let b = mesh.vertices[facet.v[1]];
        let len = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        for m in 0..per_facet {
            let mut acc = 0.0;
            for (&t, &w) in ts.iter().zip(&ws) {
                let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let gd = data.displacement(x);
                acc += w * len * crate::elements::legendre01(m, t) * (gd[0] * normal[0] + gd[1] * normal[1]);
            }
            out.push((fi * per_facet + m, acc));
        }
    }
    out
}

/// Constrained-dof values for the continuous pressure on its essential
/// boundary: nodal interpolation of the pressure datum.
pub fn pressure_constraint_values(
    mesh: &Mesh,
    disc: &Discretization,
    data: &dyn ProblemData,
) -> Vec<(usize, f64)> {
    if disc.formulation != Formulation::CgPressure {
        return Vec::new();
    }
    let mut out = Vec::new();
    let nodes = disc.q.lagrange().nodes.clone();
    let constrained: std::collections::BTreeSet<usize> = disc.q.dofmap.constrained.iter().copied().collect();
    let mut seen = std::collections::BTreeSet::new();
    for cell in 0..mesh.n_cells() {
        if !disc.q.dofmap.is_active(cell) {
            continue;
        }
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        for (i, &gdof) in disc.q.dofmap.cell_dofs[cell].iter().enumerate() {
            if constrained.contains(&gdof) && seen.insert(gdof) {
                out.push((gdof, data.pressure(geo.to_physical(nodes[i]))));
            }
        }
    }
    out.sort_unstable_by(|x, y| x.0.cmp(&y.0));
    out
}
