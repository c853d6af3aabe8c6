//! Residual a posteriori error estimation.
//!
//! Elastic cells carry the indicator Theta_K (momentum residual, traction
//! jumps, tangential displacement jumps, constitutive residual), poroelastic
//! cells Psi_K (additionally the mass residual and flux jumps, with the DG
//! pressure-jump term in the discontinuous formulation), and interface
//! facets Lambda_e (total-traction jump, fluid flux trace, displacement
//! jump). Boundary terms are corrected with the prescribed data, and in
//! manufactured runs the interface residuals subtract the exact transmission
//! data. Data oscillation is measured against cellwise polynomial
//! projections of degree k+1.

use crate::elements::{
    eval_scalar_field, eval_vector_field, map_scalar, map_vector_hessian, CellGeometry,
    LagrangeElement,
};
use crate::forms::{Discretization, Formulation, ModelParameters, ProblemData};
use crate::harness::errors::ErrorComponents;
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::quadrature::{edge_rule, triangle_rule};
use crate::system::Solution;

#[derive(Debug, Clone)]
pub struct EstimatorReport {
    /// Elastic indicator per cell (zero on poroelastic cells).
    pub theta: Vec<f64>,
    /// Poroelastic indicator per cell (zero on elastic cells).
    pub psi: Vec<f64>,
    /// Interface indicator per facet (zero off the interface).
    pub lambda: Vec<f64>,
    /// Global estimator, xi^2 = sum theta^2 + sum psi^2 + sum lambda^2.
    pub xi: f64,
    /// Global data oscillation.
    pub upsilon: f64,
    /// Per-cell marking indicator: theta/psi squared plus half of each
    /// incident interface facet contribution.
    pub marking: Vec<f64>,
}

/// Scaling weight rho_1 = min((c0 + alpha^2/(2 mu^P + lambda^P))^-1, h^2 eta/kappa).
pub fn rho_1(params: &ModelParameters, h: f64) -> f64 {
    let storage = params.c0 + params.alpha * params.alpha / (2.0 * params.mu_p + params.lambda_p);
    (1.0 / storage).min(h * h * params.eta / params.kappa)
}

pub fn rho_2(params: &ModelParameters, h_e: f64) -> f64 {
    params.eta / params.kappa * h_e
}

pub fn rho_d(params: &ModelParameters) -> f64 {
    1.0 / (1.0 / params.mu_p + 1.0 / (2.0 * params.mu_p + params.lambda_p))
}

struct CellFields {
    /// value, gradient of u_h
    u: Vec<([f64; 2], [[f64; 2]; 2])>,
    /// div(2 mu eps(u_h)) - grad(phi_h), the discrete stress divergence
    div_stress: Vec<[f64; 2]>,
    phi: Vec<(f64, [f64; 2])>,
    /// p_h value, gradient, laplacian (poroelastic cells only)
    p: Option<Vec<(f64, [f64; 2], f64)>>,
}

fn cell_fields(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    solution: &Solution,
    cell: usize,
    points: &[[f64; 2]],
) -> CellFields {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let np = points.len();
    let mu = params.mu(mesh.cell_tag[cell]);
    let u = eval_vector_field(&disc.v, mesh, cell, points, &solution.u);
    let phi = eval_scalar_field(&disc.z, mesh, cell, points, &solution.phi);

    // second derivatives of u_h for div(eps)
    let hess_ref = disc.v.bdm().tabulate_hessian(points);
    let hess = map_vector_hessian(&hess_ref, disc.v.bdm().n_dofs(), np, &geo, &disc.v.dofmap.cell_signs[cell]);
    let dofs = &disc.v.dofmap.cell_dofs[cell];
    let mut div_stress = vec![[0.0; 2]; np];
    for (i, &g) in dofs.iter().enumerate() {
        let c = solution.u[g];
        for q in 0..np {
            let h = &hess[i * np + q];
            // (div eps(u))_a = 1/2 (lap u_a + d_a div u)
            for a in 0..2 {
                let lap = h[a][0][0] + h[a][1][1];
                let ddiv = h[0][a][0] + h[1][a][1];
                div_stress[q][a] += c * mu * (lap + ddiv);
            }
        }
    }
    // subtract grad(phi_h) via the scalar tabulation
    let z_tab = disc.z.tabulate_scalar(points);
    let z_map = map_scalar(&z_tab, &geo);
    for (i, &g) in disc.z.dofmap.cell_dofs[cell].iter().enumerate() {
        let c = solution.phi[g];
        for q in 0..np {
            div_stress[q][0] -= c * z_map.grad[i * np + q][0];
            div_stress[q][1] -= c * z_map.grad[i * np + q][1];
        }
    }

    let p = if mesh.cell_tag[cell] == Subdomain::Poro {
        let q_tab = disc.q.tabulate_scalar(points);
        let q_map = map_scalar(&q_tab, &geo);
        let mut vals = vec![(0.0, [0.0; 2], 0.0); np];
        for (i, &g) in disc.q.dofmap.cell_dofs[cell].iter().enumerate() {
            let c = solution.p[g];
            for q in 0..np {
                vals[q].0 += c * q_map.value[i * np + q];
                vals[q].1[0] += c * q_map.grad[i * np + q][0];
                vals[q].1[1] += c * q_map.grad[i * np + q][1];
                vals[q].2 += c * (q_map.hess[i * np + q][0][0] + q_map.hess[i * np + q][1][1]);
            }
        }
        Some(vals)
    } else {
        None
    };
    CellFields { u, div_stress, phi, p }
}

/// Cellwise L2 projection of a function onto P_{k+1}, returning its values
/// at the quadrature points and the squared projection error.
struct Projector {
    element: LagrangeElement,
    tab: crate::elements::ScalarTabulation,
    mass: nalgebra::DMatrix<f64>,
}

impl Projector {
    fn new(degree: usize, rule: &crate::quadrature::QuadratureRule) -> Self {
        let element = LagrangeElement::new(degree);
        let tab = element.tabulate(&rule.points);
        let n = element.n_dofs();
        let nq = rule.points.len();
        let mut mass = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for q in 0..nq {
                    acc += rule.weights[q] * tab.value[i * nq + q] * tab.value[j * nq + q];
                }
                mass[(i, j)] = acc;
            }
        }
        Projector { element, tab, mass }
    }

    /// Returns (projected values at the rule points, weighted L2 error^2),
    /// where the error is integrated with the cell Jacobian `det`.
    fn project(&self, values: &[f64], weights: &[f64], det: f64) -> (Vec<f64>, f64) {
        let n = self.element.n_dofs();
        let nq = values.len();
        let mut rhs = nalgebra::DVector::zeros(n);
        for i in 0..n {
            let mut acc = 0.0;
            for q in 0..nq {
                acc += weights[q] * self.tab.value[i * nq + q] * values[q];
            }
            rhs[i] = acc;
        }
        let coef = self.mass.clone().lu().solve(&rhs).expect("projection mass is singular");
        let mut projected = vec![0.0; nq];
        let mut err2 = 0.0;
        for q in 0..nq {
            let mut v = 0.0;
            for i in 0..n {
                v += coef[i] * self.tab.value[i * nq + q];
            }
            projected[q] = v;
            err2 += weights[q] * det * (values[q] - v) * (values[q] - v);
        }
        (projected, err2)
    }
}

/// Traction sigma_h n on a facet side at the facet quadrature points.
fn stress_trace(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    solution: &Solution,
    cell: usize,
    pts: &[[f64; 2]],
    normal: [f64; 2],
) -> Vec<[f64; 2]> {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let mu = params.mu(mesh.cell_tag[cell]);
    let refs: Vec<[f64; 2]> = pts.iter().map(|&x| geo.to_reference(x)).collect();
    let u = eval_vector_field(&disc.v, mesh, cell, &refs, &solution.u);
    let phi = eval_scalar_field(&disc.z, mesh, cell, &refs, &solution.phi);
    u.iter()
        .zip(&phi)
        .map(|((_, g), (ph, _))| {
            let e = crate::forms::sym_grad(g);
            [
                (2.0 * mu * e[0][0] - ph) * normal[0] + 2.0 * mu * e[0][1] * normal[1],
                2.0 * mu * e[1][0] * normal[0] + (2.0 * mu * e[1][1] - ph) * normal[1],
            ]
        })
        .collect()
}

fn displacement_trace(
    mesh: &Mesh,
    disc: &Discretization,
    solution: &Solution,
    cell: usize,
    pts: &[[f64; 2]],
) -> Vec<[f64; 2]> {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let refs: Vec<[f64; 2]> = pts.iter().map(|&x| geo.to_reference(x)).collect();
    eval_vector_field(&disc.v, mesh, cell, &refs, &solution.u).iter().map(|(v, _)| *v).collect()
}

fn pressure_trace(
    mesh: &Mesh,
    disc: &Discretization,
    solution: &Solution,
    cell: usize,
    pts: &[[f64; 2]],
) -> Vec<(f64, [f64; 2])> {
    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
    let refs: Vec<[f64; 2]> = pts.iter().map(|&x| geo.to_reference(x)).collect();
    eval_scalar_field(&disc.q, mesh, cell, &refs, &solution.p)
}

/// Assemble all indicators and the global estimator.
pub fn global_estimator(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    data: &dyn ProblemData,
    solution: &Solution,
) -> EstimatorReport {
    let n_cells = mesh.n_cells();
    let rule = triangle_rule(disc.data_degree());
    let nq = rule.points.len();
    let projector = Projector::new(disc.k + 1, &rule);
    let (ts, ws) = edge_rule(disc.facet_degree() + 4);
    let nqf = ts.len();

    let mut theta2 = vec![0.0; n_cells];
    let mut psi2 = vec![0.0; n_cells];
    let mut lambda2 = vec![0.0; mesh.n_facets()];
    let mut upsilon2 = 0.0;

    // volume residuals
    for cell in 0..n_cells {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let sub = mesh.cell_tag[cell];
        let h_k = geo.diameter;
        let fields = cell_fields(mesh, disc, params, solution, cell, &rule.points);
        let phys: Vec<[f64; 2]> = rule.points.iter().map(|&xi| geo.to_physical(xi)).collect();

        // momentum residual R1 = b_h + div sigma_h, componentwise projection
        let bx: Vec<f64> = phys.iter().map(|&x| data.body_load(x, sub)[0]).collect();
        let by: Vec<f64> = phys.iter().map(|&x| data.body_load(x, sub)[1]).collect();
        let (bx_h, osc_x) = projector.project(&bx, &rule.weights, geo.det);
        let (by_h, osc_y) = projector.project(&by, &rule.weights, geo.det);
        let mut r1 = 0.0;
        for q in 0..nq {
            let rx = bx_h[q] + fields.div_stress[q][0];
            let ry = by_h[q] + fields.div_stress[q][1];
            r1 += rule.weights[q] * geo.det * (rx * rx + ry * ry);
        }
        let mu = params.mu(sub);
        let acc = match sub {
            Subdomain::Elastic => &mut theta2,
            Subdomain::Poro => &mut psi2,
        };
        acc[cell] += h_k * h_k / mu * r1;
        upsilon2 += h_k * h_k / mu * (osc_x + osc_y);

        match sub {
            Subdomain::Elastic => {
                // constitutive residual R2 = div u_h + phi_h / lambda^E
                let mut r2 = 0.0;
                for q in 0..nq {
                    let div_u = fields.u[q].1[0][0] + fields.u[q].1[1][1];
                    let v = div_u + fields.phi[q].0 / params.lambda_e;
                    r2 += rule.weights[q] * geo.det * v * v;
                }
                theta2[cell] += 1.0 / (1.0 / params.mu_e + 1.0 / params.lambda_e) * r2;
            }
            Subdomain::Poro => {
                let p_vals = fields.p.as_ref().unwrap();
                let mut r2 = 0.0;
                let mut r3 = 0.0;
                let src: Vec<f64> = phys.iter().map(|&x| data.source(x)).collect();
                let (src_h, osc_s) = projector.project(&src, &rule.weights, geo.det);
                for q in 0..nq {
                    let div_u = fields.u[q].1[0][0] + fields.u[q].1[1][1];
                    let v = div_u + (fields.phi[q].0 - params.alpha * p_vals[q].0) / params.lambda_p;
                    r2 += rule.weights[q] * geo.det * v * v;
                    // R3 = s_h - (c0 + a^2/l) p_h + (a/l) phi_h + (1/eta) div(kappa(grad p_h - rho g))
                    let w = src_h[q] - params.storage() * p_vals[q].0
                        + params.alpha / params.lambda_p * fields.phi[q].0
                        + params.kappa / params.eta * p_vals[q].2;
                    r3 += rule.weights[q] * geo.det * w * w;
                }
                psi2[cell] += rho_d(params) * r2 + rho_1(params, h_k) * r3;
                upsilon2 += rho_1(params, h_k) * osc_s;
            }
        }
    }

    // facet residuals
    for fi in 0..mesh.n_facets() {
        let tag = mesh.facet_tag[fi];
        let facet = &mesh.facets[fi];
        let a = mesh.vertices[facet.v[0]];
        let b = mesh.vertices[facet.v[1]];
        let h_e = mesh.facet_length(fi);
        let normal = mesh.facet_normal(fi);
        let pts: Vec<[f64; 2]> = ts.iter().map(|&t| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]).collect();
        let w_arc: Vec<f64> = ws.iter().map(|&w| w * h_e).collect();
        let cm = facet.cell_minus;
        let sub_m = mesh.cell_tag[cm];

        match tag {
            FacetTag::Sigma => {
                let ce = facet.cell_plus.unwrap();
                let tr_p = stress_trace(mesh, disc, params, solution, cm, &pts, normal);
                let tr_e = stress_trace(mesh, disc, params, solution, ce, &pts, normal);
                let up = displacement_trace(mesh, disc, solution, cm, &pts);
                let ue = displacement_trace(mesh, disc, solution, ce, &pts);
                let pr = pressure_trace(mesh, disc, solution, cm, &pts);
                let mut traction2 = 0.0;
                let mut flux2 = 0.0;
                let mut jump2 = 0.0;
                for q in 0..nqf {
                    let jd = data.interface_stress_jump(pts[q], normal).unwrap_or([0.0, 0.0]);
                    let rx = tr_p[q][0] - tr_e[q][0] - jd[0];
                    let ry = tr_p[q][1] - tr_e[q][1] - jd[1];
                    traction2 += w_arc[q] * (rx * rx + ry * ry);
                    let flux_h = params.kappa / params.eta
                        * ((pr[q].1[0] - params.gravity[0]) * normal[0]
                            + (pr[q].1[1] - params.gravity[1]) * normal[1]);
                    let fd = data.interface_flux(pts[q], normal);
                    flux2 += w_arc[q] * (flux_h - fd) * (flux_h - fd);
                    let jx = up[q][0] - ue[q][0];
                    let jy = up[q][1] - ue[q][1];
                    jump2 += w_arc[q] * (jx * jx + jy * jy);
                }
                lambda2[fi] = h_e / (params.mu_e + params.mu_p) * traction2
                    + h_e * params.eta / params.kappa * flux2
                    + params.beta_u * params.mu0() / h_e * jump2;
            }
            FacetTag::IntE | FacetTag::IntP => {
                let cp = facet.cell_plus.unwrap();
                let mu = params.mu(sub_m);
                let tr_m = stress_trace(mesh, disc, params, solution, cm, &pts, normal);
                let tr_p = stress_trace(mesh, disc, params, solution, cp, &pts, normal);
                let um = displacement_trace(mesh, disc, solution, cm, &pts);
                let upl = displacement_trace(mesh, disc, solution, cp, &pts);
                let mut traction2 = 0.0;
                let mut jump2 = 0.0;
                for q in 0..nqf {
                    let rx = 0.5 * (tr_m[q][0] - tr_p[q][0]);
                    let ry = 0.5 * (tr_m[q][1] - tr_p[q][1]);
                    traction2 += w_arc[q] * (rx * rx + ry * ry);
                    let jx = um[q][0] - upl[q][0];
                    let jy = um[q][1] - upl[q][1];
                    jump2 += w_arc[q] * (jx * jx + jy * jy);
                }
                let edge = h_e / mu * traction2;
                let jump = params.beta_u * mu / h_e * jump2;
                let acc = if tag == FacetTag::IntE { &mut theta2 } else { &mut psi2 };
                acc[cm] += edge + jump;
                acc[cp] += edge + jump;
                if tag == FacetTag::IntP && disc.formulation == Formulation::DgPressure {
                    let pm = pressure_trace(mesh, disc, solution, cm, &pts);
                    let pp = pressure_trace(mesh, disc, solution, cp, &pts);
                    let mut pjump2 = 0.0;
                    for q in 0..nqf {
                        let d = pm[q].0 - pp[q].0;
                        pjump2 += w_arc[q] * d * d;
                    }
                    let term = params.beta_p * params.kappa / (h_e * params.eta) * pjump2;
                    psi2[cm] += term;
                    psi2[cp] += term;
                }
            }
            FacetTag::NeuE | FacetTag::NeuP => {
                let mu = params.mu(sub_m);
                let tr = stress_trace(mesh, disc, params, solution, cm, &pts, normal);
                let mut traction2 = 0.0;
                for q in 0..nqf {
                    let td = data.traction(pts[q], normal, sub_m);
                    let rx = tr[q][0] - td[0];
                    let ry = tr[q][1] - td[1];
                    traction2 += w_arc[q] * (rx * rx + ry * ry);
                }
                let acc = if sub_m == Subdomain::Elastic { &mut theta2 } else { &mut psi2 };
                acc[cm] += h_e / mu * traction2;
                if tag == FacetTag::NeuP && disc.formulation == Formulation::DgPressure {
                    // essential pressure boundary: jump against the datum
                    let pm = pressure_trace(mesh, disc, solution, cm, &pts);
                    let mut pjump2 = 0.0;
                    for q in 0..nqf {
                        let d = pm[q].0 - data.pressure(pts[q]);
                        pjump2 += w_arc[q] * d * d;
                    }
                    psi2[cm] += params.beta_p * params.kappa / (h_e * params.eta) * pjump2;
                }
            }
            FacetTag::DirE | FacetTag::DirP => {
                let mu = params.mu(sub_m);
                let um = displacement_trace(mesh, disc, solution, cm, &pts);
                let mut jump2 = 0.0;
                for q in 0..nqf {
                    let gd = data.displacement(pts[q]);
                    let jx = um[q][0] - gd[0];
                    let jy = um[q][1] - gd[1];
                    jump2 += w_arc[q] * (jx * jx + jy * jy);
                }
                let acc = if sub_m == Subdomain::Elastic { &mut theta2 } else { &mut psi2 };
                acc[cm] += params.beta_u * mu / h_e * jump2;
                if tag == FacetTag::DirP {
                    // flux residual against the natural datum
                    let pr = pressure_trace(mesh, disc, solution, cm, &pts);
                    let mut flux2 = 0.0;
                    for q in 0..nqf {
                        let flux_h = params.kappa / params.eta
                            * ((pr[q].1[0] - params.gravity[0]) * normal[0]
                                + (pr[q].1[1] - params.gravity[1]) * normal[1]);
                        let fd = data.flux(pts[q], normal);
                        flux2 += w_arc[q] * (flux_h - fd) * (flux_h - fd);
                    }
                    psi2[cm] += rho_2(params, h_e) * flux2;
                }
            }
        }
    }

    let sum_theta2: f64 = theta2.iter().sum();
    let sum_psi2: f64 = psi2.iter().sum();
    let sum_lambda2: f64 = lambda2.iter().sum();
    let xi = (sum_theta2 + sum_psi2 + sum_lambda2).sqrt();

    let mut marking: Vec<f64> = (0..n_cells).map(|c| theta2[c] + psi2[c]).collect();
    for (fi, &l2) in lambda2.iter().enumerate() {
        if l2 > 0.0 {
            let f = &mesh.facets[fi];
            marking[f.cell_minus] += 0.5 * l2;
            if let Some(cp) = f.cell_plus {
                marking[cp] += 0.5 * l2;
            }
        }
    }

    EstimatorReport {
        theta: theta2.iter().map(|v| v.sqrt()).collect(),
        psi: psi2.iter().map(|v| v.sqrt()).collect(),
        lambda: lambda2.iter().map(|v| v.sqrt()).collect(),
        xi,
        upsilon: upsilon2.sqrt(),
        marking,
    }
}

/// Effectivity index: component error norms over the global estimator.
pub fn effectivity(errors: &ErrorComponents, xi: f64) -> f64 {
    let p_err = errors.star_p.unwrap_or(errors.e_p);
    (errors.star_u.powi(2) + p_err.powi(2) + errors.e_phi.powi(2)).sqrt() / xi
}

#[cfg(test)]
mod tests;
