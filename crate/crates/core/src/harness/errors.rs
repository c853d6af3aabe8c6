//! Error norms of the verification studies.
//!
//! The displacement error uses the broken energy norm with jump terms, the
//! fluid pressure error the weighted-mass plus weighted-gradient sum, the
//! total pressure the 1/mu-weighted L2 sums, and the combined error the
//! triple norm of the stability analysis (with the SIP pressure seminorm in
//! the discontinuous case).

use super::exact::ExactSolution;
use crate::elements::{eval_scalar_field, eval_vector_field, CellGeometry};
use crate::forms::{Discretization, Formulation, ModelParameters};
use crate::mesh::{FacetTag, Mesh, Subdomain};
use crate::quadrature::{edge_rule, triangle_rule};
use crate::system::Solution;

#[derive(Debug, Clone)]
pub struct ErrorComponents {
    /// Triple norm of the analysis (starred variant for DG pressure).
    pub triple: f64,
    /// Broken energy norm of the displacement error.
    pub star_u: f64,
    /// Weighted fluid pressure error.
    pub e_p: f64,
    /// Weighted total pressure error.
    pub e_phi: f64,
    /// SIP norm of the pressure error (DG formulation only).
    pub star_p: Option<f64>,
}

pub fn compute_errors(
    mesh: &Mesh,
    disc: &Discretization,
    params: &ModelParameters,
    exact: &ExactSolution,
    solution: &Solution,
) -> ErrorComponents {
    let rule = triangle_rule(disc.data_degree());
    let nq = rule.points.len();

    let mut eps2 = 0.0; // || sqrt(2 mu) eps_h(u - u_h) ||^2
    let mut phi_mu2 = 0.0; // || (2 mu)^{-1/2} (phi - phi_h) ||^2
    let mut phi_e2 = 0.0; // || phi - phi_h ||^2 on E
    let mut phi_p2 = 0.0; // || phi - phi_h ||^2 on P
    let mut mixed_p2 = 0.0; // || (phi - phi_h) - alpha (p - p_h) ||^2 on P
    let mut p_l2 = 0.0; // || p - p_h ||^2 on P
    let mut p_h1 = 0.0; // || grad_h (p - p_h) ||^2 on P

    for cell in 0..mesh.n_cells() {
        let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
        let sub = mesh.cell_tag[cell];
        let mu = params.mu(sub);
        let u_vals = eval_vector_field(&disc.v, mesh, cell, &rule.points, &solution.u);
        let phi_vals = eval_scalar_field(&disc.z, mesh, cell, &rule.points, &solution.phi);
        let p_vals = if sub == Subdomain::Poro {
            Some(eval_scalar_field(&disc.q, mesh, cell, &rule.points, &solution.p))
        } else {
            None
        };
        for q in 0..nq {
            let w = rule.weights[q] * geo.det;
            let x = geo.to_physical(rule.points[q]);
            let eps_ex = exact.eps(x);
            let g = &u_vals[q].1;
            let e_eps = [
                eps_ex[0][0] - g[0][0],
                eps_ex[0][1] - 0.5 * (g[0][1] + g[1][0]),
                eps_ex[1][1] - g[1][1],
            ];
            eps2 += w * 2.0 * mu * (e_eps[0] * e_eps[0] + 2.0 * e_eps[1] * e_eps[1] + e_eps[2] * e_eps[2]);
            let phi_err = exact.phi(params, sub, x) - phi_vals[q].0;
            phi_mu2 += w * phi_err * phi_err / (2.0 * mu);
            match sub {
                Subdomain::Elastic => phi_e2 += w * phi_err * phi_err,
                Subdomain::Poro => {
                    phi_p2 += w * phi_err * phi_err;
                    let pv = p_vals.as_ref().unwrap();
                    let p_err = exact.p(x) - pv[q].0;
                    let gp_ex = exact.grad_p(x);
                    let gp_err = [gp_ex[0] - pv[q].1[0], gp_ex[1] - pv[q].1[1]];
                    let m = phi_err - params.alpha * p_err;
                    mixed_p2 += w * m * m;
                    p_l2 += w * p_err * p_err;
                    p_h1 += w * (gp_err[0] * gp_err[0] + gp_err[1] * gp_err[1]);
                }
            }
        }
    }

    // facet jump terms of the displacement error and (for DG) the pressure
    let (ts, ws) = edge_rule(disc.data_degree());
    let nqf = ts.len();
    let mut jump_u2 = 0.0;
    let mut jump_p2 = 0.0;
    for fi in 0..mesh.n_facets() {
        let tag = mesh.facet_tag[fi];
        let u_facet = tag.is_interior() || tag.is_dirichlet();
        let p_facet = disc.formulation == Formulation::DgPressure && tag == FacetTag::IntP;
        if !u_facet && !p_facet {
            continue;
        }
        let facet = &mesh.facets[fi];
        let a = mesh.vertices[facet.v[0]];
        let b = mesh.vertices[facet.v[1]];
        let h_e = mesh.facet_length(fi);
        let mu_w = if tag == FacetTag::Sigma {
            params.mu0()
        } else {
            params.mu(mesh.cell_tag[facet.cell_minus])
        };
        for q in 0..nqf {
            let x = [a[0] + ts[q] * (b[0] - a[0]), a[1] + ts[q] * (b[1] - a[1])];
            let w = ws[q] * h_e;
            let trace = |cell: usize| {
                let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
                let xi = geo.to_reference(x);
                eval_vector_field(&disc.v, mesh, cell, &[xi], &solution.u)[0].0
            };
            if u_facet {
                let u_ex = exact.u(x);
                let wm = {
                    let t = trace(facet.cell_minus);
                    [t[0] - u_ex[0], t[1] - u_ex[1]]
                };
                let jump2 = match facet.cell_plus {
                    Some(cp) => {
                        let t = trace(cp);
                        let wp = [t[0] - u_ex[0], t[1] - u_ex[1]];
                        wm[0] * wm[0] + wm[1] * wm[1] + wp[0] * wp[0] + wp[1] * wp[1]
                            - 2.0 * (wm[0] * wp[0] + wm[1] * wp[1])
                    }
                    None => wm[0] * wm[0] + wm[1] * wm[1],
                };
                jump_u2 += w * 2.0 * mu_w * params.beta_u / h_e * jump2;
            }
            if p_facet {
                let ptrace = |cell: usize| {
                    let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
                    let xi = geo.to_reference(x);
                    eval_scalar_field(&disc.q, mesh, cell, &[xi], &solution.p)[0].0
                };
                let diff = ptrace(facet.cell_minus) - ptrace(facet.cell_plus.unwrap());
                let kappa_eta = params.kappa / params.eta;
                jump_p2 += w * params.beta_p / h_e * kappa_eta * kappa_eta * diff * diff;
            }
        }
    }

    let star_u = (eps2 + jump_u2).sqrt();
    let kappa_eta = params.kappa / params.eta;
    let grad_term = kappa_eta * kappa_eta * p_h1;
    let star_p2 = grad_term + jump_p2;
    let pressure_part = match disc.formulation {
        Formulation::CgPressure => grad_term,
        Formulation::DgPressure => star_p2,
    };
    let triple = (star_u * star_u
        + phi_mu2
        + phi_e2 / params.lambda_e
        + mixed_p2 / params.lambda_p
        + params.c0 * p_l2
        + pressure_part)
        .sqrt();
    let e_p = params.storage() * p_l2.sqrt() + kappa_eta * p_h1.sqrt();
    let e_phi = phi_e2.sqrt() / params.mu_e + phi_p2.sqrt() / params.mu_p;
    let star_p = match disc.formulation {
        Formulation::DgPressure => Some(star_p2.sqrt()),
        Formulation::CgPressure => None,
    };
    ErrorComponents { triple, star_u, e_p, e_phi, star_p }
}

/// Experimental convergence rate between consecutive levels,
/// log(e/e') / log(h/h').
pub fn rate_h(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Adaptive convergence rate, -2 log(e/e') / log(dof/dof').
pub fn rate_dof(e_coarse: f64, e_fine: f64, dof_coarse: usize, dof_fine: usize) -> f64 {
    -2.0 * (e_coarse / e_fine).ln() / ((dof_coarse as f64 / dof_fine as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_formula_on_halving_sequence() {
        let rates: Vec<f64> = [(4.0, 2.0), (2.0, 1.0)]
            .iter()
            .map(|&(ec, ef)| rate_h(ec, ef, 1.0, 0.5))
            .collect();
        for r in rates {
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_rate_formula() {
        // dof quadruples, error quarters -> rate 2
        let r = rate_dof(4.0, 1.0, 100, 400);
        assert!((r - 2.0).abs() < 1e-12);
    }
}
