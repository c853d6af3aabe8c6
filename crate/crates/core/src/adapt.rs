//! Dorfler marking and the solve-estimate-mark-refine-smooth loop.

use crate::estimate::{effectivity, global_estimator};
use crate::forms::{Discretization, Formulation, ModelParameters};
use crate::harness::{compute_errors, Case};
use crate::mesh::{build_mesh, laplacian_smooth, refine, Mesh};
use crate::solve::solve_direct;
use crate::system::{attach_mean_constraint, build_system};
use crate::{Error, Result};
use std::collections::BTreeSet;
use std::time::Instant;

/// Minimal-cardinality bulk marking: sort indicators descending (ties by
/// lower cell index) and accumulate until the marked squared mass reaches
/// `zeta` times the total.
pub fn dorfler_mark(indicators: &[f64], zeta: f64) -> Result<Vec<usize>> {
    assert!(zeta > 0.0 && zeta <= 1.0, "zeta must lie in (0, 1]");
    let total: f64 = indicators.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Err(Error::AllZero);
    }
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| {
        indicators[b].partial_cmp(&indicators[a]).unwrap().then(a.cmp(&b))
    });
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for &c in &order {
        if acc >= zeta * total {
            break;
        }
        if indicators[c] == 0.0 {
            break;
        }
        marked.push(c);
        acc += indicators[c] * indicators[c];
    }
    marked.sort_unstable();
    Ok(marked)
}

#[derive(Debug, Clone)]
pub struct AdaptiveStep {
    pub step: usize,
    pub dofs: usize,
    pub n_cells: usize,
    pub e_triple: f64,
    pub e_u: f64,
    pub e_p: f64,
    pub e_phi: f64,
    pub xi: f64,
    pub eff: f64,
    pub marked: usize,
    pub seconds: f64,
    /// Marked cells within the audit radius of the audit point, if set.
    pub marked_near: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AdaptiveTrace {
    pub steps: Vec<AdaptiveStep>,
}

pub struct AdaptiveOptions {
    pub zeta: f64,
    pub max_steps: usize,
    pub smoothing: bool,
    pub formulation: Formulation,
    pub k: usize,
    pub initial_resolution: usize,
    /// Geometric audit: count marked cells with centroid within
    /// (point, radius).
    pub audit: Option<([f64; 2], f64)>,
}

/// Run the adaptive loop on a case; returns the trace and the final mesh.
pub fn adaptive_loop(case: &Case, params: &ModelParameters, opts: &AdaptiveOptions) -> Result<(AdaptiveTrace, Mesh)> {
    let mut mesh = build_mesh(&case.geometry, opts.initial_resolution)?;
    let mut trace = AdaptiveTrace::default();
    for step in 0..opts.max_steps {
        let t0 = Instant::now();
        let disc = Discretization::new(&mesh, opts.k, opts.formulation);
        let data = case.data(params);
        let system = build_system(&mesh, &disc, params, &data)?;
        let system = if case.needs_mean_constraint {
            attach_mean_constraint(&system, &mesh, &disc, case.exact_phi_integral(&mesh, &disc, params))
        } else {
            system
        };
        let (solution, _report) = solve_direct(&system)?;
        let report = global_estimator(&mesh, &disc, params, &data, &solution);
        let (errors, eff) = match &case.exact {
            Some(exact) => {
                let e = compute_errors(&mesh, &disc, params, exact, &solution);
                let eff = effectivity(&e, report.xi);
                (Some(e), eff)
            }
            None => (None, 0.0),
        };
        let indicators: Vec<f64> = report.marking.iter().map(|v| v.sqrt()).collect();
        let marked = match dorfler_mark(&indicators, opts.zeta) {
            Ok(m) => m,
            Err(Error::AllZero) => {
                trace.steps.push(AdaptiveStep {
                    step,
                    dofs: disc.n_total(),
                    n_cells: mesh.n_cells(),
                    e_triple: errors.as_ref().map_or(0.0, |e| e.triple),
                    e_u: errors.as_ref().map_or(0.0, |e| e.star_u),
                    e_p: errors.as_ref().map_or(0.0, |e| e.e_p),
                    e_phi: errors.as_ref().map_or(0.0, |e| e.e_phi),
                    xi: report.xi,
                    eff,
                    marked: 0,
                    seconds: t0.elapsed().as_secs_f64(),
                    marked_near: 0,
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let marked_near = match opts.audit {
            Some((point, radius)) => marked
                .iter()
                .filter(|&&c| {
                    let [a, b, d] = mesh.cell_vertices(c);
                    let cen = [(a[0] + b[0] + d[0]) / 3.0, (a[1] + b[1] + d[1]) / 3.0];
                    ((cen[0] - point[0]).powi(2) + (cen[1] - point[1]).powi(2)).sqrt() <= radius
                })
                .count(),
            None => 0,
        };
        trace.steps.push(AdaptiveStep {
            step,
            dofs: disc.n_total(),
            n_cells: mesh.n_cells(),
            e_triple: errors.as_ref().map_or(0.0, |e| e.triple),
            e_u: errors.as_ref().map_or(0.0, |e| e.star_u),
            e_p: errors.as_ref().map_or(0.0, |e| e.e_p),
            e_phi: errors.as_ref().map_or(0.0, |e| e.e_phi),
            xi: report.xi,
            eff,
            marked: marked.len(),
            seconds: t0.elapsed().as_secs_f64(),
            marked_near,
        });
        if step + 1 == opts.max_steps {
            break;
        }
        mesh = refine(&mesh, &BTreeSet::from_iter(marked))?;
        if opts.smoothing {
            mesh = laplacian_smooth(&mesh);
        }
    }
    Ok((trace, mesh))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_one_marks_all_nonzero() {
        let marked = dorfler_mark(&[3.0, 1.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(marked, vec![0, 1, 3]);
    }

    #[test]
    fn bulk_criterion_hand_example() {
        // indicators (3,1,1,1), zeta 0.5: 9 >= 0.5 * 12 with the first cell
        let marked = dorfler_mark(&[3.0, 1.0, 1.0, 1.0], 0.5).unwrap();
        assert_eq!(marked, vec![0]);
    }

    #[test]
    fn marking_is_permutation_invariant() {
        let ind = [0.5, 2.0, 1.5, 0.1, 2.0];
        let marked = dorfler_mark(&ind, 0.6).unwrap();
        // permute and map back
        let perm = [4usize, 2, 0, 1, 3];
        let permuted: Vec<f64> = perm.iter().map(|&i| ind[i]).collect();
        let marked_p = dorfler_mark(&permuted, 0.6).unwrap();
        let mut mapped: Vec<usize> = marked_p.iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        assert_eq!(marked, mapped);
    }

    #[test]
    fn all_zero_is_an_error() {
        assert!(matches!(dorfler_mark(&[0.0, 0.0], 0.5), Err(Error::AllZero)));
    }

    #[test]
    fn smaller_zeta_marks_fewer_cells() {
        let ind: Vec<f64> = (0..100).map(|i| 1.0 + ((i * 37) % 17) as f64).collect();
        let few = dorfler_mark(&ind, 0.02).unwrap();
        let many = dorfler_mark(&ind, 0.5).unwrap();
        assert!(few.len() < many.len());
    }

    #[test]
    fn bulk_criterion_and_minimality_on_random_vectors() {
        let mut state = 0xabcdef12345u64;
        let mut rand = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1_000_000) as f64 / 1_000_000.0
        };
        for trial in 0..1000 {
            let n = 2 + (trial % 50);
            let ind: Vec<f64> = (0..n).map(|_| rand()).collect();
            let zeta = 0.05 + 0.9 * rand();
            let total: f64 = ind.iter().map(|v| v * v).sum();
            if total == 0.0 {
                continue;
            }
            let marked = dorfler_mark(&ind, zeta).unwrap();
            let mass: f64 = marked.iter().map(|&c| ind[c] * ind[c]).sum();
            assert!(mass >= zeta * total - 1e-12 * total, "bulk criterion violated");
            // minimality: dropping the smallest marked indicator breaks it
            let min_cell = marked
                .iter()
                .copied()
                .min_by(|&a, &b| ind[a].partial_cmp(&ind[b]).unwrap())
                .unwrap();
            let reduced = mass - ind[min_cell] * ind[min_cell];
            assert!(reduced < zeta * total, "marked set is not minimal");
        }
    }
}
