//! Experiment drivers: convergence studies, adaptive runs, preconditioner
//! sweeps, and single solves with file outputs.

use super::cases::Case;
use super::config::{CaseConfig, RunKind, SolverKind};
use super::csvfmt::{sci, write_csv};
use super::errors::{compute_errors, rate_h};
use crate::adapt::{adaptive_loop, AdaptiveOptions, AdaptiveTrace};
use crate::estimate::{effectivity, global_estimator};
use crate::forms::{Discretization, Formulation, ModelParameters};
use crate::mesh::{build_mesh, refine_uniform, Mesh};
use crate::solve::{build_preconditioner, solve_direct, solve_minres, SolveReport};
use crate::system::{attach_mean_constraint, build_system, apply_scaling, BlockSystem, Solution};
use crate::{Error, Result};
use std::path::Path;

/// Assemble and solve one case on a given mesh.
pub fn solve_case(
    mesh: &Mesh,
    case: &Case,
    params: &ModelParameters,
    k: usize,
    formulation: Formulation,
    solver: SolverKind,
    scaled: bool,
    rtol: f64,
    maxit: usize,
) -> Result<(Discretization, BlockSystem, Solution, SolveReport)> {
    let disc = Discretization::new(mesh, k, formulation);
    let data = case.data(params);
    let mut system = build_system(mesh, &disc, params, &data)?;
    if scaled {
        system = apply_scaling(&system, params);
    }
    if case.needs_mean_constraint {
        let mean = case.exact_phi_integral(mesh, &disc, params);
        system = attach_mean_constraint(&system, mesh, &disc, mean);
    }
    let (solution, report) = match solver {
        SolverKind::Direct => solve_direct(&system)?,
        SolverKind::Pminres => {
            let precond = build_preconditioner(mesh, &disc, params, &system)?;
            let (solution, report) = solve_minres(&system, &precond, rtol, maxit);
            let report = match report {
                Ok(r) => r,
                Err(Error::NoConvergence { iterations, residual }) => {
                    SolveReport { iterations, residual, seconds: 0.0, converged: false }
                }
                Err(e) => return Err(e),
            };
            (solution, report)
        }
    };
    Ok((disc, system, solution, report))
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub dofs: usize,
    pub h: f64,
    pub triple: f64,
    pub star_u: f64,
    pub e_p: f64,
    pub e_phi: f64,
    pub xi: f64,
    pub eff: f64,
}

/// Uniform-refinement convergence study; levels are generated from the base
/// mesh by uniform bisection so adaptive runs with full marking reproduce
/// the same meshes.
pub fn run_convergence(config: &CaseConfig) -> Result<Vec<ConvergenceRow>> {
    let case = Case::from_name(&config.case)?;
    let params = config.parameters();
    let mut mesh = build_mesh(&case.geometry, config.resolution)?;
    let mut rows = Vec::new();
    for level in 0..config.levels {
        if level > 0 {
            mesh = refine_uniform(&mesh)?;
        }
        let (disc, _system, solution, _report) = solve_case(
            &mesh,
            &case,
            &params,
            config.k,
            config.formulation,
            config.solver,
            config.scaling && config.solver == SolverKind::Pminres,
            config.rtol,
            config.maxit,
        )?;
        let exact = case.exact.as_ref().expect("convergence study needs an exact solution");
        let errors = compute_errors(&mesh, &disc, &params, exact, &solution);
        let data = case.data(&params);
        let report = global_estimator(&mesh, &disc, &params, &data, &solution);
        let eff = effectivity(&errors, report.xi);
        rows.push(ConvergenceRow {
            level,
            dofs: disc.n_total(),
            h: mesh.max_diameter(),
            triple: errors.triple,
            star_u: errors.star_u,
            e_p: errors.star_p.unwrap_or(errors.e_p),
            e_phi: errors.e_phi,
            xi: report.xi,
            eff,
        });
    }
    if let Some(dir) = &config.output_dir {
        let path = Path::new(dir).join(format!("convergence_k{}_{}.csv", config.k, config.formulation_name()));
        std::fs::create_dir_all(dir)?;
        let mut file = std::fs::File::create(path)?;
        write_csv(&mut file, "dofs,e_triple,rate,e_star_u,rate,e_p,rate,e_phi,rate,eff", &convergence_csv_rows(&rows))?;
    }
    Ok(rows)
}

pub fn convergence_csv_rows(rows: &[ConvergenceRow]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let rate = |f: fn(&ConvergenceRow) -> f64| -> String {
            if i == 0 {
                "*".into()
            } else {
                sci(rate_h(f(&rows[i - 1]), f(row), rows[i - 1].h, row.h))
            }
        };
        out.push(vec![
            row.dofs.to_string(),
            sci(row.triple),
            rate(|r| r.triple),
            sci(row.star_u),
            rate(|r| r.star_u),
            sci(row.e_p),
            rate(|r| r.e_p),
            sci(row.e_phi),
            rate(|r| r.e_phi),
            sci(row.eff),
        ]);
    }
    out
}

/// Adaptive run driven by the estimator.
pub fn run_adaptive(config: &CaseConfig) -> Result<AdaptiveTrace> {
    let case = Case::from_name(&config.case)?;
    let params = config.parameters();
    let opts = AdaptiveOptions {
        zeta: config.zeta,
        max_steps: config.max_steps,
        smoothing: config.smoothing,
        formulation: config.formulation,
        k: config.k,
        initial_resolution: config.resolution,
        audit: config.audit,
    };
    let (trace, final_mesh) = adaptive_loop(&case, &params, &opts)?;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let mut rows = Vec::new();
        for s in &trace.steps {
            rows.push(vec![
                s.step.to_string(),
                s.dofs.to_string(),
                sci(s.e_triple),
                sci(s.e_u),
                sci(s.e_p),
                sci(s.e_phi),
                sci(s.xi),
                sci(s.eff),
                s.marked.to_string(),
                sci(s.seconds),
            ]);
        }
        let mut file = std::fs::File::create(Path::new(dir).join("adapt_trace.csv"))?;
        write_csv(&mut file, "step,dofs,e_triple,e_u,e_p,e_phi,xi,eff,marked,seconds", &rows)?;
        if config.vtk {
            let mut f = std::fs::File::create(Path::new(dir).join("adapt_final_mesh.vtk"))?;
            crate::io::write_vtk(&mut f, &final_mesh, &[])?;
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub ell: usize,
    pub dofs: usize,
    pub beta_u: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
}

/// Preconditioned MINRES robustness protocol on the stripe geometry: mesh
/// levels at fixed parameters, then the kappa/lambda sweep at the coarsest
/// level. The scaled system is used unless disabled.
pub fn run_precond_sweep(config: &CaseConfig) -> Result<Vec<SweepRow>> {
    let case = Case::stripe();
    let base = config.parameters();
    let mut rows = Vec::new();
    let mut run_one = |ell: usize, beta: f64, kappa: f64, lambda: f64| -> Result<()> {
        let mut params = base.clone();
        params.beta_u = beta;
        params.kappa = kappa;
        params.lambda_e = lambda;
        params.lambda_p = lambda;
        let mesh = build_mesh(&case.geometry, ell)?;
        let (disc, _system, _solution, report) = solve_case(
            &mesh,
            &case,
            &params,
            config.k,
            config.formulation,
            SolverKind::Pminres,
            config.scaling,
            config.rtol,
            config.maxit,
        )?;
        rows.push(SweepRow {
            ell,
            dofs: disc.n_total(),
            beta_u: beta,
            kappa,
            lambda,
            iterations: report.iterations,
            residual: report.residual,
            seconds: report.seconds,
            converged: report.converged,
        });
        Ok(())
    };
    for &beta in &config.betas {
        for &ell in &config.ells {
            run_one(ell, beta, base.kappa, base.lambda_p)?;
        }
    }
    let ell0 = *config.ells.first().unwrap_or(&2);
    for &kappa in &config.kappas {
        for &lambda in &config.lambdas {
            run_one(ell0, *config.betas.first().unwrap_or(&10.0), kappa, lambda)?;
        }
    }
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.ell.to_string(),
                    r.dofs.to_string(),
                    sci(r.beta_u),
                    sci(r.kappa),
                    sci(r.lambda),
                    r.iterations.to_string(),
                    sci(r.residual),
                    sci(r.seconds),
                    (r.converged as u8).to_string(),
                ]
            })
            .collect();
        let mut file = std::fs::File::create(Path::new(dir).join("precond_sweep.csv"))?;
        write_csv(&mut file, "ell,dofs,beta_u,kappa,lambda,iterations,residual,seconds,converged", &csv_rows)?;
    }
    Ok(rows)
}

/// One assemble-solve-estimate pass with optional VTK / matrix output.
pub fn run_solve(config: &CaseConfig) -> Result<SolveReport> {
    let case = Case::from_name(&config.case)?;
    let params = config.parameters();
    let mesh = build_mesh(&case.geometry, config.resolution)?;
    let (disc, system, solution, report) = solve_case(
        &mesh,
        &case,
        &params,
        config.k,
        config.formulation,
        config.solver,
        config.scaling && config.solver == SolverKind::Pminres,
        config.rtol,
        config.maxit,
    )?;
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir)?;
        let data = case.data(&params);
        let est = global_estimator(&mesh, &disc, &params, &data, &solution);
        if config.vtk {
            let mut f = std::fs::File::create(Path::new(dir).join("solution_mesh.vtk"))?;
            let marking: Vec<f64> = est.marking.iter().map(|v| v.sqrt()).collect();
            crate::io::write_vtk(&mut f, &mesh, &[("indicator", &marking)])?;
        }
        if config.dump_matrix {
            let mut f = std::fs::File::create(Path::new(dir).join("system.mtx"))?;
            system.matrix.write_matrix_market(&mut f)?;
        }
        let mut file = std::fs::File::create(Path::new(dir).join("solve_report.csv"))?;
        write_csv(
            &mut file,
            "dofs,beta_u,iterations,residual,seconds",
            &[vec![
                disc.n_total().to_string(),
                sci(params.beta_u),
                report.iterations.to_string(),
                sci(report.residual),
                sci(report.seconds),
            ]],
        )?;
    }
    Ok(report)
}

/// Dispatch by run kind.
pub fn run(config: &CaseConfig) -> Result<()> {
    match config.kind {
        RunKind::Solve => {
            let report = run_solve(config)?;
            println!(
                "solve: iterations={} residual={} converged={}",
                report.iterations,
                sci(report.residual),
                report.converged
            );
        }
        RunKind::Convergence => {
            let rows = run_convergence(config)?;
            println!("dofs,e_triple,rate,e_star_u,rate,e_p,rate,e_phi,rate,eff");
            for row in convergence_csv_rows(&rows) {
                println!("{}", row.join(","));
            }
        }
        RunKind::Adapt => {
            let trace = run_adaptive(config)?;
            println!("step,dofs,e_triple,xi,eff,marked");
            for s in &trace.steps {
                println!("{},{},{},{},{},{}", s.step, s.dofs, sci(s.e_triple), sci(s.xi), sci(s.eff), s.marked);
            }
        }
        RunKind::Precond => {
            let rows = run_precond_sweep(config)?;
            println!("ell,dofs,beta_u,kappa,lambda,iterations,converged");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.ell,
                    r.dofs,
                    sci(r.beta_u),
                    sci(r.kappa),
                    sci(r.lambda),
                    r.iterations,
                    r.converged
                );
            }
        }
    }
    Ok(())
}
