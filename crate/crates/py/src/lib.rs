//! Python bindings: meshes, solves, error tables, marking.

use biot_hdiv::adapt::dorfler_mark;
use biot_hdiv::estimate::{effectivity, global_estimator};
use biot_hdiv::forms::{Formulation, ModelParameters};
use biot_hdiv::harness::config::SolverKind;
use biot_hdiv::harness::runs::solve_case;
use biot_hdiv::harness::{compute_errors, Case};
use biot_hdiv::mesh::{build_mesh, laplacian_smooth, refine, Mesh};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::collections::BTreeSet;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_formulation(name: &str) -> PyResult<Formulation> {
    match name {
        "cg" => Ok(Formulation::CgPressure),
        "dg" => Ok(Formulation::DgPressure),
        other => Err(PyValueError::new_err(format!("unknown formulation '{other}'"))),
    }
}

/// A conforming two-subdomain triangulation.
#[pyclass(name = "Mesh")]
struct PyMesh {
    inner: Mesh,
}

#[pymethods]
impl PyMesh {
    #[getter]
    fn n_cells(&self) -> usize {
        self.inner.n_cells()
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_facets(&self) -> usize {
        self.inner.n_facets()
    }

    fn vertices(&self) -> Vec<(f64, f64)> {
        self.inner.vertices.iter().map(|v| (v[0], v[1])).collect()
    }

    fn cells(&self) -> Vec<(usize, usize, usize)> {
        self.inner.cells.iter().map(|c| (c[0], c[1], c[2])).collect()
    }

    fn total_area(&self) -> f64 {
        self.inner.total_area()
    }

    fn max_diameter(&self) -> f64 {
        self.inner.max_diameter()
    }

    /// Bisect the marked cells (with conforming closure).
    fn refine(&self, marked: Vec<usize>) -> PyResult<PyMesh> {
        let set: BTreeSet<usize> = marked.into_iter().collect();
        Ok(PyMesh { inner: refine(&self.inner, &set).map_err(err)? })
    }

    /// One pass of guarded Laplacian smoothing.
    fn smooth(&self) -> PyMesh {
        PyMesh { inner: laplacian_smooth(&self.inner) }
    }
}

/// Build a mesh of a named case geometry ("square", "lshape", "stripe").
#[pyfunction]
fn case_mesh(case: &str, resolution: usize) -> PyResult<PyMesh> {
    let case = Case::from_name(case).map_err(err)?;
    Ok(PyMesh { inner: build_mesh(&case.geometry, resolution).map_err(err)? })
}

/// Solve a manufactured case and report dof counts, solver data, error
/// norms, the estimator and its effectivity.
#[pyfunction]
#[pyo3(signature = (case, resolution, k=0, formulation="cg", solver="direct", beta_u=None))]
fn solve(
    py: Python<'_>,
    case: &str,
    resolution: usize,
    k: usize,
    formulation: &str,
    solver: &str,
    beta_u: Option<f64>,
) -> PyResult<PyObject> {
    let case = Case::from_name(case).map_err(err)?;
    let mut params = ModelParameters::example1(k);
    if let Some(beta) = beta_u {
        params.beta_u = beta;
    }
    let formulation = parse_formulation(formulation)?;
    let solver = match solver {
        "direct" => SolverKind::Direct,
        "pminres" => SolverKind::Pminres,
        other => return Err(PyValueError::new_err(format!("unknown solver '{other}'"))),
    };
    let mesh = build_mesh(&case.geometry, resolution).map_err(err)?;
    let (disc, _system, solution, report) =
        solve_case(&mesh, &case, &params, k, formulation, solver, solver == SolverKind::Pminres, 1e-6, 500)
            .map_err(err)?;
    let data = case.data(&params);
    let estimate = global_estimator(&mesh, &disc, &params, &data, &solution);
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("dofs", disc.n_total())?;
    dict.set_item("iterations", report.iterations)?;
    dict.set_item("residual", report.residual)?;
    dict.set_item("converged", report.converged)?;
    dict.set_item("xi", estimate.xi)?;
    if let Some(exact) = &case.exact {
        let errors = compute_errors(&mesh, &disc, &params, exact, &solution);
        dict.set_item("e_triple", errors.triple)?;
        dict.set_item("e_star_u", errors.star_u)?;
        dict.set_item("e_p", errors.e_p)?;
        dict.set_item("e_phi", errors.e_phi)?;
        dict.set_item("eff", effectivity(&errors, estimate.xi))?;
    }
    Ok(dict.into())
}

/// Triple-norm errors over a sequence of uniformly refined meshes; rows are
/// (dofs, h, error).
#[pyfunction]
#[pyo3(signature = (case, resolution, levels, k=0, formulation="cg"))]
fn convergence(
    case: &str,
    resolution: usize,
    levels: usize,
    k: usize,
    formulation: &str,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let case_obj = Case::from_name(case).map_err(err)?;
    let params = ModelParameters::example1(k);
    let formulation = parse_formulation(formulation)?;
    let mut mesh = build_mesh(&case_obj.geometry, resolution).map_err(err)?;
    let mut rows = Vec::new();
    for level in 0..levels {
        if level > 0 {
            mesh = biot_hdiv::mesh::refine_uniform(&mesh).map_err(err)?;
        }
        let (disc, _sys, solution, _rep) = solve_case(
            &mesh,
            &case_obj,
            &params,
            k,
            formulation,
            SolverKind::Direct,
            false,
            1e-6,
            500,
        )
        .map_err(err)?;
        let exact = case_obj.exact.as_ref().expect("manufactured case");
        let errors = compute_errors(&mesh, &disc, &params, exact, &solution);
        rows.push((disc.n_total(), mesh.max_diameter(), errors.triple));
    }
    Ok(rows)
}

/// Minimal-cardinality Dorfler marking of a list of cell indicators.
#[pyfunction]
fn mark(indicators: Vec<f64>, zeta: f64) -> PyResult<Vec<usize>> {
    dorfler_mark(&indicators, zeta).map_err(err)
}

/// Per-cell estimator indicators for a solved case.
#[pyfunction]
#[pyo3(signature = (case, resolution, k=0, formulation="cg"))]
fn indicators(case: &str, resolution: usize, k: usize, formulation: &str) -> PyResult<Vec<f64>> {
    let case = Case::from_name(case).map_err(err)?;
    let params = ModelParameters::example1(k);
    let formulation = parse_formulation(formulation)?;
    let mesh = build_mesh(&case.geometry, resolution).map_err(err)?;
    let (disc, _sys, solution, _rep) =
        solve_case(&mesh, &case, &params, k, formulation, SolverKind::Direct, false, 1e-6, 500).map_err(err)?;
    let data = case.data(&params);
    let est = global_estimator(&mesh, &disc, &params, &data, &solution);
    Ok(est.marking.iter().map(|v| v.sqrt()).collect())
}

#[pymodule]
fn pybiothdiv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_function(wrap_pyfunction!(case_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(mark, m)?)?;
    m.add_function(wrap_pyfunction!(indicators, m)?)?;
    Ok(())
}
