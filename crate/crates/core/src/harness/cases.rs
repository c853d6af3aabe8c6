//! Experiment cases: geometry, parameters, and problem data bundled.

use super::exact::{l_shape_solution, square_solution, ExactSolution};
use crate::elements::CellGeometry;
use crate::forms::{Discretization, ModelParameters, ProblemData};
use crate::mesh::{GeometrySpec, Mesh, Subdomain};
use crate::quadrature::triangle_rule;

pub struct Case {
    pub name: String,
    pub geometry: GeometrySpec,
    pub exact: Option<ExactSolution>,
    /// Attach the mean-value constraint (no essential pressure boundary).
    pub needs_mean_constraint: bool,
}

impl Case {
    /// Square-domain smooth verification case.
    pub fn square() -> Case {
        Case {
            name: "square".into(),
            geometry: GeometrySpec::unit_square_split(),
            exact: Some(square_solution()),
            needs_mean_constraint: true,
        }
    }

    /// L-shape case with high gradients near the reentrant corner.
    pub fn l_shape() -> Case {
        Case {
            name: "lshape".into(),
            geometry: GeometrySpec::l_shape(),
            exact: Some(l_shape_solution()),
            needs_mean_constraint: true,
        }
    }

    /// Thin-stripe geometry for the preconditioner study, reusing the smooth
    /// manufactured solution.
    pub fn stripe() -> Case {
        Case {
            name: "stripe".into(),
            geometry: GeometrySpec::stripe(),
            exact: Some(square_solution()),
            needs_mean_constraint: true,
        }
    }

    pub fn from_name(name: &str) -> crate::Result<Case> {
        match name {
            "square" => Ok(Case::square()),
            "lshape" => Ok(Case::l_shape()),
            "stripe" => Ok(Case::stripe()),
            other => Err(crate::Error::Config(format!("unknown case '{other}'"))),
        }
    }

    /// Problem data view bound to a parameter set.
    pub fn data<'a>(&'a self, params: &'a ModelParameters) -> CaseData<'a> {
        CaseData { exact: self.exact.as_ref(), params }
    }

    /// Exact integral of the total pressure over the domain, the prescribed
    /// value of the mean constraint row.
    pub fn exact_phi_integral(&self, mesh: &Mesh, disc: &Discretization, params: &ModelParameters) -> f64 {
        let Some(exact) = &self.exact else { return 0.0 };
        let rule = triangle_rule(disc.data_degree());
        let mut acc = 0.0;
        for cell in 0..mesh.n_cells() {
            let geo = CellGeometry::new(mesh, cell).expect("degenerate cell");
            let sub = mesh.cell_tag[cell];
            for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
                acc += w * geo.det * exact.phi(params, sub, geo.to_physical(xi));
            }
        }
        acc
    }
}

pub struct CaseData<'a> {
    exact: Option<&'a ExactSolution>,
    params: &'a ModelParameters,
}

impl ProblemData for CaseData<'_> {
    fn body_load(&self, x: [f64; 2], sub: Subdomain) -> [f64; 2] {
        match self.exact {
            Some(e) => e.body_load(self.params, sub, x),
            None => [0.0, 0.0],
        }
    }

    fn source(&self, x: [f64; 2]) -> f64 {
        self.exact.map_or(0.0, |e| e.source(self.params, x))
    }

    fn displacement(&self, x: [f64; 2]) -> [f64; 2] {
        self.exact.map_or([0.0, 0.0], |e| e.u(x))
    }

    fn pressure(&self, x: [f64; 2]) -> f64 {
        self.exact.map_or(0.0, |e| e.p(x))
    }

    fn traction(&self, x: [f64; 2], n: [f64; 2], sub: Subdomain) -> [f64; 2] {
        match self.exact {
            Some(e) => {
                let s = e.stress(self.params, sub, x);
                [s[0][0] * n[0] + s[0][1] * n[1], s[1][0] * n[0] + s[1][1] * n[1]]
            }
            None => [0.0, 0.0],
        }
    }

    fn flux(&self, x: [f64; 2], n: [f64; 2]) -> f64 {
        self.exact.map_or(0.0, |e| e.flux(self.params, x, n))
    }

    fn interface_flux(&self, x: [f64; 2], n: [f64; 2]) -> f64 {
        self.exact.map_or(0.0, |e| e.flux(self.params, x, n))
    }

    fn interface_stress_jump(&self, x: [f64; 2], n: [f64; 2]) -> Option<[f64; 2]> {
        self.exact.map(|e| e.stress_jump(self.params, x, n))
    }

    fn needs_interface_correction(&self) -> bool {
        self.exact.is_some()
    }
}
