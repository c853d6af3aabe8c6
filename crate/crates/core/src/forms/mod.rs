//! Assembly of the bilinear and linear forms of the coupled formulation.

mod assembly;
mod rhs;

pub use assembly::*;
pub use rhs::{
    assemble_rhs, displacement_constraint_values, pressure_constraint_values, ProblemData, ZeroData,
};

use crate::elements::{Space, SpaceSpec};
use crate::mesh::{Mesh, Subdomain};

/// Physical and penalty coefficients of the coupled model.
#[derive(Debug, Clone)]
pub struct ModelParameters {
    /// Shear modulus, elastic subdomain (Pa).
    pub mu_e: f64,
    /// Shear modulus, poroelastic subdomain (Pa).
    pub mu_p: f64,
    /// Dilation modulus, elastic subdomain (Pa).
    pub lambda_e: f64,
    /// Dilation modulus, poroelastic subdomain (Pa).
    pub lambda_p: f64,
    /// Biot-Willis coupling coefficient.
    pub alpha: f64,
    /// Storativity (1/Pa).
    pub c0: f64,
    /// Permeability (m^2).
    pub kappa: f64,
    /// Fluid viscosity (Pa s).
    pub eta: f64,
    /// Time-step of the single implicit step; 1 recovers the steady forms.
    pub dt: f64,
    /// Displacement tangential-jump penalty (also the Nitsche parameter).
    pub beta_u: f64,
    /// Pressure jump penalty for the discontinuous formulation.
    pub beta_p: f64,
    /// Gravity body term rho*g entering the fluid flux.
    pub gravity: [f64; 2],
}

impl ModelParameters {
    /// Example-1 values with the penalty defaults for order k.
    pub fn example1(k: usize) -> Self {
        let beta = 2.5 * 10f64.powi(2 * k as i32 + 1);
        ModelParameters {
            mu_e: 20.0,
            mu_p: 10.0,
            lambda_e: 1.0e4,
            lambda_p: 2.0e4,
            alpha: 1.0,
            c0: 1.0,
            kappa: 1.0,
            eta: 1.0,
            dt: 1.0,
            beta_u: beta,
            beta_p: beta,
            gravity: [0.0, 0.0],
        }
    }

    pub fn mu0(&self) -> f64 {
        self.mu_e.max(self.mu_p)
    }

    pub fn mu(&self, sub: Subdomain) -> f64 {
        match sub {
            Subdomain::Elastic => self.mu_e,
            Subdomain::Poro => self.mu_p,
        }
    }

    pub fn lambda(&self, sub: Subdomain) -> f64 {
        match sub {
            Subdomain::Elastic => self.lambda_e,
            Subdomain::Poro => self.lambda_p,
        }
    }

    /// Storage coefficient c0 + alpha^2 / lambda^P.
    pub fn storage(&self) -> f64 {
        self.c0 + self.alpha * self.alpha / self.lambda_p
    }

    pub fn validate(&self) -> crate::Result<()> {
        let pos = [
            ("mu_e", self.mu_e),
            ("mu_p", self.mu_p),
            ("lambda_e", self.lambda_e),
            ("lambda_p", self.lambda_p),
            ("kappa", self.kappa),
            ("eta", self.eta),
            ("dt", self.dt),
            ("beta_u", self.beta_u),
            ("beta_p", self.beta_p),
        ];
        for (name, v) in pos {
            if !(v > 0.0) {
                return Err(crate::Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.c0 < 0.0 {
            return Err(crate::Error::Config(format!("c0 must be nonnegative, got {}", self.c0)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(crate::Error::Config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Which fluid pressure space is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    CgPressure,
    DgPressure,
}

/// Row/column space of an assembled form matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceId {
    Displacement,
    Pressure,
    TotalPressure,
}

#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub matrix: crate::sparse::CsrMatrix,
    pub rows: SpaceId,
    pub cols: SpaceId,
}

/// The three discrete spaces of one run, bound to a mesh.
pub struct Discretization {
    pub k: usize,
    pub formulation: Formulation,
    pub v: Space,
    pub q: Space,
    pub z: Space,
}

impl Discretization {
    pub fn new(mesh: &Mesh, k: usize, formulation: Formulation) -> Self {
        let v = Space::new(SpaceSpec::displacement(k), mesh);
        let q = match formulation {
            Formulation::CgPressure => Space::new(SpaceSpec::pressure_cg(k), mesh),
            Formulation::DgPressure => Space::new(SpaceSpec::pressure_dg(k), mesh),
        };
        let z = Space::new(SpaceSpec::total_pressure(k), mesh);
        Discretization { k, formulation, v, q, z }
    }

    /// Quadrature degree for stiffness-type volume terms.
    pub fn volume_degree(&self) -> usize {
        2 * (self.k + 2)
    }

    /// Quadrature degree for facet terms.
    pub fn facet_degree(&self) -> usize {
        2 * (self.k + 2) + 1
    }

    /// Degree-raised rule for integrals against analytic data.
    pub fn data_degree(&self) -> usize {
        self.volume_degree() + 4
    }

    pub fn n_total(&self) -> usize {
        self.v.n_dofs() + self.q.n_dofs() + self.z.n_dofs()
    }
}
