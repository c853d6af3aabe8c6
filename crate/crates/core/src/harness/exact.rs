//! Closed-form solutions and the fields derived from them.

use crate::forms::ModelParameters;
use crate::mesh::Subdomain;

/// A scalar field with closed-form first and second derivatives.
#[derive(Clone, Copy)]
pub struct ScalarField {
    pub f: fn(f64, f64) -> f64,
    pub grad: fn(f64, f64) -> [f64; 2],
    pub hess: fn(f64, f64) -> [[f64; 2]; 2],
}

/// Manufactured displacement/pressure pair; the total pressure and all data
/// fields follow from the constitutive laws.
#[derive(Clone, Copy)]
pub struct ExactSolution {
    pub u: [ScalarField; 2],
    pub p: ScalarField,
}

impl ExactSolution {
    pub fn u(&self, x: [f64; 2]) -> [f64; 2] {
        [(self.u[0].f)(x[0], x[1]), (self.u[1].f)(x[0], x[1])]
    }

    /// grad_u[a][b] = d u_a / d x_b
    pub fn grad_u(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        [(self.u[0].grad)(x[0], x[1]), (self.u[1].grad)(x[0], x[1])]
    }

    pub fn div_u(&self, x: [f64; 2]) -> f64 {
        let g = self.grad_u(x);
        g[0][0] + g[1][1]
    }

    pub fn eps(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let g = self.grad_u(x);
        let off = 0.5 * (g[0][1] + g[1][0]);
        [[g[0][0], off], [off, g[1][1]]]
    }

    pub fn grad_div_u(&self, x: [f64; 2]) -> [f64; 2] {
        let h0 = (self.u[0].hess)(x[0], x[1]);
        let h1 = (self.u[1].hess)(x[0], x[1]);
        [h0[0][0] + h1[0][1], h0[0][1] + h1[1][1]]
    }

    /// Divergence of the symmetric gradient, (div eps(u))_a.
    pub fn div_eps(&self, x: [f64; 2]) -> [f64; 2] {
        let h0 = (self.u[0].hess)(x[0], x[1]);
        let h1 = (self.u[1].hess)(x[0], x[1]);
        // (div eps)_1 = e11_x + e12_y, (div eps)_2 = e12_x + e22_y
        let e11_x = h0[0][0];
        let e12_y = 0.5 * (h0[1][1] + h1[0][1]);
        let e12_x = 0.5 * (h0[0][1] + h1[0][0]);
        let e22_y = h1[1][1];
        [e11_x + e12_y, e12_x + e22_y]
    }

    pub fn p(&self, x: [f64; 2]) -> f64 {
        (self.p.f)(x[0], x[1])
    }

    pub fn grad_p(&self, x: [f64; 2]) -> [f64; 2] {
        (self.p.grad)(x[0], x[1])
    }

    pub fn lap_p(&self, x: [f64; 2]) -> f64 {
        let h = (self.p.hess)(x[0], x[1]);
        h[0][0] + h[1][1]
    }

    /// Total pressure: alpha p - lambda^P div u on P, -lambda^E div u on E.
    pub fn phi(&self, params: &ModelParameters, sub: Subdomain, x: [f64; 2]) -> f64 {
        match sub {
            Subdomain::Poro => params.alpha * self.p(x) - params.lambda_p * self.div_u(x),
            Subdomain::Elastic => -params.lambda_e * self.div_u(x),
        }
    }

    pub fn grad_phi(&self, params: &ModelParameters, sub: Subdomain, x: [f64; 2]) -> [f64; 2] {
        let gd = self.grad_div_u(x);
        match sub {
            Subdomain::Poro => {
                let gp = self.grad_p(x);
                [
                    params.alpha * gp[0] - params.lambda_p * gd[0],
                    params.alpha * gp[1] - params.lambda_p * gd[1],
                ]
            }
            Subdomain::Elastic => [-params.lambda_e * gd[0], -params.lambda_e * gd[1]],
        }
    }

    /// Total stress 2 mu eps(u) - phi I on the given subdomain.
    pub fn stress(&self, params: &ModelParameters, sub: Subdomain, x: [f64; 2]) -> [[f64; 2]; 2] {
        let mu = params.mu(sub);
        let e = self.eps(x);
        let phi = self.phi(params, sub, x);
        [
            [2.0 * mu * e[0][0] - phi, 2.0 * mu * e[0][1]],
            [2.0 * mu * e[1][0], 2.0 * mu * e[1][1] - phi],
        ]
    }

    /// Body load b = -div(2 mu eps(u) - phi I).
    pub fn body_load(&self, params: &ModelParameters, sub: Subdomain, x: [f64; 2]) -> [f64; 2] {
        let mu = params.mu(sub);
        let de = self.div_eps(x);
        let gphi = self.grad_phi(params, sub, x);
        [-2.0 * mu * de[0] + gphi[0], -2.0 * mu * de[1] + gphi[1]]
    }

    /// Fluid source of the single implicit step with dt = 1:
    /// (c0 + alpha^2/lambda^P) p - (alpha/lambda^P) phi - (1/eta) div(kappa (grad p - rho g)).
    pub fn source(&self, params: &ModelParameters, x: [f64; 2]) -> f64 {
        let p = self.p(x);
        let phi = self.phi(params, Subdomain::Poro, x);
        // constant kappa and gravity: the divergence is kappa lap(p) / eta
        params.storage() * p - params.alpha / params.lambda_p * phi
            - params.kappa / params.eta * self.lap_p(x)
    }

    /// Normal fluid flux datum (kappa/eta)(grad p - rho g) . n.
    pub fn flux(&self, params: &ModelParameters, x: [f64; 2], n: [f64; 2]) -> f64 {
        let gp = self.grad_p(x);
        params.kappa / params.eta * ((gp[0] - params.gravity[0]) * n[0] + (gp[1] - params.gravity[1]) * n[1])
    }

    /// Manufactured total-stress jump (sigma^P - sigma^E) n across Sigma.
    pub fn stress_jump(&self, params: &ModelParameters, x: [f64; 2], n: [f64; 2]) -> [f64; 2] {
        let sp = self.stress(params, Subdomain::Poro, x);
        let se = self.stress(params, Subdomain::Elastic, x);
        [
            (sp[0][0] - se[0][0]) * n[0] + (sp[0][1] - se[0][1]) * n[1],
            (sp[1][0] - se[1][0]) * n[0] + (sp[1][1] - se[1][1]) * n[1],
        ]
    }
}

/// Smooth manufactured solution of the square-domain verification study:
/// u = (sin(pi(x+y)), cos(pi(x^2+y^2))), p = sin(pi x + y) sin(pi y).
pub fn square_solution() -> ExactSolution {
    use std::f64::consts::PI;
    let u0 = ScalarField {
        f: |x, y| (PI * (x + y)).sin(),
        grad: |x, y| {
            let c = PI * (PI * (x + y)).cos();
            [c, c]
        },
        hess: |x, y| {
            let s = -PI * PI * (PI * (x + y)).sin();
            [[s, s], [s, s]]
        },
    };
    let u1 = ScalarField {
        f: |x, y| (PI * (x * x + y * y)).cos(),
        grad: |x, y| {
            let s = (PI * (x * x + y * y)).sin();
            [-2.0 * PI * x * s, -2.0 * PI * y * s]
        },
        hess: |x, y| {
            let r = x * x + y * y;
            let s = (PI * r).sin();
            let c = (PI * r).cos();
            [
                [-2.0 * PI * s - 4.0 * PI * PI * x * x * c, -4.0 * PI * PI * x * y * c],
                [-4.0 * PI * PI * x * y * c, -2.0 * PI * s - 4.0 * PI * PI * y * y * c],
            ]
        },
    };
    let p = ScalarField {
        f: |x, y| (PI * x + y).sin() * (PI * y).sin(),
        grad: |x, y| {
            [
                PI * (PI * x + y).cos() * (PI * y).sin(),
                (PI * x + y).cos() * (PI * y).sin() + PI * (PI * x + y).sin() * (PI * y).cos(),
            ]
        },
        hess: |x, y| {
            let (sa, ca) = (PI * x + y).sin_cos();
            let (sb, cb) = (PI * y).sin_cos();
            [
                [-PI * PI * sa * sb, PI * (-sa * sb + PI * ca * cb)],
                [PI * (-sa * sb + PI * ca * cb), -(1.0 + PI * PI) * sa * sb + 2.0 * PI * ca * cb],
            ]
        },
    };
    ExactSolution { u: [u0, u1], p }
}

const SINGULAR_OFFSET: (f64, f64) = (0.01, 0.01);
const LSHAPE_SCALE: f64 = 1.0e-2;

fn radial(x: f64, y: f64) -> f64 {
    let (a, b) = SINGULAR_OFFSET;
    let s = (x - a) * (x - a) + (y - b) * (y - b);
    s.powf(-2.0 / 3.0)
}

fn radial_grad(x: f64, y: f64) -> [f64; 2] {
    let (a, b) = SINGULAR_OFFSET;
    let s = (x - a) * (x - a) + (y - b) * (y - b);
    let c = -4.0 / 3.0 * s.powf(-5.0 / 3.0);
    [c * (x - a), c * (y - b)]
}

fn radial_hess(x: f64, y: f64) -> [[f64; 2]; 2] {
    let (a, b) = SINGULAR_OFFSET;
    let (dx, dy) = (x - a, y - b);
    let s = dx * dx + dy * dy;
    let s53 = s.powf(-5.0 / 3.0);
    let s83 = s.powf(-8.0 / 3.0);
    let c = 40.0 / 9.0;
    [
        [-4.0 / 3.0 * s53 + c * dx * dx * s83, c * dx * dy * s83],
        [c * dx * dy * s83, -4.0 / 3.0 * s53 + c * dy * dy * s83],
    ]
}

/// High-gradient manufactured solution for the L-shaped study, with the
/// singularity offset just outside the reentrant corner.
pub fn l_shape_solution() -> ExactSolution {
    let w = ScalarField {
        f: |x, y| LSHAPE_SCALE * radial(x, y),
        grad: |x, y| {
            let g = radial_grad(x, y);
            [LSHAPE_SCALE * g[0], LSHAPE_SCALE * g[1]]
        },
        hess: |x, y| {
            let h = radial_hess(x, y);
            [
                [LSHAPE_SCALE * h[0][0], LSHAPE_SCALE * h[0][1]],
                [LSHAPE_SCALE * h[1][0], LSHAPE_SCALE * h[1][1]],
            ]
        },
    };
    let p = ScalarField { f: radial, grad: radial_grad, hess: radial_hess };
    ExactSolution { u: [w, w], p }
}

/// A displacement/pressure pair that lies exactly in the lowest-order
/// discrete spaces (linear u with constant divergence, linear p).
pub fn linear_solution() -> ExactSolution {
    let u0 = ScalarField {
        f: |x, y| 0.3 * x + 0.7 * y,
        grad: |_, _| [0.3, 0.7],
        hess: |_, _| [[0.0; 2]; 2],
    };
    let u1 = ScalarField {
        f: |x, y| -0.2 * x + 0.5 * y,
        grad: |_, _| [-0.2, 0.5],
        hess: |_, _| [[0.0; 2]; 2],
    };
    let p = ScalarField {
        f: |x, y| 0.25 * x - 0.5 * y,
        grad: |_, _| [0.25, -0.5],
        hess: |_, _| [[0.0; 2]; 2],
    };
    ExactSolution { u: [u0, u1], p }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(f: fn(f64, f64) -> f64, x: f64, y: f64) -> [f64; 2] {
        let h = 1e-6;
        [(f(x + h, y) - f(x - h, y)) / (2.0 * h), (f(x, y + h) - f(x, y - h)) / (2.0 * h)]
    }

    #[test]
    fn closed_form_derivatives_match_finite_differences() {
        for sol in [square_solution(), l_shape_solution()] {
            for &(x, y) in &[(0.5, 0.25), (0.31, 0.77), (-0.4, -0.6)] {
                for field in [sol.u[0], sol.u[1], sol.p] {
                    let g = (field.grad)(x, y);
                    let gfd = fd_grad(field.f, x, y);
                    for a in 0..2 {
                        assert!(
                            (g[a] - gfd[a]).abs() <= 1e-6 * (1.0 + g[a].abs()),
                            "grad component {a} at ({x},{y}): {} vs {}",
                            g[a],
                            gfd[a]
                        );
                    }
                    let h = (field.hess)(x, y);
                    let hfd_x = fd_grad_of(field.grad, 0, x, y);
                    let hfd_y = fd_grad_of(field.grad, 1, x, y);
                    for b in 0..2 {
                        assert!((h[0][b] - hfd_x[b]).abs() <= 2e-5 * (1.0 + h[0][b].abs()));
                        assert!((h[1][b] - hfd_y[b]).abs() <= 2e-5 * (1.0 + h[1][b].abs()));
                    }
                }
            }
        }
    }

    fn fd_grad_of(g: fn(f64, f64) -> [f64; 2], comp: usize, x: f64, y: f64) -> [f64; 2] {
        let h = 1e-6;
        [
            (g(x + h, y)[comp] - g(x - h, y)[comp]) / (2.0 * h),
            (g(x, y + h)[comp] - g(x, y - h)[comp]) / (2.0 * h),
        ]
    }

    #[test]
    fn divergence_at_probe_point_matches_finite_differences() {
        let sol = square_solution();
        let x = [0.5, 0.25];
        let h = 1e-6;
        let fd = ((sol.u[0].f)(x[0] + h, x[1]) - (sol.u[0].f)(x[0] - h, x[1])) / (2.0 * h)
            + ((sol.u[1].f)(x[0], x[1] + h) - (sol.u[1].f)(x[0], x[1] - h)) / (2.0 * h);
        assert!((sol.div_u(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn pressure_vanishes_on_bottom_edge() {
        let sol = square_solution();
        for &x in &[0.0, 0.3, 0.9] {
            assert_eq!(sol.p([x, 0.0]), 0.0);
        }
    }

    #[test]
    fn source_consistency_via_simplified_expression() {
        // source = c0 p + alpha div u - (kappa/eta) lap p after substituting
        // the constitutive law
        let sol = square_solution();
        let params = crate::forms::ModelParameters::example1(0);
        for &(x, y) in &[(0.2, 0.4), (0.8, 0.1)] {
            let direct = sol.source(&params, [x, y]);
            let simplified = params.c0 * sol.p([x, y]) + params.alpha * sol.div_u([x, y])
                - params.kappa / params.eta * sol.lap_p([x, y]);
            assert!((direct - simplified).abs() < 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn stress_jump_is_nonzero_for_distinct_materials() {
        let sol = square_solution();
        let params = crate::forms::ModelParameters::example1(0);
        let j = sol.stress_jump(&params, [0.5, 0.5], [0.0, 1.0]);
        assert!(j[0].abs() + j[1].abs() > 1e-3);
    }
}
