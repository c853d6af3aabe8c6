//! Reference elements on the unit triangle (0,0)-(1,0)-(0,1).
//!
//! The BDM element of degree r spans the full vector polynomial space
//! [P_r]^2. Its degrees of freedom are normal moments against Legendre
//! polynomials on each edge plus interior moments against gradients of P_{r-1}
//! and curls of bubble-weighted P_{r-2}; the basis dual to these functionals
//! is computed once by inverting the functional/monomial matrix. Lagrange
//! elements are nodal on the usual lattice.

use crate::quadrature::{edge_rule, triangle_rule};
use nalgebra::DMatrix;

/// Scalar monomial exponents for P_d, in a fixed deterministic order.
pub fn monomials(degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for g in 0..=degree as u32 {
        for px in (0..=g).rev() {
            out.push((px, g - px));
        }
    }
    out
}

fn mono_eval(e: (u32, u32), p: [f64; 2]) -> f64 {
    p[0].powi(e.0 as i32) * p[1].powi(e.1 as i32)
}

fn mono_grad(e: (u32, u32), p: [f64; 2]) -> [f64; 2] {
    let dx = if e.0 == 0 { 0.0 } else { e.0 as f64 * p[0].powi(e.0 as i32 - 1) * p[1].powi(e.1 as i32) };
    let dy = if e.1 == 0 { 0.0 } else { e.1 as f64 * p[0].powi(e.0 as i32) * p[1].powi(e.1 as i32 - 1) };
    [dx, dy]
}

fn mono_hess(e: (u32, u32), p: [f64; 2]) -> [[f64; 2]; 2] {
    let (a, b) = (e.0 as i32, e.1 as i32);
    let xx = if e.0 >= 2 { (a * (a - 1)) as f64 * p[0].powi(a - 2) * p[1].powi(b) } else { 0.0 };
    let yy = if e.1 >= 2 { (b * (b - 1)) as f64 * p[0].powi(a) * p[1].powi(b - 2) } else { 0.0 };
    let xy = if e.0 >= 1 && e.1 >= 1 { (a * b) as f64 * p[0].powi(a - 1) * p[1].powi(b - 1) } else { 0.0 };
    [[xx, xy], [xy, yy]]
}

/// Orthonormal shifted Legendre polynomial on [0,1], satisfying the
/// reflection symmetry L_m(1-t) = (-1)^m L_m(t).
pub fn legendre01(m: usize, t: f64) -> f64 {
    let scale = (2.0 * m as f64 + 1.0).sqrt();
    let x = 2.0 * t - 1.0;
    if m == 0 {
        return scale;
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    scale * p1
}

/// Reference edges: (start vertex, end vertex, outward unit normal, length).
/// Edge l is opposite vertex l and runs in CCW direction.
pub const REF_VERTS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

pub fn ref_edge(l: usize) -> ([f64; 2], [f64; 2], [f64; 2], f64) {
    let a = REF_VERTS[(l + 1) % 3];
    let b = REF_VERTS[(l + 2) % 3];
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
    ([a[0], a[1]], [b[0], b[1]], [t[1] / len, -t[0] / len], len)
}

/// Values and gradients of all basis functions at a fixed point set,
/// flat-indexed by `dof * n_points + q`.
#[derive(Debug, Clone)]
pub struct VectorTabulation {
    pub n_dofs: usize,
    pub n_points: usize,
    pub value: Vec<[f64; 2]>,
    pub grad: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone)]
pub struct ScalarTabulation {
    pub n_dofs: usize,
    pub n_points: usize,
    pub value: Vec<f64>,
    pub grad: Vec<[f64; 2]>,
    pub hess: Vec<[[f64; 2]; 2]>,
}

/// BDM element of degree r >= 1.
#[derive(Debug, Clone)]
pub struct BdmElement {
    pub degree: usize,
    exps: Vec<(u32, u32)>,
    /// coeff[(j, i)] = weight of vector monomial j in basis function i
    coeff: DMatrix<f64>,
    /// quadrature and interior functional weights, for interpolation
    pub interior_rule: crate::quadrature::QuadratureRule,
    pub interior_weights: Vec<Vec<[f64; 2]>>,
}

impl BdmElement {
    pub fn n_dofs(&self) -> usize {
        (self.degree + 1) * (self.degree + 2)
    }

    pub fn n_edge_dofs(&self) -> usize {
        self.degree + 1
    }

    pub fn n_interior_dofs(&self) -> usize {
        self.degree * self.degree - 1
    }

    pub fn new(r: usize) -> Self {
        assert!(r >= 1, "BDM degree must be >= 1");
        let exps = monomials(r);
        let nm = exps.len();
        let n = 2 * nm; // vector monomials: component 0 block then component 1
        let mut a = DMatrix::<f64>::zeros(n, n);

        let mono_vec = |j: usize, p: [f64; 2]| -> [f64; 2] {
            let comp = j / nm;
            let v = mono_eval(exps[j % nm], p);
            if comp == 0 {
                [v, 0.0]
            } else {
                [0.0, v]
            }
        };

        let mut row = 0;
        // edge normal moments against Legendre polynomials
        let (ts, ws) = edge_rule(2 * r + 2);
        for l in 0..3 {
            let (start, _end, normal, len) = ref_edge(l);
            let (sx, sy) = (start[0], start[1]);
            let (ex, ey) = {
                let (_, e, _, _) = ref_edge(l);
                (e[0], e[1])
            };
            for m in 0..=r {
                for (t, w) in ts.iter().zip(&ws) {
                    let p = [sx + t * (ex - sx), sy + t * (ey - sy)];
                    let lm = legendre01(m, *t);
                    for j in 0..n {
                        let v = mono_vec(j, p);
                        a[(row, j)] += w * len * lm * (v[0] * normal[0] + v[1] * normal[1]);
                    }
                }
                row += 1;
            }
        }
        // interior moments
        let rule = triangle_rule(2 * r + 4);
        let mut interior_weights: Vec<Vec<[f64; 2]>> = Vec::new();
        // against grad q, q in P_{r-1} without the constant
        for &e in monomials(r - 1).iter().skip(1) {
            let wts: Vec<[f64; 2]> = rule.points.iter().map(|&p| mono_grad(e, p)).collect();
            interior_weights.push(wts);
        }
        // against curl(b * c), c in P_{r-2}, b the cubic bubble
        if r >= 2 {
            for &e in monomials(r - 2).iter() {
                let wts: Vec<[f64; 2]> = rule
                    .points
                    .iter()
                    .map(|&p| {
                        let [x, y] = p;
                        let bubble = x * y * (1.0 - x - y);
                        let db = [y * (1.0 - 2.0 * x - y), x * (1.0 - x - 2.0 * y)];
                        let c = mono_eval(e, p);
                        let dc = mono_grad(e, p);
                        // curl(s) = (ds/dy, -ds/dx) with s = bubble * c
                        let s_x = db[0] * c + bubble * dc[0];
                        let s_y = db[1] * c + bubble * dc[1];
                        [s_y, -s_x]
                    })
                    .collect();
                interior_weights.push(wts);
            }
        }
        // unit-norm interior weight functions keep the moment matrix well
        // conditioned (the raw curl-bubble moments are O(1e-2))
        for wts in interior_weights.iter_mut() {
            let norm2: f64 = rule.weights.iter().zip(wts.iter()).map(|(w, v)| w * (v[0] * v[0] + v[1] * v[1])).sum();
            let scale = 1.0 / norm2.sqrt();
            for v in wts.iter_mut() {
                v[0] *= scale;
                v[1] *= scale;
            }
        }
        for wts in &interior_weights {
            for j in 0..n {
                let mut acc = 0.0;
                for (q, (&p, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let v = mono_vec(j, p);
                    acc += w * (v[0] * wts[q][0] + v[1] * wts[q][1]);
                }
                a[(row, j)] = acc;
            }
            row += 1;
        }
        assert_eq!(row, n, "BDM functional count mismatch");

        let coeff = a.try_inverse().expect("BDM functional matrix is singular");
        BdmElement { degree: r, exps, coeff, interior_rule: rule, interior_weights }
    }

    /// Tabulate values and gradients at reference points.
    pub fn tabulate(&self, points: &[[f64; 2]]) -> VectorTabulation {
        let nm = self.exps.len();
        let n = 2 * nm;
        let np = points.len();
        let mut value = vec![[0.0; 2]; n * np];
        let mut grad = vec![[[0.0; 2]; 2]; n * np];
        for (q, &p) in points.iter().enumerate() {
            let mv: Vec<f64> = self.exps.iter().map(|&e| mono_eval(e, p)).collect();
            let mg: Vec<[f64; 2]> = self.exps.iter().map(|&e| mono_grad(e, p)).collect();
            for i in 0..n {
                let mut val = [0.0; 2];
                let mut g = [[0.0; 2]; 2];
                for jm in 0..nm {
                    let c0 = self.coeff[(jm, i)];
                    let c1 = self.coeff[(nm + jm, i)];
                    val[0] += c0 * mv[jm];
                    val[1] += c1 * mv[jm];
                    g[0][0] += c0 * mg[jm][0];
                    g[0][1] += c0 * mg[jm][1];
                    g[1][0] += c1 * mg[jm][0];
                    g[1][1] += c1 * mg[jm][1];
                }
                value[i * np + q] = val;
                grad[i * np + q] = g;
            }
        }
        VectorTabulation { n_dofs: n, n_points: np, value, grad }
    }

    /// Second derivatives hess[comp][b][c] at reference points, same layout.
    pub fn tabulate_hessian(&self, points: &[[f64; 2]]) -> Vec<[[[f64; 2]; 2]; 2]> {
        let nm = self.exps.len();
        let n = 2 * nm;
        let np = points.len();
        let mut out = vec![[[[0.0; 2]; 2]; 2]; n * np];
        for (q, &p) in points.iter().enumerate() {
            let mh: Vec<[[f64; 2]; 2]> = self.exps.iter().map(|&e| mono_hess(e, p)).collect();
            for i in 0..n {
                let mut h = [[[0.0; 2]; 2]; 2];
                for jm in 0..nm {
                    let c0 = self.coeff[(jm, i)];
                    let c1 = self.coeff[(nm + jm, i)];
                    for b in 0..2 {
                        for c in 0..2 {
                            h[0][b][c] += c0 * mh[jm][b][c];
                            h[1][b][c] += c1 * mh[jm][b][c];
                        }
                    }
                }
                out[i * np + q] = h;
            }
        }
        out
    }
}

/// Nodal Lagrange element of degree d >= 0 (d = 0 is the cell midpoint).
#[derive(Debug, Clone)]
pub struct LagrangeElement {
    pub degree: usize,
    pub nodes: Vec<[f64; 2]>,
    exps: Vec<(u32, u32)>,
    coeff: DMatrix<f64>,
}

/// Node layout: 3 vertices, then d-1 nodes per edge (along the CCW local
/// edge direction), then the interior lattice. Degree 0 has a single node.
pub fn lagrange_nodes(d: usize) -> Vec<[f64; 2]> {
    if d == 0 {
        return vec![[1.0 / 3.0, 1.0 / 3.0]];
    }
    let mut nodes: Vec<[f64; 2]> = REF_VERTS.to_vec();
    for l in 0..3 {
        let (a, b, _, _) = ref_edge(l);
        for i in 1..d {
            let t = i as f64 / d as f64;
            nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    for j in 1..d {
        for i in 1..d {
            if i + j <= d - 1 {
                nodes.push([i as f64 / d as f64, j as f64 / d as f64]);
            }
        }
    }
    nodes
}

impl LagrangeElement {
    pub fn n_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn new(d: usize) -> Self {
        let nodes = lagrange_nodes(d);
        let exps = monomials(d);
        assert_eq!(nodes.len(), exps.len());
        let n = nodes.len();
        let mut v = DMatrix::<f64>::zeros(n, n);
        for (i, &p) in nodes.iter().enumerate() {
            for (j, &e) in exps.iter().enumerate() {
                v[(i, j)] = mono_eval(e, p);
            }
        }
        let coeff = v.try_inverse().expect("Lagrange Vandermonde is singular");
        LagrangeElement { degree: d, nodes, exps, coeff }
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> ScalarTabulation {
        let n = self.nodes.len();
        let np = points.len();
        let mut value = vec![0.0; n * np];
        let mut grad = vec![[0.0; 2]; n * np];
        let mut hess = vec![[[0.0; 2]; 2]; n * np];
        for (q, &p) in points.iter().enumerate() {
            let mv: Vec<f64> = self.exps.iter().map(|&e| mono_eval(e, p)).collect();
            let mg: Vec<[f64; 2]> = self.exps.iter().map(|&e| mono_grad(e, p)).collect();
            let mh: Vec<[[f64; 2]; 2]> = self.exps.iter().map(|&e| mono_hess(e, p)).collect();
            for i in 0..n {
                let mut val = 0.0;
                let mut g = [0.0; 2];
                let mut h = [[0.0; 2]; 2];
                for jm in 0..n {
                    let c = self.coeff[(jm, i)];
                    val += c * mv[jm];
                    g[0] += c * mg[jm][0];
                    g[1] += c * mg[jm][1];
                    for b in 0..2 {
                        for cc in 0..2 {
                            h[b][cc] += c * mh[jm][b][cc];
                        }
                    }
                }
                value[i * np + q] = val;
                grad[i * np + q] = g;
                hess[i * np + q] = h;
            }
        }
        ScalarTabulation { n_dofs: n, n_points: np, value, grad, hess }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bdm_edge_duality() {
        // normal component of each edge basis function vanishes on the other
        // edges, and reproduces its Legendre moment on its own edge
        for r in 1..=3usize {
            let el = BdmElement::new(r);
            let tab_pts: Vec<[f64; 2]> = {
                let (ts, _) = edge_rule(2 * r + 2);
                let mut pts = Vec::new();
                for l in 0..3 {
                    let (a, b, _, _) = ref_edge(l);
                    for &t in &ts {
                        pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    }
                }
                pts
            };
            let (ts, ws) = edge_rule(2 * r + 2);
            let nq = ts.len();
            let tab = el.tabulate(&tab_pts);
            for l_dof in 0..3 {
                for m in 0..=r {
                    let dof = l_dof * (r + 1) + m;
                    for l_edge in 0..3 {
                        let (_, _, normal, len) = ref_edge(l_edge);
                        let mut moments = vec![0.0; r + 1];
                        for (qi, (&t, &w)) in ts.iter().zip(&ws).enumerate() {
                            let v = tab.value[dof * tab.n_points + l_edge * nq + qi];
                            let vn = v[0] * normal[0] + v[1] * normal[1];
                            for (mm, mom) in moments.iter_mut().enumerate() {
                                *mom += w * len * legendre01(mm, t) * vn;
                            }
                        }
                        for (mm, mom) in moments.iter().enumerate() {
                            let expect = if l_edge == l_dof && mm == m { 1.0 } else { 0.0 };
                            assert!(
                                (mom - expect).abs() < 1e-12,
                                "r={r} dof=({l_dof},{m}) edge={l_edge} moment {mm}: {mom}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lagrange_is_nodal() {
        for d in 0..=3usize {
            let el = LagrangeElement::new(d);
            let tab = el.tabulate(&el.nodes.clone());
            for i in 0..el.n_dofs() {
                for q in 0..el.n_dofs() {
                    let expect = if i == q { 1.0 } else { 0.0 };
                    assert!((tab.value[i * tab.n_points + q] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn legendre_reflection_symmetry() {
        for m in 0..=4usize {
            for &t in &[0.1, 0.3, 0.7] {
                let lhs = legendre01(m, 1.0 - t);
                let rhs = if m % 2 == 0 { legendre01(m, t) } else { -legendre01(m, t) };
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }
}
