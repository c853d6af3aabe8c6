//! Quadrature on the reference triangle and the reference edge.
//!
//! Triangle rules come from a Duffy-collapsed Gauss-Legendre product, which
//! gives exactness to any requested degree; edge rules are plain
//! Gauss-Legendre on [0, 1].

/// Quadrature rule on the reference triangle (0,0)-(1,0)-(0,1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending order for determinism
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    let ns: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
    let ws: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
    (ns, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule on [0, 1]; exact for polynomials of the given degree.
pub fn edge_rule(degree: usize) -> (Vec<f64>, Vec<f64>) {
    let n = degree / 2 + 1;
    let (xs, ws) = gauss_legendre(n);
    let ts = xs.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let qs = ws.iter().map(|w| 0.5 * w).collect();
    (ts, qs)
}

/// Triangle rule exact for total degree `degree` (weights sum to 1/2).
pub fn triangle_rule(degree: usize) -> QuadratureRule {
    let m = degree / 2 + 2;
    let (xs, ws) = gauss_legendre(m);
    let mut points = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    for i in 0..m {
        let xi = 0.5 * (xs[i] + 1.0);
        for j in 0..m {
            let eta = 0.5 * (xs[j] + 1.0);
            // Duffy: (xi, eta) in the unit square -> (x, y) in the triangle
            points.push([xi, eta * (1.0 - xi)]);
            weights.push(0.25 * ws[i] * ws[j] * (1.0 - xi));
        }
    }
    QuadratureRule { points, weights, degree }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(px: u32, py: u32) -> f64 {
        // int_T x^a y^b = a! b! / (a + b + 2)!
        let mut num = 1.0;
        for k in 1..=px {
            num *= k as f64;
        }
        for k in 1..=py {
            num *= k as f64;
        }
        let mut den = 1.0;
        for k in 1..=(px + py + 2) {
            den *= k as f64;
        }
        num / den
    }

    #[test]
    fn triangle_rules_are_exact() {
        for degree in 0..=14 {
            let rule = triangle_rule(degree);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 0.5).abs() < 1e-14, "weight sum {wsum}");
            for px in 0..=degree as u32 {
                for py in 0..=(degree as u32 - px) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(px as i32) * p[1].powi(py as i32))
                        .sum();
                    let exact = monomial_integral(px, py);
                    assert!(
                        (approx - exact).abs() <= 1e-13 * exact.abs().max(1.0),
                        "degree {degree} monomial ({px},{py}): {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn edge_rules_are_exact() {
        for degree in 0..=15usize {
            let (ts, ws) = edge_rule(degree);
            for p in 0..=degree as u32 {
                let approx: f64 = ts.iter().zip(&ws).map(|(t, w)| w * t.powi(p as i32)).sum();
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "degree {degree} t^{p}");
            }
        }
    }
}
