//! Envelope (skyline) LDL^T factorization with reverse Cuthill-McKee
//! ordering. No pivoting: the block systems here are quasidefinite, which
//! factors stably under any symmetric permutation. Dense trailing rows
//! (the mean-value constraint) are pinned to the end of the ordering.

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Reverse Cuthill-McKee ordering of the matrix graph. `pinned_last` rows
/// are excluded from the graph and appended at the end in original order.
pub fn rcm_order(matrix: &CsrMatrix, pinned_last: &[usize]) -> Vec<usize> {
    let n = matrix.nrows;
    let mut pinned = vec![false; n];
    for &p in pinned_last {
        pinned[p] = true;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for k in matrix.row_ptr[i]..matrix.row_ptr[i + 1] {
            let j = matrix.col_idx[k];
            if i != j && !pinned[i] && !pinned[j] && matrix.values[k] != 0.0 {
                adj[i].push(j);
            }
        }
    }
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = pinned.clone();
    let mut order = Vec::with_capacity(n);
    loop {
        // lowest-degree unvisited seed
        let mut seed = None;
        for i in 0..n {
            if !visited[i] && seed.map_or(true, |s: usize| degree[i] < degree[s]) {
                seed = Some(i);
            }
        }
        let Some(seed) = seed else { break };
        visited[seed] = true;
        let mut queue = std::collections::VecDeque::from([seed]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_unstable_by_key(|&w| (degree[w], w));
            for w in nbrs {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order.extend_from_slice(pinned_last);
    debug_assert_eq!(order.len(), n);
    order
}

/// Skyline LDL^T factorization.
pub struct EnvelopeLdlt {
    n: usize,
    perm: Vec<usize>,
    /// first column of each (permuted) row's profile
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

pub enum Definiteness {
    /// Accept any nonzero pivots (symmetric indefinite).
    Indefinite,
    /// Require strictly positive pivots.
    PositiveDefinite,
}

impl EnvelopeLdlt {
    /// Factor the symmetric matrix. Only the lower triangle is read.
    pub fn new(matrix: &CsrMatrix, pinned_last: &[usize], kind: Definiteness) -> Result<Self> {
        let n = matrix.nrows;
        assert_eq!(matrix.nrows, matrix.ncols);
        let perm = rcm_order(matrix, pinned_last);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // profile: first[i] = min permuted column among stored entries
        let mut first: Vec<usize> = (0..n).collect();
        for i_old in 0..n {
            let i = iperm[i_old];
            for k in matrix.row_ptr[i_old]..matrix.row_ptr[i_old + 1] {
                if matrix.values[k] == 0.0 {
                    continue;
                }
                let j = iperm[matrix.col_idx[k]];
                if j < i {
                    first[i] = first[i].min(j);
                } else if j > i {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        // per-row magnitude, the reference scale for the pivot check
        let mut row_scale = vec![0.0f64; n];
        for i_old in 0..n {
            let i = iperm[i_old];
            for k in matrix.row_ptr[i_old]..matrix.row_ptr[i_old + 1] {
                let j = iperm[matrix.col_idx[k]];
                let v = matrix.values[k];
                row_scale[i] = row_scale[i].max(v.abs());
                if j == i {
                    diag[i] = v;
                } else if j < i {
                    lower[start[i] + (j - first[i])] = v;
                }
            }
        }
        // factor in place
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut sum = lower[start[i] + (j - fi)];
                for k in lo..j {
                    sum -= lower[start[i] + (k - fi)] * diag[k] * lower[start[j] + (k - fj)];
                }
                lower[start[i] + (j - fi)] = sum / diag[j];
            }
            let mut d = diag[i];
            for k in fi..i {
                let l = lower[start[i] + (k - fi)];
                d -= l * l * diag[k];
            }
            if d.abs() <= 1e-12 * row_scale[i].max(1e-300) {
                return Err(Error::SingularSystem(format!(
                    "zero pivot at permuted row {i} (original {}): {d:e}",
                    perm[i]
                )));
            }
            if matches!(kind, Definiteness::PositiveDefinite) && d <= 0.0 {
                return Err(Error::NotSpd(format!("negative pivot {d:e} at row {}", perm[i])));
            }
            diag[i] = d;
        }
        Ok(EnvelopeLdlt { n, perm, first, start, lower, diag })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        // forward: L y = b
        for i in 0..n {
            let fi = self.first[i];
            let mut sum = y[i];
            for k in fi..i {
                sum -= self.lower[self.start[i] + (k - fi)] * y[k];
            }
            y[i] = sum;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.lower[self.start[i] + (k - fi)] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Triplets;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.to_csr()
    }

    #[test]
    fn solves_spd_system() {
        let a = laplacian_1d(50);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec_alloc(&x_true);
        let f = EnvelopeLdlt::new(&a, &[], Definiteness::PositiveDefinite).unwrap();
        let x = f.solve(&b);
        for (xa, xb) in x.iter().zip(&x_true) {
            assert!((xa - xb).abs() < 1e-12);
        }
    }

    #[test]
    fn solves_indefinite_saddle_point() {
        // [I  c; c^T 0] with a pinned dense last row
        let n = 10;
        let mut t = Triplets::new(n + 1, n + 1);
        for i in 0..n {
            t.push(i, i, 1.0 + i as f64);
            t.push(i, n, 1.0);
            t.push(n, i, 1.0);
        }
        let a = t.to_csr();
        let mut x_true = vec![0.25; n + 1];
        x_true[n] = -0.5;
        let b = a.matvec_alloc(&x_true);
        let f = EnvelopeLdlt::new(&a, &[n], Definiteness::Indefinite).unwrap();
        let x = f.solve(&b);
        for (xa, xb) in x.iter().zip(&x_true) {
            assert!((xa - xb).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_singularity() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(1, 1, 1.0);
        t.push(2, 2, 0.0);
        t.push(2, 0, 0.0);
        let a = t.to_csr();
        assert!(matches!(
            EnvelopeLdlt::new(&a, &[], Definiteness::Indefinite),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn detects_indefiniteness_in_spd_mode() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, -1.0);
        let a = t.to_csr();
        assert!(matches!(
            EnvelopeLdlt::new(&a, &[], Definiteness::PositiveDefinite),
            Err(Error::NotSpd(_))
        ));
    }
}
