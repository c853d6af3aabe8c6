//! Compressed sparse row matrices with triplet assembly.

use std::io::Write;

/// Accumulator for finite element contributions; duplicate entries add up
/// when compressed.
#[derive(Debug, Clone)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    /// Add a whole block at (row_offset, col_offset); with `transpose` the
    /// transposed block is placed there instead.
    pub fn push_block(&mut self, row_offset: usize, col_offset: usize, block: &CsrMatrix, transpose: bool, scale: f64) {
        for i in 0..block.nrows {
            for k in block.row_ptr[i]..block.row_ptr[i + 1] {
                let j = block.col_idx[k];
                let v = scale * block.values[k];
                if transpose {
                    self.push(row_offset + j, col_offset + i, v);
                } else {
                    self.push(row_offset + i, col_offset + j, v);
                }
            }
        }
    }

    pub fn to_csr(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut prev = None;
        for &(r, c, v) in &self.entries {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                prev = Some((r, c));
            }
            row_ptr[r + 1] = col_idx.len();
        }
        for i in 1..=self.nrows {
            row_ptr[i] = row_ptr[i].max(row_ptr[i - 1]);
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

/// CSR sparse matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.col_idx[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// max |A - A^T| over stored entries and the overall max |A|.
    pub fn symmetry_error(&self) -> (f64, f64) {
        let mut max_asym = 0.0f64;
        let mut max_abs = 0.0f64;
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k];
                max_abs = max_abs.max(v.abs());
                max_asym = max_asym.max((v - self.get(j, i)).abs());
            }
        }
        (max_asym, max_abs)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[(i, self.col_idx[k])] = self.values[k];
            }
        }
        out
    }

    /// In-place scaling A <- diag(dl) * A * diag(dr).
    pub fn scale(&mut self, dl: &[f64], dr: &[f64]) {
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.values[k] *= dl[i] * dr[self.col_idx[k]];
            }
        }
    }

    /// Matrix Market coordinate output (general, 1-based).
    pub fn write_matrix_market<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(out, "{} {} {:.16e}", i + 1, self.col_idx[k] + 1, self.values[k])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_accumulate_duplicates() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(2, 1, -1.0);
        t.push(1, 2, 0.5);
        let a = t.to_csr();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(2, 1), -1.0);
        assert_eq!(a.get(1, 2), 0.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 0, 2.0);
        t.push(0, 2, 1.0);
        t.push(1, 1, -3.0);
        let a = t.to_csr();
        let y = a.matvec_alloc(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![5.0, -6.0]);
    }

    #[test]
    fn symmetry_scan() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0 + 1e-15);
        t.push(0, 0, 4.0);
        let a = t.to_csr();
        let (asym, amax) = a.symmetry_error();
        assert!(asym <= 1e-14);
        assert_eq!(amax, 4.0);
    }
}
