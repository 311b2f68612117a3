//! Compressed sparse row storage for square complex matrices.
//!
//! Every operator the simulator needs (ladder operators, G operators, the
//! intensity operator) has O(dim) nonzeros, so CSR keeps products and
//! matrix-vector actions cheap even at dim ~ 10^4.

use num_complex::Complex64 as C64;

use crate::par::{fill_indexed, Execution};

/// Row count above which matrix-vector products are split across threads.
const PAR_ROWS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(dim: usize) -> Self {
        CsrMatrix { dim, indptr: vec![0; dim + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_triplets(diag.len(), diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicate entries are summed; exact zeros are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside {dim}x{dim}");
            rows[i].push((j, v));
        }
        let mut out = CsrMatrix::zeros(dim);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut acc = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == j {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != C64::new(0.0, 0.0) {
                    out.indices.push(j);
                    out.values.push(acc);
                }
            }
            out.indptr[i + 1] = out.indices.len();
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let span = self.indptr[i]..self.indptr[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn row_dot(&self, i: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.indptr[i]..self.indptr[i + 1] {
            acc += self.values[k] * x[self.indices[k]];
        }
        acc
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        let exec = if self.dim >= PAR_ROWS { Execution::Parallel } else { Execution::Sequential };
        fill_indexed(exec, &mut out, |i| self.row_dot(i, x));
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(i, j, v)| (j, i, v.conj())))
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == C64::new(0.0, 0.0) {
            return Self::zeros(self.dim);
        }
        CsrMatrix {
            dim: self.dim,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: C64, other: &Self, b: C64) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(
            self.dim,
            self.entries().map(|(i, j, v)| (i, j, a * v)).chain(other.entries().map(|(i, j, v)| (i, j, b * v))),
        )
    }

    /// Sparse product via row-wise accumulation.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut seen = vec![false; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut out = CsrMatrix::zeros(n);
        for i in 0..n {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !seen[j] {
                        seen[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                if acc[j] != C64::new(0.0, 0.0) {
                    out.indices.push(j);
                    out.values.push(acc[j]);
                }
                acc[j] = C64::new(0.0, 0.0);
                seen[j] = false;
            }
            cols.clear();
            out.indptr[i + 1] = out.indices.len();
        }
        out
    }

    /// `max |M - sign * M^H|` over all entries.
    pub fn adjoint_residual(&self, sign: f64) -> f64 {
        let adj = self.adjoint();
        self.lin_comb(C64::new(1.0, 0.0), &adj, C64::new(-sign, 0.0)).max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (largest column sum of magnitudes).
    pub fn norm1(&self) -> f64 {
        let mut col = vec![0.0; self.dim];
        for (_, j, v) in self.entries() {
            col[j] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }
}
