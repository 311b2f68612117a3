//! Dense reference path for small spaces. Used as an independent check on the
//! sparse Taylor action and inside the displaced-squeezed oracle; it is
//! O(dim^3) and not meant for production-sized spaces.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::CsrMatrix;

pub fn to_dense(m: &CsrMatrix) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(m.dim(), m.dim());
    for (i, j, v) in m.entries() {
        out[(i, j)] = v;
    }
    out
}

/// Matrix exponential by scaling and squaring (nalgebra's Pade-based `exp`).
pub fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.exp()
}

pub fn expm_apply(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let x = DVector::from_column_slice(v);
    (expm(m) * x).iter().copied().collect()
}

/// Single-mode lowering operator on `0..=cutoff`.
pub fn single_mode_annihilation(cutoff: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}
