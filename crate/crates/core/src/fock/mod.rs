//! Truncated two-mode Fock space: basis indexing, states, sparse operators and
//! the moment engine (expectations, variances, symmetrized covariances).

pub mod dense;
mod expm;
pub mod sparse;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use expm::{exp_action, exp_action_with, ExpOptions};
pub use sparse::CsrMatrix;

/// Tolerance for the hermitian flag and for imaginary parts of hermitian expectations.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Window below zero in which a variance is treated as rounding and clamped.
pub const VARIANCE_CLAMP: f64 = 1e-10;
/// States must be normalized to this accuracy.
pub const NORM_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Truncated basis `{|n1, n2> : n1 <= cutoff1, n2 <= cutoff2}`, row-major in `n1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    cutoff1: usize,
    cutoff2: usize,
}

impl FockSpace {
    pub fn new(cutoff1: usize, cutoff2: usize) -> Result<Self> {
        if cutoff1 < 1 || cutoff2 < 1 {
            return Err(Error::InvalidCutoff(cutoff1, cutoff2));
        }
        cutoff1
            .checked_add(1)
            .zip(cutoff2.checked_add(1))
            .and_then(|(a, b)| a.checked_mul(b))
            .ok_or(Error::DimensionOverflow(cutoff1, cutoff2))?;
        Ok(FockSpace { cutoff1, cutoff2 })
    }

    pub fn cutoff(&self, mode: Mode) -> usize {
        match mode {
            Mode::One => self.cutoff1,
            Mode::Two => self.cutoff2,
        }
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.cutoff1, self.cutoff2)
    }

    pub fn dim(&self) -> usize {
        (self.cutoff1 + 1) * (self.cutoff2 + 1)
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 <= self.cutoff1 && n2 <= self.cutoff2);
        n1 * (self.cutoff2 + 1) + n2
    }

    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / (self.cutoff2 + 1), index % (self.cutoff2 + 1))
    }

    /// Basis states two or more levels below the cutoff in both modes, where
    /// products of two ladder operators never touch the truncation edge.
    pub fn is_interior(&self, index: usize) -> bool {
        let (n1, n2) = self.occupation(index);
        n1 + 2 <= self.cutoff1 && n2 + 2 <= self.cutoff2
    }

    fn check_same(&self, other: &FockSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Selects one of the two slit modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
}

impl TryFrom<u8> for Mode {
    type Error = Error;

    fn try_from(m: u8) -> Result<Self> {
        match m {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            other => Err(Error::InvalidMode(other)),
        }
    }
}

/// Field quadrature selector: `X = (a^H + a)/2`, `Y = i(a^H - a)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Y,
}

/// Normalized pure state on a truncated two-mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    space: FockSpace,
    amplitudes: Vec<C64>,
    leakage: f64,
}

impl QState {
    /// Normalizes `amplitudes`; the recorded leakage is zero.
    pub fn from_amplitudes(space: FockSpace, amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_leakage(space, amplitudes, 0.0)
    }

    pub(crate) fn with_leakage(space: FockSpace, mut amplitudes: Vec<C64>, leakage: f64) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::LengthMismatch { expected: space.dim(), got: amplitudes.len() });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidSpec("non-finite amplitude".into()));
        }
        let norm = norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(QState { space, amplitudes, leakage: leakage.max(0.0) })
    }

    pub fn basis(space: FockSpace, n1: usize, n2: usize) -> Result<Self> {
        if n1 > space.cutoff1 || n2 > space.cutoff2 {
            return Err(Error::OutOfRange(format!(
                "|{n1},{n2}> outside cutoffs ({}, {})",
                space.cutoff1, space.cutoff2
            )));
        }
        let mut amps = vec![ZERO; space.dim()];
        amps[space.index(n1, n2)] = C64::new(1.0, 0.0);
        Self::from_amplitudes(space, amps)
    }

    pub fn vacuum(space: FockSpace) -> Self {
        Self::basis(space, 0, 0).expect("vacuum always fits")
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C64 {
        self.amplitudes[self.space.index(n1, n2)]
    }

    /// Probability mass lost to truncation (and norm drift) during construction.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `<x|y>`, conjugate-linear in the first argument.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Sparse operator on a truncated two-mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    space: FockSpace,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl QOperator {
    pub fn from_matrix(space: FockSpace, matrix: CsrMatrix) -> Result<Self> {
        if matrix.dim() != space.dim() {
            return Err(Error::LengthMismatch { expected: space.dim(), got: matrix.dim() });
        }
        Ok(QOperator { space, matrix, hermitian: false })
    }

    /// Verify hermiticity and set the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let r = self.matrix.adjoint_residual(1.0);
        if r > HERMITIAN_TOL {
            return Err(Error::NotHermitian(r));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn identity(space: FockSpace) -> Self {
        QOperator { space, matrix: CsrMatrix::identity(space.dim()), hermitian: true }
    }

    pub fn zero(space: FockSpace) -> Self {
        QOperator { space, matrix: CsrMatrix::zeros(space.dim()), hermitian: true }
    }

    /// Lowering operator of one mode, identity on the other.
    pub fn annihilation(space: FockSpace, mode: Mode) -> Self {
        let triplets = (0..space.dim()).filter_map(|i| {
            let (n1, n2) = space.occupation(i);
            match mode {
                Mode::One if n1 > 0 => Some((space.index(n1 - 1, n2), i, C64::new((n1 as f64).sqrt(), 0.0))),
                Mode::Two if n2 > 0 => Some((space.index(n1, n2 - 1), i, C64::new((n2 as f64).sqrt(), 0.0))),
                _ => None,
            }
        });
        QOperator { space, matrix: CsrMatrix::from_triplets(space.dim(), triplets), hermitian: false }
    }

    pub fn creation(space: FockSpace, mode: Mode) -> Self {
        Self::annihilation(space, mode).adjoint()
    }

    /// `a^H a` for one mode, built diagonal so it is exact up to the cutoff.
    pub fn number(space: FockSpace, mode: Mode) -> Self {
        let diag: Vec<C64> = (0..space.dim())
            .map(|i| {
                let (n1, n2) = space.occupation(i);
                let n = if mode == Mode::One { n1 } else { n2 };
                C64::new(n as f64, 0.0)
            })
            .collect();
        QOperator { space, matrix: CsrMatrix::from_diagonal(&diag), hermitian: true }
    }

    pub fn quadrature(space: FockSpace, mode: Mode, which: Quadrature) -> Self {
        let a = Self::annihilation(space, mode);
        let ad = a.adjoint();
        let half = C64::new(0.5, 0.0);
        let op = match which {
            Quadrature::X => ad.matrix.lin_comb(half, &a.matrix, half),
            Quadrature::Y => ad.matrix.lin_comb(C64::new(0.0, 0.5), &a.matrix, C64::new(0.0, -0.5)),
        };
        QOperator { space, matrix: op, hermitian: true }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: (usize, usize), col: (usize, usize)) -> C64 {
        self.matrix.get(self.space.index(row.0, row.1), self.space.index(col.0, col.1))
    }

    pub fn adjoint(&self) -> Self {
        QOperator { space: self.space, matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    pub fn multiply(&self, rhs: &QOperator) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(QOperator { space: self.space, matrix: self.matrix.mul(&rhs.matrix), hermitian: false })
    }

    pub fn add(&self, rhs: &QOperator) -> Result<Self> {
        self.lin_comb(C64::new(1.0, 0.0), rhs, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, rhs: &QOperator) -> Result<Self> {
        self.lin_comb(C64::new(1.0, 0.0), rhs, C64::new(-1.0, 0.0))
    }

    /// `a * self + b * rhs`; hermitian when both operands are and both weights are real.
    pub fn lin_comb(&self, a: C64, rhs: &QOperator, b: C64) -> Result<Self> {
        self.space.check_same(&rhs.space)?;
        Ok(QOperator {
            space: self.space,
            matrix: self.matrix.lin_comb(a, &rhs.matrix, b),
            hermitian: self.hermitian && rhs.hermitian && a.im == 0.0 && b.im == 0.0,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        QOperator { space: self.space, matrix: self.matrix.scale(c), hermitian: self.hermitian && c.im == 0.0 }
    }

    /// `[self, rhs] = self*rhs - rhs*self`.
    pub fn commutator(&self, rhs: &QOperator) -> Result<Self> {
        self.multiply(rhs)?.sub(&rhs.multiply(self)?)
    }

    /// Raw image `M|psi>`, not renormalized.
    pub fn apply(&self, state: &QState) -> Result<Vec<C64>> {
        self.space.check_same(&state.space)?;
        Ok(self.matrix.matvec(&state.amplitudes))
    }

    pub fn apply_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.space.dim() {
            return Err(Error::LengthMismatch { expected: self.space.dim(), got: v.len() });
        }
        Ok(self.matrix.matvec(v))
    }

    /// Largest entry magnitude restricted to rows and columns on the interior subspace.
    pub fn interior_max_abs(&self) -> f64 {
        self.matrix
            .entries()
            .filter(|&(i, j, _)| self.space.is_interior(i) && self.space.is_interior(j))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// `<psi|M|psi>`. For hermitian-flagged operators the imaginary part must vanish
/// within [`HERMITIAN_TOL`] and is zeroed.
pub fn expectation(state: &QState, op: &QOperator) -> Result<C64> {
    let image = op.apply(state)?;
    let value = inner(state.amplitudes(), &image);
    if op.is_hermitian() {
        if value.im.abs() > HERMITIAN_TOL {
            return Err(Error::ImaginaryExpectation(value.im));
        }
        return Ok(C64::new(value.re, 0.0));
    }
    Ok(value)
}

fn hermitian_moments(state: &QState, op: &QOperator) -> Result<(f64, Vec<C64>)> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian(op.matrix.adjoint_residual(1.0)));
    }
    let image = op.apply(state)?;
    let mean = inner(state.amplitudes(), &image);
    if mean.im.abs() > HERMITIAN_TOL {
        return Err(Error::ImaginaryExpectation(mean.im));
    }
    Ok((mean.re, image))
}

/// Clamp rounding-level negative variances; anything further below zero is an error.
pub(crate) fn clamp_variance(v: f64, scale: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -VARIANCE_CLAMP * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance(v))
    }
}

/// `<M^2> - <M>^2` for a hermitian operator, with `<M^2> = ||M psi||^2`.
pub fn variance(state: &QState, op: &QOperator) -> Result<f64> {
    let (mean, image) = hermitian_moments(state, op)?;
    let second = norm(&image).powi(2);
    clamp_variance(second - mean * mean, second)
}

/// `<(AB + BA)/2> - <A><B>` for hermitian `A`, `B`.
pub fn symmetrized_covariance(state: &QState, a: &QOperator, b: &QOperator) -> Result<f64> {
    let (ma, va) = hermitian_moments(state, a)?;
    let (mb, vb) = hermitian_moments(state, b)?;
    let sym = inner(&va, &vb).re;
    Ok(sym - ma * mb)
}
