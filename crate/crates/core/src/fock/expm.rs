use super::{norm, QOperator, QState, HERMITIAN_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpOptions {
    /// Largest tolerated `|1 - ||exp(G) psi|||` before the result is rejected.
    pub norm_tol: f64,
    /// Relative size of a Taylor term below which the series is cut.
    pub term_tol: f64,
    /// Upper bound on `||G||_1 / steps`.
    pub step_norm: f64,
}

impl Default for ExpOptions {
    fn default() -> Self {
        ExpOptions { norm_tol: 1e-6, term_tol: 1e-16, step_norm: 1.0 }
    }
}

/// `exp(G)|psi>` for an anti-hermitian generator, with default options.
pub fn exp_action(generator: &QOperator, state: &QState) -> Result<QState> {
    exp_action_with(generator, state, ExpOptions::default())
}

/// Taylor action `sum_k (G/s)^k v / k!` applied `s` times, where `s` keeps
/// `||G/s||_1 <= step_norm` so no term can grow large enough to cancel
/// catastrophically. Each substep stops once two consecutive terms fall below
/// `term_tol` relative to the partial sum, or after `10 * ||G/s|| + 50` terms.
///
/// The norm drift of the result is added to the state's leakage before
/// renormalization.
pub fn exp_action_with(generator: &QOperator, state: &QState, opts: ExpOptions) -> Result<QState> {
    if generator.space() != state.space() {
        return Err(Error::SpaceMismatch);
    }
    let residual = generator.matrix().adjoint_residual(-1.0);
    if residual > HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian(residual));
    }

    let g_norm = generator.matrix().norm1();
    let steps = ((g_norm / opts.step_norm).ceil() as usize).max(1);
    let h = 1.0 / steps as f64;
    let h_norm = g_norm * h;
    let max_terms = (10.0 * h_norm).ceil() as usize + 50;

    let mut v = state.amplitudes().to_vec();
    for _ in 0..steps {
        let mut acc = v.clone();
        let mut term = v;
        let mut small_in_a_row = 0;
        for k in 1..=max_terms {
            term = generator.matrix().matvec(&term);
            let factor = h / k as f64;
            for t in &mut term {
                *t *= factor;
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            if norm(&term) <= opts.term_tol * norm(&acc) {
                small_in_a_row += 1;
                if small_in_a_row == 2 {
                    break;
                }
            } else {
                small_in_a_row = 0;
            }
        }
        v = acc;
    }

    let drift = (1.0 - norm(&v)).abs();
    if drift > opts.norm_tol {
        return Err(Error::NormLoss(drift));
    }
    QState::with_leakage(state.space(), v, state.leakage() + drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{FockSpace, Mode};
    use num_complex::Complex64 as C64;

    #[test]
    fn zero_generator_is_identity() {
        let s = FockSpace::new(3, 3).unwrap();
        let amps: Vec<C64> = (0..s.dim()).map(|i| C64::new(i as f64, 1.0)).collect();
        let psi = QState::from_amplitudes(s, amps).unwrap();
        let out = exp_action(&QOperator::zero(s), &psi).unwrap();
        assert_eq!(out.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn rejects_hermitian_generator() {
        let s = FockSpace::new(2, 2).unwrap();
        let n = QOperator::number(s, Mode::One);
        assert!(matches!(exp_action(&n, &QState::vacuum(s)), Err(Error::NotAntiHermitian(_))));
    }

    #[test]
    fn phase_rotation_of_number_state() {
        // exp(-i t n) |2,0> = e^{-2it} |2,0>
        let s = FockSpace::new(4, 1).unwrap();
        let t = 0.7;
        let g = QOperator::number(s, Mode::One).scale(C64::new(0.0, -t));
        let out = exp_action(&g, &QState::basis(s, 2, 0).unwrap()).unwrap();
        let want = C64::from_polar(1.0, -2.0 * t);
        assert!((out.amplitude(2, 0) - want).norm() < 1e-14);
    }
}
