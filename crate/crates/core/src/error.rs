use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cutoff ({0}, {1}): every mode needs a cutoff of at least 1")]
    InvalidCutoff(usize, usize),

    #[error("Fock space with cutoffs ({0}, {1}) overflows the index type")]
    DimensionOverflow(usize, usize),

    #[error("invalid mode {0}; expected 1 or 2")]
    InvalidMode(u8),

    #[error("invalid G-operator index {0}; expected 0..=3")]
    InvalidGIndex(usize),

    #[error("operands live on different Fock spaces")]
    SpaceMismatch,

    #[error("vector length {got} does not match space dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("operator is not hermitian (max |M - M^H| = {0:e})")]
    NotHermitian(f64),

    #[error("generator is not anti-hermitian (max |G + G^H| = {0:e})")]
    NotAntiHermitian(f64),

    #[error("expectation of a hermitian operator has imaginary part {0:e}")]
    ImaginaryExpectation(f64),

    #[error("negative variance {0:e} beyond the clamp window")]
    NegativeVariance(f64),

    #[error("exponential action lost norm {0:e}; increase the cutoff")]
    NormLoss(f64),

    #[error("truncation leakage {leakage:e} exceeds tolerance {tol:e}; increase the cutoff")]
    Leakage { leakage: f64, tol: f64 },

    #[error("invalid state specification: {0}")]
    InvalidSpec(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("commutator identity {name} violated on the interior subspace (residual {residual:e})")]
    Commutator { name: String, residual: f64 },

    #[error("uncertainty relation {name} violated (slack {slack:e})")]
    UncertaintyViolation { name: String, slack: f64 },

    #[error("variance decomposition disagrees with direct moments at phi = {phi}: {direct:e} vs {decomposed:e}")]
    Decomposition { phi: f64, direct: f64, decomposed: f64 },

    #[error("unsupported squeeze angle {0}; closed forms exist for 0 and pi only")]
    UnsupportedTheta(f64),

    #[error("unsupported single-photon amplitudes; closed form covers balanced and one-sided cases")]
    UnsupportedAmplitudes,

    #[error("mean photon number {0} must be positive")]
    NonPositivePhotonNumber(f64),
}

impl Error {
    /// Whether the error stems from bad input rather than a numerical or regime failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidCutoff(..)
                | Error::DimensionOverflow(..)
                | Error::InvalidMode(_)
                | Error::InvalidGIndex(_)
                | Error::LengthMismatch { .. }
                | Error::ZeroNorm
                | Error::InvalidSpec(_)
                | Error::OutOfRange(_)
                | Error::UnsupportedTheta(_)
                | Error::UnsupportedAmplitudes
                | Error::NonPositivePhotonNumber(_)
        )
    }
}
