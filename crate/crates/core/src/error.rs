use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid Hilbert-space dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("resonant formula requires delta = 0, got delta = {0}")]
    NotResonant(f64),

    #[error("excitation sector n = {n}: exceptional point (chi = {chi_re:+e}{chi_im:+e}i), block is not diagonalizable")]
    ExceptionalPoint { n: usize, chi_re: f64, chi_im: f64 },

    #[error("integration failed at t = {t}: step size {step:e} underflowed")]
    IntegrationFailure { t: f64, step: f64 },

    #[error("superoperator dimension {dim} exceeds the dense limit {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ExceptionalPoint { .. }
                | Error::IntegrationFailure { .. }
                | Error::Decomposition(_)
                | Error::DimensionGuard { .. }
        )
    }
}
