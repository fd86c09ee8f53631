use thiserror::Error;

/// Errors raised by the numerical and group-theoretic routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix has a non-real eigenvalue {re} + {im}i")]
    ComplexSpectrum { re: f64, im: f64 },

    #[error("eigenvalue moduli {larger} and {smaller} are not separated (relative gap {gap:e})")]
    ModulusCollision { larger: f64, smaller: f64, gap: f64 },

    #[error("matrix is singular or too ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("flags are not transverse (worst minor {minor:e} at index {index})")]
    NotTransverse { index: usize, minor: f64 },

    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown letter '{0}'")]
    UnknownLetter(char),

    #[error("empty sample set")]
    EmptySampleSet,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used for skip reasons and CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ComplexSpectrum { .. } => "complex_spectrum",
            Error::ModulusCollision { .. } => "modulus_collision",
            Error::Singular { .. } => "singular",
            Error::NotTransverse { .. } => "not_transverse",
            Error::NotUnimodular { .. } => "not_unimodular",
            Error::DegenerateParameters(_) => "degenerate_parameters",
            Error::OutOfRange(_) => "out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnknownLetter(_) => "unknown_letter",
            Error::EmptySampleSet => "empty_sample_set",
        }
    }
}
