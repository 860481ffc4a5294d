use num::complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("axis index {index} out of range 1..={n}")]
    AxisOutOfRange { index: usize, n: usize },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("polynomial is not harmonic")]
    NotHarmonic,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("linearly dependent input at element {0}")]
    LinearDependence(usize),

    #[error("sampler fault at {point:?}: {message}")]
    Sampler { point: Vec<Complex64>, message: String },

    #[error("no admissible (z, s) pairs in the requested sample set")]
    EmptyAdmissibleSet,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
