use thiserror::Error;

/// Everything that can go wrong between a config file and a distribution.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("amplitude in |V,t_{bin}> would shift past the bin capacity {bin}")]
    OverflowPolicyViolation { bin: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("loss transmission {0} outside [0, 1]")]
    EtaOutOfRange(f64),

    #[error("mode index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("two sources target the same mode: {0}")]
    ModeCollision(String),

    #[error("source kind {0} is not Gaussian")]
    UnsupportedSource(String),

    #[error("both Kerr gates target bin {0}")]
    DuplicateGateBin(usize),

    #[error("singular matrix in vacuum-overlap evaluation")]
    SingularMatrix,

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("herald click probability is zero")]
    ZeroHeraldRate,

    #[error("Fock cutoff {cutoff} too small: truncation leak {leak:.3e} exceeds {bound:.1e}")]
    CutoffTooSmall { cutoff: usize, leak: f64, bound: f64 },

    #[error("Fock space dimension {dim} exceeds cap {cap}")]
    ResourceBound { dim: usize, cap: usize },

    #[error("distribution labels do not match")]
    LabelMismatch,

    #[error("distribution not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("no overlap reaches visibility {target} (max {max:.6})")]
    FitNoSolution { target: f64, max: f64 },

    #[error("oracle disagrees with the Gaussian engine: max deviation {deviation:.3e} >= {tolerance:.1e}")]
    OracleMismatch { deviation: f64, tolerance: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name, used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "ConfigInvalid",
            Error::OverflowPolicyViolation { .. } => "OverflowPolicyViolation",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonUnitary { .. } => "NonUnitary",
            Error::EtaOutOfRange(_) => "EtaOutOfRange",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::ModeCollision(_) => "ModeCollision",
            Error::UnsupportedSource(_) => "UnsupportedSource",
            Error::DuplicateGateBin(_) => "DuplicateGateBin",
            Error::SingularMatrix => "SingularMatrix",
            Error::NumericalInstability(_) => "NumericalInstability",
            Error::ZeroHeraldRate => "ZeroHeraldRate",
            Error::CutoffTooSmall { .. } => "CutoffTooSmall",
            Error::ResourceBound { .. } => "ResourceBound",
            Error::LabelMismatch => "LabelMismatch",
            Error::NotNormalized(_) => "NotNormalized",
            Error::FitNoSolution { .. } => "FitNoSolution",
            Error::OracleMismatch { .. } => "OracleMismatch",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
