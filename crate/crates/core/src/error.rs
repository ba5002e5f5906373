//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point at radius {radius:e} m is too close to the expansion origin for a singular wave kind")]
    OriginSingularity { radius: f64 },

    #[error("accepted power must be positive, got {0}")]
    ZeroPower(f64),

    #[error("surface frequency {surface} Hz does not match medium frequency {medium} Hz")]
    InconsistentFrequency { surface: f64, medium: f64 },

    #[error("surface is not closed: {0}")]
    OpenSurface(String),

    #[error("surface is undersampled: {0}")]
    UndersampledSurface(String),

    #[error("truncation {0} is not a complete shell count 2N(N+2)")]
    IncompleteShell(usize),

    #[error("vector norm is zero")]
    ZeroNorm,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("frequency mismatch: {a} Hz vs {b} Hz")]
    FrequencyMismatch { a: f64, b: f64 },

    #[error("response matrix is singular (condition number {condition:e})")]
    SingularResponse { condition: f64 },

    #[error("scattering loop (I - M) is singular (condition number {condition:e})")]
    SingularLoop { condition: f64 },

    #[error("channel matrix is identically zero")]
    ZeroChannel,

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("superposition collapsed by phase cancellation (norm {0:e})")]
    CancellationCollapse(f64),

    #[error("expansion spheres overlap: separation {separation} m, required > {required} m")]
    OverlappingSpheres { separation: f64, required: f64 },

    #[error("cavity resonance: boundary determinant {0:e} below threshold")]
    CavityResonance(f64),

    #[error("measured average must be positive, got {0}")]
    ZeroMeasurement(f64),

    #[error("missing column: expected {expected} responses, got {got}")]
    MissingColumn { expected: usize, got: usize },

    #[error("inconsistent grids: {0}")]
    InconsistentGrids(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularResponse { .. }
            | Error::SingularLoop { .. }
            | Error::CavityResonance(_)
            | Error::ZeroChannel
            | Error::CancellationCollapse(_)
            | Error::OriginSingularity { .. }
            | Error::ZeroNorm => 3,
            _ => 2,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
