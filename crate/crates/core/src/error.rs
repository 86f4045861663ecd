use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("TOO_COARSE: grid needs at least 4 cells, got {0}")]
    TooCoarse(usize),

    #[error("OUT_OF_DOMAIN: z = {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("NONFINITE: non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("NONFINITE_INPUT: kinetics evaluated at a non-finite point")]
    NonFiniteInput,

    #[error("NONPOSITIVE_PARAM: {name} = {value} must be positive")]
    NonpositiveParam { name: String, value: f64 },

    #[error("DIMENSION_MISMATCH: {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error(
        "UNSTABLE_ASSEMBLY: row {row} is not diagonally dominant \
         (|diag| = {diag:.3e}, off-diagonal sum = {off:.3e}); use a finer grid or a smaller dt"
    )]
    UnstableAssembly { row: usize, diag: f64, off: f64 },

    #[error("ZERO_PIVOT: zero or non-finite pivot at row {0}")]
    ZeroPivot(usize),

    #[error("THICKNESS_COLLAPSE: R = {r:.3e} fell below the floor {floor:.3e}")]
    ThicknessCollapse { r: f64, floor: f64 },

    #[error("PICARD_DIVERGED: {reason} after {} iterations", residuals.len())]
    PicardDiverged {
        reason: String,
        residuals: Vec<f64>,
    },

    #[error("ENVELOPE_VIOLATED: E({t}) = {energy:.6e} exceeds the envelope {bound:.6e}")]
    EnvelopeViolated { t: f64, energy: f64, bound: f64 },

    #[error("NONPOSITIVE_THICKNESS: R = {0} in trajectory")]
    NonpositiveThickness(f64),

    #[error("PARSE_ERROR at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("UNKNOWN_KEY `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("SCHEMA_VIOLATION at `{key}`: {message}")]
    Schema { key: String, message: String },

    #[error("ORDER_REGRESSION: {case} observed order {observed:.3} below floor {floor}")]
    OrderRegression {
        case: String,
        observed: f64,
        floor: f64,
        report: Box<crate::mms::ConvergenceReport>,
    },

    #[error("IO_ERROR on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable code, the prefix of the display string.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooCoarse(_) => "TOO_COARSE",
            Error::OutOfDomain(_) => "OUT_OF_DOMAIN",
            Error::NonFinite(_) => "NONFINITE",
            Error::NonFiniteInput => "NONFINITE_INPUT",
            Error::NonpositiveParam { .. } => "NONPOSITIVE_PARAM",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::UnstableAssembly { .. } => "UNSTABLE_ASSEMBLY",
            Error::ZeroPivot(_) => "ZERO_PIVOT",
            Error::ThicknessCollapse { .. } => "THICKNESS_COLLAPSE",
            Error::PicardDiverged { .. } => "PICARD_DIVERGED",
            Error::EnvelopeViolated { .. } => "ENVELOPE_VIOLATED",
            Error::NonpositiveThickness(_) => "NONPOSITIVE_THICKNESS",
            Error::Parse { .. } => "PARSE_ERROR",
            Error::UnknownKey { .. } => "UNKNOWN_KEY",
            Error::Schema { .. } => "SCHEMA_VIOLATION",
            Error::OrderRegression { .. } => "ORDER_REGRESSION",
            Error::Io { .. } => "IO_ERROR",
        }
    }

    pub(crate) fn dims(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            got,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
