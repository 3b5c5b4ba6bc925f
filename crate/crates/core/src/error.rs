use alloc::string::String;

/// Errors reported by the approximation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("point {t} lies outside [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("malformed function specification: {0}")]
    BadFunctionSpec(String),
    #[error("tabulated samples: {0}")]
    BadSamples(&'static str),
    #[error("residual is degenerate: max |g| = {0} is within tolerance")]
    DegenerateResidual(f64),
    #[error("residual is not recentred: max g + min g = {0}")]
    NotRecentred(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("knot vector: {0}")]
    InvalidKnots(String),
    #[error("no decreasing step found")]
    StepFailure,
    #[error("knot move failed: {0}")]
    MoveFailure(String),
}

pub type Result<T> = core::result::Result<T, Error>;
