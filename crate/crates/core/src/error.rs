use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tail too slow: fitted decay exponent {exponent} must exceed 1 for a convergent integral")]
    TailTooSlow { exponent: f64 },

    #[error("degenerate tail fit: {0}")]
    DegenerateFit(String),

    #[error("profile has no tail window: {0}")]
    NoTail(String),

    #[error("conformal factor is not monotone: phi' = {derivative:e} at r = {radius}")]
    NotMonotone { radius: f64, derivative: f64 },

    #[error("negative radicand {value:e} at r = {radius}")]
    NegativeRadicand { radius: f64, value: f64 },

    #[error("singular linear system at row {row}")]
    SingularSystem { row: usize },

    #[error("no convergence after {iterations} iterations (last update {last_update:e})")]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        /// Outer history when the fixed-point loop gave up.
        trace: Option<Box<crate::solver::SolveTrace>>,
    },

    #[error("iterate became nonpositive at r = {radius} and damping could not recover it")]
    NonpositiveIterate { radius: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("radius {radius} is outside the evaluable range [0, {r_max}]")]
    EvaluationOutOfRange { radius: f64, r_max: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::TailTooSlow { .. } => "tail-too-slow",
            Error::DegenerateFit(_) => "degenerate-fit",
            Error::NoTail(_) => "no-tail",
            Error::NotMonotone { .. } => "not-monotone",
            Error::NegativeRadicand { .. } => "negative-radicand",
            Error::SingularSystem { .. } => "singular-system",
            Error::NoConvergence { .. } => "no-convergence",
            Error::NonpositiveIterate { .. } => "nonpositive-iterate",
            Error::ConstructionFailed(_) => "construction-failed",
            Error::EvaluationOutOfRange { .. } => "evaluation-out-of-range",
            Error::Parse { .. } => "parse-error",
            Error::Schema(_) => "schema-error",
            Error::Io(_) => "io-error",
            Error::Json(_) => "json-error",
        }
    }
}
