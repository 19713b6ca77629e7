use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the layer that raises them; the CLI maps each one
/// to a stable code via [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}", expected.join(" | "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no elementary antiderivative for `{0}`")]
    NonElementary(String),

    #[error("expression is not strictly increasing on the interval: {0}")]
    NotMonotone(String),

    #[error("cannot decide the order of `{0}` and `{1}` under the current assumptions")]
    UndecidableComparison(String, String),

    #[error("assumptions are inconsistent")]
    InconsistentEnv,

    #[error("guards overlap near {0}")]
    OverlappingGuards(String),

    #[error("guards leave a gap near {0}")]
    GapInGuards(String),

    #[error("not convex: witness {0}")]
    NonConvex(String),

    #[error("discontinuous on its domain at {0}")]
    DiscontinuousOnDomain(String),

    #[error("not lower semicontinuous at {0}")]
    NotLsc(String),

    #[error("scalar must be nonnegative, got {0}")]
    NegativeScalar(String),

    #[error("operator has empty domain")]
    EmptyOperator,

    #[error("could not pin the conjugate's additive constant")]
    ConstantPinFailure,

    #[error("distribution has no finite first moment")]
    NoFirstMoment,

    #[error("tail limit not computable: {0}")]
    UnsupportedTail(String),

    #[error("probability level {0} is outside (0,1)")]
    POutOfRange(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sampling window does not meet the domain")]
    WindowOutsideDomain,

    #[error("iteration limit reached: {0}")]
    MaxIterations(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("coordinate {index}: {source}")]
    Coordinate { index: usize, source: Box<Error> },
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "E_SYNTAX",
            Error::Domain(_) => "E_DOMAIN",
            Error::UnboundParameter(_) => "E_UNBOUND_PARAMETER",
            Error::Unsupported(_) => "E_UNSUPPORTED",
            Error::NonElementary(_) => "E_NON_ELEMENTARY",
            Error::NotMonotone(_) => "E_NOT_MONOTONE",
            Error::UndecidableComparison(..) => "E_UNDECIDABLE",
            Error::InconsistentEnv => "E_INCONSISTENT_ENV",
            Error::OverlappingGuards(_) => "E_OVERLAPPING_GUARDS",
            Error::GapInGuards(_) => "E_GAP_IN_GUARDS",
            Error::NonConvex(_) => "E_NON_CONVEX",
            Error::DiscontinuousOnDomain(_) => "E_DISCONTINUOUS",
            Error::NotLsc(_) => "E_NOT_LSC",
            Error::NegativeScalar(_) => "E_NEGATIVE_SCALAR",
            Error::EmptyOperator => "E_EMPTY_OPERATOR",
            Error::ConstantPinFailure => "E_CONSTANT_PIN",
            Error::NoFirstMoment => "E_NO_FIRST_MOMENT",
            Error::UnsupportedTail(_) => "E_UNSUPPORTED_TAIL",
            Error::POutOfRange(_) => "E_P_OUT_OF_RANGE",
            Error::DimensionMismatch { .. } => "E_DIMENSION_MISMATCH",
            Error::WindowOutsideDomain => "E_WINDOW_OUTSIDE_DOMAIN",
            Error::MaxIterations(_) => "E_MAX_ITERATIONS",
            Error::InvalidDistribution(_) => "E_INVALID_DISTRIBUTION",
            Error::Internal(_) => "E_INTERNAL",
            Error::Coordinate { source, .. } => source.code(),
        }
    }

    /// Internal inconsistencies are bugs or unsupported corner cases rather
    /// than bad input.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::Coordinate { source, .. } => source.is_internal(),
            other => matches!(other, Error::Internal(_) | Error::ConstantPinFailure),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
