use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible operator parameters n = {n}, alpha = {alpha} (need n >= 1 and 0 <= alpha <= 1/n)")]
    InadmissibleParams { n: u64, alpha: f64 },

    #[error("evaluation point must be a finite non-negative number, got {0}")]
    NegativePoint(f64),

    #[error("series truncation failed: index cap {cap} reached with mass {achieved_mass}")]
    TruncationFailure { achieved_mass: f64, cap: usize },

    #[error("kernel integral diverges: growth rate {rate} is not below n = {n}")]
    DivergentIntegral { n: u64, rate: f64 },

    #[error("operator series diverges: ratio {ratio} >= 1 for growth rate {rate}")]
    DivergentSeries { rate: f64, ratio: f64 },

    #[error("closed-form moment of order {0} is not available, use the numeric path")]
    UnsupportedOrder(u32),

    #[error("grid resolution {resolution} is coarser than delta/10 for delta = {delta}")]
    CoarseGrid { resolution: f64, delta: f64 },

    #[error("empty domain [{lo}, {hi}]")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("bound has a singular denominator: {0}")]
    SingularDenominator(&'static str),

    #[error("evaluation point {x} exceeds the restriction bound l = {l}")]
    PointOutsideRange { x: f64, l: f64 },

    #[error("analytic derivatives are not available for {0}")]
    MissingDerivative(String),

    #[error("the operation needs data outside the sampled range [{lo}, {hi}]")]
    OutsideSampledRange { lo: f64, hi: f64 },

    #[error("summability row {row} has no declared finite support")]
    InfiniteRowSupport { row: u64 },

    #[error("summability row {row} is invalid: {reason}")]
    InvalidMatrixRow { row: u64, reason: String },

    #[error("one-sided limit at {x} could not be estimated")]
    LimitEstimation { x: f64 },

    #[error("abscissae must be strictly increasing")]
    UnsortedAbscissae,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("grid point {index} failed: {source}")]
    GridPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
