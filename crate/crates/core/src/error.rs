use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid time scale: {0}")]
    InvalidTimeScale(String),

    #[error("point {0} is not on the time scale grid")]
    PointNotOnGrid(f64),

    #[error("point {0} is the last point of the truncated grid; its forward jump is undefined")]
    HorizonExceeded(f64),

    #[error("grid count must be positive")]
    InvalidCount,

    #[error("horizon too small: need at least {needed} points, have {have}")]
    HorizonTooSmall { needed: usize, have: usize },

    #[error("{value} is not regressive: 1 + mu*z vanishes at grid index {index}")]
    NotRegressive { value: Complex64, index: usize },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("evaluation at pole {0}")]
    PoleEvaluation(Complex64),

    #[error("evaluation point {0} lies on the branch cut of a fractional power")]
    BranchCut(Complex64),

    #[error("transform tail is not geometrically dominated (tail bound {tail_bound:e} at horizon {horizon})")]
    TailUnbounded { horizon: usize, tail_bound: f64 },

    #[error("arity mismatch: expected {expected} initial values, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("initial value of order {0} is not finite")]
    NonFiniteInitialValue(usize),

    #[error("transform is not strictly proper")]
    NotStrictlyProper,

    #[error("transform is not rational")]
    NotRational,

    #[error("term with nonnegative total degree cannot be inverted: {0}")]
    NotInvertibleTerm(String),

    #[error("collocation system is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("result transform {0} is not rational on a discrete time scale; enable collocation to invert it")]
    NeedsCollocation(String),

    #[error("invalid fractional order {0}")]
    InvalidOrder(f64),

    #[error("quadrature failed to reach tolerance (estimated error {0:e})")]
    QuadratureFailure(f64),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("unsupported scenario: {0}")]
    ScenarioUnsupported(String),

    #[error("invalid function spec: {0}")]
    InvalidFunctionSpec(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
