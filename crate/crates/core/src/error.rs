use thiserror::Error;

/// Reasons a configuration fails validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("configuration has no points")]
    NoPoints,
    #[error("configuration has no slopes")]
    NoSlopes,
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error(
        "pi_{{-1}} injectivity violated: points {first} and {second} share difference a-b = {difference}"
    )]
    DifferenceCollision {
        first: usize,
        second: usize,
        difference: String,
    },
    #[error("slope {0} listed more than once")]
    DuplicateSlope(String),
    #[error("slope -1 is reserved for the difference map")]
    ReservedSlope,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error("cannot parse rational {0:?}")]
    ParseRational(String),

    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("measure has {got} weights but configuration has {expected} points")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("argument {0} outside [0, 1]")]
    Domain(f64),

    #[error("every slope maps the configuration to a single value")]
    DegenerateProjection,

    #[error("every projected entropy is zero")]
    DegenerateDenominator,

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("function is not finite at {0}")]
    NonFinite(f64),

    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),

    #[error("ansatz leaves {0} free parameters, equalization needs exactly 1")]
    NotOneDimensional(usize),

    #[error("projected entropies coincide for every parameter; equalization equation is flat")]
    FlatEquation,

    #[error(
        "projected entropies fall into {0} distinct classes; one parameter cannot equalize them"
    )]
    Overdetermined(usize),

    #[error("M = {m} too small: weight {index} would receive no units")]
    TooSmallM { m: u64, index: usize },

    #[error("enumeration of {count} subsets exceeds budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
