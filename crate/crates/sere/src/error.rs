use thiserror::Error;

/// Errors raised across the crate.
#[derive(Error, Debug)]
pub enum SereError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("branching ratio alpha/beta = {mu_hat} >= 1; the process would explode")]
    StabilityViolation { mu_hat: f64 },

    #[error("need at least {required} samples, only {available} available")]
    InsufficientSamples { available: usize, required: usize },

    #[error("row {row} of the transition matrix is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: f64 },

    #[error("Markov chain is not ergodic (reducible or periodic)")]
    NotErgodic,

    #[error("linear system is singular; numerical breakdown for an ergodic chain")]
    SingularSystem,

    #[error("time {t} outside the simulated horizon {horizon}")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("geometric mark c({state}) = {value} <= -1")]
    InvalidMark { state: usize, value: f64 },

    #[error("balance condition violated: residual {residual}")]
    BalanceViolated { residual: f64 },

    #[error("path horizon {available} too short, need {needed}")]
    HorizonTooShort { needed: f64, available: f64 },

    #[error("sigma^2({z}) = {value} < 0 along the SDE path")]
    NegativeVariance { z: f64, value: f64 },

    #[error("matrix norm too large for a reliable exponential: {norm}")]
    Overflow { norm: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SereError>;
