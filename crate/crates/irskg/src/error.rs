//! Error types for the library.

use thiserror::Error;

/// Configuration loading and validation failures.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed line {line}: expected `key=value`, got `{text}`")]
    MalformedLine { line: usize, text: String },
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
}

/// Numerical linear-algebra failures.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular (eigenvalue {eigenvalue:e})")]
    SingularMatrix { eigenvalue: f64 },
}

/// Key-rate evaluation failures.
#[derive(Debug, Error)]
pub enum KeyRateError {
    #[error("reflect coefficient vector must be unit-modulus (entry {index} has modulus {modulus})")]
    NonUnitModulus { index: usize, modulus: f64 },
    #[error("effective variance `{name}` is negative: {value:e}")]
    NegativeVariance { name: &'static str, value: f64 },
    #[error("degenerate covariance input: {0}")]
    Degenerate(#[from] LinalgError),
    #[error("rate reduction needs a positive reference rate, got {0}")]
    NonPositiveReference(f64),
}

/// Optimizer failures.
#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error(
        "subproblem stalled after {iters} iterations (last improvement {improvement:e}, \
         diag residual {diag_residual:e}, eig residual {eig_residual:e})"
    )]
    SubproblemStalled {
        iters: usize,
        improvement: f64,
        diag_residual: f64,
        eig_residual: f64,
    },
    #[error("phase grid of {required} evaluations exceeds the budget of {budget}")]
    GridBudgetExceeded { required: u128, budget: u128 },
}

/// Channel-probing failures.
#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("pilot length {length} is shorter than the antenna count {antennas}")]
    PilotTooShort { length: usize, antennas: usize },
    #[error("need at least {need} trials for covariance estimation, got {got}")]
    TooFewTrials { got: usize, need: usize },
}

/// Quantization failures.
#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("empty sample batch")]
    EmptyBatch,
    #[error("degenerate batch: all samples equal, variance is zero")]
    DegenerateVariance,
    #[error("guardband must lie in [0, 1), got {0}")]
    InvalidGuardband(f64),
    #[error("bits per dimension must lie in 1..=24, got {0}")]
    InvalidBits(u8),
    #[error("bitstring lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("cannot compute a disagreement ratio over zero bits")]
    ZeroLength,
}

/// Experiment-plan validation failures.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error("sweep grid `{0}` is empty")]
    EmptyGrid(&'static str),
    #[error("sweep grid `{0}` must be strictly increasing")]
    NonIncreasingGrid(&'static str),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("scheme set is empty")]
    EmptySchemes,
}
