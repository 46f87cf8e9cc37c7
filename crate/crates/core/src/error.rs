use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{sites} is not a Fibonacci number (nearest: {below}, {above})")]
    NotFibonacci { sites: usize, below: usize, above: usize },

    #[error("site index {index} out of range for lattice of {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("step exponential overflow: |Im V|*tau = {exponent} exceeds 700")]
    StepOverflow { exponent: f64 },

    #[error("state is not normalized: sum |psi|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge ({unresolved} of {dim} eigenvalues unresolved)")]
    NoConvergence { unresolved: usize, dim: usize },

    #[error("unverified eigenpair {index}: residual {residual:e} exceeds bound {bound:e}")]
    UnverifiedEigenpair { index: usize, residual: f64, bound: f64 },

    #[error("unverified eigenvalues: trace mismatch {mismatch:e} exceeds bound {bound:e}")]
    UnverifiedEigenvalues { mismatch: f64, bound: f64 },

    #[error("singular propagator: eigenvalue {index} is zero")]
    SingularPropagator { index: usize },

    #[error("no transition in bracket [{lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },

    #[error("bracket does not contain interior maximum (best at {at}, bracket [{lo}, {hi}])")]
    NoInteriorMaximum { at: f64, lo: f64, hi: f64 },

    #[error("indicator constant on bracket [{lo}, {hi}]")]
    ConstantIndicator { lo: f64, hi: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("no mode matches selector: {0}")]
    NoMatchingMode(String),
}
