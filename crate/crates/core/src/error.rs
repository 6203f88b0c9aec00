use thiserror::Error;

/// Rejections raised while validating a [`crate::ProxProblem`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("input vector is empty")]
    EmptyVector,
    #[error("entry {index} of y is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("prox weight mu must be positive and finite, got {0}")]
    BadMu(f64),
    #[error("origin value a must lie in [0, 1], got {0}")]
    BadA(f64),
}

/// Failures of the quartic root machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuarticError {
    #[error("prefix sums violate Cauchy-Schwarz at k = {k}: S1^2 = {s1_sq}, k*S2 = {k_s2}")]
    CauchySchwarzViolated { k: usize, s1_sq: f64, k_s2: f64 },
    #[error("Newton polishing did not converge from {estimate} (residual {residual:e})")]
    PolishDivergence { estimate: f64, residual: f64 },
    #[error("query interval ({lo}, {hi}) is empty or not finite")]
    BadInterval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Quartic(#[from] QuarticError),
    #[error("oracle is limited to n <= {max}, got n = {n}")]
    OracleTooLarge { n: usize, max: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
