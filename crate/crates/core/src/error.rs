use thiserror::Error;

/// Errors raised by the estimators, learners and harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A predictor or learner broke its output contract (for example a
    /// fitted vector of the wrong length).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// Newton/IRLS did not converge or the coefficients diverged, which
    /// for logistic models almost always means (quasi-)separation.
    #[error("logistic fit failed after {} iterations: {reason}", trace.len())]
    Separation { reason: String, trace: Vec<IterationRecord> },

    #[error("objective returned a non-finite value {value} at perturbed point {point:?}")]
    NonFiniteObjective { value: f64, point: Vec<f64> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One Newton step of a logistic fit, kept for separation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub grad_inf_norm: f64,
    pub coef_norm: f64,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Validates the randomization scale `alpha` against the cancellation floor.
pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= crate::ALPHA_FLOOR) {
        return Err(invalid(format!(
            "alpha must be finite and >= {:e}, got {alpha}",
            crate::ALPHA_FLOOR
        )));
    }
    Ok(())
}

pub(crate) fn check_folds(k_folds: usize) -> Result<()> {
    if k_folds < 2 {
        return Err(invalid(format!(
            "antithetic randomization needs at least 2 folds, got {k_folds}"
        )));
    }
    Ok(())
}

pub(crate) fn check_variance(sigma2: f64) -> Result<()> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(invalid(format!("sigma2 must be positive, got {sigma2}")));
    }
    Ok(())
}
