//! Exponential-family extension.
//!
//! Losses take the form `L(θ, Y) = Aₙ(θ) − θᵀSₙ(Y) − n^{−1/2} log hₙ(Y)`
//! with `Sₙ` and `Aₙ` scaled by `1/√n`. The sufficient statistic is
//! whitened as `Tₙ = H^{−1/2} Sₙ` and randomized exactly as in the normal
//! means case, with unit-variance antithetic draws.

mod cv;
mod irls;
mod scaling;

pub use cv::{cv_glm, glm_fold_values, independent_glm, kfold_cv_logistic, oracle_pe_glm};
pub use irls::{fit_logistic, fit_logistic_irls, LogisticFit, NewtonOptions};
pub use scaling::{plugin_h, ScalingFactor, EIGEN_FLOOR};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::rng::RngSpec;

pub trait ExpFamilyModel: Sync {
    /// Parameter dimension `p`.
    fn dim(&self) -> usize;

    /// Sample size `n`.
    fn n_obs(&self) -> usize;

    /// `Sₙ(Y)`, already scaled by `1/√n`.
    fn suff_stat(&self, y: &DVector<f64>) -> DVector<f64>;

    /// `Aₙ(θ)`, already scaled by `1/√n`.
    fn log_partition(&self, theta: &DVector<f64>) -> f64;

    /// `log hₙ(Y)`.
    fn log_base(&self, _y: &DVector<f64>) -> f64 {
        0.0
    }

    fn loss(&self, theta: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.log_partition(theta) - theta.dot(&self.suff_stat(y)) - self.log_base(y) / (self.n_obs() as f64).sqrt()
    }
}

/// Estimator of the natural parameter that sees the data only through `Sₙ`.
pub trait SuffStatLearner: Sync {
    fn estimate(&self, suff_stat: &DVector<f64>) -> Result<DVector<f64>>;
}

/// Draws response vectors from a known truth.
pub trait ResponseGenerator: Sync {
    fn draw(&self, rng: &RngSpec) -> DVector<f64>;
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli responses with a logit link. The base measure is 1, so the
/// `log hₙ` term vanishes.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub design: DMatrix<f64>,
}

pub fn logistic_model(design: DMatrix<f64>) -> Result<LogisticModel> {
    if design.nrows() == 0 || design.ncols() == 0 {
        return Err(invalid("logistic design must have at least one row and column"));
    }
    Ok(LogisticModel { design })
}

impl ExpFamilyModel for LogisticModel {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn n_obs(&self) -> usize {
        self.design.nrows()
    }

    fn suff_stat(&self, y: &DVector<f64>) -> DVector<f64> {
        self.design.tr_mul(y) / (self.n_obs() as f64).sqrt()
    }

    fn log_partition(&self, theta: &DVector<f64>) -> f64 {
        let eta = &self.design * theta;
        eta.iter().map(|&e| softplus(e)).sum::<f64>() / (self.n_obs() as f64).sqrt()
    }
}

/// Normal means `Y ~ N(μ, σ²I)` written as an exponential family with a
/// single observation: `S = Y`, `A(θ) = σ²‖θ‖²/2`, `log h(y) = −‖y‖²/(2σ²)`.
/// With `H = σ²I` and the learner `θ̂ = g(S)/σ²`, twice `σ²` times the GLM
/// estimator equals `cv_alpha` on the same draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFamily {
    pub dim: usize,
    pub sigma2: f64,
}

impl ExpFamilyModel for GaussianFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_obs(&self) -> usize {
        1
    }

    fn suff_stat(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }

    fn log_partition(&self, theta: &DVector<f64>) -> f64 {
        self.sigma2 * theta.norm_squared() / 2.0
    }

    fn log_base(&self, y: &DVector<f64>) -> f64 {
        -y.norm_squared() / (2.0 * self.sigma2)
    }
}

/// Ridge-penalized logistic regression as a function of `Sₙ`:
/// minimizes `Σ log(1 + e^{xᵢᵀθ}) − θᵀ(√n Sₙ) + λ‖θ‖²/2`.
///
/// The penalty makes the solution exist for every `Sₙ`, including the
/// randomized statistics that fall outside the convex hull of attainable
/// values, and for rank-deficient (one-hot) designs.
#[derive(Debug, Clone)]
pub struct RidgeLogisticLearner {
    pub design: DMatrix<f64>,
    pub options: NewtonOptions,
}

impl RidgeLogisticLearner {
    pub fn new(design: DMatrix<f64>, lambda: f64) -> Self {
        Self {
            design,
            options: NewtonOptions {
                ridge: lambda,
                ..NewtonOptions::default()
            },
        }
    }
}

impl SuffStatLearner for RidgeLogisticLearner {
    fn estimate(&self, suff_stat: &DVector<f64>) -> Result<DVector<f64>> {
        let target = suff_stat * (self.design.nrows() as f64).sqrt();
        fit_logistic(&self.design, &target, &self.options).map(|f| f.coefficients)
    }
}

/// Bernoulli responses with fixed success probabilities.
#[derive(Debug, Clone)]
pub struct BernoulliGenerator {
    pub probabilities: DVector<f64>,
}

impl ResponseGenerator for BernoulliGenerator {
    fn draw(&self, rng: &RngSpec) -> DVector<f64> {
        use rand::Rng;
        let mut r = rng.rng();
        self.probabilities.map(|p| if r.random::<f64>() < p { 1.0 } else { 0.0 })
    }
}
