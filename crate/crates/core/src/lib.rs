//! Prediction-error estimation by cross-validation with antithetic Gaussian
//! randomization.
//!
//! Instead of splitting the sample, each of `K` "folds" perturbs the data
//! with Gaussian noise: train on `Y + √α ω⁽ᵏ⁾`, test on `Y − ω⁽ᵏ⁾/√α`. The
//! `ω⁽ᵏ⁾` are equicorrelated with correlation `−1/(K−1)` and therefore sum
//! to zero, which keeps the estimator's variance bounded as `α → 0` while
//! its bias vanishes. Coupled bootstrap, SURE and classic K-fold CV are
//! provided as baselines, together with a GLM extension, an experiment
//! harness and a zeroth-order gradient estimator built on the same sampler.

pub mod config;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod glm;
pub mod harness;
pub mod predictors;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verify;
pub mod zograd;

pub use error::{Error, Result};
pub use estimators::{
    cb_alpha, cv_alpha, expfam_cross_term, kfold_cv, smoothed_divergence_mc, sure, Method, NormalMeansData,
    RiskEstimate,
};
pub use exec::Execution;
pub use rng::RngSpec;
pub use sampler::{sample_antithetic, sample_independent, scale_draws, AntitheticDraws};

/// Smallest accepted randomization scale. Below it `‖ω‖²/α` cancels
/// catastrophically against the test residual.
pub const ALPHA_FLOOR: f64 = 1e-8;
