//! Prediction rules used by the estimators.
//!
//! A [`Predictor`] is a map `g: ℝⁿ → ℝⁿ` from a response vector to fitted
//! values at fixed covariates; the randomized estimators only ever call it.
//! A [`Learner`] fits on an arbitrary subset of rows and predicts at new
//! covariates, which classic K-fold CV needs. [`LearnerPredictor`] turns a
//! learner plus a fixed design into a predictor.

mod isotonic;
mod linear;
mod soft_threshold;

pub use isotonic::{pava, IsotonicFit, IsotonicLearner, IsotonicPredictor};
pub use linear::{ridge_smoother, LinearSmoother, RidgeFit, RidgeLearner};
pub use soft_threshold::SoftThreshold;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub trait Predictor: Sync {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64>;

    /// `tr ∇g(y)` when known in closed form.
    fn divergence(&self, _y: &DVector<f64>) -> Option<f64> {
        None
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        (**self).evaluate(y)
    }
    fn divergence(&self, y: &DVector<f64>) -> Option<f64> {
        (**self).divergence(y)
    }
}

impl<P: Predictor + ?Sized + Send> Predictor for Box<P> {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        (**self).evaluate(y)
    }
    fn divergence(&self, y: &DVector<f64>) -> Option<f64> {
        (**self).divergence(y)
    }
}

/// Evaluates `g` and checks the output length.
pub(crate) fn evaluate_checked<P: Predictor + ?Sized>(g: &P, y: &DVector<f64>) -> Result<DVector<f64>> {
    let out = g.evaluate(y);
    if out.len() != y.len() {
        return Err(Error::ContractViolation(format!(
            "predictor returned {} values for an input of length {}",
            out.len(),
            y.len()
        )));
    }
    Ok(out)
}

pub trait Learner: Sync {
    type Fitted: Fitted;

    /// Fits on `design` (one row per observation) and `y`.
    fn fit(&self, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self::Fitted>;
}

pub trait Fitted {
    fn predict(&self, design: &DMatrix<f64>) -> DVector<f64>;
}

/// Wraps an arbitrary function as a predictor with no known divergence.
/// Black-box learners (neural nets and the like) plug in here.
pub struct FnPredictor<F>(pub F);

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        (self.0)(y)
    }
}

/// `g(y) = y`, divergence `n`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Predictor for Identity {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }
    fn divergence(&self, y: &DVector<f64>) -> Option<f64> {
        Some(y.len() as f64)
    }
}

/// `g(y) = c` regardless of the input.
#[derive(Debug, Clone)]
pub struct Constant(pub DVector<f64>);

impl Predictor for Constant {
    fn evaluate(&self, _y: &DVector<f64>) -> DVector<f64> {
        self.0.clone()
    }
    fn divergence(&self, _y: &DVector<f64>) -> Option<f64> {
        Some(0.0)
    }
}

/// Refits `learner` on each response vector at a fixed design and returns
/// the in-sample fitted values.
pub struct LearnerPredictor<L> {
    pub learner: L,
    pub design: DMatrix<f64>,
}

impl<L: Learner> Predictor for LearnerPredictor<L> {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        match self.learner.fit(&self.design, y) {
            Ok(fit) => fit.predict(&self.design),
            Err(err) => {
                log::debug!("learner failed inside predictor: {err}");
                DVector::from_element(y.len(), f64::NAN)
            }
        }
    }
}

/// Predicts the training mean everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanLearner;

#[derive(Debug, Clone, Copy)]
pub struct MeanFit(pub f64);

impl Learner for MeanLearner {
    type Fitted = MeanFit;

    fn fit(&self, _design: &DMatrix<f64>, y: &DVector<f64>) -> Result<MeanFit> {
        if y.is_empty() {
            return Err(crate::error::invalid("cannot fit a mean to zero observations"));
        }
        Ok(MeanFit(y.mean()))
    }
}

impl Fitted for MeanFit {
    fn predict(&self, design: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_element(design.nrows(), self.0)
    }
}
