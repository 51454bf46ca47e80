use nalgebra::{DMatrix, DVector};

use super::{Fitted, Learner, Predictor};
use crate::error::{invalid, Result};

/// `g(y) = S y` for a fixed `n×n` smoothing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSmoother {
    pub smoothing_matrix: DMatrix<f64>,
}

impl LinearSmoother {
    pub fn new(smoothing_matrix: DMatrix<f64>) -> Result<Self> {
        if !smoothing_matrix.is_square() {
            return Err(invalid("smoothing matrix must be square"));
        }
        Ok(Self { smoothing_matrix })
    }

    pub fn trace(&self) -> f64 {
        self.smoothing_matrix.trace()
    }

    /// `‖S‖²_F + tr(S²)`, the quadratic-form variance factor.
    pub fn quadratic_variance_factor(&self) -> f64 {
        let s = &self.smoothing_matrix;
        s.norm_squared() + (s * s).trace()
    }
}

impl Predictor for LinearSmoother {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        if y.len() != self.smoothing_matrix.ncols() {
            return DVector::zeros(0);
        }
        &self.smoothing_matrix * y
    }

    fn divergence(&self, _y: &DVector<f64>) -> Option<f64> {
        Some(self.trace())
    }
}

fn ridge_solve(design: &DMatrix<f64>, lambda: f64, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(invalid(format!("ridge penalty must be nonnegative, got {lambda}")));
    }
    let p = design.ncols();
    let gram = design.transpose() * design + DMatrix::identity(p, p) * lambda;
    let chol = gram
        .cholesky()
        .ok_or_else(|| invalid("ridge system is singular; use lambda > 0 or a full-rank design"))?;
    let sol = chol.solve(rhs);
    // Cholesky accepts tiny pivots on numerically rank-deficient designs.
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(invalid("ridge system is singular; use lambda > 0 or a full-rank design"));
    }
    Ok(sol)
}

/// Ridge hat matrix `X (XᵀX + λI)⁻¹ Xᵀ`.
pub fn ridge_smoother(design: &DMatrix<f64>, lambda: f64) -> Result<LinearSmoother> {
    let coef_map = ridge_solve(design, lambda, &design.transpose())?;
    LinearSmoother::new(design * coef_map)
}

/// Ridge regression as a refittable learner.
#[derive(Debug, Clone, Copy)]
pub struct RidgeLearner {
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub coefficients: DVector<f64>,
}

impl Learner for RidgeLearner {
    type Fitted = RidgeFit;

    fn fit(&self, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<RidgeFit> {
        if design.nrows() != y.len() {
            return Err(invalid("design rows and responses differ in length"));
        }
        let rhs = design.transpose() * y;
        let beta = ridge_solve(design, self.lambda, &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()))?;
        Ok(RidgeFit {
            coefficients: beta.column(0).into_owned(),
        })
    }
}

impl Fitted for RidgeFit {
    fn predict(&self, design: &DMatrix<f64>) -> DVector<f64> {
        design * &self.coefficients
    }
}
