use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::sigmoid;
use crate::error::{invalid, Result};

/// Relative eigenvalue floor applied before taking square roots.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Covariance `H` of the sufficient statistic with symmetric square roots
/// `H^{1/2}` and `H^{−1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFactor {
    pub h_matrix: DMatrix<f64>,
    pub sqrt: DMatrix<f64>,
    pub inv_sqrt: DMatrix<f64>,
    /// Condition number after flooring.
    pub condition: f64,
}

impl ScalingFactor {
    /// Factors a symmetric PSD matrix by eigendecomposition, raising every
    /// eigenvalue to at least `EIGEN_FLOOR · λ_max`.
    pub fn from_psd(h: DMatrix<f64>) -> Result<Self> {
        if !h.is_square() || h.nrows() == 0 {
            return Err(invalid("scaling matrix must be square and non-empty"));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(invalid("scaling matrix has non-finite entries"));
        }
        let sym = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let lmax = eig.eigenvalues.max();
        let lmin = eig.eigenvalues.min();
        if !lmax.is_finite() || lmax <= 0.0 {
            return Err(invalid(format!(
                "scaling matrix is numerically singular (eigenvalues in [{lmin:e}, {lmax:e}], condition number infinite)"
            )));
        }
        let floor = EIGEN_FLOOR * lmax;
        let vals: DVector<f64> = eig.eigenvalues.map(|l| l.max(floor));
        let condition = lmax / vals.min();
        let v = &eig.eigenvectors;
        let sqrt = v * DMatrix::from_diagonal(&vals.map(f64::sqrt)) * v.transpose();
        let inv_sqrt = v * DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt())) * v.transpose();
        Ok(Self {
            h_matrix: h,
            sqrt,
            inv_sqrt,
            condition,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_matrix.nrows()
    }

    /// `T = H^{−1/2} S`.
    pub fn whiten(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.inv_sqrt * s
    }

    /// `S = H^{1/2} T`.
    pub fn unwhiten(&self, t: &DVector<f64>) -> DVector<f64> {
        &self.sqrt * t
    }
}

/// Plug-in covariance of the logistic sufficient statistic,
/// `Ĥ = (1/n) Xᵀ Ŵ X` with `Ŵ = diag(π̂ᵢ(1 − π̂ᵢ))`.
pub fn plugin_h(design: &DMatrix<f64>, theta_hat: &DVector<f64>) -> Result<ScalingFactor> {
    if theta_hat.len() != design.ncols() {
        return Err(invalid("coefficient length does not match design"));
    }
    if theta_hat.iter().any(|v| !v.is_finite()) {
        return Err(invalid("coefficients are not finite"));
    }
    let n = design.nrows() as f64;
    let eta = design * theta_hat;
    let mut weighted = design.clone();
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        let p = sigmoid(eta[i]);
        row *= p * (1.0 - p);
    }
    let h = design.tr_mul(&weighted) / n;
    ScalingFactor::from_psd((&h + h.transpose()) * 0.5)
}
