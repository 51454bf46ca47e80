use nalgebra::DVector;

use super::Predictor;
use crate::error::{invalid, Result};

/// Coordinatewise soft-thresholding `sign(y)·max(|y| − λ, 0)`: the lasso
/// under an orthogonal design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftThreshold {
    lambda: f64,
}

impl SoftThreshold {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_nan() || lambda < 0.0 {
            return Err(invalid(format!("threshold must be nonnegative, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn active_count(&self, y: &DVector<f64>) -> usize {
        y.iter().filter(|v| v.abs() > self.lambda).count()
    }
}

impl Predictor for SoftThreshold {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        y.map(|v| v.signum() * (v.abs() - self.lambda).max(0.0))
    }

    fn divergence(&self, y: &DVector<f64>) -> Option<f64> {
        Some(self.active_count(y) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_example() {
        let g = SoftThreshold::new(1.0).unwrap();
        let y = DVector::from_vec(vec![3.0, 0.5, -2.0]);
        assert_eq!(g.evaluate(&y), DVector::from_vec(vec![2.0, 0.0, -1.0]));
        assert_eq!(g.divergence(&y), Some(2.0));
    }

    #[test]
    fn zero_threshold_is_identity() {
        let g = SoftThreshold::new(0.0).unwrap();
        let y = DVector::from_vec(vec![3.0, -0.5, 0.25, 1e-9]);
        assert_eq!(g.evaluate(&y), y);
        assert_eq!(g.divergence(&y), Some(4.0));
    }

    #[test]
    fn huge_threshold_is_zero() {
        let g = SoftThreshold::new(f64::INFINITY).unwrap();
        let y = DVector::from_vec(vec![3e8, -1e10]);
        assert_eq!(g.evaluate(&y), DVector::zeros(2));
        assert_eq!(g.divergence(&y), Some(0.0));
    }

    #[test]
    fn negative_threshold_rejected() {
        assert!(SoftThreshold::new(-0.1).is_err());
        assert!(SoftThreshold::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn divergence_matches_finite_differences(
            ys in prop::collection::vec(-4.0f64..4.0, 1..12),
            lambda in 0.0f64..2.0,
        ) {
            prop_assume!(ys.iter().all(|v| (v.abs() - lambda).abs() > 1e-3));
            let g = SoftThreshold::new(lambda).unwrap();
            let y = DVector::from_vec(ys);
            let h = 1e-6;
            let mut fd = 0.0;
            for i in 0..y.len() {
                let mut up = y.clone();
                let mut dn = y.clone();
                up[i] += h;
                dn[i] -= h;
                fd += (g.evaluate(&up)[i] - g.evaluate(&dn)[i]) / (2.0 * h);
            }
            prop_assert!((fd - g.divergence(&y).unwrap()).abs() < 1e-5);
        }
    }
}
