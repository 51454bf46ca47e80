//! Zeroth-order gradient estimation with antithetic perturbations.
//!
//! `ĝ(θ) = (1/(BKσ)) Σ_b Σ_k F(θ + σω⁽ᵏ'ᵇ⁾) ω⁽ᵏ'ᵇ⁾` estimates the gradient of the
//! Gaussian-smoothed objective `E F(θ + σω)`. Within a batch the `ω` are
//! antithetic with unit marginal variance, so `Σₖ ω⁽ᵏ⁾ = 0` and the
//! `F(θ)ω/σ` term, whose variance grows like `1/σ²`, cancels exactly.

use nalgebra::DVector;

use crate::error::{check_folds, invalid, Error, Result};
use crate::exec::Execution;
use crate::rng::RngSpec;
use crate::sampler::{sample, Coupling};

#[derive(Debug, Clone, PartialEq)]
pub struct GradEstimate {
    pub grad: DVector<f64>,
    pub sigma: f64,
    pub k: usize,
    pub batches: usize,
}

/// Per-batch estimates `(1/(Kσ)) Σₖ F(θ + σω⁽ᵏ⁾) ω⁽ᵏ⁾`; batch `b` draws from
/// `rng.child(b)`.
#[allow(clippy::too_many_arguments)]
pub fn grad_batches<F>(
    objective: F,
    theta: &DVector<f64>,
    sigma: f64,
    k: usize,
    batches: usize,
    coupling: Coupling,
    rng: &RngSpec,
    exec: Execution,
) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    if coupling == Coupling::Antithetic {
        check_folds(k)?;
    } else if k == 0 {
        return Err(invalid("need at least one perturbation per batch"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if batches == 0 {
        return Err(invalid("need at least one batch"));
    }
    if theta.is_empty() {
        return Err(invalid("theta must be non-empty"));
    }
    let d = theta.len();
    let scale = 1.0 / (k as f64 * sigma);
    exec.map_indexed(batches, |b| {
        let draws = sample(coupling, k, d, 1.0, &rng.child(b as u64))?;
        let mut g = DVector::zeros(d);
        for row in draws.row_iter() {
            let omega = row.transpose();
            let point = theta + &omega * sigma;
            let value = objective(&point);
            if !value.is_finite() {
                return Err(Error::NonFiniteObjective {
                    value,
                    point: point.iter().copied().collect(),
                });
            }
            g.axpy(value * scale, &omega, 1.0);
        }
        Ok(g)
    })
    .into_iter()
    .collect()
}

/// Averages `batches` antithetic batch estimates of `K` perturbations each.
pub fn antithetic_grad<F>(
    objective: F,
    theta: &DVector<f64>,
    sigma: f64,
    k: usize,
    batches: usize,
    rng: &RngSpec,
) -> Result<GradEstimate>
where
    F: Fn(&DVector<f64>) -> f64 + Sync,
{
    let per_batch = grad_batches(objective, theta, sigma, k, batches, Coupling::Antithetic, rng, Execution::Auto)?;
    let mut grad = DVector::zeros(theta.len());
    for g in &per_batch {
        grad += g;
    }
    grad /= batches as f64;
    Ok(GradEstimate { grad, sigma, k, batches })
}
