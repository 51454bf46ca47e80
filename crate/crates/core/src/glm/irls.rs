use nalgebra::{DMatrix, DVector};

use super::{sigmoid, softplus};
use crate::error::{invalid, Error, IterationRecord, Result};

const SATURATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop when the gradient's ∞-norm drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Ridge penalty `λ‖θ‖²/2` on the unscaled log-likelihood.
    pub ridge: f64,
    /// Coefficient norm treated as divergence (separation).
    pub max_coef_norm: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            ridge: 0.0,
            max_coef_norm: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: DVector<f64>,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

fn objective(design: &DMatrix<f64>, target: &DVector<f64>, ridge: f64, theta: &DVector<f64>) -> f64 {
    let eta = design * theta;
    eta.iter().map(|&e| softplus(e)).sum::<f64>() - theta.dot(target) + 0.5 * ridge * theta.norm_squared()
}

/// Newton iterations (IRLS) for
/// `min Σ log(1 + e^{xᵢᵀθ}) − θᵀtarget + λ‖θ‖²/2`, where `target = Xᵀy`
/// for an ordinary fit. Step-halving keeps every step a descent step.
pub fn fit_logistic(design: &DMatrix<f64>, target: &DVector<f64>, opts: &NewtonOptions) -> Result<LogisticFit> {
    let p = design.ncols();
    if target.len() != p {
        return Err(invalid(format!("target has length {}, design has {p} columns", target.len())));
    }
    if opts.ridge.is_nan() || opts.ridge < 0.0 {
        return Err(invalid("ridge penalty must be nonnegative"));
    }
    let mut theta = DVector::zeros(p);
    let mut obj = objective(design, target, opts.ridge, &theta);
    let mut trace = Vec::new();
    let fail = |reason: String, trace: Vec<IterationRecord>| Error::Separation { reason, trace };

    for iter in 0..=opts.max_iter {
        let eta = design * &theta;
        let prob = eta.map(sigmoid);
        let grad = design.tr_mul(&prob) - target + &theta * opts.ridge;
        let grad_inf = grad.amax();
        trace.push(IterationRecord {
            iteration: iter,
            objective: obj,
            grad_inf_norm: grad_inf,
            coef_norm: theta.norm(),
        });
        if !grad_inf.is_finite() {
            return Err(fail("non-finite gradient".into(), trace));
        }
        if grad_inf <= opts.tol {
            // Without a penalty, fitted probabilities pinned at 0 or 1 mean the
            // gradient vanished only because θ ran off towards infinity.
            if opts.ridge == 0.0 && prob.iter().any(|&q| q.min(1.0 - q) < SATURATION) {
                return Err(fail("fitted probabilities saturated at 0 or 1".into(), trace));
            }
            return Ok(LogisticFit {
                coefficients: theta,
                iterations: iter,
                trace,
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let weights = prob.map(|q| q * (1.0 - q));
        let mut weighted = design.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= weights[i];
        }
        let hessian = design.tr_mul(&weighted) + DMatrix::identity(p, p) * opts.ridge;
        let Some(chol) = hessian.cholesky() else {
            return Err(fail("Hessian is singular (separation or rank-deficient design)".into(), trace));
        };
        let step = chol.solve(&grad);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &theta - &step * t;
            let cand_obj = objective(design, target, opts.ridge, &cand);
            if cand_obj.is_finite() && cand_obj <= obj + 1e-12 * obj.abs().max(1.0) {
                theta = cand;
                obj = cand_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(fail("line search failed to decrease the objective".into(), trace));
        }
        if theta.norm() > opts.max_coef_norm {
            return Err(fail(
                format!("coefficient norm {} exceeds {}", theta.norm(), opts.max_coef_norm),
                trace,
            ));
        }
    }
    Err(fail(format!("no convergence within {} iterations", opts.max_iter), trace))
}

/// Unpenalized maximum likelihood for 0/1 responses.
pub fn fit_logistic_irls(design: &DMatrix<f64>, y: &DVector<f64>, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
    if design.nrows() != y.len() {
        return Err(invalid("design rows and responses differ in length"));
    }
    if let Some(i) = y.iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(invalid(format!("response {i} is {} (expected 0 or 1)", y[i])));
    }
    let opts = NewtonOptions {
        tol,
        max_iter,
        ..NewtonOptions::default()
    };
    fit_logistic(design, &design.tr_mul(y), &opts).map(|f| f.coefficients)
}
