//! Prediction-error estimators for the normal means problem
//! `Y ~ N(θ, σ²Iₙ)` with known `σ²`.
//!
//! All estimators report on the same scale as `PE(g) = E‖g(Y) − Ỹ‖²`,
//! a sum over the `n` coordinates.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_folds, check_variance, invalid, Error, Result};
use crate::predictors::{evaluate_checked, Fitted, Learner, Predictor};
use crate::rng::RngSpec;
use crate::sampler::{sample, sample_antithetic, Coupling};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMeansData {
    pub y: DVector<f64>,
    pub sigma2: f64,
}

impl NormalMeansData {
    pub fn new(y: DVector<f64>, sigma2: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(invalid("response vector is empty"));
        }
        check_variance(sigma2)?;
        Ok(Self { y, sigma2 })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[serde(rename = "antithetic")]
    AntitheticCV,
    /// Independent randomization. In the GLM setting this is the
    /// "independent randomization" baseline.
    #[serde(alias = "independent", alias = "cb")]
    CoupledBootstrap,
    Sure,
    #[serde(rename = "kfold")]
    KFoldCV,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::AntitheticCV => "antithetic",
            Method::CoupledBootstrap => "coupled_bootstrap",
            Method::Sure => "sure",
            Method::KFoldCV => "kfold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub fold_values: Vec<f64>,
    pub method: Method,
    pub alpha: f64,
    pub k_folds: usize,
    pub seed: RngSpec,
}

impl RiskEstimate {
    pub(crate) fn from_folds(fold_values: Vec<f64>, method: Method, alpha: f64, seed: RngSpec) -> Self {
        let value = fold_values.iter().sum::<f64>() / fold_values.len() as f64;
        Self {
            value,
            k_folds: fold_values.len(),
            fold_values,
            method,
            alpha,
            seed,
        }
    }
}

/// Per-fold values `‖Y − ω/√α − g(Y + √α ω)‖² − ‖ω‖²/α` for the rows of
/// `draws`. Shared by the antithetic and coupled-bootstrap estimators; only
/// the law of the rows differs.
pub fn randomized_fold_values<P: Predictor + ?Sized>(
    data: &NormalMeansData,
    g: &P,
    alpha: f64,
    draws: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if draws.ncols() != data.n() {
        return Err(invalid(format!(
            "draws have dimension {}, data has {}",
            draws.ncols(),
            data.n()
        )));
    }
    let sa = alpha.sqrt();
    (0..draws.nrows())
        .map(|k| {
            let omega = draws.row(k).transpose();
            let train = &data.y + &omega * sa;
            let fit = evaluate_checked(g, &train)?;
            let test = &data.y - &omega / sa;
            Ok((test - fit).norm_squared() - omega.norm_squared() / alpha)
        })
        .collect()
}

/// Antithetic cross-validation `CV_α`.
pub fn cv_alpha<P: Predictor + ?Sized>(
    data: &NormalMeansData,
    g: &P,
    alpha: f64,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate> {
    check_folds(k_folds)?;
    check_alpha(alpha)?;
    let draws = sample_antithetic(k_folds, data.n(), data.sigma2, rng)?;
    let folds = randomized_fold_values(data, g, alpha, &draws.draws)?;
    Ok(RiskEstimate::from_folds(folds, Method::AntitheticCV, alpha, *rng))
}

/// Coupled bootstrap `CB_α`: independent randomization, unbiased for the
/// noise-inflated error `PE_α(g)`.
pub fn cb_alpha<P: Predictor + ?Sized>(
    data: &NormalMeansData,
    g: &P,
    alpha: f64,
    k_reps: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate> {
    check_alpha(alpha)?;
    let draws = sample(Coupling::Independent, k_reps, data.n(), data.sigma2, rng)?;
    let folds = randomized_fold_values(data, g, alpha, &draws)?;
    Ok(RiskEstimate::from_folds(folds, Method::CoupledBootstrap, alpha, *rng))
}

/// Stein's unbiased risk estimate on the prediction-error scale,
/// `‖Y − g(Y)‖² + 2σ² div g(Y)`.
pub fn sure<P: Predictor + ?Sized>(data: &NormalMeansData, g: &P) -> Result<f64> {
    let div = g.divergence(&data.y).ok_or_else(|| {
        Error::Unsupported(
            "predictor has no analytic divergence; combine smoothed_divergence_mc with the residual term instead"
                .into(),
        )
    })?;
    let fit = evaluate_checked(g, &data.y)?;
    Ok((&data.y - fit).norm_squared() + 2.0 * data.sigma2 * div)
}

/// Monte Carlo estimate of `div(g ∗ φ_{ασ²})(y)`:
/// `(1/(K√α σ²)) Σₖ ⟨ω⁽ᵏ⁾, g(y + √α ω⁽ᵏ⁾)⟩` with antithetic `ω`.
pub fn smoothed_divergence_mc<P: Predictor + ?Sized>(
    g: &P,
    y: &DVector<f64>,
    sigma2: f64,
    alpha: f64,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<f64> {
    check_folds(k_folds)?;
    check_alpha(alpha)?;
    let draws = sample_antithetic(k_folds, y.len(), sigma2, rng)?;
    smoothed_divergence_from_draws(g, y, sigma2, alpha, &draws.draws)
}

pub(crate) fn smoothed_divergence_from_draws<P: Predictor + ?Sized>(
    g: &P,
    y: &DVector<f64>,
    sigma2: f64,
    alpha: f64,
    draws: &DMatrix<f64>,
) -> Result<f64> {
    let sa = alpha.sqrt();
    let mut acc = 0.0;
    for k in 0..draws.nrows() {
        let omega = draws.row(k).transpose();
        let fit = evaluate_checked(g, &(y + &omega * sa))?;
        acc += omega.dot(&fit);
    }
    Ok(acc / (draws.nrows() as f64 * sa * sigma2))
}

/// The two pieces of `CV_α` plus the cross term that zero-sum removes:
/// `CV_α = data_fit + covariance − cross`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvDecomposition {
    /// `(1/K) Σ ‖Y − g(Y + √α ω⁽ᵏ⁾)‖²`
    pub data_fit: f64,
    /// `(1/K) Σ (2/√α) ⟨ω⁽ᵏ⁾, g(Y + √α ω⁽ᵏ⁾)⟩`
    pub covariance: f64,
    /// `(2/K) Σ ⟨Y, ω⁽ᵏ⁾/√α⟩`; zero under antithetic draws.
    pub cross: f64,
}

pub fn cv_decomposition<P: Predictor + ?Sized>(
    data: &NormalMeansData,
    g: &P,
    alpha: f64,
    draws: &DMatrix<f64>,
) -> Result<CvDecomposition> {
    check_alpha(alpha)?;
    let sa = alpha.sqrt();
    let k = draws.nrows() as f64;
    let mut out = CvDecomposition {
        data_fit: 0.0,
        covariance: 0.0,
        cross: 0.0,
    };
    for r in 0..draws.nrows() {
        let omega = draws.row(r).transpose();
        let fit = evaluate_checked(g, &(&data.y + &omega * sa))?;
        out.data_fit += (&data.y - &fit).norm_squared() / k;
        out.covariance += 2.0 / sa * omega.dot(&fit) / k;
        out.cross += 2.0 / k * data.y.dot(&omega) / sa;
    }
    Ok(out)
}

/// Random partition of `0..n` into `k` contiguous blocks of a uniform
/// permutation; sizes differ by at most one, earlier folds larger.
pub fn kfold_partition(n: usize, k_folds: usize, rng: &RngSpec) -> Result<Vec<Vec<usize>>> {
    if k_folds < 2 || k_folds > n {
        return Err(invalid(format!("k_folds must be in [2, n={n}], got {k_folds}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng.rng());
    let base = n / k_folds;
    let extra = n % k_folds;
    let mut folds = Vec::with_capacity(k_folds);
    let mut start = 0;
    for f in 0..k_folds {
        let len = base + usize::from(f < extra);
        folds.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

pub(crate) fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub(crate) fn select(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

pub(crate) fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut held = vec![false; n];
    for &i in fold {
        held[i] = true;
    }
    (0..n).filter(|&i| !held[i]).collect()
}

/// Classic K-fold CV with a fixed partition. Each fold value is the
/// held-out sum of squared errors scaled by `n/|fold|`.
pub fn kfold_cv_with_folds<L: Learner>(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    learner: &L,
    folds: &[Vec<usize>],
    rng: RngSpec,
) -> Result<RiskEstimate> {
    let n = y.len();
    if design.nrows() != n {
        return Err(invalid(format!("design has {} rows, {} responses", design.nrows(), n)));
    }
    let mut fold_values = Vec::with_capacity(folds.len());
    for (f, fold) in folds.iter().enumerate() {
        if fold.is_empty() {
            return Err(invalid(format!("fold {f} is empty")));
        }
        let train = complement(n, fold);
        let fit = learner
            .fit(&select_rows(design, &train), &select(y, &train))
            .map_err(|e| Error::Fold { fold: f, source: Box::new(e) })?;
        let pred = fit.predict(&select_rows(design, fold));
        if pred.len() != fold.len() {
            return Err(Error::Fold {
                fold: f,
                source: Box::new(Error::ContractViolation(format!(
                    "learner returned {} predictions for {} rows",
                    pred.len(),
                    fold.len()
                ))),
            });
        }
        let sse = (pred - select(y, fold)).norm_squared();
        fold_values.push(sse * n as f64 / fold.len() as f64);
    }
    Ok(RiskEstimate::from_folds(fold_values, Method::KFoldCV, 0.0, rng))
}

/// Classic K-fold CV with a random partition drawn from `rng`.
pub fn kfold_cv<L: Learner>(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    learner: &L,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate> {
    let folds = kfold_partition(y.len(), k_folds, rng)?;
    kfold_cv_with_folds(design, y, learner, &folds, *rng)
}

/// Randomized estimate of `E[θᵀg(Y)]` for an exponential family with base
/// measure `h`, from Stein's identity with the divergence replaced by its
/// smoothed Monte Carlo version (unit-variance draws).
pub fn expfam_cross_term<P, H>(
    g: &P,
    y: &DVector<f64>,
    grad_log_h: H,
    alpha: f64,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<f64>
where
    P: Predictor + ?Sized,
    H: Fn(&DVector<f64>) -> DVector<f64>,
{
    let div = smoothed_divergence_mc(g, y, 1.0, alpha, k_folds, rng)?;
    let fit = evaluate_checked(g, y)?;
    let glh = grad_log_h(y);
    if glh.len() != y.len() {
        return Err(Error::ContractViolation("grad log h has the wrong length".into()));
    }
    Ok(-div - fit.dot(&glh))
}
