use nalgebra::{DMatrix, DVector};

use super::{fit_logistic, softplus, ExpFamilyModel, NewtonOptions, ResponseGenerator, ScalingFactor, SuffStatLearner};
use crate::error::{check_alpha, check_folds, invalid, Error, Result};
use crate::estimators::{complement, kfold_partition, select, select_rows, Method, RiskEstimate};
use crate::exec::Execution;
use crate::rng::RngSpec;
use crate::sampler::{sample, Coupling};
use crate::stats::OracleEstimate;

/// Per-fold values `Aₙ(θ̂ₖ) − 𝔤ₖᵀ(Tₙ − ωₖ/√α) − n^{−1/2} log hₙ(Y)` where
/// `θ̂ₖ = g(H^{1/2}(Tₙ + √α ωₖ))` and `𝔤ₖ = H^{1/2}θ̂ₖ`.
pub fn glm_fold_values<M, L>(
    model: &M,
    y: &DVector<f64>,
    learner: &L,
    scaling: &ScalingFactor,
    alpha: f64,
    draws: &DMatrix<f64>,
) -> Result<Vec<f64>>
where
    M: ExpFamilyModel + ?Sized,
    L: SuffStatLearner + ?Sized,
{
    check_alpha(alpha)?;
    let p = model.dim();
    if scaling.dim() != p || draws.ncols() != p {
        return Err(invalid(format!(
            "model dimension {p}, scaling dimension {}, draw dimension {}",
            scaling.dim(),
            draws.ncols()
        )));
    }
    let t = scaling.whiten(&model.suff_stat(y));
    let base = model.log_base(y) / (model.n_obs() as f64).sqrt();
    let sa = alpha.sqrt();
    (0..draws.nrows())
        .map(|k| {
            let omega = draws.row(k).transpose();
            let s_train = scaling.unwhiten(&(&t + &omega * sa));
            let theta = learner
                .estimate(&s_train)
                .map_err(|e| Error::Fold { fold: k, source: Box::new(e) })?;
            if theta.len() != p {
                return Err(Error::Fold {
                    fold: k,
                    source: Box::new(Error::ContractViolation(format!(
                        "learner returned {} coefficients, expected {p}",
                        theta.len()
                    ))),
                });
            }
            let g = scaling.sqrt.tr_mul(&theta);
            let test = &t - &omega / sa;
            Ok(model.log_partition(&theta) - g.dot(&test) - base)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn randomized_glm<M, L>(
    model: &M,
    y: &DVector<f64>,
    learner: &L,
    scaling: &ScalingFactor,
    alpha: f64,
    k_folds: usize,
    rng: &RngSpec,
    coupling: Coupling,
) -> Result<RiskEstimate>
where
    M: ExpFamilyModel + ?Sized,
    L: SuffStatLearner + ?Sized,
{
    check_folds(k_folds)?;
    check_alpha(alpha)?;
    let draws = sample(coupling, k_folds, model.dim(), 1.0, rng)?;
    let folds = glm_fold_values(model, y, learner, scaling, alpha, &draws)?;
    let method = match coupling {
        Coupling::Antithetic => Method::AntitheticCV,
        Coupling::Independent => Method::CoupledBootstrap,
    };
    Ok(RiskEstimate::from_folds(folds, method, alpha, *rng))
}

/// Antithetic CV for an exponential-family loss, randomizing the whitened
/// sufficient statistic with unit-variance draws.
pub fn cv_glm<M, L>(
    model: &M,
    y: &DVector<f64>,
    learner: &L,
    scaling: &ScalingFactor,
    alpha: f64,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate>
where
    M: ExpFamilyModel + ?Sized,
    L: SuffStatLearner + ?Sized,
{
    randomized_glm(model, y, learner, scaling, alpha, k_folds, rng, Coupling::Antithetic)
}

/// Same fold formula with independent draws.
pub fn independent_glm<M, L>(
    model: &M,
    y: &DVector<f64>,
    learner: &L,
    scaling: &ScalingFactor,
    alpha: f64,
    k_reps: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate>
where
    M: ExpFamilyModel + ?Sized,
    L: SuffStatLearner + ?Sized,
{
    randomized_glm(model, y, learner, scaling, alpha, k_reps, rng, Coupling::Independent)
}

/// Classic K-fold CV for ridge-penalized logistic regression. Fold values
/// are on the same scale as the GLM loss: `(n/|fold|)·n^{−1/2}` times the
/// held-out negative log-likelihood.
pub fn kfold_cv_logistic(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    options: &NewtonOptions,
    k_folds: usize,
    rng: &RngSpec,
) -> Result<RiskEstimate> {
    let n = y.len();
    if design.nrows() != n {
        return Err(invalid(format!("design has {} rows, {n} responses", design.nrows())));
    }
    let folds = kfold_partition(n, k_folds, rng)?;
    let scale = (n as f64).sqrt();
    let mut values = Vec::with_capacity(folds.len());
    for (f, fold) in folds.iter().enumerate() {
        let train = complement(n, fold);
        let x_train = select_rows(design, &train);
        let target = x_train.tr_mul(&select(y, &train));
        let fit = fit_logistic(&x_train, &target, options).map_err(|e| Error::Fold { fold: f, source: Box::new(e) })?;
        let eta = select_rows(design, fold) * &fit.coefficients;
        let nll: f64 = fold.iter().enumerate().map(|(i, &row)| softplus(eta[i]) - y[row] * eta[i]).sum();
        values.push(nll / scale * n as f64 / fold.len() as f64);
    }
    Ok(RiskEstimate::from_folds(values, Method::KFoldCV, 0.0, *rng))
}

/// Monte Carlo estimate of `E[L(θ̂(Y), Ỹ)]` with `Y, Ỹ` independent:
/// `n_fits` draws of `Y`, each scored against `n_test` fresh copies `Ỹ`.
pub fn oracle_pe_glm<M, L, G>(
    model: &M,
    learner: &L,
    generator: &G,
    n_fits: usize,
    n_test: usize,
    rng: &RngSpec,
    exec: Execution,
) -> Result<OracleEstimate>
where
    M: ExpFamilyModel + ?Sized,
    L: SuffStatLearner + ?Sized,
    G: ResponseGenerator + ?Sized,
{
    if n_fits < 2 || n_test == 0 {
        return Err(invalid("oracle needs at least two fits and one test draw per fit"));
    }
    let per_fit = exec.map_indexed(n_fits, |i| {
        let stream = rng.child(i as u64);
        let y = generator.draw(&stream.child(0));
        let theta = learner.estimate(&model.suff_stat(&y)).ok()?;
        let mean = (0..n_test)
            .map(|j| model.loss(&theta, &generator.draw(&stream.child(1 + j as u64))))
            .sum::<f64>()
            / n_test as f64;
        mean.is_finite().then_some(mean)
    });
    OracleEstimate::from_replicates(&per_fit)
}
