use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::scenarios::{friedman_covariates, gaussian_response, isotonic_covariates, logistic_covariates, Scenario, ScenarioSpec};
use crate::error::{check_alpha, invalid, Result};
use crate::estimators::{cb_alpha, cv_alpha, kfold_cv, sure, Method, NormalMeansData};
use crate::exec::Execution;
use crate::glm::{
    cv_glm, independent_glm, kfold_cv_logistic, logistic_model, oracle_pe_glm, plugin_h, sigmoid, BernoulliGenerator,
    ExpFamilyModel, LogisticModel, ResponseGenerator, RidgeLogisticLearner, SuffStatLearner,
};
use crate::predictors::{ridge_smoother, IsotonicLearner, IsotonicPredictor, LinearSmoother, Predictor, RidgeLearner};
use crate::rng::RngSpec;
use crate::stats::{Moments, OracleEstimate};

pub const CSV_HEADER: &str = "scenario,method,alpha,k,replications,mse,stderr,dropped";

/// One estimator configuration on the grid. `k` is the number of folds or
/// randomization repetitions; it is ignored by SURE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub alpha: f64,
    pub k: usize,
}

impl MethodSpec {
    pub fn antithetic(alpha: f64, k: usize) -> Self {
        Self { method: Method::AntitheticCV, alpha, k }
    }

    pub fn coupled_bootstrap(alpha: f64, k: usize) -> Self {
        Self { method: Method::CoupledBootstrap, alpha, k }
    }

    pub fn kfold(k: usize) -> Self {
        Self { method: Method::KFoldCV, alpha: 0.0, k }
    }

    pub fn sure() -> Self {
        Self { method: Method::Sure, alpha: 0.0, k: 1 }
    }

    pub fn validate(&self, spec: &ScenarioSpec) -> Result<()> {
        match self.method {
            Method::AntitheticCV | Method::CoupledBootstrap => {
                check_alpha(self.alpha)?;
                let min_k = if self.method == Method::AntitheticCV { 2 } else { 1 };
                if self.k < min_k {
                    return Err(invalid(format!("{} needs k >= {min_k}, got {}", self.method.label(), self.k)));
                }
            }
            Method::KFoldCV => {
                if self.k < 2 || self.k > spec.n {
                    return Err(invalid(format!("kfold needs 2 <= k <= n = {}, got {}", spec.n, self.k)));
                }
            }
            Method::Sure => {
                if spec.scenario == Scenario::Logistic62 {
                    return Err(invalid("SURE applies to the Gaussian scenarios only"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub replications: usize,
    /// Fresh datasets (and learner fits) used by the oracle.
    pub oracle_fits: usize,
    /// Independent test copies scored against each oracle fit.
    pub oracle_test_draws: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            replications: 1000,
            oracle_fits: 2000,
            oracle_test_draws: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub scenario: Scenario,
    pub method: Method,
    pub alpha: f64,
    pub k: usize,
    /// Replications that produced an estimate.
    pub replications: usize,
    pub mse: f64,
    /// Sample sd of the squared errors over `√replications`.
    pub stderr: f64,
    pub dropped: usize,
    /// Average estimate, for reading off the bias.
    pub mean_estimate: f64,
}

impl MseReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scenario.label(),
            self.method.label(),
            self.alpha,
            self.k,
            self.replications,
            self.mse,
            self.stderr,
            self.dropped
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub oracle: OracleEstimate,
    pub reports: Vec<MseReport>,
}

pub fn write_csv<W: Write>(reports: &[MseReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn csv_string(reports: &[MseReport]) -> String {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Monte Carlo `E‖g(Y) − Ỹ‖²` for `Y, Ỹ ~ N(truth, σ²I)` independent.
/// Each of `n_fits` datasets is scored against `n_test` fresh copies; the
/// standard error is taken across fits.
pub fn oracle_pe_normal<P: Predictor + ?Sized>(
    g: &P,
    truth: &DVector<f64>,
    sigma2: f64,
    n_fits: usize,
    n_test: usize,
    rng: &RngSpec,
    exec: Execution,
) -> Result<OracleEstimate> {
    if n_fits < 2 || n_test == 0 {
        return Err(invalid("oracle needs at least two fits and one test draw per fit"));
    }
    let per_fit = exec.map_indexed(n_fits, |i| {
        let stream = rng.child(i as u64);
        let fit = g.evaluate(&gaussian_response(truth, sigma2, &stream.child(0)));
        if fit.len() != truth.len() {
            return None;
        }
        let mean = (0..n_test)
            .map(|j| (&fit - gaussian_response(truth, sigma2, &stream.child(1 + j as u64))).norm_squared())
            .sum::<f64>()
            / n_test as f64;
        mean.is_finite().then_some(mean)
    });
    OracleEstimate::from_replicates(&per_fit)
}

/// A scenario with its covariates drawn and its learner prepared.
pub enum Problem {
    Isotonic {
        design: DMatrix<f64>,
        truth: DVector<f64>,
        sigma2: f64,
        predictor: IsotonicPredictor,
    },
    Friedman {
        /// Covariates with a leading intercept column.
        design: DMatrix<f64>,
        truth: DVector<f64>,
        sigma2: f64,
        smoother: LinearSmoother,
        learner: RidgeLearner,
    },
    Logistic {
        model: LogisticModel,
        learner: RidgeLogisticLearner,
        generator: BernoulliGenerator,
    },
}

impl Problem {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match spec.scenario {
            Scenario::Isotonic61 => {
                let (design, truth) = isotonic_covariates(spec);
                let predictor = IsotonicLearner::predictor(design.column(0).as_slice())?;
                Problem::Isotonic {
                    design,
                    truth,
                    sigma2: spec.sigma2,
                    predictor,
                }
            }
            Scenario::Friedman63 => {
                let (x, truth) = friedman_covariates(spec);
                let design = x.insert_column(0, 1.0);
                let smoother = ridge_smoother(&design, spec.ridge_lambda)?;
                Problem::Friedman {
                    design,
                    truth,
                    sigma2: spec.sigma2,
                    smoother,
                    learner: RidgeLearner { lambda: spec.ridge_lambda },
                }
            }
            Scenario::Logistic62 => {
                let (design, eta) = logistic_covariates(spec);
                Problem::Logistic {
                    learner: RidgeLogisticLearner::new(design.clone(), spec.ridge_lambda),
                    model: logistic_model(design)?,
                    generator: BernoulliGenerator {
                        probabilities: eta.map(sigmoid),
                    },
                }
            }
        })
    }

    pub fn draw_response(&self, rng: &RngSpec) -> DVector<f64> {
        match self {
            Problem::Isotonic { truth, sigma2, .. } | Problem::Friedman { truth, sigma2, .. } => {
                gaussian_response(truth, *sigma2, rng)
            }
            Problem::Logistic { generator, .. } => generator.draw(rng),
        }
    }

    pub fn oracle(&self, n_fits: usize, n_test: usize, rng: &RngSpec, exec: Execution) -> Result<OracleEstimate> {
        match self {
            Problem::Isotonic {
                truth, sigma2, predictor, ..
            } => oracle_pe_normal(predictor, truth, *sigma2, n_fits, n_test, rng, exec),
            Problem::Friedman {
                truth, sigma2, smoother, ..
            } => oracle_pe_normal(smoother, truth, *sigma2, n_fits, n_test, rng, exec),
            Problem::Logistic {
                model,
                learner,
                generator,
            } => oracle_pe_glm(model, learner, generator, n_fits, n_test, rng, exec),
        }
    }

    /// Evaluates every method on one response vector. Method `m` draws its
    /// randomness from `rng.child(m)`.
    pub fn estimate_all(&self, y: &DVector<f64>, methods: &[MethodSpec], rng: &RngSpec) -> Vec<Result<f64>> {
        match self {
            Problem::Isotonic {
                design,
                sigma2,
                predictor,
                ..
            } => {
                let data = NormalMeansData { y: y.clone(), sigma2: *sigma2 };
                gaussian_estimates(&data, predictor, design, &IsotonicLearner, methods, rng)
            }
            Problem::Friedman {
                design,
                sigma2,
                smoother,
                learner,
                ..
            } => {
                let data = NormalMeansData { y: y.clone(), sigma2: *sigma2 };
                gaussian_estimates(&data, smoother, design, learner, methods, rng)
            }
            Problem::Logistic { model, learner, .. } => logistic_estimates(model, learner, y, methods, rng),
        }
    }
}

fn gaussian_estimates<P, L>(
    data: &NormalMeansData,
    g: &P,
    design: &DMatrix<f64>,
    learner: &L,
    methods: &[MethodSpec],
    rng: &RngSpec,
) -> Vec<Result<f64>>
where
    P: Predictor + ?Sized,
    L: crate::predictors::Learner,
{
    methods
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let stream = rng.child(m as u64);
            match spec.method {
                Method::AntitheticCV => cv_alpha(data, g, spec.alpha, spec.k, &stream).map(|e| e.value),
                Method::CoupledBootstrap => cb_alpha(data, g, spec.alpha, spec.k, &stream).map(|e| e.value),
                Method::Sure => sure(data, g),
                Method::KFoldCV => kfold_cv(design, &data.y, learner, spec.k, &stream).map(|e| e.value),
            }
        })
        .collect()
}

fn logistic_estimates(
    model: &LogisticModel,
    learner: &RidgeLogisticLearner,
    y: &DVector<f64>,
    methods: &[MethodSpec],
    rng: &RngSpec,
) -> Vec<Result<f64>> {
    let randomized = methods
        .iter()
        .any(|m| matches!(m.method, Method::AntitheticCV | Method::CoupledBootstrap));
    // The plug-in covariance is shared by every randomized method.
    let scaling = randomized.then(|| {
        let theta = learner.estimate(&model.suff_stat(y))?;
        plugin_h(&model.design, &theta)
    });
    methods
        .iter()
        .enumerate()
        .map(|(m, spec)| {
            let stream = rng.child(m as u64);
            let scaling = || match &scaling {
                Some(Ok(s)) => Ok(s),
                Some(Err(e)) => Err(invalid(format!("plug-in covariance unavailable: {e}"))),
                None => unreachable!("scaling computed whenever a randomized method is present"),
            };
            match spec.method {
                Method::AntitheticCV => {
                    cv_glm(model, y, learner, scaling()?, spec.alpha, spec.k, &stream).map(|e| e.value)
                }
                Method::CoupledBootstrap => {
                    independent_glm(model, y, learner, scaling()?, spec.alpha, spec.k, &stream).map(|e| e.value)
                }
                Method::KFoldCV => kfold_cv_logistic(&model.design, y, &learner.options, spec.k, &stream).map(|e| e.value),
                Method::Sure => Err(invalid("SURE applies to the Gaussian scenarios only")),
            }
        })
        .collect()
}

/// Runs every method on `replications` fresh response vectors and reports
/// the mean squared deviation from the oracle prediction error.
///
/// Covariates come from `spec.seed.child(0)`, the oracle from `child(2)`
/// and replication `r` from `child(3).child(r)`. Results are aggregated in
/// replication order, so the output is identical for any worker count.
pub fn run_mse_grid(
    spec: &ScenarioSpec,
    methods: &[MethodSpec],
    opts: &GridOptions,
    exec: Execution,
) -> Result<GridResult> {
    if opts.replications < 2 {
        return Err(invalid("replications must be at least 2"));
    }
    if methods.is_empty() {
        return Err(invalid("no methods given"));
    }
    for (i, m) in methods.iter().enumerate() {
        m.validate(spec).map_err(|e| invalid(format!("methods[{i}]: {e}")))?;
    }
    let problem = Problem::new(spec)?;
    let oracle = problem.oracle(opts.oracle_fits, opts.oracle_test_draws, &spec.seed.child(2), exec)?;
    log::info!(
        "{}: oracle PE {:.6} (stderr {:.2e}, {} dropped)",
        spec.scenario.label(),
        oracle.value,
        oracle.stderr,
        oracle.dropped
    );

    let reps_root = spec.seed.child(3);
    let per_rep = exec.map_indexed(opts.replications, |r| {
        let stream = reps_root.child(r as u64);
        let y = problem.draw_response(&stream.child(0));
        problem.estimate_all(&y, methods, &stream.child(1))
    });

    let reports = methods
        .iter()
        .enumerate()
        .map(|(m, spec_m)| {
            let mut sq = Moments::default();
            let mut est = Moments::default();
            let mut dropped = 0;
            for (r, results) in per_rep.iter().enumerate() {
                match &results[m] {
                    Ok(v) if v.is_finite() => {
                        sq.push((v - oracle.value).powi(2));
                        est.push(*v);
                    }
                    Ok(v) => {
                        log::warn!("replication {r}, {}: non-finite estimate {v}", spec_m.method.label());
                        dropped += 1;
                    }
                    Err(e) => {
                        log::warn!("replication {r}, {}: {e}", spec_m.method.label());
                        dropped += 1;
                    }
                }
            }
            MseReport {
                scenario: spec.scenario,
                method: spec_m.method,
                alpha: spec_m.alpha,
                k: spec_m.k,
                replications: sq.count,
                mse: sq.mean,
                stderr: sq.stderr(),
                dropped,
                mean_estimate: est.mean,
            }
        })
        .collect();
    Ok(GridResult { oracle, reports })
}
