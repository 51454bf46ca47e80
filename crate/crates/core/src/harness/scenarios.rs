use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::glm::{sigmoid, BernoulliGenerator, ResponseGenerator};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Isotonic regression of a five-level step function.
    #[serde(rename = "isotonic")]
    Isotonic61,
    /// Logistic regression with continuous and one-hot categorical features.
    #[serde(rename = "logistic")]
    Logistic62,
    /// Friedman #1 regression surface with ridge regression as the learner.
    #[serde(rename = "friedman1")]
    Friedman63,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Isotonic61 => "isotonic",
            Scenario::Logistic62 => "logistic",
            Scenario::Friedman63 => "friedman1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n: usize,
    /// Noise variance of the Gaussian scenarios; unused for the logistic one.
    pub sigma2: f64,
    /// Covariates, oracle and replications all derive from this stream.
    pub seed: RngSpec,
    /// Ridge penalty of the learner (logistic and Friedman scenarios).
    pub ridge_lambda: f64,
}

impl ScenarioSpec {
    pub fn defaults(scenario: Scenario, seed: u64) -> Self {
        let n = match scenario {
            Scenario::Isotonic61 | Scenario::Logistic62 => 100,
            Scenario::Friedman63 => 1000,
        };
        Self {
            scenario,
            n,
            sigma2: 1.0,
            seed: RngSpec::new(seed),
            ridge_lambda: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(invalid(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return Err(invalid(format!("ridge_lambda must be nonnegative, got {}", self.ridge_lambda)));
        }
        Ok(())
    }

    pub(crate) fn covariate_stream(&self) -> RngSpec {
        self.seed.child(0)
    }

    pub(crate) fn response_stream(&self) -> RngSpec {
        self.seed.child(1)
    }
}

/// Covariates, one response draw and the truth (mean vector for the
/// Gaussian scenarios, linear predictor `η` for the logistic one).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub design: DMatrix<f64>,
    pub y: DVector<f64>,
    pub truth: DVector<f64>,
}

pub fn isotonic_truth(x: f64) -> f64 {
    2.0 * (5.0 * x).ceil() - 6.0
}

pub fn friedman1(x: &[f64]) -> f64 {
    10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
}

pub(crate) fn gaussian_response(truth: &DVector<f64>, sigma2: f64, rng: &RngSpec) -> DVector<f64> {
    let mut r = rng.rng();
    let sd = sigma2.sqrt();
    truth.map(|m| m + sd * r.sample::<f64, _>(StandardNormal))
}

pub(crate) fn isotonic_covariates(spec: &ScenarioSpec) -> (DMatrix<f64>, DVector<f64>) {
    let mut r = spec.covariate_stream().rng();
    let x = DVector::from_fn(spec.n, |_, _| r.random::<f64>());
    let truth = x.map(isotonic_truth);
    (DMatrix::from_column_slice(spec.n, 1, x.as_slice()), truth)
}

pub(crate) fn logistic_covariates(spec: &ScenarioSpec) -> (DMatrix<f64>, DVector<f64>) {
    const BETA: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
    const GAMMA: [f64; 3] = [0.5, -0.5, 0.0];
    let mut r = spec.covariate_stream().rng();
    let mut design = DMatrix::zeros(spec.n, 10);
    let mut eta = DVector::zeros(spec.n);
    for i in 0..spec.n {
        for (j, b) in BETA.iter().enumerate() {
            let v: f64 = r.sample(StandardNormal);
            design[(i, j)] = v;
            eta[i] += b * v;
        }
        for cat in 0..2 {
            let u: f64 = r.random();
            let class = if u < 0.1 {
                0
            } else if u < 0.2 {
                1
            } else {
                2
            };
            design[(i, 4 + 3 * cat + class)] = 1.0;
            eta[i] += GAMMA[class];
        }
    }
    (design, eta)
}

pub(crate) fn friedman_covariates(spec: &ScenarioSpec) -> (DMatrix<f64>, DVector<f64>) {
    let mut r = spec.covariate_stream().rng();
    let design = DMatrix::from_fn(spec.n, 10, |_, _| r.random::<f64>());
    let truth = DVector::from_fn(spec.n, |i, _| {
        let row: Vec<f64> = design.row(i).iter().copied().collect();
        friedman1(&row)
    });
    (design, truth)
}

/// `xᵢ ~ Uniform(0,1)` and `yᵢ ~ N(f*(xᵢ), σ²)` with `f*(x) = 2⌈5x⌉ − 6`.
pub fn gen_isotonic(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let (design, truth) = isotonic_covariates(spec);
    let y = gaussian_response(&truth, spec.sigma2, &spec.response_stream());
    Ok(Dataset { design, y, truth })
}

/// Four standard-normal features followed by two one-hot encoded
/// three-class features with class probabilities (0.1, 0.1, 0.8).
pub fn gen_logistic(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let (design, eta) = logistic_covariates(spec);
    let y = BernoulliGenerator {
        probabilities: eta.map(sigmoid),
    }
    .draw(&spec.response_stream());
    Ok(Dataset { design, y, truth: eta })
}

/// Ten uniform covariates, only the first five of which enter the mean.
pub fn gen_friedman1(spec: &ScenarioSpec) -> Result<Dataset> {
    spec.validate()?;
    let (design, truth) = friedman_covariates(spec);
    let y = gaussian_response(&truth, spec.sigma2, &spec.response_stream());
    Ok(Dataset { design, y, truth })
}
