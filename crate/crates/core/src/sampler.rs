//! Antithetic and independent Gaussian randomization.
//!
//! The antithetic law puts `K` rows `ω⁽¹⁾..ω⁽ᴷ⁾` on `ℝᵈ` with marginal
//! `N(0, σ²I)` and pairwise covariance `−σ²/(K−1)·I`, the most negative
//! equicorrelation possible. The joint law is degenerate: the rows sum to
//! zero. We sample it by centering `K` i.i.d. draws and rescaling by
//! `√(K/(K−1))`, which matches both moments exactly.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_folds, check_variance, invalid, Result};
use crate::rng::RngSpec;

/// How the marginal covariance of each row is parameterized.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginalScale {
    /// `σ² I`.
    Isotropic(f64),
    /// `σ² L Lᵀ` for a square factor `L`.
    Factor { sigma2: f64, sqrt_factor: DMatrix<f64> },
}

/// `K` correlated randomization rows (row `k` is `ω⁽ᵏ⁺¹⁾`).
#[derive(Debug, Clone, PartialEq)]
pub struct AntitheticDraws {
    pub draws: DMatrix<f64>,
    pub marginal_scale: MarginalScale,
}

impl AntitheticDraws {
    pub fn k_folds(&self) -> usize {
        self.draws.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.draws.ncols()
    }

    /// Largest absolute column sum, i.e. the zero-sum residual.
    pub fn zero_sum_residual(&self) -> f64 {
        column_sums(&self.draws).iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }
}

pub(crate) fn column_sums(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.ncols()).map(|j| m.column(j).sum()).collect()
}

fn gaussian_matrix(rows: usize, cols: usize, sd: f64, rng: &RngSpec) -> DMatrix<f64> {
    let mut r = rng.rng();
    // Column-major fill; the layout is part of the determinism contract.
    DMatrix::from_fn(rows, cols, |_, _| sd * r.sample::<f64, _>(StandardNormal))
}

fn center_rows(m: &mut DMatrix<f64>) {
    let k = m.nrows() as f64;
    for j in 0..m.ncols() {
        let mean = m.column(j).sum() / k;
        m.column_mut(j).add_scalar_mut(-mean);
    }
}

/// Draws `K` antithetic rows in dimension `d` with marginal `N(0, σ²I)`.
pub fn sample_antithetic(k_folds: usize, dim: usize, sigma2: f64, rng: &RngSpec) -> Result<AntitheticDraws> {
    check_folds(k_folds)?;
    check_variance(sigma2)?;
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    let mut draws = gaussian_matrix(k_folds, dim, sigma2.sqrt(), rng);
    center_rows(&mut draws);
    draws *= (k_folds as f64 / (k_folds as f64 - 1.0)).sqrt();
    // Second pass removes the rounding residual left by the first centering.
    center_rows(&mut draws);
    Ok(AntitheticDraws {
        draws,
        marginal_scale: MarginalScale::Isotropic(sigma2),
    })
}

/// Draws `K` independent rows with marginal `N(0, σ²I)` (the coupled
/// bootstrap randomization).
pub fn sample_independent(k_reps: usize, dim: usize, sigma2: f64, rng: &RngSpec) -> Result<DMatrix<f64>> {
    check_variance(sigma2)?;
    if k_reps == 0 {
        return Err(invalid("need at least one repetition"));
    }
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    Ok(gaussian_matrix(k_reps, dim, sigma2.sqrt(), rng))
}

/// Maps every row `ω` to `Lω`. Linear, so the zero-sum property survives
/// and the cross-covariance becomes `−σ²LLᵀ/(K−1)`.
pub fn scale_draws(draws: &AntitheticDraws, sqrt_factor: &DMatrix<f64>) -> Result<AntitheticDraws> {
    let d = draws.dimension();
    if sqrt_factor.nrows() != d || sqrt_factor.ncols() != d {
        return Err(invalid(format!(
            "scale factor is {}x{}, draws have dimension {d}",
            sqrt_factor.nrows(),
            sqrt_factor.ncols()
        )));
    }
    // Rows are ω^T, so L ω becomes ω^T L^T.
    let scaled = &draws.draws * sqrt_factor.transpose();
    let marginal_scale = match &draws.marginal_scale {
        MarginalScale::Isotropic(s2) => MarginalScale::Factor {
            sigma2: *s2,
            sqrt_factor: sqrt_factor.clone(),
        },
        MarginalScale::Factor { sigma2, sqrt_factor: prev } => MarginalScale::Factor {
            sigma2: *sigma2,
            sqrt_factor: sqrt_factor * prev,
        },
    };
    Ok(AntitheticDraws { draws: scaled, marginal_scale })
}

/// Which randomization law an estimator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Antithetic,
    Independent,
}

/// Draws a `K×d` randomization matrix under the given coupling.
pub fn sample(coupling: Coupling, k: usize, dim: usize, sigma2: f64, rng: &RngSpec) -> Result<DMatrix<f64>> {
    match coupling {
        Coupling::Antithetic => sample_antithetic(k, dim, sigma2, rng).map(|d| d.draws),
        Coupling::Independent => sample_independent(k, dim, sigma2, rng),
    }
}
