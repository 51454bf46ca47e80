//! Summary statistics for Monte Carlo output.

use statrs::distribution::{ContinuousCDF, Normal};

/// Mean and unbiased variance in one pass (Welford). Input order is fixed by
/// the callers, so results are reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. parallel merge.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sd() / (self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Streaming sample covariance of paired observations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoMoments {
    pub count: usize,
    mean_x: f64,
    mean_y: f64,
    c: f64,
}

impl CoMoments {
    pub fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        self.mean_y += (y - self.mean_y) / n;
        self.c += dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, other: &CoMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        let w = self.count as f64 * other.count as f64 / n;
        self.c += other.c + dx * dy * w;
        self.mean_x += dx * other.count as f64 / n;
        self.mean_y += dy * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn covariance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.c / (self.count - 1) as f64
    }
}

/// Monte Carlo estimate of a prediction error from independent replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Replicates whose fit failed and were left out.
    pub dropped: usize,
}

impl OracleEstimate {
    /// Aggregates per-replicate values in index order; `None` marks a
    /// failed replicate.
    pub fn from_replicates(values: &[Option<f64>]) -> crate::Result<Self> {
        let m: Moments = values.iter().flatten().copied().collect();
        if m.count < 2 {
            return Err(crate::Error::Unsupported(
                "fewer than two oracle replicates succeeded".into(),
            ));
        }
        Ok(Self {
            value: m.mean,
            stderr: m.stderr(),
            dropped: values.len() - m.count,
        })
    }
}

/// One-sample Kolmogorov–Smirnov statistic against `N(0, σ²)` and its
/// asymptotic p-value.
pub fn ks_normal(samples: &mut [f64], sigma: f64) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let dist = Normal::new(0.0, sigma).expect("positive sigma");
    let n = samples.len() as f64;
    let d = samples.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = dist.cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    (d, kolmogorov_pvalue(d * n.sqrt()))
}

/// `P(K > t)` for the Kolmogorov distribution.
fn kolmogorov_pvalue(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1.0f64).powf(j - 1.0) * (-2.0 * j * j * t * t).exp();
        p += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}
