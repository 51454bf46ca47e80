use antithetic_cv::stats::{ks_normal, CoMoments, Moments};
use antithetic_cv::{sample_antithetic, sample_independent, RngSpec};
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn marginal_variance_scales_with_sigma2() {
    let (k, d, sigma2) = (3, 2, 4.0);
    let rng = RngSpec::new(31);
    let mut var = vec![Moments::default(); d];
    for i in 0..200_000u64 {
        let w = sample_antithetic(k, d, sigma2, &rng.child(i)).unwrap();
        for (j, m) in var.iter_mut().enumerate() {
            m.push(w.draws[(i as usize % k, j)]);
        }
    }
    for m in &var {
        assert!((m.variance() - 4.0).abs() < 0.08, "variance {}", m.variance());
    }
}

#[test]
fn independent_rows_are_uncorrelated() {
    let rng = RngSpec::new(32);
    let mut cov = [CoMoments::default(), CoMoments::default()];
    for i in 0..200_000u64 {
        let w = sample_independent(4, 2, 1.0, &rng.child(i)).unwrap();
        for (j, c) in cov.iter_mut().enumerate() {
            c.push(w[(0, j)], w[(3, j)]);
        }
    }
    for c in &cov {
        assert!(c.covariance().abs() < 0.02, "covariance {}", c.covariance());
    }
}

#[test]
fn fold_pairs_are_exchangeable() {
    // Every off-diagonal pair of a K=4 draw has covariance −1/3.
    let k = 4;
    let rng = RngSpec::new(33);
    let mut pairs: Vec<((usize, usize), CoMoments)> = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pairs.push(((a, b), CoMoments::default()));
        }
    }
    for i in 0..100_000u64 {
        let w = sample_antithetic(k, 1, 1.0, &rng.child(i)).unwrap();
        for ((a, b), c) in pairs.iter_mut() {
            c.push(w.draws[(*a, 0)], w.draws[(*b, 0)]);
        }
    }
    // sd of a product of two correlated unit normals is about 1.05.
    let tol = 4.0 * 1.05 / (100_000f64).sqrt();
    for ((a, b), c) in &pairs {
        assert!((c.covariance() + 1.0 / 3.0).abs() < tol, "pair ({a},{b}): {}", c.covariance());
    }
}

#[test]
fn projections_pass_ks() {
    let (k, d, sigma2) = (4, 3, 2.5);
    let u = DVector::from_vec(vec![1.0, -2.0, 0.5]).normalize();
    let rng = RngSpec::new(34);
    let mut proj: Vec<f64> = (0..100_000u64)
        .map(|i| {
            let w = sample_antithetic(k, d, sigma2, &rng.child(i)).unwrap();
            w.draws.row((i % k as u64) as usize).transpose().dot(&u)
        })
        .collect();
    let (_, p) = ks_normal(&mut proj, sigma2.sqrt());
    assert!(p > 0.001, "KS p-value {p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_sum_holds_for_any_shape(k in 2usize..40, d in 1usize..30, sigma2 in 1e-6f64..1e4, seed in any::<u64>()) {
        let w = sample_antithetic(k, d, sigma2, &RngSpec::new(seed)).unwrap();
        prop_assert!(w.zero_sum_residual() <= 1e-10 * k as f64 * sigma2.sqrt());
    }

    #[test]
    fn same_spec_same_draws(k in 2usize..10, d in 1usize..10, seed in any::<u64>(), stream in any::<u64>()) {
        let spec = RngSpec::with_stream(seed, stream);
        prop_assert_eq!(
            sample_antithetic(k, d, 1.0, &spec).unwrap().draws,
            sample_antithetic(k, d, 1.0, &spec).unwrap().draws
        );
    }
}
