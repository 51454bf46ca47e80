use antithetic_cv::harness::{
    csv_string, gen_friedman1, gen_isotonic, oracle_pe_normal, run_mse_grid, GridOptions, MethodSpec, MseReport, Problem,
    Scenario, ScenarioSpec,
};
use antithetic_cv::predictors::{Constant, Identity};
use antithetic_cv::{Execution, RngSpec};

fn combined(a: &MseReport, b: &MseReport) -> f64 {
    (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()
}

#[test]
fn oracle_of_truth_is_n_sigma2() {
    for scenario in [Scenario::Isotonic61, Scenario::Friedman63] {
        let spec = ScenarioSpec { sigma2: 1.5, ..ScenarioSpec::defaults(scenario, 61) };
        let data = match scenario {
            Scenario::Isotonic61 => gen_isotonic(&spec),
            _ => gen_friedman1(&spec),
        }
        .unwrap();
        let n = data.truth.len() as f64;
        let est =
            oracle_pe_normal(&Constant(data.truth.clone()), &data.truth, 1.5, 1000, 20, &RngSpec::new(62), Execution::Auto)
                .unwrap();
        assert!((est.value - 1.5 * n).abs() <= 3.0 * est.stderr, "{}: {} vs {}", scenario.label(), est.value, 1.5 * n);
        let ident = oracle_pe_normal(&Identity, &data.truth, 1.5, 1000, 20, &RngSpec::new(63), Execution::Auto).unwrap();
        assert!((ident.value - 3.0 * n).abs() <= 3.0 * ident.stderr);
    }
}

#[test]
fn isotonic_oracle_is_reproducible_across_seeds() {
    let problem = Problem::new(&ScenarioSpec::defaults(Scenario::Isotonic61, 64)).unwrap();
    let a = problem.oracle(2000, 50, &RngSpec::new(65), Execution::Auto).unwrap();
    let b = problem.oracle(2000, 50, &RngSpec::new(66), Execution::Auto).unwrap();
    assert!(a.value.is_finite() && a.value > 100.0);
    assert!((a.value - b.value).abs() <= 2.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt());
}

#[test]
fn grids_do_not_depend_on_worker_count() {
    let opts = GridOptions { replications: 40, oracle_fits: 50, oracle_test_draws: 5 };
    let cases = [
        (Scenario::Isotonic61, vec![MethodSpec::antithetic(0.01, 2), MethodSpec::sure(), MethodSpec::kfold(5)]),
        (Scenario::Friedman63, vec![MethodSpec::coupled_bootstrap(0.1, 4), MethodSpec::kfold(10)]),
        (Scenario::Logistic62, vec![MethodSpec::antithetic(0.1, 10), MethodSpec::kfold(10)]),
    ];
    for (scenario, methods) in cases {
        let spec = ScenarioSpec::defaults(scenario, 67);
        let runs: Vec<_> = [1, 2, 4]
            .into_iter()
            .map(|w| run_mse_grid(&spec, &methods, &opts, Execution::with_workers(w)).unwrap())
            .collect();
        for r in &runs[1..] {
            assert_eq!(r, &runs[0], "{}", scenario.label());
            assert_eq!(csv_string(&r.reports), csv_string(&runs[0].reports));
        }
    }
}

#[test]
fn isotonic_grid_trends() {
    let ks = [2usize, 4, 8, 16, 32];
    let alphas = [0.005, 0.01, 0.05, 0.1, 0.5];
    let mut methods = Vec::new();
    for &k in &ks {
        methods.extend([MethodSpec::antithetic(0.1, k), MethodSpec::coupled_bootstrap(0.1, k), MethodSpec::kfold(k)]);
    }
    for &a in &alphas {
        methods.extend([MethodSpec::antithetic(a, 8), MethodSpec::coupled_bootstrap(a, 8)]);
    }
    let spec = ScenarioSpec::defaults(Scenario::Isotonic61, 68);
    let res = run_mse_grid(&spec, &methods, &GridOptions::default(), Execution::Auto).unwrap();
    let get = |m: MethodSpec| res.reports.iter().find(|r| r.method == m.method && r.alpha == m.alpha && r.k == m.k).unwrap();

    let families: [fn(usize) -> MethodSpec; 3] =
        [|k| MethodSpec::antithetic(0.1, k), |k| MethodSpec::coupled_bootstrap(0.1, k), MethodSpec::kfold];
    for make in families {
        for w in ks.windows(2) {
            let (a, b) = (get(make(w[0])), get(make(w[1])));
            assert!(b.mse <= a.mse + 2.0 * combined(a, b), "{:?} K={} → K={}", a.method, w[0], w[1]);
        }
    }
    for w in alphas.windows(2) {
        let (lo, hi) = (get(MethodSpec::coupled_bootstrap(w[0], 8)), get(MethodSpec::coupled_bootstrap(w[1], 8)));
        assert!(hi.mse <= lo.mse + 2.0 * combined(lo, hi), "CB α={} → α={}", w[0], w[1]);
        let (lo, hi) = (get(MethodSpec::antithetic(w[0], 8)), get(MethodSpec::antithetic(w[1], 8)));
        assert!(lo.mse <= hi.mse + 2.0 * combined(lo, hi), "antithetic α={} → α={}", w[1], w[0]);
    }
    for r in res.reports.iter().filter(|r| r.method == antithetic_cv::Method::AntitheticCV) {
        let cb = get(MethodSpec::coupled_bootstrap(r.alpha, r.k));
        assert!(r.mse <= cb.mse + 2.0 * combined(r, cb), "α={} K={}", r.alpha, r.k);
    }
}
