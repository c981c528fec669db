mod common;

use common::{gamma_density, ig_density, mean_and_se, rng, simpson_log};
use levyq_core::{build_truncated_cp, DensityTerm, LevyDensity, NetInputModel, SubordinatorSpec};

fn canonical_density() -> LevyDensity {
    LevyDensity::from_spec(&SubordinatorSpec::gamma_plus_inverse_gaussian()).unwrap()
}

#[test]
fn truncated_rate_and_mean_match_independent_quadrature() {
    let d = canonical_density();
    let nu = |x: f64| gamma_density(2.0, 5.0)(x) + ig_density(0.4, 1.0)(x);
    for eps in [1e-6, 1e-5, 1e-3, 0.1] {
        let rate = simpson_log(nu, eps, 200.0, 200_000);
        let mean = simpson_log(|x| x * nu(x), eps, 200.0, 200_000);
        let r = d.truncated_rate(eps).unwrap();
        let m = d.truncated_mean(eps).unwrap();
        assert!((r - rate).abs() <= 1e-9 * rate, "rate at {eps}: {r} vs {rate}");
        assert!((m - mean).abs() <= 1e-9 * mean, "mean at {eps}: {m} vs {mean}");
    }
}

#[test]
fn gamma_job_mean_matches_quadrature() {
    let d = LevyDensity::new(vec![DensityTerm::Gamma { shape: 2.0, rate: 5.0 }]).unwrap();
    let eps = 1e-4;
    let cp = build_truncated_cp(&d, eps, 2048).unwrap();
    let target = d.truncated_mean(eps).unwrap() / d.truncated_rate(eps).unwrap();
    let mut r = rng(21);
    let draws: Vec<f64> = (0..1_000_000).map(|_| cp.table.sample(&mut r)).collect();
    let (mean, se) = mean_and_se(&draws);
    assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target} (se {se})");
    assert!(draws.iter().all(|&x| x >= eps && x <= cp.x_max));
}

#[test]
fn sampler_passes_kolmogorov_smirnov() {
    let cp = build_truncated_cp(&canonical_density(), 1e-5, 4096).unwrap();
    let mut r = rng(22);
    let n = 100_000;
    let mut draws: Vec<f64> = (0..n).map(|_| cp.table.sample(&mut r)).collect();
    draws.sort_by(f64::total_cmp);
    let mut d = 0.0f64;
    for (i, &x) in draws.iter().enumerate() {
        let f = cp.table.cdf(x);
        d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
    }
    // Asymptotic 1% critical value of the two-sided statistic.
    let critical = 1.628 / (n as f64).sqrt();
    assert!(d < critical, "KS distance {d} >= {critical}");
}

#[test]
fn tabulated_cdf_matches_levy_measure() {
    let density = canonical_density();
    let eps = 1e-5;
    let cp = build_truncated_cp(&density, eps, 4096).unwrap();
    let nu = |x: f64| gamma_density(2.0, 5.0)(x) + ig_density(0.4, 1.0)(x);
    for x in [2e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 2.0] {
        let exact = simpson_log(nu, eps, x, 100_000) / cp.rate;
        assert!((cp.table.cdf(x) - exact).abs() < 1e-7, "x = {x}");
    }
}

#[test]
fn truncated_exponent_consistency() {
    let spec = SubordinatorSpec::gamma_plus_inverse_gaussian();
    let full = NetInputModel::new(spec.clone()).unwrap();
    let density = LevyDensity::from_spec(&spec).unwrap();
    let cp = build_truncated_cp(&density, 1e-5, 4096).unwrap();
    let sim_input =
        NetInputModel::new(SubordinatorSpec::CompoundPoisson(cp.to_compound_poisson())).unwrap();
    for i in 1..=20 {
        let a = 0.5 * i as f64;
        let phi_eps = sim_input.phi(a).unwrap();
        assert!(phi_eps >= full.phi(a).unwrap());
    }
    let gap = sim_input.phi(10.0).unwrap() - full.phi(10.0).unwrap();
    assert!(gap > 0.0 && gap <= 0.03, "{gap}");
    assert!((sim_input.mean_input_rate() - 0.797_457).abs() < 2e-6);
}
