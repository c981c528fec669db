mod common;

use common::{gamma_density, ig_density, simpson_log};
use levyq_core::{JobDistribution, LevyDensity, NetInputModel, SubordinatorSpec};
use proptest::prelude::*;

fn mm1() -> NetInputModel {
    NetInputModel::new(
        SubordinatorSpec::compound_poisson(1.0, JobDistribution::Exponential { rate: 2.0 }).unwrap(),
    )
    .unwrap()
}

fn canonical() -> NetInputModel {
    NetInputModel::new(SubordinatorSpec::gamma_plus_inverse_gaussian()).unwrap()
}

fn models() -> Vec<NetInputModel> {
    vec![
        mm1(),
        canonical(),
        NetInputModel::new(SubordinatorSpec::gamma(2.0, 5.0).unwrap()).unwrap(),
        NetInputModel::new(SubordinatorSpec::inverse_gaussian(0.4, 1.0).unwrap()).unwrap(),
        NetInputModel::new(
            SubordinatorSpec::compound_poisson(1.5, JobDistribution::Deterministic { size: 0.3 }).unwrap(),
        )
        .unwrap(),
    ]
}

/// φ(α) = α - ∫ (1 - e^{-αx}) ν(dx) by fixed-panel Simpson in log coordinates.
fn phi_by_simpson<F: Fn(f64) -> f64>(nu: F, alpha: f64, hi: f64) -> f64 {
    alpha - simpson_log(|x| -(-alpha * x).exp_m1() * nu(x), 1e-40, hi, 400_000)
}

#[test]
fn closed_form_matches_independent_quadrature() {
    let gamma = gamma_density(2.0, 5.0);
    let ig = ig_density(0.4, 1.0);
    let cases: Vec<(SubordinatorSpec, Box<dyn Fn(f64) -> f64>, f64)> = vec![
        (SubordinatorSpec::gamma(2.0, 5.0).unwrap(), Box::new(gamma_density(2.0, 5.0)), 160.0),
        (SubordinatorSpec::inverse_gaussian(0.4, 1.0).unwrap(), Box::new(ig_density(0.4, 1.0)), 130.0),
        (
            SubordinatorSpec::gamma_plus_inverse_gaussian(),
            Box::new(move |x| gamma(x) + ig(x)),
            160.0,
        ),
    ];
    for (spec, nu, hi) in &cases {
        let model = NetInputModel::new(spec.clone()).unwrap();
        for i in 0..=20 {
            let alpha = i as f64;
            let closed = model.phi(alpha).unwrap();
            let oracle = phi_by_simpson(nu, alpha, *hi);
            assert!((closed - oracle).abs() <= 1e-6, "{spec:?} α={alpha}: {closed} vs {oracle}");
        }
    }
}

#[test]
fn closed_form_matches_crate_quadrature() {
    let spec = SubordinatorSpec::gamma_plus_inverse_gaussian();
    let model = NetInputModel::new(spec.clone()).unwrap();
    let density = LevyDensity::from_spec(&spec).unwrap();
    for i in 0..=40 {
        let alpha = 0.5 * i as f64;
        let quad = alpha - density.truncated_laplace_exponent(alpha, 0.0).unwrap();
        assert!((model.phi(alpha).unwrap() - quad).abs() <= 1e-6);
    }
}

#[test]
fn compound_poisson_closed_form_matches_quadrature() {
    // ν(dx) = 1 · 2 e^{-2x} dx; φ(α) = α(α+1)/(α+2).
    let oracle = phi_by_simpson(|x| 2.0 * (-2.0 * x).exp(), 2.0, 400.0);
    assert!((oracle - 1.5).abs() < 1e-8);
    assert!((mm1().phi(2.0).unwrap() - 1.5).abs() < 1e-15);
    for i in 0..50 {
        let a = 0.37 * i as f64;
        assert!((mm1().phi(a).unwrap() - a * (a + 1.0) / (a + 2.0)).abs() < 1e-13);
    }
}

#[test]
fn psi_round_trip_on_fixed_points() {
    for model in models() {
        for xi in [0.01, 0.1, 1.0, 10.0] {
            let a = model.psi(xi).unwrap();
            let back = model.phi(a).unwrap();
            assert!((back - xi).abs() <= 1e-10 * xi.max(1.0), "{xi}: {back}");
        }
    }
}

#[test]
fn stationary_lst_tends_to_atom() {
    for model in [
        mm1(),
        NetInputModel::new(
            SubordinatorSpec::compound_poisson(1.5, JobDistribution::Deterministic { size: 0.3 }).unwrap(),
        )
        .unwrap(),
    ] {
        let lst = model.stationary_lst(1e4).unwrap();
        assert!((lst - model.stationary_atom()).abs() < 1e-3);
    }
}

#[test]
fn transient_tends_to_stationary_for_small_rate() {
    for model in models() {
        for alpha in [0.5, 1.0, 3.0] {
            for x in [0.0, 0.5, 2.0] {
                let t = model.transient_lst(alpha, x, 1e-6).unwrap();
                let s = model.stationary_lst(alpha).unwrap();
                assert!((t - s).abs() < 1e-4, "α={alpha} x={x}: {t} vs {s}");
            }
        }
    }
}

#[test]
fn transient_tends_to_zero_prob() {
    // For x > 0 the gap is P(V(T)=0)·(α - φ(α) + ξ)/(φ(α) - ξ), which is
    // O((1 + ξ)/α) for compound Poisson input but O(1/√α) for inverse Gaussian.
    let alpha = 1e6;
    for model in models() {
        let phi = model.phi(alpha).unwrap();
        for x in [0.0, 0.3, 1.0] {
            for xi in [0.5, 1.0, 4.0] {
                let gap_bound = (alpha - phi + xi) / (phi - xi);
                let tol = if model == mm1() && xi <= 1.0 { 1e-6 } else { 1.01 * gap_bound + 1e-12 };
                let t = model.transient_lst(alpha, x, xi).unwrap();
                let z = model.zero_prob(x, xi).unwrap();
                assert!((t - z).abs() < tol, "{:?} x={x} ξ={xi}: {t} vs {z}", model.input());
            }
        }
    }
}

#[test]
fn truncated_spec_exponent_dominates() {
    let base = SubordinatorSpec::gamma_plus_inverse_gaussian();
    let full = canonical();
    let truncated = NetInputModel::new(SubordinatorSpec::truncated(base, 1e-5).unwrap()).unwrap();
    for i in 1..=20 {
        let a = 0.5 * i as f64;
        assert!(truncated.phi(a).unwrap() > full.phi(a).unwrap());
    }
    let gap = truncated.phi(10.0).unwrap() - full.phi(10.0).unwrap();
    // mpmath: 0.0254306
    assert!((gap - 0.025_430_631_890_930_74).abs() < 1e-8, "{gap}");
    assert!((truncated.stationary_atom() - 0.202_543_105_739_644).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_strictly_increasing(a in 0.0f64..50.0, d in 1e-3f64..5.0, which in 0usize..5) {
        let m = &models()[which];
        prop_assert!(m.phi(a).unwrap() < m.phi(a + d).unwrap());
    }

    #[test]
    fn psi_inverts_phi(a in 1e-3f64..30.0, which in 0usize..5) {
        let m = &models()[which];
        let xi = m.phi(a).unwrap();
        prop_assert!((m.psi(xi).unwrap() - a).abs() <= 1e-8 * a.max(1.0));
    }

    #[test]
    fn asymptotic_variance_is_positive(alpha in 1e-3f64..10.0, xi in 1e-3f64..10.0, which in 0usize..5) {
        let m = &models()[which];
        prop_assert!(m.asymptotic_variance(alpha, xi).unwrap() > 0.0);
    }

    #[test]
    fn transforms_lie_in_unit_interval(alpha in 0.0f64..20.0, x in 0.0f64..5.0, xi in 0.01f64..5.0) {
        let m = mm1();
        let phi = m.phi(alpha).unwrap();
        prop_assume!((xi - phi).abs() > 1e-6);
        let t = m.transient_lst(alpha, x, xi).unwrap();
        prop_assert!(t > 0.0 && t <= 1.0 + 1e-12);
        let s = m.stationary_lst(alpha).unwrap();
        prop_assert!(s > 0.0 && s <= 1.0);
        let z = m.zero_prob(x, xi).unwrap();
        prop_assert!(z > 0.0 && z < 1.0);
    }
}
