//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use levyq::config::{DeltaSpec, ExperimentConfig, Init, JobSection, ModelSection};
use levyq::experiments;
use levyq_core::levy::DEFAULT_EPS;
use levyq_core::rng::exponential;
use levyq_core::sim::terminal_workload;
use levyq_core::{
    build_truncated_cp, burn_in, estimate_grid, residuals, suggest_delta, CompoundPoisson,
    JobDistribution, LevyDensity, NetInputModel, ProbeSample, SubordinatorSpec, WorkloadPath,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mm1_cp() -> CompoundPoisson {
    CompoundPoisson::new(1.0, JobDistribution::Exponential { rate: 2.0 }).unwrap()
}

/// φ(α) = α(α+1)/(α+2) for unit-rate arrivals with Exp(2) jobs.
fn mm1_phi(alpha: f64) -> f64 {
    alpha * (alpha + 1.0) / (alpha + 2.0)
}

fn mm1_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: 20240601,
        xi: 1.0,
        horizon: 1.0,
        delta: DeltaSpec::Fixed(1.0),
        deltas: None,
        alpha: vec![1.0],
        k: 1,
        k_values: None,
        replications: 1,
        level: 0.95,
        init: Init::Stationary,
        burn_in_time: None,
        truncation_eps: DEFAULT_EPS,
        table_size: 4096,
        doublings: 4,
        model: vec![ModelSection::CompoundPoisson {
            rate: 1.0,
            jobs: JobSection::Exponential { rate: 2.0 },
        }],
    }
}

fn canonical_density() -> LevyDensity {
    LevyDensity::from_spec(&SubordinatorSpec::gamma_plus_inverse_gaussian()).unwrap()
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn truncated_drift() -> Outcome {
    let density = canonical_density();
    let from_measure = density.truncated_mean(1e-5).unwrap() - 1.0;
    let from_table = build_truncated_cp(&density, 1e-5, 4096).unwrap().mean_input_rate() - 1.0;
    let target = -0.202543;
    let pass = (from_measure - target).abs() <= 5e-6 && (from_table - target).abs() <= 5e-6;
    outcome(pass, format!("measure {from_measure:.9}, sampled table {from_table:.9}, target {target} ± 5e-6"))
}

/// Composite Simpson in `u = ln x` on `[lo, hi]`.
fn simpson_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / panels as f64;
    let g = |u: f64| {
        let x = u.exp();
        f(x) * x
    };
    let mut s = g(a) + g(b);
    for i in 1..panels {
        s += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn gamma_nu(x: f64) -> f64 {
    2.0 * (-5.0 * x).exp() / x
}

fn ig_nu(x: f64) -> f64 {
    // λ = 1, μ = 0.4
    let lambda: f64 = 1.0;
    let mu: f64 = 0.4;
    (lambda / (2.0 * std::f64::consts::PI * x.powi(3))).sqrt() * (-lambda * x / (2.0 * mu * mu)).exp()
}

fn exponent_oracles() -> Outcome {
    let specs: [(&str, SubordinatorSpec, fn(f64) -> f64); 3] = [
        ("gamma", SubordinatorSpec::gamma(2.0, 5.0).unwrap(), gamma_nu),
        ("ig", SubordinatorSpec::inverse_gaussian(0.4, 1.0).unwrap(), ig_nu),
        ("sum", SubordinatorSpec::gamma_plus_inverse_gaussian(), |x| gamma_nu(x) + ig_nu(x)),
    ];
    let mut worst_phi = 0.0f64;
    for (_, spec, nu) in &specs {
        let model = NetInputModel::new(spec.clone()).unwrap();
        for i in 0..=40 {
            let alpha = 0.5 * i as f64;
            let oracle = alpha - simpson_log(|x| -(-alpha * x).exp_m1() * nu(x), 1e-30, 160.0, 100_000);
            worst_phi = worst_phi.max((model.phi(alpha).unwrap() - oracle).abs());
        }
    }
    let mut worst_psi = 0.0f64;
    for (_, spec, _) in &specs {
        let model = NetInputModel::new(spec.clone()).unwrap();
        for xi in [0.01, 0.1, 1.0, 10.0] {
            let back = model.phi(model.psi(xi).unwrap()).unwrap();
            worst_psi = worst_psi.max((back - xi).abs());
        }
    }
    outcome(
        worst_phi <= 1e-6 && worst_psi <= 1e-10,
        format!("max |φ - quadrature| = {worst_phi:.2e} (≤ 1e-6), max |φ(ψ(ξ)) - ξ| = {worst_psi:.2e} (≤ 1e-10)"),
    )
}

fn transient_law() -> Outcome {
    let cp = mm1_cp();
    let (xi, alpha) = (2.0 / 3.0, 2.0);
    // φ(2) = 3/2 and ψ(2/3) = 1, so the transform at x = 0 is
    // ξ/(ξ - φ(α)) · (1 - α/ψ(ξ)) = 0.8 and P(V = 0) = ξ/ψ(ξ) = 2/3.
    let (lst_target, zero_target) = (0.8, 2.0 / 3.0);
    let model = NetInputModel::new(SubordinatorSpec::CompoundPoisson(cp.clone())).unwrap();
    let closed_ok = (model.transient_lst(alpha, 0.0, xi).unwrap() - lst_target).abs() < 1e-12
        && (model.zero_prob(0.0, xi).unwrap() - zero_target).abs() < 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let terminal: Vec<f64> = (0..100_000)
        .map(|_| {
            let t = exponential(&mut rng, xi);
            terminal_workload(&cp, t, 0.0, &mut rng)
        })
        .collect();
    let lst: Vec<f64> = terminal.iter().map(|v| (-alpha * v).exp()).collect();
    let zeros: Vec<f64> = terminal.iter().map(|&v| if v == 0.0 { 1.0 } else { 0.0 }).collect();
    let (m1, s1) = mean_se(&lst);
    let (m0, s0) = mean_se(&zeros);
    let pass = closed_ok && (m1 - lst_target).abs() <= 3.0 * s1 && (m0 - zero_target).abs() <= 3.0 * s0;
    outcome(
        pass,
        format!(
            "E e^(-2V) = {m1:.5} ± {s1:.5} (target 0.8), P(V=0) = {m0:.5} ± {s0:.5} (target 2/3), closed forms {}",
            if closed_ok { "ok" } else { "off" }
        ),
    )
}

fn consistency() -> Outcome {
    let mut config = mm1_config();
    config.horizon = 5e4;
    config.deltas = Some(vec![0.1, 0.5, 2.0]);
    config.alpha = vec![0.5, 1.0, 2.0];
    let report = experiments::consistency(&config).unwrap();
    let mut worst_err = 0.0f64;
    let mut worst_gap = 0.0f64;
    for &alpha in &config.alpha {
        let finals: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.alpha == alpha && r.horizon == config.horizon)
            .map(|r| r.phi_hat)
            .collect();
        assert_eq!(finals.len(), 3);
        for (i, a) in finals.iter().enumerate() {
            worst_err = worst_err.max((a - mm1_phi(alpha)).abs());
            for b in &finals[i + 1..] {
                worst_gap = worst_gap.max((a - b).abs());
            }
        }
    }
    outcome(
        worst_err <= 0.02 && worst_gap <= 0.03,
        format!("max |φ̂ - φ| = {worst_err:.4} (≤ 0.02), max pairwise Δ gap = {worst_gap:.4} (≤ 0.03)"),
    )
}

fn clt_variance() -> Outcome {
    let mut config = mm1_config();
    config.horizon = 2000.0;
    config.delta = DeltaSpec::Exponent { exponent: 0.6 };
    config.replications = 500;
    let report = experiments::coverage(&config).unwrap();
    let phi = mm1_phi(1.0);
    let scaled: Vec<f64> = report
        .rows
        .iter()
        .map(|r| (r.n as f64).sqrt() * (r.phi_hat - phi))
        .collect();
    let (m, _) = mean_se(&scaled);
    let var = scaled.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (scaled.len() - 1) as f64;
    let with_ci: Vec<_> = report.rows.iter().filter(|r| r.ci_lo.is_some()).collect();
    let covered = with_ci
        .iter()
        .filter(|r| r.ci_lo.unwrap() <= phi && phi <= r.ci_hi.unwrap())
        .count();
    let coverage = covered as f64 / with_ci.len() as f64;
    let target = 104.0 / 243.0;
    let rel = (var - target).abs() / target;
    outcome(
        rel <= 0.2 && (0.90..=0.98).contains(&coverage) && with_ci.len() == 500,
        format!(
            "var √n(φ̂-φ) = {var:.4} vs 104/243 = {target:.5} (rel. error {rel:.3} ≤ 0.2), coverage {coverage:.3} in [0.90, 0.98] over {} intervals",
            with_ci.len()
        ),
    )
}

fn algebraic_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 1 + (uniform() * 300.0) as usize;
        let values: Vec<f64> = (0..=n)
            .map(|_| if uniform() < 0.3 { 0.0 } else { 4.0 * uniform() })
            .collect();
        let xi = 0.1 + 3.0 * uniform();
        let alpha = 0.1 + 9.0 * uniform();
        let sample = ProbeSample::from_values(xi, 0.5, values.clone()).unwrap();
        let direct = estimate_grid(&sample, alpha).unwrap().phi_hat;
        let p = 5.0 * uniform();
        let z: f64 = residuals(&sample, alpha, p).iter().sum();
        let lst_mean = values[1..].iter().map(|v| (-alpha * v).exp()).sum::<f64>() / n as f64;
        let rebuilt = p + z / n as f64 / lst_mean;
        worst = worst.max((rebuilt - direct).abs() / direct.abs().max(1.0));
    }
    outcome(worst <= 1e-12, format!("max relative mismatch {worst:.2e} over 100 samples (≤ 1e-12)"))
}

fn resampling_variance() -> Outcome {
    let mut config = ExperimentConfig::canonical();
    config.seed = 77;
    config.horizon = 25.0;
    config.xi = 1.0;
    config.deltas = Some(vec![0.05]);
    config.k_values = Some(vec![1, 100]);
    config.replications = 200;
    config.alpha = vec![1.0];
    let report = experiments::resample(&config).unwrap();
    let var_of = |k: usize| {
        let xs: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.experiment == format!("resample_k{k}"))
            .map(|r| r.phi_hat)
            .collect();
        assert_eq!(xs.len(), 200);
        let (m, _) = mean_se(&xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let (v1, v100) = (var_of(1), var_of(100));
    let ratio = v100 / v1;
    outcome(ratio <= 0.2, format!("var K=100 / var K=1 = {v100:.3e} / {v1:.3e} = {ratio:.4} (≤ 0.2)"))
}

fn delta_heuristic() -> Outcome {
    let d = suggest_delta(1.0, 100.0, 0.5).unwrap();
    outcome((3.8e-4..=4.0e-4).contains(&d), format!("suggest_delta(1, 100, 1/2) = {d:.6e} in [3.8e-4, 4.0e-4]"))
}

fn emptiness_fidelity() -> Outcome {
    let cp = build_truncated_cp(&canonical_density(), DEFAULT_EPS, 4096)
        .unwrap()
        .to_compound_poisson();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v0 = burn_in(&cp, &mut rng, None).unwrap();
    let horizon = 2e4;
    let path = WorkloadPath::simulate(&cp, horizon, v0, &mut rng).unwrap();
    let grid = path.sample_grid(0.05).unwrap();
    let values = grid.values();
    let batches = 50;
    let len = values.len() / batches;
    let fractions: Vec<f64> = (0..batches)
        .map(|b| values[b * len..(b + 1) * len].iter().filter(|&&v| v == 0.0).count() as f64 / len as f64)
        .collect();
    let (m, se) = mean_se(&fractions);
    outcome(
        (m - 0.2).abs() <= 3.0 * se,
        format!("grid zero fraction {m:.5} ± {se:.5} (batch means, T = {horizon}), target 0.2 within 3 s.e."),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("truncated drift", truncated_drift),
        ("exponent oracles", exponent_oracles),
        ("transient law", transient_law),
        ("consistency", consistency),
        ("CLT variance and coverage", clt_variance),
        ("algebraic identity", algebraic_identity),
        ("resampling variance reduction", resampling_variance),
        ("grid-width heuristic", delta_heuristic),
        ("emptiness fidelity", emptiness_fidelity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {}. {name}: {} [{:.2}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
