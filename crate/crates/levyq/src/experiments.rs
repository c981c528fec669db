//! Seeded experiment drivers. Each returns an [`ExperimentReport`]; rows are
//! ordered by replication regardless of how many threads ran them.

use levyq_core::estimate::{interval, resample_curve, ResampleEstimate};
use levyq_core::{
    draw_probes, estimate_grid, plugin_variance, Error, GridObservations, JobDistribution,
    ProbeSample,
};
use rayon::prelude::*;

use crate::config::{ConfigError, DeltaSpec, ExperimentConfig, Init};
use crate::report::{ExperimentReport, Row, Value};
use crate::scenario::Scenario;
use crate::streams::{substream, Lane, Purpose};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

/// Horizon and width of the figure setups.
pub const FIGURE_HORIZON_SHORT: f64 = 25.0;
pub const FIGURE_HORIZON_LONG: f64 = 100.0;
pub const FIGURE_REALISATIONS: usize = 5;
pub const FIGURE_RESAMPLE_K: usize = 1000;
pub const FIGURE_RESAMPLE_DELTAS: [f64; 3] = [1.0, 0.1, 0.01];
pub const FIGURE_RESAMPLE_PAIRS: usize = 2;

/// `α = 0, 0.1, …, 10`.
pub fn figure_alphas() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 10.0).collect()
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    scenario: Scenario,
}

impl<'a> Setup<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            scenario: Scenario::from_config(config)?,
        })
    }

    fn delta(&self) -> Result<f64> {
        Ok(self
            .scenario
            .resolve_delta(self.config.delta, self.config.xi, self.config.horizon)?)
    }

    fn path(&self, lane: Lane, rep: u64, horizon: f64) -> Result<levyq_core::WorkloadPath> {
        let seed = self.config.seed;
        Ok(self.scenario.simulate(
            self.config.init,
            self.config.burn_in_time,
            horizon,
            &mut substream(seed, lane, rep, Purpose::Init),
            &mut substream(seed, lane, rep, Purpose::Path),
        )?)
    }

    fn metadata(&self, report: &mut ExperimentReport, experiment: &str) {
        let c = self.config;
        report.note(experiment, "seed", Value::Int(c.seed));
        report.note_f64(experiment, "xi", c.xi);
        report.note(experiment, "init", Value::Text(c.init.to_string()));
        report.note_f64(experiment, "phi_prime_zero", self.scenario.truth.phi_prime_zero());
        report.note_f64(experiment, "simulated_mean_input_rate", self.scenario.input.mean_rate());
        if let Some(t) = &self.scenario.truncation {
            report.note_f64(experiment, "truncation_eps", t.eps);
            report.note_f64(experiment, "truncation_rate", t.rate);
            report.note_f64(experiment, "truncation_x_max", t.x_max);
            report.note_f64(experiment, "truncation_tail_mass", t.tail_mass);
            report.note(experiment, "truncation_table_size", Value::Int(t.table_size as u64));
        }
    }

    /// Row for an averaged estimate, without interval.
    #[allow(clippy::too_many_arguments)]
    fn curve_row(
        &self,
        experiment: &str,
        replication: usize,
        alpha: f64,
        delta: f64,
        horizon: f64,
        n: usize,
        phi_hat: f64,
        xi: f64,
    ) -> Result<Row> {
        Ok(Row {
            experiment: experiment.to_string(),
            replication,
            alpha,
            delta,
            xi,
            horizon,
            n,
            phi_hat,
            sigma_hat_sq: None,
            ci_lo: None,
            ci_hi: None,
            phi_true: Some(self.scenario.phi_true(alpha)?),
            phi_eps: self.scenario.phi_eps(alpha)?,
            seed: self.config.seed,
        })
    }

    /// Row for one probe sample at one `α`, with a plug-in interval when the
    /// sample contains emptiness.
    fn row(
        &self,
        experiment: &str,
        replication: usize,
        sample: &ProbeSample,
        horizon: f64,
        alpha: f64,
        with_interval: bool,
    ) -> Result<Row> {
        let mut row = Row {
            experiment: experiment.to_string(),
            replication,
            alpha,
            delta: sample.delta(),
            xi: sample.xi(),
            horizon,
            n: sample.n(),
            phi_hat: 0.0,
            sigma_hat_sq: None,
            ci_lo: None,
            ci_hi: None,
            phi_true: Some(self.scenario.phi_true(alpha)?),
            phi_eps: self.scenario.phi_eps(alpha)?,
            seed: self.config.seed,
        };
        if alpha == 0.0 {
            if with_interval {
                (row.sigma_hat_sq, row.ci_lo, row.ci_hi) = (Some(0.0), Some(0.0), Some(0.0));
            }
            return Ok(row);
        }
        row.phi_hat = estimate_grid(sample, alpha)?.phi_hat;
        if with_interval {
            match plugin_variance(sample, alpha) {
                Ok(v) => {
                    let ci = interval(row.phi_hat, v, sample.n(), self.config.level)?;
                    row.sigma_hat_sq = Some(v);
                    row.ci_lo = Some(ci.lo);
                    row.ci_hi = Some(ci.hi);
                }
                Err(Error::NoEmptiness) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(row)
    }
}

fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    Some(xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Probe count averaged over the resampling iterations, rounded.
fn mean_probe_count(est: &ResampleEstimate) -> usize {
    let total: usize = est.per_iteration.iter().map(|p| p.1).sum();
    (total as f64 / est.k as f64).round() as usize
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Simulates one path and returns its grid at the configured width.
pub fn simulate(config: &ExperimentConfig) -> Result<(GridObservations, ExperimentReport)> {
    let setup = Setup::new(config)?;
    let delta = setup.delta()?;
    let path = setup.path(Lane::Simulate, 0, config.horizon)?;
    let grid = path.sample_grid(delta)?;
    let mut report = ExperimentReport::default();
    let name = "simulate";
    setup.metadata(&mut report, name);
    report.note_f64(name, "horizon", config.horizon);
    report.note_f64(name, "delta", delta);
    report.note_f64(name, "v0", path.v0());
    report.note(name, "events", Value::Int(path.events().len() as u64));
    report.note_f64(name, "grid_zero_fraction", grid.zero_fraction());
    report.note_f64(name, "stationary_atom", setup.scenario.truth.stationary_atom());
    Ok((grid, report))
}

/// Estimates `φ` at every configured `α` from one probe sample. Uses the
/// supplied `(grid, horizon)` or simulates one.
pub fn estimate(
    config: &ExperimentConfig,
    observed: Option<(GridObservations, f64)>,
) -> Result<ExperimentReport> {
    let setup = Setup::new(config)?;
    let (grid, horizon) = match observed {
        Some(g) => g,
        None => {
            let delta = setup.delta()?;
            let path = setup.path(Lane::Estimate, 0, config.horizon)?;
            (path.sample_grid(delta)?, config.horizon)
        }
    };
    let mut rng = substream(config.seed, Lane::Estimate, 0, Purpose::Probes);
    let sample = draw_probes(&grid, horizon, config.xi, &mut rng)?;
    let mut report = ExperimentReport::default();
    let name = "estimate";
    setup.metadata(&mut report, name);
    report.note_f64(name, "horizon", horizon);
    report.note_f64(name, "delta", grid.delta());
    report.note_f64(name, "probe_zero_fraction", sample.zero_fraction());
    for &alpha in &config.alpha {
        report.rows.push(setup.row(name, 0, &sample, horizon, alpha, true)?);
    }
    Ok(report)
}

/// One long path; for each grid width the estimate is tracked along the
/// horizons `T/2^{d-1}, …, T/2, T`. Probes for the shorter horizons are
/// prefixes of those for the full one.
pub fn consistency(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(config)?;
    let deltas = config.delta_list(setup.delta()?);
    let path = setup.path(Lane::Consistency, 0, config.horizon)?;
    let horizons: Vec<f64> = (0..config.doublings)
        .map(|j| config.horizon / 2f64.powi((config.doublings - 1 - j) as i32))
        .collect();

    let name = "consistency";
    let mut report = ExperimentReport::default();
    setup.metadata(&mut report, name);
    report.note_f64(name, "horizon", config.horizon);
    let mut finals = vec![Vec::new(); config.alpha.len()];
    for (di, &delta) in deltas.iter().enumerate() {
        let grid = path.sample_grid(delta)?;
        for (j, &t) in horizons.iter().enumerate() {
            let mut rng = substream(config.seed, Lane::Consistency, di as u64, Purpose::Probes);
            let sample = draw_probes(&grid, t, config.xi, &mut rng)?;
            for (ai, &alpha) in config.alpha.iter().enumerate() {
                let row = setup.row(name, j, &sample, t, alpha, true)?;
                if j + 1 == horizons.len() {
                    let err = (row.phi_hat - row.phi_true.expect("closed form")).abs();
                    report.note_f64(name, format!("abs_error delta={delta} alpha={alpha}"), err);
                    finals[ai].push(row.phi_hat);
                }
                report.rows.push(row);
            }
        }
    }
    for (ai, &alpha) in config.alpha.iter().enumerate() {
        let f = &finals[ai];
        let gap = f
            .iter()
            .flat_map(|a| f.iter().map(move |b| (a - b).abs()))
            .fold(0.0, f64::max);
        report.note_f64(name, format!("max_pairwise_gap alpha={alpha}"), gap);
    }
    Ok(report)
}

/// Independent stationary replications with plug-in intervals.
pub fn coverage(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(config)?;
    let name = "coverage";
    let mut report = ExperimentReport::default();
    match config.init {
        Init::Stationary => {
            if !matches!(setup.scenario.input.jobs, JobDistribution::Exponential { .. }) {
                return Err(HarnessError::Precondition(
                    "coverage needs an exact stationary start, which this model lacks; \
                     set init = \"burn_in\" to proceed (the CLT's stationarity hypothesis then holds only approximately)"
                        .into(),
                ));
            }
        }
        Init::BurnIn => report.note(
            name,
            "warning",
            Value::Text("burn-in start: the stationarity hypothesis of the CLT holds only approximately".into()),
        ),
        Init::Fixed(_) => {
            return Err(HarnessError::Precondition(
                "coverage needs init = \"stationary\" (or \"burn_in\" as an approximation)".into(),
            ))
        }
    }
    let delta = setup.delta()?;
    setup.metadata(&mut report, name);
    report.note_f64(name, "horizon", config.horizon);
    report.note_f64(name, "delta", delta);
    report.note(name, "replications", Value::Int(config.replications as u64));

    let per_rep: Vec<Vec<Row>> = (0..config.replications)
        .into_par_iter()
        .map(|r| -> Result<Vec<Row>> {
            let path = setup.path(Lane::Coverage, r as u64, config.horizon)?;
            let grid = path.sample_grid(delta)?;
            let mut rng = substream(config.seed, Lane::Coverage, r as u64, Purpose::Probes);
            let sample = draw_probes(&grid, config.horizon, config.xi, &mut rng)?;
            config
                .alpha
                .iter()
                .map(|&a| setup.row(name, r, &sample, config.horizon, a, true))
                .collect()
        })
        .collect::<Result<_>>()?;

    for (ai, &alpha) in config.alpha.iter().enumerate() {
        let rows: Vec<&Row> = per_rep.iter().map(|rs| &rs[ai]).collect();
        let phi = setup.scenario.phi_true(alpha)?;
        let scaled: Vec<f64> = rows.iter().map(|r| (r.n as f64).sqrt() * (r.phi_hat - phi)).collect();
        let with_ci: Vec<&&Row> = rows.iter().filter(|r| r.ci_lo.is_some()).collect();
        let covered = with_ci
            .iter()
            .filter(|r| r.ci_lo.unwrap() <= phi && phi <= r.ci_hi.unwrap())
            .count();
        let tag = format!("alpha={alpha}");
        report.note(name, format!("intervals {tag}"), Value::Int(with_ci.len() as u64));
        if !with_ci.is_empty() {
            report.note_f64(name, format!("coverage {tag}"), covered as f64 / with_ci.len() as f64);
            let sig: Vec<f64> = with_ci.iter().map(|r| r.sigma_hat_sq.unwrap()).collect();
            report.note_f64(name, format!("mean_sigma_hat_sq {tag}"), mean(&sig));
        }
        if let Some(v) = sample_variance(&scaled) {
            report.note_f64(name, format!("empirical_variance {tag}"), v);
        }
        report.note_f64(
            name,
            format!("asymptotic_variance {tag}"),
            setup.scenario.truth.asymptotic_variance(alpha, config.xi)?,
        );
        let errors: Vec<f64> = rows.iter().map(|r| r.phi_hat - phi).collect();
        report.note_f64(name, format!("bias {tag}"), mean(&errors));
    }
    report.rows = per_rep.into_iter().flatten().collect();
    Ok(report)
}

/// On one simulated path, repeats the resampling estimator `replications`
/// times for every `(Δ, K)` pair. Draw `d` uses the same probe stream for
/// all pairs.
pub fn resample(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(config)?;
    let deltas = config.delta_list(setup.delta()?);
    let ks = config.k_list();
    let path = setup.path(Lane::Resample, 0, config.horizon)?;
    let mut report = ExperimentReport::default();
    let name = "resample";
    setup.metadata(&mut report, name);
    report.note_f64(name, "horizon", config.horizon);
    report.note(name, "draws", Value::Int(config.replications as u64));

    for &delta in &deltas {
        let grid = path.sample_grid(delta)?;
        for &k in &ks {
            let experiment = format!("resample_k{k}");
            let draws: Vec<Vec<Row>> = (0..config.replications)
                .into_par_iter()
                .map(|d| -> Result<Vec<Row>> {
                    let mut rng = substream(config.seed, Lane::Resample, d as u64, Purpose::Probes);
                    let curve =
                        resample_curve(&grid, config.horizon, config.xi, k, &config.alpha, &mut rng)?;
                    curve
                        .iter()
                        .map(|est| {
                            setup.curve_row(
                                &experiment,
                                d,
                                est.alpha,
                                delta,
                                config.horizon,
                                mean_probe_count(est),
                                est.mean_phi,
                                config.xi,
                            )
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            for (ai, &alpha) in config.alpha.iter().enumerate() {
                let values: Vec<f64> = draws.iter().map(|rs| rs[ai].phi_hat).collect();
                let tag = format!("delta={delta} k={k} alpha={alpha}");
                report.note_f64(name, format!("mean {tag}"), mean(&values));
                if let Some(v) = sample_variance(&values) {
                    report.note_f64(name, format!("dispersion {tag}"), v);
                }
                report.note_f64(
                    name,
                    format!("bias {tag}"),
                    mean(&values) - setup.scenario.phi_true(alpha)?,
                );
            }
            report.rows.extend(draws.into_iter().flatten());
        }
    }
    Ok(report)
}

/// Curves for direct plotting on `α ∈ [0, 10]`:
///
/// - `fig2`: five realisations, `T = 25`, `ξ = Δ = 1`;
/// - `fig3`: one realisation with intervals, `T = 100`, `ξ = 1` and the
///   heuristic `Δ`;
/// - `fig4`: two resampling realisations with `K = 1000` on one `T = 25`
///   path for each `Δ ∈ {1, 0.1, 0.01}`.
///
/// Only the model, seed, initialisation and truncation settings of `config`
/// are used.
pub fn figures(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(config)?;
    let alphas = figure_alphas();
    let positive: Vec<f64> = alphas[1..].to_vec();
    let xi = 1.0;
    let mut report = ExperimentReport::default();
    setup.metadata(&mut report, "figures");
    let gap = setup.scenario.phi_eps(10.0)?.map(|e| e - setup.scenario.phi_true(10.0).unwrap_or(e));
    if let Some(g) = gap {
        report.note_f64("figures", "phi_eps_minus_phi alpha=10", g);
    }

    let short = FIGURE_HORIZON_SHORT;
    for r in 0..FIGURE_REALISATIONS {
        let path = setup.path(Lane::FigureRealisations, r as u64, short)?;
        let grid = path.sample_grid(1.0)?;
        let mut rng = substream(config.seed, Lane::FigureRealisations, r as u64, Purpose::Probes);
        let sample = draw_probes(&grid, short, xi, &mut rng)?;
        report.note("fig2", format!("n replication={r}"), Value::Int(sample.n() as u64));
        for &a in &alphas {
            report.rows.push(setup.row("fig2", r, &sample, short, a, false)?);
        }
    }

    let long = FIGURE_HORIZON_LONG;
    let delta = setup.scenario.resolve_delta(DeltaSpec::default(), xi, long)?;
    let path = setup.path(Lane::FigureInterval, 0, long)?;
    let grid = path.sample_grid(delta)?;
    let mut rng = substream(config.seed, Lane::FigureInterval, 0, Purpose::Probes);
    let sample = draw_probes(&grid, long, xi, &mut rng)?;
    report.note_f64("fig3", "delta", delta);
    report.note("fig3", "n", Value::Int(sample.n() as u64));
    for &a in &alphas {
        report.rows.push(setup.row("fig3", 0, &sample, long, a, true)?);
    }

    let path = setup.path(Lane::FigureResample, 0, short)?;
    for &delta in &FIGURE_RESAMPLE_DELTAS {
        let grid = path.sample_grid(delta)?;
        for j in 0..FIGURE_RESAMPLE_PAIRS {
            let mut rng = substream(config.seed, Lane::FigureResample, j as u64, Purpose::Probes);
            let curve = resample_curve(&grid, short, xi, FIGURE_RESAMPLE_K, &positive, &mut rng)?;
            let n = mean_probe_count(&curve[0]);
            report.rows.push(setup.curve_row("fig4", j, 0.0, delta, short, n, 0.0, xi)?);
            for est in &curve {
                report.rows.push(setup.curve_row("fig4", j, est.alpha, delta, short, n, est.mean_phi, xi)?);
            }
        }
    }
    Ok(report)
}
