//! Poisson probing of grid observations and the moment-equation estimator of
//! the Lévy exponent.
//!
//! Probe epochs `S_i` are partial sums of `Exp(ξ)` variables, rounded to the
//! nearest grid point `k_i Δ`. With `V_i = V(k_i Δ)` and `V_0 = V(0)` the
//! estimator is
//!
//! ```text
//!          n⁻¹ ξ (e^{-αV_n} - e^{-αV_0}) + α n⁻¹ Σ 1{V_i = 0}
//! φ̂(α) = ---------------------------------------------------
//!                        n⁻¹ Σ e^{-αV_i}
//! ```
//!
//! with sums over `i = 1..n`.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{require_nonnegative, require_positive};
use crate::math::{exp, floor, sqrt};
use crate::model::asymptotic_variance_from;
use crate::rng::exponential;
use crate::sim::GridObservations;
use crate::{normal, Error, Result};

/// Attempts per resampling iteration before giving up on empty probe samples.
pub const MAX_PROBE_ATTEMPTS: usize = 100;

/// Nearest integer with ties rounded up.
#[inline]
pub fn round_half_up(x: f64) -> f64 {
    floor(x + 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSample {
    xi: f64,
    delta: f64,
    probe_times: Vec<f64>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl ProbeSample {
    /// Synthetic sample from workload values `V_0, …, V_n` taken at
    /// consecutive grid points. Intended for fixed-`n` experiments and tests.
    pub fn from_values(xi: f64, delta: f64, values: Vec<f64>) -> Result<Self> {
        require_positive("xi", xi)?;
        require_positive("delta", delta)?;
        check_values(&values)?;
        let indices: Vec<usize> = (0..values.len()).collect();
        let probe_times = indices[1..].iter().map(|&k| k as f64 * delta).collect();
        Ok(Self {
            xi,
            delta,
            probe_times,
            indices,
            values,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of probes `n`.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Unrounded probe epochs `S_1 < … < S_n`.
    pub fn probe_times(&self) -> &[f64] {
        &self.probe_times
    }

    /// Grid indices `k_0 = 0, k_1, …, k_n`.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// `V_0^Δ, …, V_n^Δ`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zero_fraction(&self) -> f64 {
        let n = self.n();
        self.values[1..].iter().filter(|&&v| v == 0.0).count() as f64 / n as f64
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.len() < 2 {
        return Err(Error::EmptyProbeSample);
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidObservations(
            "workload values must be nonnegative and finite",
        ));
    }
    Ok(())
}

/// Draws Poisson probes of rate `ξ` on `[0, horizon]` and reads the grid at
/// the rounded epochs. The first epoch whose rounded index lies beyond the
/// horizon is discarded and ends the sample.
pub fn draw_probes<R: RngCore + ?Sized>(
    grid: &GridObservations,
    horizon: f64,
    xi: f64,
    rng: &mut R,
) -> Result<ProbeSample> {
    require_positive("xi", xi)?;
    require_positive("horizon", horizon)?;
    let delta = grid.delta();
    let last = crate::sim::grid_steps(horizon, delta);
    if last > grid.steps() {
        return Err(Error::param("horizon", horizon, "grid does not cover the horizon"));
    }
    let expected = xi * horizon;
    let cap = (expected + 10.0 * sqrt(expected) + 16.0) as usize;
    let mut probe_times = Vec::with_capacity(cap);
    let mut indices = Vec::with_capacity(cap + 1);
    let mut values = Vec::with_capacity(cap + 1);
    indices.push(0);
    values.push(grid.values()[0]);

    let mut s = 0.0;
    loop {
        s += exponential(rng, xi);
        let k = round_half_up(s / delta);
        if k > last as f64 {
            break;
        }
        let k = k as usize;
        probe_times.push(s);
        indices.push(k);
        values.push(grid.values()[k]);
    }
    if probe_times.is_empty() {
        return Err(Error::EmptyProbeSample);
    }
    Ok(ProbeSample {
        xi,
        delta,
        probe_times,
        indices,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Point estimate with the summary statistics it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub alpha: f64,
    pub xi: f64,
    pub n: usize,
    pub phi_hat: f64,
    /// `n⁻¹ Σ 1{V_i = 0}`.
    pub zero_fraction: f64,
    /// `n⁻¹ Σ e^{-αV_i}`.
    pub lst_mean: f64,
    pub first_value: f64,
    pub last_value: f64,
    pub sigma_hat_sq: Option<f64>,
    pub ci: Option<ConfidenceInterval>,
}

impl Estimate {
    /// `n⁻¹ ξ (e^{-αV_n} - e^{-αV_0})`.
    pub fn endpoint_term(&self) -> f64 {
        self.xi * (exp(-self.alpha * self.last_value) - exp(-self.alpha * self.first_value))
            / self.n as f64
    }

    pub fn numerator(&self) -> f64 {
        self.endpoint_term() + self.alpha * self.zero_fraction
    }

    /// Recomputes `φ̂` from the stored statistics.
    pub fn recompute(&self) -> f64 {
        self.numerator() / self.lst_mean
    }
}

/// Shared evaluation of the estimator on `V_0..=V_n`; values at most `tau`
/// count as empty.
fn estimate_values(values: &[f64], xi: f64, alpha: f64, tau: f64) -> Result<Estimate> {
    require_positive("alpha", alpha)?;
    require_positive("xi", xi)?;
    require_nonnegative("tau", tau)?;
    if values.len() < 2 {
        return Err(Error::EmptyProbeSample);
    }
    let n = values.len() - 1;
    let mut lst_sum = 0.0;
    let mut zeros = 0usize;
    for &v in &values[1..] {
        lst_sum += exp(-alpha * v);
        if v <= tau {
            zeros += 1;
        }
    }
    let nf = n as f64;
    let mut est = Estimate {
        alpha,
        xi,
        n,
        phi_hat: 0.0,
        zero_fraction: zeros as f64 / nf,
        lst_mean: lst_sum / nf,
        first_value: values[0],
        last_value: values[n],
        sigma_hat_sq: None,
        ci: None,
    };
    est.phi_hat = est.recompute();
    Ok(est)
}

/// Estimator on grid-rounded probes, with exact zero detection.
pub fn estimate_grid(sample: &ProbeSample, alpha: f64) -> Result<Estimate> {
    estimate_values(&sample.values, sample.xi, alpha, 0.0)
}

/// Like [`estimate_grid`], but counts values `≤ tau` as empty. Meant for
/// external data where an empty system may be recorded inexactly.
pub fn estimate_grid_with_tolerance(sample: &ProbeSample, alpha: f64, tau: f64) -> Result<Estimate> {
    estimate_values(&sample.values, sample.xi, alpha, tau)
}

/// Estimator on workload values observed at the exact probe epochs
/// (`values[0] = V(0)`, `values[i] = V(S_i)`).
pub fn estimate_poisson(values: &[f64], xi: f64, alpha: f64) -> Result<Estimate> {
    check_values(values)?;
    estimate_values(values, xi, alpha, 0.0)
}

/// `Z_i = (ξ - p) e^{-αV_i} - ξ e^{-αV_{i-1}} + α 1{V_i = 0}` for `i = 1..n`,
/// where `p` is a candidate value of `φ(α)`.
pub fn residuals(sample: &ProbeSample, alpha: f64, phi_value: f64) -> Vec<f64> {
    let xi = sample.xi;
    sample
        .values
        .windows(2)
        .map(|w| {
            let ind = if w[1] == 0.0 { alpha } else { 0.0 };
            (xi - phi_value) * exp(-alpha * w[1]) - xi * exp(-alpha * w[0]) + ind
        })
        .collect()
}

/// Plug-in asymptotic variance: `φ(α)`, `φ(2α)` and `φ'(0)` replaced by
/// `φ̂(α)`, `φ̂(2α)` and the empirical zero fraction of the same sample.
///
/// Negative plug-in values (possible in small samples) are reported as 0.
pub fn plugin_variance(sample: &ProbeSample, alpha: f64) -> Result<f64> {
    let at = estimate_grid(sample, alpha)?;
    if at.zero_fraction == 0.0 {
        return Err(Error::NoEmptiness);
    }
    let at2 = estimate_grid(sample, 2.0 * alpha)?;
    let v = asymptotic_variance_from(at.phi_hat, at2.phi_hat, at.zero_fraction, alpha, sample.xi);
    if !v.is_finite() {
        return Err(Error::InvalidObservations("variance plug-in is not finite"));
    }
    Ok(v.max(0.0))
}

/// `φ̂ ± z σ̂ / √n` with `z` the standard normal `(1 + level)/2` quantile.
pub fn interval(phi_hat: f64, sigma_sq: f64, n: usize, level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param("level", level, "must lie in (0, 1)"));
    }
    require_nonnegative("sigma_sq", sigma_sq)?;
    let z = normal::quantile(0.5 * (1.0 + level));
    let half = z * sqrt(sigma_sq / n as f64);
    Ok(ConfidenceInterval {
        lo: phi_hat - half,
        hi: phi_hat + half,
        level,
    })
}

pub fn confidence_interval(
    sample: &ProbeSample,
    alpha: f64,
    level: f64,
) -> Result<ConfidenceInterval> {
    Ok(estimate_with_interval(sample, alpha, level)?
        .ci
        .expect("interval is always set"))
}

/// [`estimate_grid`] with the plug-in variance and interval filled in.
pub fn estimate_with_interval(sample: &ProbeSample, alpha: f64, level: f64) -> Result<Estimate> {
    let mut est = estimate_grid(sample, alpha)?;
    let sigma_sq = plugin_variance(sample, alpha)?;
    est.ci = Some(interval(est.phi_hat, sigma_sq, est.n, level)?);
    est.sigma_hat_sq = Some(sigma_sq);
    Ok(est)
}

/// Average of `K` estimator realisations on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleEstimate {
    pub k: usize,
    pub alpha: f64,
    /// `(φ̂_k, n(k))` per iteration.
    pub per_iteration: Vec<(f64, usize)>,
    pub mean_phi: f64,
}

impl ResampleEstimate {
    fn from_iterations(alpha: f64, per_iteration: Vec<(f64, usize)>) -> Self {
        let k = per_iteration.len();
        let mean_phi = per_iteration.iter().map(|p| p.0).sum::<f64>() / k as f64;
        Self {
            k,
            alpha,
            per_iteration,
            mean_phi,
        }
    }
}

fn draw_with_retries<R: RngCore + ?Sized>(
    grid: &GridObservations,
    horizon: f64,
    xi: f64,
    rng: &mut R,
) -> Result<ProbeSample> {
    for _ in 0..MAX_PROBE_ATTEMPTS {
        match draw_probes(grid, horizon, xi, rng) {
            Err(Error::EmptyProbeSample) => continue,
            other => return other,
        }
    }
    Err(Error::EmptyProbeSample)
}

/// Resampling estimator at one `α`.
pub fn resample_estimate<R: RngCore + ?Sized>(
    grid: &GridObservations,
    horizon: f64,
    xi: f64,
    k: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<ResampleEstimate> {
    let mut out = resample_curve(grid, horizon, xi, k, &[alpha], rng)?;
    Ok(out.remove(0))
}

/// Resampling estimator at several `α`, sharing each iteration's probe
/// sample across all of them.
pub fn resample_curve<R: RngCore + ?Sized>(
    grid: &GridObservations,
    horizon: f64,
    xi: f64,
    k: usize,
    alphas: &[f64],
    rng: &mut R,
) -> Result<Vec<ResampleEstimate>> {
    if k == 0 {
        return Err(Error::param("K", 0.0, "must be at least 1"));
    }
    let mut per_alpha: Vec<Vec<(f64, usize)>> =
        alphas.iter().map(|_| Vec::with_capacity(k)).collect();
    for _ in 0..k {
        let sample = draw_with_retries(grid, horizon, xi, rng)?;
        for (slot, &alpha) in per_alpha.iter_mut().zip(alphas) {
            let e = estimate_grid(&sample, alpha)?;
            slot.push((e.phi_hat, e.n));
        }
    }
    Ok(alphas
        .iter()
        .zip(per_alpha)
        .map(|(&a, it)| ResampleEstimate::from_iterations(a, it))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rounding_rule() {
        assert_eq!(round_half_up(2.49), 2.0);
        assert_eq!(round_half_up(2.51), 3.0);
        assert_eq!(round_half_up(2.5), 3.0);
        assert_eq!(round_half_up(0.0), 0.0);
    }

    #[test]
    fn empty_system_gives_alpha() {
        let s = ProbeSample::from_values(0.7, 1.0, vec![0.0; 11]).unwrap();
        let e = estimate_grid(&s, 1.0).unwrap();
        assert_eq!(e.phi_hat, 1.0);
    }

    #[test]
    fn hand_evaluated_example() {
        let s = ProbeSample::from_values(1.0, 1.0, vec![1.0, 0.0, 0.0]).unwrap();
        let e = estimate_grid(&s, 1.0).unwrap();
        let expected = 1.0 + (1.0 - libm::exp(-1.0)) / 2.0;
        assert!((e.phi_hat - expected).abs() < 1e-15);
        assert!((e.phi_hat - 1.316_06).abs() < 1e-5);
    }

    #[test]
    fn poisson_single_probe() {
        let e = estimate_poisson(&[0.0, 0.0], 2.0, 3.0).unwrap();
        assert_eq!(e.phi_hat, 3.0);
        assert!(matches!(estimate_poisson(&[0.0], 2.0, 3.0), Err(Error::EmptyProbeSample)));
    }

    #[test]
    fn residuals_vanish_for_empty_system() {
        let s = ProbeSample::from_values(2.0, 1.0, vec![0.0; 6]).unwrap();
        assert!(residuals(&s, 1.5, 1.5).iter().all(|&z| z == 0.0));
    }

    #[test]
    fn no_emptiness_blocks_variance() {
        let s = ProbeSample::from_values(1.0, 1.0, vec![1.0, 0.5, 0.3]).unwrap();
        assert_eq!(plugin_variance(&s, 1.0), Err(Error::NoEmptiness));
    }

    #[test]
    fn interval_arithmetic() {
        let ci = interval(2.0, 1.0, 100, 0.95).unwrap();
        assert!((ci.hi - 2.0 - 0.195_996_398_454_005_4).abs() < 1e-12);
        assert!((2.0 - ci.lo - 0.195_996_398_454_005_4).abs() < 1e-12);
        let degenerate = interval(2.0, 0.0, 10, 0.95).unwrap();
        assert_eq!((degenerate.lo, degenerate.hi), (2.0, 2.0));
        assert!(interval(2.0, 1.0, 10, 1.0).is_err());
    }

    #[test]
    fn probes_stop_at_horizon() {
        let grid = GridObservations::from_values(0.5, vec![0.0; 21]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let s = draw_probes(&grid, 10.0, 1.0, &mut rng).unwrap();
            assert!(s.indices().iter().all(|&k| k <= 20));
            assert!(s.probe_times().windows(2).all(|w| w[1] > w[0]));
            assert_eq!(s.values().len(), s.n() + 1);
        }
    }

    #[test]
    fn empty_probe_sample() {
        let grid = GridObservations::from_values(1.0, vec![0.0; 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // ξ tiny: the first probe essentially never lands in [0, 1].
        assert_eq!(
            draw_probes(&grid, 1.0, 1e-9, &mut rng),
            Err(Error::EmptyProbeSample)
        );
        assert_eq!(
            resample_estimate(&grid, 1.0, 1e-9, 3, 1.0, &mut rng),
            Err(Error::EmptyProbeSample)
        );
    }

    #[test]
    fn resampling_with_one_iteration_is_plain_estimate() {
        let values: Vec<f64> = (0..=200).map(|i| if i % 3 == 0 { 0.0 } else { 0.1 * (i % 7) as f64 }).collect();
        let grid = GridObservations::from_values(0.1, values).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(4);
        let mut b = a.clone();
        let r = resample_estimate(&grid, 20.0, 1.0, 1, 1.3, &mut a).unwrap();
        let s = draw_probes(&grid, 20.0, 1.0, &mut b).unwrap();
        let e = estimate_grid(&s, 1.3).unwrap();
        assert_eq!(r.mean_phi, e.phi_hat);
        assert_eq!(r.per_iteration, vec![(e.phi_hat, e.n)]);
    }
}
