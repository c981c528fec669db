//! Exact event-driven simulation of the reflected workload.
//!
//! Between jumps the workload drains at unit rate and sticks at zero; at a
//! jump epoch the job size is added (càdlàg: the value at the epoch already
//! includes the jump). Emptiness only ever comes out of the `max(·, 0)` step,
//! so an empty system reads as exactly `0.0`.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{require_nonnegative, require_positive};
use crate::math::floor;
use crate::model::{CompoundPoisson, JobDistribution};
use crate::rng::{exponential, uniform_open};
use crate::{Error, Result};

/// Default cap on the expected number of events of one path.
pub const DEFAULT_EVENT_CAP: f64 = 5e7;
/// Burn-in length in units of the relaxation scale `1 / φ'(0)`.
pub const BURN_IN_RELAXATIONS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// One reflection step: drain for `gap` time units, never below zero.
#[inline]
fn drain(v: f64, gap: f64) -> f64 {
    let d = v - gap;
    if d > 0.0 {
        d
    } else {
        0.0
    }
}

/// Number of grid steps `m = ⌊T/Δ⌋`, tolerant to the rounding of `T/Δ`.
pub fn grid_steps(horizon: f64, delta: f64) -> usize {
    floor(horizon / delta * (1.0 + 4.0 * f64::EPSILON)) as usize
}

/// Workload path over `[0, horizon]`, stored as initial level plus jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadPath {
    v0: f64,
    events: Vec<Jump>,
    horizon: f64,
}

impl WorkloadPath {
    pub fn new(v0: f64, events: Vec<Jump>, horizon: f64) -> Result<Self> {
        require_nonnegative("v0", v0)?;
        require_positive("horizon", horizon)?;
        let mut prev = 0.0;
        for e in &events {
            if !(e.time > prev && e.time <= horizon) {
                return Err(Error::InvalidObservations(
                    "event times must be strictly increasing within (0, horizon]",
                ));
            }
            if !crate::math::is_positive_finite(e.size) {
                return Err(Error::InvalidObservations("jump sizes must be positive"));
            }
            prev = e.time;
        }
        Ok(Self { v0, events, horizon })
    }

    /// Simulates the path driven by `cp` on `(0, horizon]`.
    pub fn simulate<R: RngCore + ?Sized>(
        cp: &CompoundPoisson,
        horizon: f64,
        v0: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Self::simulate_with_cap(cp, horizon, v0, rng, DEFAULT_EVENT_CAP)
    }

    pub fn simulate_with_cap<R: RngCore + ?Sized>(
        cp: &CompoundPoisson,
        horizon: f64,
        v0: f64,
        rng: &mut R,
        max_expected_events: f64,
    ) -> Result<Self> {
        cp.validate()?;
        require_nonnegative("v0", v0)?;
        require_positive("horizon", horizon)?;
        let expected = cp.rate * horizon;
        if expected > max_expected_events {
            return Err(Error::TooManyEvents {
                expected,
                cap: max_expected_events,
            });
        }
        let mut events: Vec<Jump> = Vec::with_capacity((expected * 1.1 + 16.0) as usize);
        if cp.rate > 0.0 {
            let mut t = 0.0;
            loop {
                t += exponential(rng, cp.rate);
                if t > horizon {
                    break;
                }
                let size = cp.jobs.sample(rng);
                match events.last_mut() {
                    // Coincident epochs after rounding: merge into one jump.
                    Some(last) if last.time == t => last.size += size,
                    _ => events.push(Jump { time: t, size }),
                }
            }
        }
        Ok(Self { v0, events, horizon })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn events(&self) -> &[Jump] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cursor(&self) -> Cursor<'_> {
        Cursor {
            events: &self.events,
            next: 0,
            level: self.v0,
            time: 0.0,
            horizon: self.horizon,
        }
    }

    pub fn workload_at(&self, t: f64) -> Result<f64> {
        self.cursor().advance(t)
    }

    /// Evaluates the workload at nondecreasing times in one pass.
    pub fn workload_at_sorted(&self, times: &[f64]) -> Result<Vec<f64>> {
        let mut cursor = self.cursor();
        times.iter().map(|&t| cursor.advance(t)).collect()
    }

    /// `V(iΔ)` for `i = 0..=⌊T/Δ⌋`, with grid times computed as `i · Δ`.
    pub fn sample_grid(&self, delta: f64) -> Result<GridObservations> {
        require_positive("delta", delta)?;
        if delta > self.horizon * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::param("delta", delta, "must not exceed the horizon"));
        }
        let m = grid_steps(self.horizon, delta);
        let mut cursor = self.cursor();
        let mut values = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let t = (i as f64 * delta).min(self.horizon);
            values.push(cursor.advance(t)?);
        }
        Ok(GridObservations { delta, values })
    }
}

/// Forward-only evaluator of a [`WorkloadPath`].
///
/// The internal state only moves at jump epochs, so the value returned for a
/// time `t` does not depend on which earlier times were queried.
#[derive(Debug, Clone)]
pub struct Cursor<'a> {
    events: &'a [Jump],
    next: usize,
    level: f64,
    time: f64,
    horizon: f64,
}

impl Cursor<'_> {
    pub fn advance(&mut self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutsideHorizon {
                t,
                horizon: self.horizon,
            });
        }
        if t < self.time {
            return Err(Error::param("t", t, "cursor queries must be nondecreasing"));
        }
        while let Some(e) = self.events.get(self.next) {
            if e.time > t {
                break;
            }
            self.level = drain(self.level, e.time - self.time) + e.size;
            self.time = e.time;
            self.next += 1;
        }
        Ok(drain(self.level, t - self.time))
    }
}

/// Equidistant observations `values[i] = V(iΔ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridObservations {
    delta: f64,
    values: Vec<f64>,
}

impl GridObservations {
    /// Wraps externally recorded grid values.
    pub fn from_values(delta: f64, values: Vec<f64>) -> Result<Self> {
        require_positive("delta", delta)?;
        if values.is_empty() {
            return Err(Error::InvalidObservations("grid has no values"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidObservations(
                "grid values must be nonnegative and finite",
            ));
        }
        Ok(Self { delta, values })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the last grid point.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    /// Fraction of grid points where the system is empty.
    pub fn zero_fraction(&self) -> f64 {
        self.values.iter().filter(|&&v| v == 0.0).count() as f64 / self.values.len() as f64
    }

    /// Restriction to `[0, horizon]`.
    pub fn truncated(&self, horizon: f64) -> Result<Self> {
        let m = grid_steps(horizon, self.delta).min(self.steps());
        Self::from_values(self.delta, self.values[..=m].to_vec())
    }
}

/// Simulates `cp` from `v0` for `horizon` time units and returns `V(horizon)`,
/// without storing the path.
pub fn terminal_workload<R: RngCore + ?Sized>(
    cp: &CompoundPoisson,
    horizon: f64,
    v0: f64,
    rng: &mut R,
) -> f64 {
    let mut level = v0;
    let mut time = 0.0;
    if cp.rate > 0.0 {
        loop {
            let next = time + exponential(rng, cp.rate);
            if next > horizon {
                break;
            }
            level = drain(level, next - time) + cp.jobs.sample(rng);
            time = next;
        }
    }
    drain(level, horizon - time)
}

/// Draw from the stationary workload law of an M/M/1-type input
/// (Poisson arrivals, exponential jobs).
///
/// With probability `1 - ρ` the system is empty. Otherwise the workload is a
/// geometric sum of exponential residual jobs, which is again exponential
/// with rate `η(1 - ρ)`; that single draw is what is returned.
pub fn stationary_init<R: RngCore + ?Sized>(cp: &CompoundPoisson, rng: &mut R) -> Result<f64> {
    let eta = match cp.jobs {
        JobDistribution::Exponential { rate } => rate,
        _ => return Err(Error::StationaryUnsupported),
    };
    cp.validate()?;
    let rho = cp.rate / eta;
    if !(rho < 1.0) {
        return Err(Error::Unstable { mean_rate: rho });
    }
    if uniform_open(rng) < 1.0 - rho {
        Ok(0.0)
    } else {
        Ok(exponential(rng, eta * (1.0 - rho)))
    }
}

/// `50 / φ'(0)` with `φ'(0) = 1 - E J(1)`.
pub fn default_burn_in(cp: &CompoundPoisson) -> Result<f64> {
    let slack = 1.0 - cp.mean_rate();
    if !(slack > 0.0) {
        return Err(Error::Unstable {
            mean_rate: cp.mean_rate(),
        });
    }
    Ok(BURN_IN_RELAXATIONS / slack)
}

/// Approximate stationary start: run from empty for `warmup` time units
/// (default [`default_burn_in`]) and return the terminal workload.
pub fn burn_in<R: RngCore + ?Sized>(
    cp: &CompoundPoisson,
    rng: &mut R,
    warmup: Option<f64>,
) -> Result<f64> {
    let warmup = match warmup {
        Some(w) => require_positive("warmup", w)?,
        None => default_burn_in(cp)?,
    };
    Ok(terminal_workload(cp, warmup, 0.0, rng))
}
