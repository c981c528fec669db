//! Closed-form Lévy densities, their ε-truncation, and the compound-Poisson
//! surrogate used to simulate infinite-activity inputs.
//!
//! Keeping only the jumps larger than `ε` turns the input into a compound
//! Poisson process with rate `r_ε = ν(ε, ∞)` and job law
//! `P(B ≤ x) = ν(ε, x] / r_ε`. All integrals against `ν` are computed in the
//! coordinate `u = ln x`, which removes the `x^{-1}` and `x^{-3/2}` blow-ups
//! at the lower end.

use alloc::vec::Vec;

use crate::error::{require_nonnegative, require_positive};
use crate::math::{exp, expm1, powf, sqrt};
use crate::model::{CompoundPoisson, JobDistribution, SubordinatorSpec};
use crate::quad::{integrate_log, Tolerance};
use crate::table::InverseCdfTable;
use crate::{Error, Result};

/// Default truncation level.
pub const DEFAULT_EPS: f64 = 1e-5;
/// Relative tail mass left beyond the last table knot.
pub const TAIL_MASS: f64 = 1e-12;
pub const MIN_TABLE_SIZE: usize = 256;

const QUAD_TOL: Tolerance = Tolerance::new(1e-300, 1e-10);
// Integrals with ε = 0 start here; the neglected piece is below 1e-16.
const LOWER_FLOOR: f64 = 1e-40;
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityTerm {
    /// `shape · x^{-1} e^{-rate·x}`
    Gamma { shape: f64, rate: f64 },
    /// `√(shape / 2π) · x^{-3/2} e^{-shape·x / (2 mean²)}`
    InverseGaussian { mean: f64, shape: f64 },
}

impl DensityTerm {
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            DensityTerm::Gamma { shape, rate } => shape / x * exp(-rate * x),
            DensityTerm::InverseGaussian { mean, shape } => {
                sqrt(shape / (2.0 * core::f64::consts::PI)) * powf(x, -1.5)
                    * exp(-shape * x / (2.0 * mean * mean))
            }
        }
    }

    /// Exponential decay rate of the density's tail.
    fn decay(&self) -> f64 {
        match *self {
            DensityTerm::Gamma { rate, .. } => rate,
            DensityTerm::InverseGaussian { mean, shape } => shape / (2.0 * mean * mean),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DensityTerm::Gamma { shape, rate } => {
                require_positive("gamma shape", shape)?;
                require_positive("gamma rate", rate)?;
            }
            DensityTerm::InverseGaussian { mean, shape } => {
                require_positive("inverse Gaussian mean", mean)?;
                require_positive("inverse Gaussian shape", shape)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyDensity {
    terms: Vec<DensityTerm>,
}

impl LevyDensity {
    pub fn new(terms: Vec<DensityTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("Lévy density needs at least one term"));
        }
        terms.iter().try_for_each(DensityTerm::validate)?;
        Ok(Self { terms })
    }

    /// Density of a Gamma / inverse Gaussian spec or a sum of those.
    pub fn from_spec(spec: &SubordinatorSpec) -> Result<Self> {
        let mut terms = Vec::new();
        collect_terms(spec, &mut terms)?;
        Self::new(terms)
    }

    pub fn terms(&self) -> &[DensityTerm] {
        &self.terms
    }

    pub fn density(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.density(x)).sum()
    }

    /// Point beyond which every term has underflowed.
    fn upper_cutoff(&self) -> f64 {
        let decay = self
            .terms
            .iter()
            .map(DensityTerm::decay)
            .fold(f64::INFINITY, f64::min);
        760.0 / decay
    }

    /// `∫_lo^∞ g(x) ν(dx)`, for `lo > 0`.
    fn integrate_from<G: Fn(f64) -> f64>(&self, g: G, lo: f64) -> Result<f64> {
        self.integrate_between(g, lo, self.upper_cutoff())
    }

    fn integrate_between<G: Fn(f64) -> f64>(&self, g: G, lo: f64, hi: f64) -> Result<f64> {
        if lo >= hi {
            return Ok(0.0);
        }
        let r = integrate_log(|x| g(x) * self.density(x), lo, hi, QUAD_TOL)?;
        Ok(if r.value.abs() < UNDERFLOW { 0.0 } else { r.value })
    }

    /// `r_ε = ν(ε, ∞)`.
    pub fn truncated_rate(&self, eps: f64) -> Result<f64> {
        require_positive("eps", eps)?;
        self.integrate_from(|_| 1.0, eps)
    }

    /// `∫_(ε,∞) x ν(dx)`.
    pub fn truncated_mean(&self, eps: f64) -> Result<f64> {
        require_positive("eps", eps)?;
        self.integrate_from(|x| x, eps)
    }

    /// `∫_(ε,∞) (1 - e^{-αx}) ν(dx)`. With `ε = 0` this is the full Laplace
    /// exponent of the input, computed by quadrature.
    pub fn truncated_laplace_exponent(&self, alpha: f64, eps: f64) -> Result<f64> {
        require_nonnegative("alpha", alpha)?;
        require_nonnegative("eps", eps)?;
        if alpha == 0.0 {
            return Ok(0.0);
        }
        self.integrate_from(|x| -expm1(-alpha * x), eps.max(LOWER_FLOOR))
    }
}

fn collect_terms(spec: &SubordinatorSpec, out: &mut Vec<DensityTerm>) -> Result<()> {
    match spec {
        SubordinatorSpec::Gamma { shape, rate } => out.push(DensityTerm::Gamma {
            shape: *shape,
            rate: *rate,
        }),
        SubordinatorSpec::InverseGaussian { mean, shape } => {
            out.push(DensityTerm::InverseGaussian {
                mean: *mean,
                shape: *shape,
            })
        }
        SubordinatorSpec::Sum(parts) => {
            for p in parts {
                collect_terms(p, out)?;
            }
        }
        SubordinatorSpec::CompoundPoisson(_) | SubordinatorSpec::TruncatedCp { .. } => {
            return Err(Error::InvalidModel(
                "truncation needs a closed-form Lévy density (gamma, inverse Gaussian or their sum)",
            ))
        }
    }
    Ok(())
}

/// Compound-Poisson surrogate keeping the jumps above `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedCpSpec {
    pub eps: f64,
    /// `ν(ε, ∞)`.
    pub rate: f64,
    /// Largest tabulated jump size.
    pub x_max: f64,
    /// Normalized job-size inverse CDF on `[ε, x_max]`.
    pub table: InverseCdfTable,
    /// `ν(x_max, ∞) / r_ε`, dropped from the table.
    pub tail_mass_beyond_table: f64,
}

impl TruncatedCpSpec {
    pub fn to_compound_poisson(&self) -> CompoundPoisson {
        CompoundPoisson {
            rate: self.rate,
            jobs: JobDistribution::Tabulated(self.table.clone()),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        self.table.quantile(u)
    }

    pub fn mean_job(&self) -> f64 {
        self.table.mean()
    }

    /// `E J_ε(1)` of the surrogate.
    pub fn mean_input_rate(&self) -> f64 {
        self.rate * self.table.mean()
    }
}

/// Tabulates `ν(ε, x] / r_ε` on `table_size` log-spaced points from `ε` to the
/// point where the remaining tail mass drops below `1e-12 · r_ε`.
pub fn build_truncated_cp(
    density: &LevyDensity,
    eps: f64,
    table_size: usize,
) -> Result<TruncatedCpSpec> {
    require_positive("eps", eps)?;
    if table_size < MIN_TABLE_SIZE {
        return Err(Error::param(
            "table_size",
            table_size as f64,
            "must be at least 256",
        ));
    }
    let rate = density.truncated_rate(eps)?;
    if !(rate > 0.0) {
        return Err(Error::param("eps", eps, "no Lévy mass above the truncation level"));
    }

    const GUARD: f64 = 1e300;
    let mut x_max = (2.0 * eps).max(1.0);
    while density.truncated_rate(x_max)? >= TAIL_MASS * rate {
        x_max *= 2.0;
        if x_max > GUARD {
            return Err(Error::TailCutoff(GUARD));
        }
    }
    let tail = density.truncated_rate(x_max)?;

    let n = table_size;
    let ratio = x_max / eps;
    let knots: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                eps
            } else if k == n - 1 {
                x_max
            } else {
                eps * powf(ratio, k as f64 / (n - 1) as f64)
            }
        })
        .collect();

    let mut cumulative = Vec::with_capacity(n);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for w in knots.windows(2) {
        acc += density.integrate_between(|_| 1.0, w[0], w[1])?;
        cumulative.push(acc);
    }
    let total = acc;

    let mut probs = Vec::with_capacity(n);
    let mut qs = Vec::with_capacity(n);
    for (k, (&c, &x)) in cumulative.iter().zip(&knots).enumerate() {
        let u = if k == n - 1 { 1.0 } else { c / total };
        match probs.last() {
            Some(&prev) if u <= prev => {
                // Flat in probability at double precision; keep the larger
                // quantile only for the closing knot.
                if k == n - 1 {
                    *qs.last_mut().unwrap() = x;
                    *probs.last_mut().unwrap() = 1.0;
                }
            }
            _ => {
                probs.push(u);
                qs.push(x);
            }
        }
    }
    let table = InverseCdfTable::new(probs, qs)?;

    Ok(TruncatedCpSpec {
        eps,
        rate,
        x_max,
        table,
        tail_mass_beyond_table: tail / rate,
    })
}
