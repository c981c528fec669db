//! Parametric subordinator inputs and functionals of the Lévy exponent.
//!
//! For a subordinator `J` with Lévy measure `ν` the net input `X(t) = J(t) - t`
//! has exponent
//!
//! ```text
//! φ(α) = α - ∫ (1 - e^{-αx}) ν(dx),
//! ```
//!
//! which is strictly increasing on `[0, ∞)` with `φ(0) = 0` and
//! `φ'(0) = 1 - E J(1)`. Everything in this module is derived from `φ`, its
//! inverse `ψ` and `φ'(0)`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{require_nonnegative, require_positive};
use crate::levy::LevyDensity;
use crate::math::{exp, expm1, ln_1p, powf, sqrt};
use crate::table::InverseCdfTable;
use crate::{Error, Result};

/// Job (jump) size law of a compound Poisson input.
#[derive(Debug, Clone, PartialEq)]
pub enum JobDistribution {
    Exponential { rate: f64 },
    Deterministic { size: f64 },
    Tabulated(InverseCdfTable),
}

impl JobDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            JobDistribution::Exponential { rate } => require_positive("job rate", *rate).map(|_| ()),
            JobDistribution::Deterministic { size } => {
                require_positive("job size", *size).map(|_| ())
            }
            // InverseCdfTable can only be built in a valid state.
            JobDistribution::Tabulated(_) => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            JobDistribution::Exponential { rate } => 1.0 / rate,
            JobDistribution::Deterministic { size } => *size,
            JobDistribution::Tabulated(t) => t.mean(),
        }
    }

    /// `1 - E e^{-αB}`.
    pub fn laplace_defect(&self, alpha: f64) -> Result<f64> {
        Ok(match self {
            JobDistribution::Exponential { rate } => alpha / (rate + alpha),
            JobDistribution::Deterministic { size } => -expm1(-alpha * size),
            JobDistribution::Tabulated(t) => t.laplace_defect(alpha)?,
        })
    }

    pub fn sample<R: rand_core::RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JobDistribution::Exponential { rate } => crate::rng::exponential(rng, *rate),
            JobDistribution::Deterministic { size } => *size,
            JobDistribution::Tabulated(t) => t.sample(rng),
        }
    }
}

/// Finite-activity input: jobs arrive at the epochs of a Poisson process.
///
/// A rate of exactly zero is accepted and describes the null input (pure
/// drain), for which `φ(α) = α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundPoisson {
    pub rate: f64,
    pub jobs: JobDistribution,
}

impl CompoundPoisson {
    pub fn new(rate: f64, jobs: JobDistribution) -> Result<Self> {
        let cp = Self { rate, jobs };
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        require_nonnegative("arrival rate", self.rate)?;
        self.jobs.validate()
    }

    /// `E J(1) = rate · E B`.
    pub fn mean_rate(&self) -> f64 {
        if self.rate == 0.0 {
            0.0
        } else {
            self.rate * self.jobs.mean()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorSpec {
    CompoundPoisson(CompoundPoisson),
    /// Gamma process: `log E e^{-αJ(1)} = shape · log(rate / (rate + α))`.
    Gamma { shape: f64, rate: f64 },
    /// Inverse Gaussian process with `E J(1) = mean`.
    InverseGaussian { mean: f64, shape: f64 },
    Sum(Vec<SubordinatorSpec>),
    /// Keeps only the jumps of `base` larger than `eps`.
    TruncatedCp { base: Box<SubordinatorSpec>, eps: f64 },
}

impl SubordinatorSpec {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        let s = SubordinatorSpec::Gamma { shape, rate };
        s.validate()?;
        Ok(s)
    }

    pub fn inverse_gaussian(mean: f64, shape: f64) -> Result<Self> {
        let s = SubordinatorSpec::InverseGaussian { mean, shape };
        s.validate()?;
        Ok(s)
    }

    pub fn compound_poisson(rate: f64, jobs: JobDistribution) -> Result<Self> {
        Ok(SubordinatorSpec::CompoundPoisson(CompoundPoisson::new(
            rate, jobs,
        )?))
    }

    /// Sum of independent components; nested sums are flattened.
    pub fn sum(parts: Vec<SubordinatorSpec>) -> Result<Self> {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                SubordinatorSpec::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        let s = SubordinatorSpec::Sum(flat);
        s.validate()?;
        Ok(s)
    }

    pub fn truncated(base: SubordinatorSpec, eps: f64) -> Result<Self> {
        let s = SubordinatorSpec::TruncatedCp {
            base: Box::new(base),
            eps,
        };
        s.validate()?;
        Ok(s)
    }

    /// Gamma(2, 5) + IG(0.4, 1): the two-component infinite-activity input
    /// with `E J(1) = 0.8` and Blumenthal–Getoor index 1/2.
    pub fn gamma_plus_inverse_gaussian() -> Self {
        SubordinatorSpec::Sum(alloc::vec![
            SubordinatorSpec::Gamma {
                shape: 2.0,
                rate: 5.0
            },
            SubordinatorSpec::InverseGaussian {
                mean: 0.4,
                shape: 1.0
            },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SubordinatorSpec::CompoundPoisson(cp) => cp.validate(),
            SubordinatorSpec::Gamma { shape, rate } => {
                require_positive("gamma shape", *shape)?;
                require_positive("gamma rate", *rate)?;
                Ok(())
            }
            SubordinatorSpec::InverseGaussian { mean, shape } => {
                require_positive("inverse Gaussian mean", *mean)?;
                require_positive("inverse Gaussian shape", *shape)?;
                Ok(())
            }
            SubordinatorSpec::Sum(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidModel("sum needs at least one component"));
                }
                if parts.iter().any(|p| matches!(p, SubordinatorSpec::Sum(_))) {
                    return Err(Error::InvalidModel("nested sums must be flattened"));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
            SubordinatorSpec::TruncatedCp { base, eps } => {
                require_positive("truncation eps", *eps)?;
                base.validate()?;
                LevyDensity::from_spec(base).map(|_| ())
            }
        }
    }

    /// `true` when the Lévy measure has finite mass.
    pub fn is_finite_activity(&self) -> bool {
        match self {
            SubordinatorSpec::CompoundPoisson(_) | SubordinatorSpec::TruncatedCp { .. } => true,
            SubordinatorSpec::Gamma { .. } | SubordinatorSpec::InverseGaussian { .. } => false,
            SubordinatorSpec::Sum(parts) => parts.iter().all(|p| p.is_finite_activity()),
        }
    }

    /// Laplace exponent of the input, `∫ (1 - e^{-αx}) ν(dx) = -log E e^{-αJ(1)}`.
    pub fn laplace_exponent(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            SubordinatorSpec::CompoundPoisson(cp) => {
                if cp.rate == 0.0 {
                    0.0
                } else {
                    cp.rate * cp.jobs.laplace_defect(alpha)?
                }
            }
            SubordinatorSpec::Gamma { shape, rate } => shape * ln_1p(alpha / rate),
            SubordinatorSpec::InverseGaussian { mean, shape } => {
                // (λ/μ)(√(1 + 2μ²α/λ) - 1), written to avoid cancellation for small α.
                let z = 2.0 * mean * mean * alpha / shape;
                (shape / mean) * z / (sqrt(1.0 + z) + 1.0)
            }
            SubordinatorSpec::Sum(parts) => {
                let mut acc = 0.0;
                for p in parts {
                    acc += p.laplace_exponent(alpha)?;
                }
                acc
            }
            SubordinatorSpec::TruncatedCp { base, eps } => {
                LevyDensity::from_spec(base)?.truncated_laplace_exponent(alpha, *eps)?
            }
        })
    }
}

/// `E J(1)` of the input.
pub fn mean_input_rate(spec: &SubordinatorSpec) -> Result<f64> {
    Ok(match spec {
        SubordinatorSpec::CompoundPoisson(cp) => cp.mean_rate(),
        SubordinatorSpec::Gamma { shape, rate } => shape / rate,
        SubordinatorSpec::InverseGaussian { mean, .. } => *mean,
        SubordinatorSpec::Sum(parts) => {
            let mut acc = 0.0;
            for p in parts {
                acc += mean_input_rate(p)?;
            }
            acc
        }
        SubordinatorSpec::TruncatedCp { base, eps } => {
            LevyDensity::from_spec(base)?.truncated_mean(*eps)?
        }
    })
}

/// Blumenthal–Getoor index of the input's Lévy measure.
pub fn bg_index(spec: &SubordinatorSpec) -> f64 {
    match spec {
        SubordinatorSpec::CompoundPoisson(_)
        | SubordinatorSpec::TruncatedCp { .. }
        | SubordinatorSpec::Gamma { .. } => 0.0,
        SubordinatorSpec::InverseGaussian { .. } => 0.5,
        SubordinatorSpec::Sum(parts) => parts.iter().map(bg_index).fold(0.0, f64::max),
    }
}

/// Open interval of admissible grid exponents `γ` for `Δ = n^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRange {
    pub lower: f64,
    pub upper: f64,
}

impl GammaRange {
    pub fn is_empty(&self) -> bool {
        !(self.lower < self.upper)
    }

    pub fn contains(&self, gamma: f64) -> bool {
        self.lower < gamma && gamma < self.upper
    }
}

/// `(1 / (2 - 2√β), 1)`; empty once `β ≥ 1/4`.
pub fn clt_gamma_range(bg: f64) -> Result<GammaRange> {
    if !(0.0..=1.0).contains(&bg) {
        return Err(Error::param("Blumenthal-Getoor index", bg, "must lie in [0, 1]"));
    }
    let denom = 2.0 - 2.0 * sqrt(bg);
    let lower = if denom > 0.0 { 1.0 / denom } else { f64::INFINITY };
    Ok(GammaRange { lower, upper: 1.0 })
}

/// Grid width `(ξT)^{-1/(2 - 2√β)}` from the horizon approximation `n ≈ ξT`.
///
/// For `β ≥ 1/4` the exponent exceeds one, so the result lies outside the
/// range where the CLT is proven; it is still returned, as a heuristic.
pub fn suggest_delta(xi: f64, horizon: f64, bg: f64) -> Result<f64> {
    require_positive("xi", xi)?;
    require_positive("horizon", horizon)?;
    let range = clt_gamma_range(bg)?;
    if !range.lower.is_finite() {
        return Err(Error::param(
            "Blumenthal-Getoor index",
            bg,
            "grid exponent is unbounded at index 1",
        ));
    }
    let n = xi * horizon;
    if n <= 1.0 {
        return Err(Error::HeuristicUndefined(n));
    }
    Ok(powf(n, -range.lower))
}

/// Asymptotic variance of `√n (φ̂ - φ)` given the exponent at `α` and `2α`
/// and the atom `φ'(0)`.
pub fn asymptotic_variance_from(
    phi_alpha: f64,
    phi_2alpha: f64,
    phi_prime_zero: f64,
    alpha: f64,
    xi: f64,
) -> f64 {
    let ratio = 2.0 * phi_alpha / phi_2alpha;
    phi_alpha * phi_alpha / (alpha * phi_prime_zero)
        * (alpha + 2.0 * xi * (1.0 - ratio) + ratio * (phi_alpha - phi_2alpha))
}

/// Stable storage model: subordinator input, unit-rate drain.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInputModel {
    input: SubordinatorSpec,
    mean_rate: f64,
}

pub const MIN_VARIANCE_ALPHA: f64 = 1e-6;

impl NetInputModel {
    pub fn new(input: SubordinatorSpec) -> Result<Self> {
        input.validate()?;
        let mean_rate = mean_input_rate(&input)?;
        if !(mean_rate < 1.0) {
            return Err(Error::Unstable { mean_rate });
        }
        Ok(Self { input, mean_rate })
    }

    pub fn input(&self) -> &SubordinatorSpec {
        &self.input
    }

    pub fn mean_input_rate(&self) -> f64 {
        self.mean_rate
    }

    /// `φ'(0) = 1 - E J(1)`, which also equals the stationary atom at zero.
    pub fn phi_prime_zero(&self) -> f64 {
        1.0 - self.mean_rate
    }

    pub fn phi(&self, alpha: f64) -> Result<f64> {
        require_nonnegative("alpha", alpha)?;
        if alpha == 0.0 {
            return Ok(0.0);
        }
        Ok(alpha - self.input.laplace_exponent(alpha)?)
    }

    /// Inverse of `φ`: the unique `α > 0` with `φ(α) = ξ`.
    ///
    /// Doubles an upper bracket from 1 until `φ` exceeds `ξ`, then bisects to
    /// a relative width of `1e-12`.
    pub fn psi(&self, xi: f64) -> Result<f64> {
        require_positive("xi", xi)?;
        const LIMIT: f64 = 1e300;
        let mut lo = 0.0;
        let mut hi = 1.0;
        loop {
            let v = self.phi(hi)?;
            if v > xi {
                break;
            }
            lo = hi;
            hi *= 2.0;
            if hi > LIMIT {
                return Err(Error::BracketOverflow { target: xi, limit: LIMIT });
            }
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if !(lo < mid && mid < hi) {
                break;
            }
            if self.phi(mid)? < xi {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Stationary workload transform `E e^{-αV(∞)} = α φ'(0) / φ(α)`.
    pub fn stationary_lst(&self, alpha: f64) -> Result<f64> {
        require_nonnegative("alpha", alpha)?;
        if alpha == 0.0 {
            return Ok(1.0);
        }
        Ok(alpha * self.phi_prime_zero() / self.phi(alpha)?)
    }

    /// Stationary probability of an empty system.
    pub fn stationary_atom(&self) -> f64 {
        self.phi_prime_zero()
    }

    /// `E_x e^{-αV(T)}` for `T ~ Exp(ξ)` independent of the input.
    ///
    /// Fails with [`Error::SingularTransient`] when `ξ` is within
    /// `1e-8 · max(1, ξ)` of `φ(α)`; the removable limit is not evaluated.
    pub fn transient_lst(&self, alpha: f64, x: f64, xi: f64) -> Result<f64> {
        require_nonnegative("alpha", alpha)?;
        require_nonnegative("x", x)?;
        require_positive("xi", xi)?;
        if alpha == 0.0 {
            return Ok(1.0);
        }
        let phi = self.phi(alpha)?;
        if (xi - phi).abs() <= 1e-8 * xi.max(1.0) {
            return Err(Error::SingularTransient { xi, phi });
        }
        let psi = self.psi(xi)?;
        Ok(xi / (xi - phi) * (exp(-alpha * x) - alpha / psi * exp(-psi * x)))
    }

    /// `P_x(V(T) = 0) = (ξ / ψ(ξ)) e^{-ψ(ξ) x}` for `T ~ Exp(ξ)`.
    pub fn zero_prob(&self, x: f64, xi: f64) -> Result<f64> {
        require_nonnegative("x", x)?;
        let psi = self.psi(xi)?;
        Ok(xi / psi * exp(-psi * x))
    }

    pub fn bg_index(&self) -> f64 {
        bg_index(&self.input)
    }

    /// Asymptotic variance of the grid estimator at `(α, ξ)`; requires
    /// `α ≥ 1e-6`.
    pub fn asymptotic_variance(&self, alpha: f64, xi: f64) -> Result<f64> {
        if !(alpha >= MIN_VARIANCE_ALPHA) || !alpha.is_finite() {
            return Err(Error::param("alpha", alpha, "must be at least 1e-6"));
        }
        require_positive("xi", xi)?;
        Ok(asymptotic_variance_from(
            self.phi(alpha)?,
            self.phi(2.0 * alpha)?,
            self.phi_prime_zero(),
            alpha,
            xi,
        ))
    }
}
