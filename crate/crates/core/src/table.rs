//! Tabulated inverse CDF with monotone cubic interpolation.
//!
//! Knots are `(u_k, q_k)` with `u_0 = 0 < u_1 < … < u_{N-1} = 1` and positive,
//! nondecreasing quantiles. Interpolation is done on `ln q` with a PCHIP
//! (Fritsch–Butland) slope rule, which keeps the interpolant monotone and
//! behaves well when the quantiles span many decades.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::math::{exp, expm1, ln};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdfTable {
    probs: Vec<f64>,
    log_q: Vec<f64>,
    slopes: Vec<f64>,
    mean: f64,
}

impl InverseCdfTable {
    pub fn new(probs: Vec<f64>, quantiles: Vec<f64>) -> Result<Self> {
        if probs.len() != quantiles.len() {
            return Err(Error::InvalidTable("probability and quantile columns differ in length"));
        }
        if probs.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots"));
        }
        if probs[0] != 0.0 || probs[probs.len() - 1] != 1.0 {
            return Err(Error::InvalidTable("probabilities must run from 0 to 1"));
        }
        if probs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidTable("probabilities must be strictly increasing"));
        }
        if quantiles.iter().any(|&q| !crate::math::is_positive_finite(q)) {
            return Err(Error::InvalidTable("quantiles must be positive and finite"));
        }
        if quantiles.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidTable("quantiles must be nondecreasing"));
        }

        let log_q: Vec<f64> = quantiles.iter().map(|&q| ln(q)).collect();
        let slopes = pchip_slopes(&probs, &log_q);
        let mut table = Self {
            probs,
            log_q,
            slopes,
            mean: f64::NAN,
        };
        table.mean = table.integrate(|q| q)?;
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn quantiles(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_q.iter().map(|&y| exp(y))
    }

    pub fn min_quantile(&self) -> f64 {
        exp(self.log_q[0])
    }

    pub fn max_quantile(&self) -> f64 {
        exp(self.log_q[self.log_q.len() - 1])
    }

    /// Mean of the tabulated distribution, `∫_0^1 Q(u) du`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.segment_for(u);
        exp(self.hermite(k, u))
    }

    /// Inverse of [`quantile`](Self::quantile).
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.min_quantile() {
            return 0.0;
        }
        if x >= self.max_quantile() {
            return 1.0;
        }
        let y = ln(x);
        let k = self.log_q.partition_point(|&q| q <= y).saturating_sub(1);
        let k = k.min(self.probs.len() - 2);
        let (mut lo, mut hi) = (self.probs[k], self.probs[k + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if !(lo < mid && mid < hi) {
                break;
            }
            if self.hermite(k, mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(crate::rng::uniform_open(rng))
    }

    /// `∫_0^1 (1 - exp(-α Q(u))) du`, the Laplace defect `1 - E e^{-αB}`.
    pub fn laplace_defect(&self, alpha: f64) -> Result<f64> {
        self.integrate(|q| -expm1(-alpha * q))
    }

    fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let r = integrate_with_breaks(
            |u| g(self.quantile(u)),
            &self.probs,
            Tolerance::new(1e-300, 1e-12),
        )?;
        Ok(r.value)
    }

    fn segment_for(&self, u: f64) -> usize {
        let k = self.probs.partition_point(|&p| p <= u).saturating_sub(1);
        k.min(self.probs.len() - 2)
    }

    fn hermite(&self, k: usize, u: f64) -> f64 {
        let h = self.probs[k + 1] - self.probs[k];
        let t = (u - self.probs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.log_q[k]
            + h10 * h * self.slopes[k]
            + h01 * self.log_q[k + 1]
            + h11 * h * self.slopes[k + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = alloc::vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for k in 1..n - 1 {
        if d[k - 1] > 0.0 && d[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
        }
    }
    m
}
