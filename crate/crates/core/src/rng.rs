//! Variate generation on top of a caller-supplied [`RngCore`].

use rand_core::RngCore;

use crate::math::ln;

/// Uniform draw on the open interval `(0, 1)` with 53 bits of resolution.
#[inline]
pub fn uniform_open<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Exponential draw with the given rate, by inversion.
#[inline]
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -ln(uniform_open(rng)) / rate
}
