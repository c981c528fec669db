//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Integrals with singular endpoints (the `x^{-1}` and `x^{-3/2}` factors of
//! Lévy densities near zero) are handled by the callers through a logarithmic
//! change of variables, see [`integrate_log`]. The routine here only has to
//! cope with smooth integrands on finite intervals.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge: achieved error {achieved:e} against requested {requested:e} after {intervals} subintervals"
    )]
    NonConvergence {
        achieved: f64,
        requested: f64,
        intervals: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("invalid integration range [{0}, {1}]")]
    InvalidRange(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        let rel = self.rel * value.abs();
        if rel > self.abs {
            rel
        } else {
            self.abs
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-300, 1e-11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFinite(x))
        }
    };

    let f_center = eval(center)?;
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let lo = eval(center - dx)?;
        let hi = eval(center + dx)?;
        *slot = (lo, hi);
        kronrod += WGK[j] * (lo + hi);
        abs_sum += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }

    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (f_center - mean).abs();
    for (j, (lo, hi)) in fv.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }

    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        let scale = libm::pow(200.0 * error / asc, 1.5);
        error = if scale < 1.0 { asc * scale } else { asc };
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * abs_sum;
        if floor > error {
            error = floor;
        }
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting the adaptive
/// subdivision from the supplied partition.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    if breaks.len() < 2 {
        return Err(QuadError::InvalidRange(f64::NAN, f64::NAN));
    }
    let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
    if !(first.is_finite() && last.is_finite()) || breaks.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuadError::InvalidRange(first, last));
    }

    let mut segments = Vec::with_capacity(64);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            segments.push(gauss_kronrod(&f, w[0], w[1])?);
        }
    }
    if segments.is_empty() {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }

    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.target(value) {
            return Ok(Integral {
                value,
                abs_error: error,
                intervals: segments.len(),
            });
        }

        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, be), (i, s)| {
                if s.error > be {
                    (i, s.error)
                } else {
                    (bi, be)
                }
            });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        let too_narrow = !(seg.a < mid && mid < seg.b)
            || (seg.b - seg.a) <= 1e3 * f64::EPSILON * (seg.a.abs() + seg.b.abs());
        if segments.len() >= MAX_INTERVALS || too_narrow {
            return Err(QuadError::NonConvergence {
                achieved: error,
                requested: tol.target(value),
                intervals: segments.len(),
            });
        }
        segments[worst] = gauss_kronrod(&f, seg.a, mid)?;
        segments.push(gauss_kronrod(&f, mid, seg.b)?);
    }
}

/// Integrates `g` over `[lo, hi]` (with `0 < lo < hi`) after substituting
/// `x = exp(u)`, i.e. computes `∫ g(e^u) e^u du` over `[ln lo, ln hi]`.
///
/// The log range is pre-split into unit-width pieces so that integrands that
/// vary over many decades of `x` are resolved from the start.
pub fn integrate_log<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<Integral, QuadError> {
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(QuadError::InvalidRange(lo, hi));
    }
    if hi <= lo {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
        });
    }
    let (ulo, uhi) = (crate::math::ln(lo), crate::math::ln(hi));
    let mut breaks = Vec::new();
    breaks.push(ulo);
    let mut u = libm::floor(ulo) + 1.0;
    while u < uhi {
        breaks.push(u);
        u += 1.0;
    }
    breaks.push(uhi);
    integrate_with_breaks(
        |u| {
            let x = crate::math::exp(u);
            g(x) * x
        },
        &breaks,
        tol,
    )
}
