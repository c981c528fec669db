#![allow(dead_code)]

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Composite Simpson rule for `∫_lo^hi f(x) dx` after `x = e^u`, with a fixed
/// number of panels. Deliberately independent of the crate's adaptive rule.
pub fn simpson_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let g = |u: f64| {
        let x = u.exp();
        f(x) * x
    };
    let mut acc = g(a) + g(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn gamma_density(shape: f64, rate: f64) -> impl Fn(f64) -> f64 {
    move |x| shape / x * (-rate * x).exp()
}

pub fn ig_density(mean: f64, shape: f64) -> impl Fn(f64) -> f64 {
    move |x| (shape / (2.0 * std::f64::consts::PI)).sqrt() * x.powf(-1.5) * (-shape * x / (2.0 * mean * mean)).exp()
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean and batch-means standard error of a correlated series.
pub fn batch_mean_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let size = xs.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (_, se) = mean_and_se(&means);
    let mean = xs[..batches * size].iter().sum::<f64>() / (batches * size) as f64;
    (mean, se)
}
