//! Histogram estimate of the Kullback-Leibler divergence.

use crate::nn::tensor::Tensor;

pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_SMOOTHING: f64 = 1e-6;

/// `Σ p log(p / q)` in nats for two histograms (normalized internally).
/// Every bin receives `smoothing` extra probability mass before
/// renormalization, so empty bins in `q` stay finite.
pub fn kl_histograms(p: &[f64], q: &[f64], smoothing: f64) -> f64 {
    assert_eq!(p.len(), q.len(), "histograms need the same bins");
    let norm = |h: &[f64]| -> Vec<f64> {
        let total: f64 = h.iter().sum();
        let v: Vec<f64> = h.iter().map(|x| x / total.max(f64::MIN_POSITIVE) + smoothing).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    };
    let (p, q) = (norm(p), norm(q));
    p.iter().zip(&q).map(|(a, b)| if *a > 0.0 { a * (a / b).ln() } else { 0.0 }).sum::<f64>().max(0.0)
}

fn column(t: &Tensor, c: usize) -> impl Iterator<Item = f64> + '_ {
    (0..t.rows()).map(move |r| t.get(r, c))
}

fn histogram(values: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for v in values {
        let i = if width > 0.0 { ((v - lo) / width).floor() as isize } else { 0 };
        h[i.clamp(0, bins as isize - 1) as usize] += 1.0;
    }
    h
}

/// `D(P ‖ Q)` between two sample sets with one row per sample, averaged over
/// columns. Each column is binned into `bins` equal bins spanning the pooled
/// range of both sets.
pub fn kl_divergence(p: &Tensor, q: &Tensor, bins: usize, smoothing: f64) -> f64 {
    assert_eq!(p.cols(), q.cols(), "sample sets need the same width");
    assert!(p.rows() > 0 && q.rows() > 0, "sample sets must be nonempty");
    let cols = p.cols();
    let mut total = 0.0;
    for c in 0..cols {
        let (lo, hi) = column(p, c)
            .chain(column(q, c))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        let hp = histogram(column(p, c), lo, hi, bins);
        let hq = histogram(column(q, c), lo, hi, bins);
        total += kl_histograms(&hp, &hq, smoothing);
    }
    total / cols as f64
}
