//! Additive white Gaussian noise and Eb/N0 calibration.
//!
//! Noise convention: `beta` is the variance of each *real* dimension. A
//! complex sample therefore carries noise power `2 * beta`.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::ComplexVec;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Per-real-dimension noise variance `1 / (2 R Eb/N0)` for a system sending
/// `rate` bits per real channel use with unit energy per real use.
pub fn ebno_to_noise_var(rate: f64, ebno_db: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0)))
}

/// `y = x + n` with `n` i.i.d. N(0, beta) on the real and imaginary parts.
pub fn apply_awgn(x: &[Complex64], beta: f64, rng: &mut Rng) -> Result<ComplexVec> {
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("noise variance must be nonnegative, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(x.to_vec());
    }
    let s = beta.sqrt();
    Ok(x
        .iter()
        .map(|&v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(s * re, s * im)
        })
        .collect())
}

/// Real-valued counterpart of [`apply_awgn`], in place.
pub fn add_real_awgn(x: &mut [f64], beta: f64, rng: &mut Rng) {
    if beta == 0.0 {
        return;
    }
    let s = beta.sqrt();
    for v in x {
        let z: f64 = rng.sample(StandardNormal);
        *v += s * z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn hamming_rate_at_zero_db() {
        let b = ebno_to_noise_var(4.0 / 7.0, 0.0).unwrap();
        assert!((b - 0.875).abs() < 1e-15);
    }

    #[test]
    fn training_point_value() {
        // 1 / (2 * 4/7 * 10^0.7) = 1 / (1.142857 * 5.011872) = 0.1745855
        let b = ebno_to_noise_var(4.0 / 7.0, 7.0).unwrap();
        assert!((b - 0.174_585_5).abs() < 1e-6, "{b}");
    }

    #[test]
    fn high_snr_limit_and_domain() {
        assert!(ebno_to_noise_var(1.0, 300.0).unwrap() < 1e-30);
        assert!(ebno_to_noise_var(0.0, 1.0).is_err());
        assert!(ebno_to_noise_var(-1.0, 1.0).is_err());
    }

    #[test]
    fn zero_variance_is_identity() {
        let x = vec![Complex64::new(1.0, -2.0); 5];
        let y = apply_awgn(&x, 0.0, &mut rng::stream(1, 1)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn sample_moments() {
        let n = 1_000_000;
        let beta = 0.3;
        let x = vec![Complex64::new(0.5, 0.5); n];
        let y = apply_awgn(&x, beta, &mut rng::stream(2, 1)).unwrap();
        let d: Vec<f64> = y.iter().zip(&x).flat_map(|(a, b)| [(a - b).re, (a - b).im]).collect();
        let m = d.iter().sum::<f64>() / d.len() as f64;
        let v = d.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / d.len() as f64;
        assert!((v / beta - 1.0).abs() < 0.01, "variance {v}");
        assert!(m.abs() < 3.0 * (beta / d.len() as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn same_stream_same_noise() {
        let x = vec![Complex64::new(0.0, 0.0); 8];
        let a = apply_awgn(&x, 1.0, &mut rng::stream(5, 5)).unwrap();
        let b = apply_awgn(&x, 1.0, &mut rng::stream(5, 5)).unwrap();
        assert_eq!(a, b);
    }
}
