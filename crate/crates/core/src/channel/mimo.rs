//! Rayleigh MIMO channels and the MMSE estimation-error model.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::cmat::CMat;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// One channel draw `y = h x + n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// `N_r x N_t`.
    pub h: CMat,
    /// Complex noise variance per receive antenna.
    pub noise_var: f64,
}

impl ChannelRealization {
    pub fn tx(&self) -> usize {
        self.h.cols
    }

    pub fn rx(&self) -> usize {
        self.h.rows
    }
}

/// A CN(0, var) sample: real and imaginary parts N(0, var/2).
pub fn complex_gaussian(var: f64, rng: &mut Rng) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `N_r x N_t` matrix with i.i.d. CN(0, 1) entries and unit noise variance.
pub fn draw_rayleigh_mimo(n_t: usize, n_r: usize, rng: &mut Rng) -> Result<ChannelRealization> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::Domain("antenna counts must be at least 1".into()));
    }
    let data = (0..n_t * n_r).map(|_| complex_gaussian(1.0, rng)).collect();
    Ok(ChannelRealization { h: CMat::from_rows(n_r, n_t, data), noise_var: 1.0 })
}

/// Variance of the MMSE channel-estimation error,
/// `1 / (1 + (rho / N_t) * T)` for training SNR `rho` (linear) and `T`
/// training samples.
pub fn mmse_error_variance(rho_tau: f64, t_tau: f64, n_t: usize) -> Result<f64> {
    if !(rho_tau >= 0.0) || !(t_tau >= 0.0) || n_t == 0 {
        return Err(Error::Domain(format!(
            "mmse_error_variance needs rho >= 0, T >= 0, N_t >= 1 (got {rho_tau}, {t_tau}, {n_t})"
        )));
    }
    if rho_tau.is_infinite() || t_tau.is_infinite() {
        return Ok(if rho_tau == 0.0 || t_tau == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 / (1.0 + rho_tau / n_t as f64 * t_tau))
}

/// Estimation error matrix with i.i.d. CN(0, `var`) entries.
pub fn estimation_error(rows: usize, cols: usize, var: f64, rng: &mut Rng) -> CMat {
    CMat::from_rows(rows, cols, (0..rows * cols).map(|_| complex_gaussian(var, rng)).collect())
}
