//! Free-space path loss with log-normal shadowing.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub distance: f64,
    /// Transmit power in dB above unit noise power.
    pub tx_power_db: f64,
    pub shadowing_sigma_db: f64,
}

impl LinkModel {
    pub fn new(distance: f64, tx_power_db: f64, shadowing_sigma_db: f64) -> Result<Self> {
        if !(distance > 0.0) {
            return Err(Error::Domain(format!("link distance must be positive, got {distance}")));
        }
        if !(shadowing_sigma_db >= 0.0) {
            return Err(Error::Domain("shadowing sigma must be nonnegative".into()));
        }
        Ok(Self { distance, tx_power_db, shadowing_sigma_db })
    }

    /// Mean received SNR ignoring shadowing (linear).
    pub fn median_snr(&self) -> f64 {
        10f64.powf(self.tx_power_db / 10.0) / (self.distance * self.distance)
    }

    /// Received SNR for one shadowing draw (linear).
    pub fn received_snr(&self, rng: &mut Rng) -> f64 {
        10f64.powf(self.tx_power_db / 10.0) * link_gain(self, rng)
    }
}

/// Linear power gain `(1/d^2) 10^(X/10)` with `X ~ N(0, sigma_db^2)`.
pub fn link_gain(link: &LinkModel, rng: &mut Rng) -> f64 {
    let x: f64 = if link.shadowing_sigma_db > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        link.shadowing_sigma_db * z
    } else {
        0.0
    };
    10f64.powf(x / 10.0) / (link.distance * link.distance)
}

/// Probability that a shadowed link's SNR falls below `threshold` (linear):
/// `Φ(10 log10(threshold / median_snr) / sigma)`.
pub fn outage_probability(link: &LinkModel, threshold: f64) -> f64 {
    let margin_db = 10.0 * (threshold / link.median_snr()).log10();
    if link.shadowing_sigma_db == 0.0 {
        return if margin_db > 0.0 { 1.0 } else { 0.0 };
    }
    Normal::standard().cdf(margin_db / link.shadowing_sigma_db)
}

/// Shadowing sigma (dB) that makes [`outage_probability`] equal `p`.
pub fn sigma_for_outage(median_snr: f64, threshold: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain("target outage must lie in (0, 0.5)".into()));
    }
    let margin_db = 10.0 * (threshold / median_snr).log10();
    if margin_db >= 0.0 {
        return Err(Error::Domain("threshold exceeds the median SNR".into()));
    }
    Ok(margin_db / Normal::standard().inverse_cdf(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn deterministic_without_shadowing() {
        let l = LinkModel::new(10.0, 30.0, 0.0).unwrap();
        assert_eq!(link_gain(&l, &mut rng::stream(0, 0)), 0.01);
    }

    #[test]
    fn rejects_nonpositive_distance() {
        assert!(LinkModel::new(0.0, 30.0, 1.0).is_err());
    }

    #[test]
    fn calibrated_sigma_reproduces_outage() {
        let l = LinkModel::new(10.0, 30.0, 3.04).unwrap();
        let p = outage_probability(&l, 3.0);
        assert!((p - 0.0425).abs() < 0.001, "{p}");
        let s = sigma_for_outage(10.0, 3.0, 17.0 / 400.0).unwrap();
        assert!((s - 3.04).abs() < 0.01, "{s}");
    }
}
