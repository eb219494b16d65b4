//! Received-power readings.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::scenario::{Node, Scenario};
use crate::channel::link::link_gain;
use crate::error::Result;
use crate::rng::Rng;

/// Power measured at `at` while `transmitters` are on the air.
///
/// Each transmitter gets one gain draw for the slot (see
/// [`Scenario::sensing_link`]) and sends random
/// unit-modulus symbols; the reading is the mean of `|Σ √(P g) x + n|²` over
/// `scenario.sensing_samples` samples with unit-power complex noise.
pub fn sense(scenario: &Scenario, at: Node, transmitters: &[Node], rng: &mut Rng) -> Result<f64> {
    let mut amps = Vec::with_capacity(transmitters.len());
    for &tx in transmitters {
        let link = scenario.sensing_link(tx, at)?;
        let p = 10f64.powf(link.tx_power_db / 10.0);
        amps.push((p * link_gain(&link, rng)).sqrt());
    }
    let l = scenario.sensing_samples.max(1);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for _ in 0..l {
        let mut y = Complex64::new(
            half * rng.sample::<f64, _>(StandardNormal),
            half * rng.sample::<f64, _>(StandardNormal),
        );
        for &a in &amps {
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            y += Complex64::from_polar(a, phase);
        }
        total += y.norm_sqr();
    }
    Ok(total / l as f64)
}
