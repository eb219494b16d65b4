//! Time-sharing QAM reference for the two-user interference channel.
//!
//! An `(n, k)` user owns half of every `n` complex channel uses and sends
//! `2^(2k/n)`-QAM on them. Both users keep an average power of one per real
//! dimension, so an active symbol carries energy 4. Noise per real dimension is
//! `β = 1 / (2 R Eb/N0)` with `R = k / (2n)` bits per real dimension. A block is
//! `k` bits; for `k` smaller than the symbol size a block is a subset of a
//! symbol's bits.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::modulation::{index_bits, nearest, ModScheme};
use crate::channel::ebno_to_noise_var;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Energy of one active symbol.
pub const ACTIVE_SYMBOL_ENERGY: f64 = 4.0;

/// Scheme used by an `(n, k)` user.
pub fn scheme_for(n: usize, k: usize) -> Result<ModScheme> {
    if n == 0 || (2 * k) % n != 0 || !matches!(2 * k / n, 2 | 4) {
        return Err(Error::Domain(format!("time sharing needs 2k/n in {{2, 4}}, got ({n},{k})")));
    }
    ModScheme::with_bits(2 * k / n)
}

/// Simulates `blocks` blocks of one user and counts block errors.
pub fn time_sharing_blocks(n: usize, k: usize, ebno_db: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
    let scheme = scheme_for(n, k)?;
    let bps = scheme.bits_per_symbol();
    let beta = ebno_to_noise_var(k as f64 / (2.0 * n as f64), ebno_db)?;
    let std = beta.sqrt();
    let amp = ACTIVE_SYMBOL_ENERGY.sqrt();
    let points: Vec<Complex64> = scheme.points().into_iter().map(|p| p * amp).collect();

    let total_bits = blocks as usize * k;
    let symbols = total_bits.div_ceil(bps);
    let mut sent = Vec::with_capacity(symbols * bps);
    let mut received = Vec::with_capacity(symbols * bps);
    for _ in 0..symbols {
        let idx = rng.random_range(0..points.len());
        let y = points[idx]
            + Complex64::new(std * rng.sample::<f64, _>(StandardNormal), std * rng.sample::<f64, _>(StandardNormal));
        sent.extend(index_bits(idx, bps));
        received.extend(index_bits(nearest(&points, y), bps));
    }
    let errors = sent[..total_bits]
        .chunks(k)
        .zip(received[..total_bits].chunks(k))
        .filter(|(a, b)| a != b)
        .count();
    Ok(errors as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn scheme_selection() {
        assert_eq!(scheme_for(1, 1).unwrap(), ModScheme::Qpsk);
        assert_eq!(scheme_for(2, 2).unwrap(), ModScheme::Qpsk);
        assert_eq!(scheme_for(4, 8).unwrap(), ModScheme::Qam16);
        assert!(scheme_for(2, 1).is_err());
    }

    #[test]
    fn noiseless_is_error_free() {
        let mut r = rng::stream(1, 1);
        assert_eq!(time_sharing_blocks(4, 8, 200.0, &mut r, 10_000).unwrap(), 0);
    }
}
