//! Classical single-antenna systems as Monte-Carlo trial functions.
//!
//! Coded and uncoded binary systems use real BPSK channel uses with unit
//! energy and noise variance `β = 1 / (2 R Eb/N0)` per use.

use rand::Rng as _;
use rand_distr::StandardNormal;

use super::hamming::{message_bits, Hamming74};
use crate::channel::ebno_to_noise_var;
use crate::error::Result;
use crate::rng::Rng;

fn bpsk(b: u8) -> f64 {
    1.0 - 2.0 * f64::from(b)
}

fn noisy(rng: &mut Rng, std: f64) -> f64 {
    std * rng.sample::<f64, _>(StandardNormal)
}

/// Uncoded BPSK over `k` uses; a block fails if any bit is wrong.
pub fn uncoded_bpsk_blocks(k: usize, ebno_db: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
    let std = ebno_to_noise_var(1.0, ebno_db)?.sqrt();
    let mut errors = 0;
    for _ in 0..blocks {
        let mut wrong = false;
        for _ in 0..k {
            let b: u8 = rng.random_range(0..2);
            let y = bpsk(b) + noisy(rng, std);
            wrong |= u8::from(y < 0.0) != b;
        }
        errors += u64::from(wrong);
    }
    Ok(errors)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HammingDecoder {
    Hard,
    Mld,
}

/// Hamming(7,4) over BPSK at rate 4/7.
pub fn hamming_blocks(decoder: HammingDecoder, ebno_db: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
    let code = Hamming74::new();
    let std = ebno_to_noise_var(4.0 / 7.0, ebno_db)?.sqrt();
    let mut errors = 0;
    for _ in 0..blocks {
        let m = rng.random_range(0..16usize);
        let c = code.codebook()[m];
        let mut y = [0.0; 7];
        for (v, &b) in y.iter_mut().zip(&c) {
            *v = bpsk(b) + noisy(rng, std);
        }
        let decoded = match decoder {
            HammingDecoder::Hard => {
                let mut r = [0u8; 7];
                for (h, v) in r.iter_mut().zip(&y) {
                    *h = u8::from(*v < 0.0);
                }
                code.decode_hard(&r)
            }
            HammingDecoder::Mld => code.decode_mld(&y),
        };
        errors += u64::from(decoded != message_bits(m));
    }
    Ok(errors)
}
