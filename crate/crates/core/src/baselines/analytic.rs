//! Closed-form reference curves.

use statrs::function::erf::erfc;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn bpsk_bit_error(ebno_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebno_db / 10.0)).sqrt())
}

/// Any of `k` independent BPSK bits wrong.
pub fn bpsk_block_error(k: u32, ebno_db: f64) -> f64 {
    1.0 - (1.0 - bpsk_bit_error(ebno_db)).powi(k as i32)
}

/// Hard-decision Hamming(7,4): two or more channel-bit errors.
pub fn hamming_hard_block_error(ebno_db: f64) -> f64 {
    let p = q_function((2.0 * 4.0 / 7.0 * 10f64.powf(ebno_db / 10.0)).sqrt());
    let ok = (1.0 - p).powi(7) + 7.0 * p * (1.0 - p).powi(6);
    1.0 - ok
}

/// Gray QPSK symbol error at symbol SNR `es_n0` (linear).
pub fn qpsk_symbol_error(es_n0: f64) -> f64 {
    let q = q_function(es_n0.sqrt());
    2.0 * q - q * q
}
