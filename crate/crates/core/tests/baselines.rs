//! Classical systems against closed-form and exhaustive oracles.

mod common;

use common::theory;
use dlphy::baselines::{
    hamming_blocks, run_bler, time_sharing_blocks, uncoded_bpsk_blocks, BlerSettings, Hamming74, HammingDecoder,
    ModScheme, SvdLink,
};
use dlphy::channel::CMat;
use dlphy::rng;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

fn within_ci(errors: u64, trials: u64, expected: f64) -> bool {
    let (lo, hi) = theory::wilson(errors, trials);
    lo <= expected && expected <= hi
}

/// 99.9% interval, for checks that are not part of the acceptance list.
fn within_wide_ci(errors: u64, trials: u64, expected: f64) -> bool {
    let (lo, hi) = theory::wilson_z(errors, trials, 3.290_526_731_491_926);
    lo <= expected && expected <= hi
}

#[test]
fn hard_decoding_corrects_every_single_bit_error() {
    let code = Hamming74::new();
    let mut cases = 0;
    for m in 0..16usize {
        let data = [(m >> 3 & 1) as u8, (m >> 2 & 1) as u8, (m >> 1 & 1) as u8, (m & 1) as u8];
        let c = code.encode(&data);
        for j in 0..7 {
            let mut r = c;
            r[j] ^= 1;
            assert_eq!(code.decode_hard(&r), data);
            cases += 1;
        }
    }
    assert_eq!(cases, 112);
}

#[test]
fn mld_agrees_with_hard_decoding_when_hard_finds_the_nearest_word() {
    let code = Hamming74::new();
    let levels = [-1.5, -0.5, 0.5, 1.5];
    for idx in 0..4usize.pow(7) {
        let mut y = [0.0; 7];
        let mut t = idx;
        for v in &mut y {
            *v = levels[t % 4];
            t /= 4;
        }
        let hard: [u8; 7] = y.map(|v| u8::from(v < 0.0));
        let h = code.decode_hard(&hard);
        let hw = code.encode(&h);
        // Nearest codeword by brute force, independent of the decoder.
        let dist = |c: &[u8; 7]| c.iter().zip(&y).map(|(&b, v)| (v - (1.0 - 2.0 * f64::from(b))).powi(2)).sum::<f64>();
        let best = code.codebook().iter().map(dist).fold(f64::INFINITY, f64::min);
        if (dist(&hw) - best).abs() < 1e-12 {
            assert_eq!(dist(&code.encode(&code.decode_mld(&y))), best);
        }
    }
}

#[test]
fn qpsk_symbol_error_matches_closed_form() {
    let es_n0 = 10f64.powf(1.0);
    let std = (1.0 / (2.0 * es_n0)).sqrt();
    let points = ModScheme::Qpsk.points();
    let mut r = rng::stream(11, 0);
    let n = 1_000_000u64;
    let mut errors = 0;
    for _ in 0..n {
        let i = r.random_range(0..4usize);
        let y = points[i] + Complex64::new(std * r.sample::<f64, _>(StandardNormal), std * r.sample::<f64, _>(StandardNormal));
        let bits = ModScheme::Qpsk.demodulate(&[y]);
        errors += u64::from(bits != ModScheme::Qpsk.demodulate(&[points[i]]));
    }
    let q = theory::q(es_n0.sqrt());
    assert!(within_wide_ci(errors, n, 2.0 * q - q * q), "{errors}/{n}");
}

#[test]
fn uncoded_bpsk44_matches_closed_form() {
    let s = BlerSettings { min_errors: 20_000, max_trials: 2_000_000, chunk: 4096, seed: 3 };
    let res = run_bler(&[0.0], &s, |snr, r, n| uncoded_bpsk_blocks(4, snr, r, n)).unwrap();
    let p = res.points[0];
    let expected = theory::bpsk_block_error(4, 0.0);
    assert!((expected - 0.279).abs() < 1e-3);
    assert!(within_ci(p.errors, p.trials, expected), "{p:?} vs {expected}");
}

#[test]
fn hamming_hard_matches_binomial_sum() {
    let s = BlerSettings { min_errors: 2000, max_trials: 20_000_000, chunk: 8192, seed: 4 };
    let res = run_bler(&[0.0, 4.0, 8.0], &s, |snr, r, n| hamming_blocks(HammingDecoder::Hard, snr, r, n)).unwrap();
    for p in &res.points {
        let expected = theory::hamming_hard_block_error(p.snr_db);
        assert!(within_ci(p.errors, p.trials, expected), "{p:?} vs {expected}");
    }
}

#[test]
fn mld_is_never_worse_than_hard_decoding() {
    let s = BlerSettings { min_errors: 500, max_trials: 2_000_000, chunk: 4096, seed: 5 };
    let grid = [0.0, 2.0, 4.0, 6.0];
    let hard = run_bler(&grid, &s, |snr, r, n| hamming_blocks(HammingDecoder::Hard, snr, r, n)).unwrap();
    let mld = run_bler(&grid, &s, |snr, r, n| hamming_blocks(HammingDecoder::Mld, snr, r, n)).unwrap();
    for (h, m) in hard.points.iter().zip(&mld.points) {
        assert!(m.bler <= h.bler, "{m:?} vs {h:?}");
    }
    for w in mld.points.windows(2) {
        assert!(w[1].ci_low <= w[0].ci_high);
    }
}

#[test]
fn time_sharing_11_is_qpsk_bit_error() {
    // Active QPSK symbol energy 4, noise β = 1 / (2 · (1/2) · Eb/N0) per real dimension.
    let ebno_db = 4.0;
    let beta = 1.0 / 10f64.powf(ebno_db / 10.0);
    let expected = theory::q((4.0 / 2.0 / beta).sqrt());
    let s = BlerSettings { min_errors: 5000, max_trials: 5_000_000, chunk: 4096, seed: 6 };
    let res = run_bler(&[ebno_db], &s, |snr, r, n| time_sharing_blocks(1, 1, snr, r, n)).unwrap();
    let p = res.points[0];
    assert!(within_wide_ci(p.errors, p.trials, expected), "{p:?} vs {expected}");
}

#[test]
fn svd_precoding_on_identity_matches_single_stream_qpsk() {
    let link = SvdLink::new(CMat::identity(2)).unwrap();
    let snr_db = 8.0;
    let e = link.simulate(snr_db, &mut rng::stream(7, 0), 400_000);
    let q = theory::q(10f64.powf(snr_db / 10.0).sqrt());
    for s in e.per_stream {
        assert!(within_wide_ci(s, 400_000, 2.0 * q - q * q), "{e:?}");
    }
}
