//! Closed-form error probabilities, computed independently of the library:
//! the Gaussian tail is integrated numerically with composite Simpson's rule
//! instead of calling an erfc implementation.

/// Q(x) = P(N(0,1) > x) by Simpson integration of the density on [x, x + 40].
pub fn q(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q(-x);
    }
    let (a, b) = (x, x + 40.0);
    let n = 200_000;
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
    }
    s * h / 3.0
}

pub fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Uncoded BPSK block of `k` bits at `ebno_db`: 1 - (1 - Q(sqrt(2 Eb/N0)))^k.
pub fn bpsk_block_error(k: u32, ebno_db: f64) -> f64 {
    let p = q((2.0 * 10f64.powf(ebno_db / 10.0)).sqrt());
    1.0 - (1.0 - p).powi(k as i32)
}

/// Hard-decision Hamming(7,4): block error iff two or more of the seven
/// channel bits flip. Channel bit energy is R Eb with R = 4/7.
pub fn hamming_hard_block_error(ebno_db: f64) -> f64 {
    let p = q((2.0 * 4.0 / 7.0 * 10f64.powf(ebno_db / 10.0)).sqrt());
    (2..=7u64).map(|j| binomial(7, j) * p.powi(j as i32) * (1.0 - p).powi(7 - j as i32)).sum()
}

/// Wilson score interval at 95%.
pub fn wilson(errors: u64, trials: u64) -> (f64, f64) {
    wilson_z(errors, trials, 1.959_963_984_540_054)
}

/// Wilson score interval for normal quantile `z`.
pub fn wilson_z(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}
