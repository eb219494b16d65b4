//! Gray-mapped BPSK, QPSK and 16-QAM with unit average symbol energy.
//!
//! Bit-exact tables (bits listed first to last, `j` the imaginary unit):
//!
//! | scheme | bits | symbol |
//! |---|---|---|
//! | BPSK | `b` | `1 - 2b` |
//! | QPSK | `b0 b1` | `((1 - 2b0) + j(1 - 2b1)) / sqrt(2)` |
//! | 16-QAM | `b0 b1 b2 b3` | `(L(b0 b1) + j L(b2 b3)) / sqrt(10)` |
//!
//! with the per-axis Gray levels `L(00) = -3`, `L(01) = -1`, `L(11) = +1`,
//! `L(10) = +3`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ComplexVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModScheme {
    Bpsk,
    Qpsk,
    Qam16,
}

fn gray_level(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

impl ModScheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ModScheme::Bpsk => 1,
            ModScheme::Qpsk => 2,
            ModScheme::Qam16 => 4,
        }
    }

    /// Scheme carrying `bits` bits per symbol.
    pub fn with_bits(bits: usize) -> Result<Self> {
        match bits {
            1 => Ok(ModScheme::Bpsk),
            2 => Ok(ModScheme::Qpsk),
            4 => Ok(ModScheme::Qam16),
            _ => Err(Error::Domain(format!("no constellation with {bits} bits per symbol"))),
        }
    }

    /// Symbol for the bit group `bits` (length `bits_per_symbol`).
    pub fn map(self, bits: &[u8]) -> Complex64 {
        let s = |b: u8| 1.0 - 2.0 * f64::from(b);
        match self {
            ModScheme::Bpsk => Complex64::new(s(bits[0]), 0.0),
            ModScheme::Qpsk => Complex64::new(s(bits[0]), s(bits[1])) / 2f64.sqrt(),
            ModScheme::Qam16 => {
                Complex64::new(gray_level(bits[0], bits[1]), gray_level(bits[2], bits[3])) / 10f64.sqrt()
            }
        }
    }

    /// All points, indexed by their bit group read as a big-endian integer.
    pub fn points(self) -> Vec<Complex64> {
        let b = self.bits_per_symbol();
        (0..1usize << b).map(|i| self.map(&index_bits(i, b))).collect()
    }

    pub fn modulate(self, bits: &[u8]) -> Result<ComplexVec> {
        let b = self.bits_per_symbol();
        if bits.len() % b != 0 {
            return Err(Error::Dimension(format!(
                "{} bits is not a multiple of {b} bits per symbol",
                bits.len()
            )));
        }
        if bits.iter().any(|&v| v > 1) {
            return Err(Error::Domain("bits must be 0 or 1".into()));
        }
        Ok(bits.chunks(b).map(|g| self.map(g)).collect())
    }

    /// Minimum-distance slicing back to bits.
    pub fn demodulate(self, y: &[Complex64]) -> Vec<u8> {
        let points = self.points();
        let b = self.bits_per_symbol();
        let mut out = Vec::with_capacity(y.len() * b);
        for &v in y {
            out.extend(index_bits(nearest(&points, v), b));
        }
        out
    }
}

/// Index of the point closest to `y`.
pub fn nearest(points: &[Complex64], y: Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (y - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Big-endian bits of `i`.
pub fn index_bits(i: usize, width: usize) -> Vec<u8> {
    (0..width).map(|k| ((i >> (width - 1 - k)) & 1) as u8).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [ModScheme; 3] = [ModScheme::Bpsk, ModScheme::Qpsk, ModScheme::Qam16];

    #[test]
    fn unit_average_energy() {
        for s in ALL {
            let p = s.points();
            let e: f64 = p.iter().map(|c| c.norm_sqr()).sum::<f64>() / p.len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{s:?} {e}");
        }
    }

    #[test]
    fn nearest_neighbours_differ_in_one_bit() {
        for s in ALL.into_iter().skip(1) {
            let p = s.points();
            let dmin = (0..p.len())
                .flat_map(|i| (0..p.len()).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| (p[i] - p[j]).norm())
                .fold(f64::INFINITY, f64::min);
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if i != j && ((p[i] - p[j]).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "{s:?} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_and_bpsk_sign() {
        assert_eq!(ModScheme::Bpsk.modulate(&[0, 1]).unwrap(), vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let bits: Vec<u8> = (0..64).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        for s in ALL {
            assert_eq!(s.demodulate(&s.modulate(&bits).unwrap()), bits);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(ModScheme::Qam16.modulate(&[0, 1, 1]), Err(Error::Dimension(_))));
    }
}
