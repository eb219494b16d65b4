//! Learned constellations and their CSV form.
//!
//! Encoder rows are read as complex symbols from consecutive pairs: even
//! indices are real parts, odd indices imaginary parts. With an odd number of
//! real uses the last use becomes a real-valued symbol.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::nn::Tensor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    /// `points[message][channel_use]`.
    pub points: Vec<Vec<Complex64>>,
}

impl Constellation {
    pub fn from_real_rows(t: &Tensor) -> Self {
        let points = (0..t.rows())
            .map(|r| t.row(r).chunks(2).map(|c| Complex64::new(c[0], c.get(1).copied().unwrap_or(0.0))).collect())
            .collect();
        Self { points }
    }

    pub fn messages(&self) -> usize {
        self.points.len()
    }

    /// Symbols of every message on channel use `u`.
    pub fn channel_use(&self, u: usize) -> Vec<Complex64> {
        self.points.iter().map(|p| p[u]).collect()
    }

    /// `(max - min) / mean` of the symbol amplitudes on channel use `u`.
    pub fn amplitude_spread(&self, u: usize) -> f64 {
        let a: Vec<f64> = self.channel_use(u).iter().map(|c| c.norm()).collect();
        let max = a.iter().copied().fold(f64::MIN, f64::max);
        let min = a.iter().copied().fold(f64::MAX, f64::min);
        (max - min) / (a.iter().sum::<f64>() / a.len() as f64)
    }

    /// Angular gaps in degrees between neighbouring symbols on channel use
    /// `u`, walking once around the circle.
    pub fn angular_gaps_deg(&self, u: usize) -> Vec<f64> {
        let mut ang: Vec<f64> = self.channel_use(u).iter().map(|c| c.arg().to_degrees()).collect();
        ang.sort_by(f64::total_cmp);
        let mut gaps: Vec<f64> = ang.windows(2).map(|w| w[1] - w[0]).collect();
        if let (Some(first), Some(last)) = (ang.first(), ang.last()) {
            gaps.push(360.0 - (last - first));
        }
        gaps
    }

    /// Smallest distance between two messages' symbol sequences.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let s: f64 = self.points[i].iter().zip(&self.points[j]).map(|(a, b)| (a - b).norm_sqr()).sum();
                d = d.min(s.sqrt());
            }
        }
        d
    }

    pub fn to_csv(&self, seed: u64) -> String {
        let mut out = format!("# seed={seed}\nmessage_index,channel_use,re,im\n");
        for (m, syms) in self.points.iter().enumerate() {
            for (u, c) in syms.iter().enumerate() {
                let _ = writeln!(out, "{m},{u},{:.9},{:.9}", c.re, c.im);
            }
        }
        out
    }
}
