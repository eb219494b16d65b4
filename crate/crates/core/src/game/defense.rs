//! Deliberate wrong transmit decisions that poison the adversary's training
//! data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which slots count as the most confident ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ranking {
    /// Smallest `min(S, 1 - S)`: scores closest to 0 or 1.
    #[default]
    Extremeness,
    /// Largest `|S - eta|`: scores farthest from the decision threshold.
    ThresholdDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefensePolicy {
    /// Percentage of slots whose decision is flipped.
    pub p_d: f64,
    pub eta: f64,
    pub ranking: Ranking,
}

impl DefensePolicy {
    pub fn new(p_d: f64, eta: f64, ranking: Ranking) -> Result<Self> {
        let mut errs = Vec::new();
        if !(0.0..=100.0).contains(&p_d) {
            errs.push(format!("p_d must lie in [0, 100], got {p_d}"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            errs.push(format!("eta must lie in (0, 1), got {eta}"));
        }
        if errs.is_empty() {
            Ok(Self { p_d, eta, ranking })
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Number of slots flipped out of `slots`.
    pub fn budget(&self, slots: usize) -> usize {
        ((self.p_d / 100.0) * slots as f64).floor() as usize
    }

    /// Marks the [`DefensePolicy::budget`] most confident slots. Ties go to the
    /// earlier slot.
    pub fn select(&self, scores: &[f64]) -> Vec<bool> {
        let key = |s: f64| match self.ranking {
            Ranking::Extremeness => s.min(1.0 - s),
            Ranking::ThresholdDistance => -(s - self.eta).abs(),
        };
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| key(scores[a]).total_cmp(&key(scores[b])).then(a.cmp(&b)));
        let mut flips = vec![false; scores.len()];
        for &i in order.iter().take(self.budget(scores.len())) {
            flips[i] = true;
        }
        flips
    }
}

/// Transmit decisions after flipping the selected slots, plus the flip mask.
pub fn apply_defense(transmit: &[bool], scores: &[f64], policy: &DefensePolicy) -> (Vec<bool>, Vec<bool>) {
    let flips = policy.select(scores);
    let out = transmit.iter().zip(&flips).map(|(&t, &f)| t != f).collect();
    (out, flips)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_budget() {
        let err = DefensePolicy::new(150.0, 0.25, Ranking::Extremeness).unwrap_err();
        assert!(err.to_string().contains("p_d"), "{err}");
    }

    #[test]
    fn flips_most_extreme_scores() {
        let p = DefensePolicy::new(50.0, 0.25, Ranking::Extremeness).unwrap();
        assert_eq!(p.select(&[0.5, 0.01, 0.4, 0.98]), vec![false, true, false, true]);
        let p = DefensePolicy { ranking: Ranking::ThresholdDistance, ..p };
        assert_eq!(p.select(&[0.3, 0.01, 0.2, 0.98]), vec![false, true, false, true]);
    }
}
