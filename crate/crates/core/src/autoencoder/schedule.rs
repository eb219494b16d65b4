//! Training schedule shared by the autoencoder trainers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Steps per plateau window; 0 disables early stopping.
    pub plateau_window: usize,
    /// Windows without a relative improvement of `plateau_tol` before stopping.
    pub patience: usize,
    pub plateau_tol: f64,
    /// Learning rate is multiplied by this at 50% and again at 75% of `steps`.
    pub lr_drop: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            steps: 10_000,
            batch_size: 256,
            learning_rate: 0.001,
            plateau_window: 500,
            patience: 6,
            plateau_tol: 1e-3,
            lr_drop: 1.0,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.steps == 0 {
            errs.push("steps must be positive".to_string());
        }
        if self.batch_size == 0 {
            errs.push("batch_size must be positive".to_string());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            errs.push(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.lr_drop > 0.0 && self.lr_drop <= 1.0) {
            errs.push(format!("lr_drop must be in (0, 1], got {}", self.lr_drop));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Learning rate in effect at `step`.
    pub fn lr_at(&self, step: usize) -> f64 {
        let mut lr = self.learning_rate;
        if step >= self.steps / 2 {
            lr *= self.lr_drop;
        }
        if step >= self.steps * 3 / 4 {
            lr *= self.lr_drop;
        }
        lr
    }
}

/// Tracks windowed mean loss and decides when training has stalled.
#[derive(Debug, Clone)]
pub(crate) struct Plateau {
    window: usize,
    patience: usize,
    tol: f64,
    acc: f64,
    count: usize,
    best: f64,
    stale: usize,
}

impl Plateau {
    pub(crate) fn new(s: &Schedule) -> Self {
        Self {
            window: s.plateau_window,
            patience: s.patience,
            tol: s.plateau_tol,
            acc: 0.0,
            count: 0,
            best: f64::INFINITY,
            stale: 0,
        }
    }

    /// Records one loss; returns true when training should stop.
    pub(crate) fn push(&mut self, loss: f64) -> bool {
        if self.window == 0 {
            return false;
        }
        self.acc += loss;
        self.count += 1;
        if self.count < self.window {
            return false;
        }
        let mean = self.acc / self.count as f64;
        self.acc = 0.0;
        self.count = 0;
        if mean < self.best * (1.0 - self.tol) {
            self.best = mean;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= self.patience
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_stops_after_patience_flat_windows() {
        let s = Schedule { plateau_window: 2, patience: 2, ..Schedule::default() };
        let mut p = Plateau::new(&s);
        let losses = [4.0, 4.0, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        let stops: Vec<bool> = losses.iter().map(|&l| p.push(l)).collect();
        assert_eq!(stops, [false, false, false, false, false, false, false, true]);
    }

    #[test]
    fn lr_drops_twice() {
        let s = Schedule { steps: 100, lr_drop: 0.5, learning_rate: 1.0, ..Schedule::default() };
        assert_eq!((s.lr_at(10), s.lr_at(60), s.lr_at(90)), (1.0, 0.5, 0.25));
    }
}
