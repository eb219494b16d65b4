//! SGD with momentum and Adam.

use serde::{Deserialize, Serialize};

use super::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OptimKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimKind {
    pub fn adam() -> Self {
        OptimKind::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }

    pub fn sgd(momentum: f64) -> Self {
        OptimKind::SgdMomentum { momentum }
    }
}

/// Optimizer state for one network. Moment buffers are created lazily on the
/// first step and follow the order of [`Network::params`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimState {
    pub kind: OptimKind,
    pub learning_rate: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl OptimState {
    pub fn new(kind: OptimKind, learning_rate: f64) -> Self {
        assert!(learning_rate > 0.0, "learning rate must be positive");
        if let OptimKind::SgdMomentum { momentum } = kind {
            assert!((0.0..1.0).contains(&momentum), "momentum must lie in [0, 1)");
        }
        Self { kind, learning_rate, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn adam(learning_rate: f64) -> Self {
        Self::new(OptimKind::adam(), learning_rate)
    }

    /// Applies one update using the gradients currently stored in `net`.
    pub fn step(&mut self, net: &mut Network) {
        let mut params = net.params();
        if self.m.len() != params.len() {
            self.m = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimKind::SgdMomentum { momentum } => {
                for (p, vel) in params.iter_mut().zip(&mut self.m) {
                    for ((w, &g), u) in p.value.iter_mut().zip(p.grad).zip(vel.iter_mut()) {
                        *u = momentum * *u - lr * g;
                        *w += *u;
                    }
                }
            }
            OptimKind::Adam { beta1, beta2, epsilon } => {
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
                    for (((w, &g), mi), vi) in
                        p.value.iter_mut().zip(p.grad).zip(m.iter_mut()).zip(v.iter_mut())
                    {
                        *mi = beta1 * *mi + (1.0 - beta1) * g;
                        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                        let mhat = *mi / c1;
                        let vhat = *vi / c2;
                        *w -= lr * mhat / (vhat.sqrt() + epsilon);
                    }
                }
            }
        }
    }
}
