//! Two-user interference channel with jointly trained autoencoder pairs.
//!
//! Each user maps one of `2^k` messages to `2n` real values (`n` complex
//! channel uses) with average power one per real dimension. Both receivers see
//! the sum of both transmissions plus independent noise. Training minimizes
//! `α L₁ + (1 - α) L₂`, with `α` re-weighted after every step toward the user
//! that is currently doing worse.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::schedule::{Plateau, Schedule};
use super::single::{build_pair, diverged, revive, PowerConstraint};
use super::Constellation;
use crate::baselines::{ErrorRateResult, BlerPoint};
use crate::channel::ebno_to_noise_var;
use crate::error::{Error, Result};
use crate::nn::{cross_entropy, Init, Mode, Network, OptimState, Tensor};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcConfig {
    pub n: usize,
    pub k: usize,
    pub train_ebno_db: f64,
    pub init: Init,
    pub schedule: Schedule,
}

impl IcConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k, train_ebno_db: 7.0, init: Init::ScaledUniform, schedule: Schedule::default() }
    }

    pub fn messages(&self) -> usize {
        1 << self.k
    }

    /// Bits per real dimension.
    pub fn rate(&self) -> f64 {
        self.k as f64 / (2.0 * self.n as f64)
    }
}

/// Next user weight: `L₁ / (L₁ + L₂)`, unchanged if both losses are zero.
pub fn next_alpha(alpha: f64, l1: f64, l2: f64) -> f64 {
    let total = l1 + l2;
    if total > 0.0 {
        l1 / total
    } else {
        alpha
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcPair {
    pub cfg: IcConfig,
    pub encoders: [Network; 2],
    pub decoders: [Network; 2],
    pub seed: u64,
    pub alpha_trace: Vec<f64>,
    pub loss_trace: Vec<[f64; 2]>,
}

impl IcPair {
    pub fn new(cfg: IcConfig, seed: u64) -> Result<Self> {
        if cfg.n == 0 || cfg.k == 0 || cfg.k > 16 {
            return Err(Error::Config(vec![format!("invalid IC system ({},{})", cfg.n, cfg.k)]));
        }
        cfg.schedule.validate()?;
        let m = cfg.messages();
        let (e1, d1) = build_pair(m, 2 * cfg.n, PowerConstraint::AvgPower, cfg.init, rng::stream_id(&[seed, 1]))?;
        let (e2, d2) = build_pair(m, 2 * cfg.n, PowerConstraint::AvgPower, cfg.init, rng::stream_id(&[seed, 2]))?;
        Ok(Self { cfg, encoders: [e1, e2], decoders: [d1, d2], seed, alpha_trace: vec![0.5], loss_trace: Vec::new() })
    }

    /// Codebooks of both users (all messages once, so the average power is exact).
    pub fn codebooks(&mut self) -> Result<[Tensor; 2]> {
        let m = self.cfg.messages();
        let ids: Vec<usize> = (0..m).collect();
        let oh = Tensor::one_hot(&ids, m);
        Ok([self.encoders[0].forward(&oh, Mode::Eval)?, self.encoders[1].forward(&oh, Mode::Eval)?])
    }

    pub fn constellations(&mut self) -> Result<[Constellation; 2]> {
        let [a, b] = self.codebooks()?;
        Ok([Constellation::from_real_rows(&a), Constellation::from_real_rows(&b)])
    }

    /// Block errors of user `u` over `blocks` random message pairs.
    pub fn count_errors(&self, cbs: &[Tensor; 2], user: usize, ebno_db: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
        let std = ebno_to_noise_var(self.cfg.rate(), ebno_db)?.sqrt();
        let (m, w) = (self.cfg.messages(), 2 * self.cfg.n);
        let mut dec = self.decoders[user].clone();
        let mut errors = 0;
        let mut left = blocks as usize;
        while left > 0 {
            let b = left.min(4096);
            let mut own = Vec::with_capacity(b);
            let mut y = Vec::with_capacity(b * w);
            for _ in 0..b {
                let m1 = rng.random_range(0..m);
                let m2 = rng.random_range(0..m);
                own.push(if user == 0 { m1 } else { m2 });
                for (a, c) in cbs[0].row(m1).iter().zip(cbs[1].row(m2)) {
                    y.push(a + c + std * rng.sample::<f64, _>(StandardNormal));
                }
            }
            let d = dec.forward(&Tensor::matrix(b, w, y), Mode::Eval)?.argmax_rows();
            errors += d.iter().zip(&own).filter(|(a, b)| a != b).count() as u64;
            left -= b;
        }
        Ok(errors)
    }

    /// Normalized inner product of the two users' first-to-second codeword
    /// difference vectors; near zero when the users transmit in orthogonal
    /// directions.
    pub fn direction_overlap(&mut self) -> Result<f64> {
        let [a, b] = self.codebooks()?;
        let diff = |t: &Tensor| t.row(1).iter().zip(t.row(0)).map(|(x, y)| x - y).collect::<Vec<f64>>();
        let (c1, c2) = (diff(&a), diff(&b));
        let dot: f64 = c1.iter().zip(&c2).map(|(x, y)| x * y).sum();
        let n1 = c1.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n2 = c2.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(dot.abs() / (n1 * n2))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let pair: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let [e0, e1] = pair.encoders;
        let [d0, d1] = pair.decoders;
        Ok(Self { encoders: [revive(e0)?, revive(e1)?], decoders: [revive(d0)?, revive(d1)?], ..pair })
    }
}

/// Trains both users jointly under the dynamically weighted loss.
pub fn train_ic_pair(cfg: IcConfig, seed: u64) -> Result<IcPair> {
    let mut pair = IcPair::new(cfg, seed)?;
    let s = pair.cfg.schedule;
    let m = pair.cfg.messages();
    let std = ebno_to_noise_var(pair.cfg.rate(), pair.cfg.train_ebno_db)?.sqrt();
    let mut r = rng::stream(seed, 0x6963);
    let mut opts: Vec<OptimState> = (0..4).map(|_| OptimState::adam(s.learning_rate)).collect();
    let mut plateau = Plateau::new(&s);
    let mut alpha = 0.5;
    for step in 0..s.steps {
        let msgs: [Vec<usize>; 2] = [
            (0..s.batch_size).map(|_| r.random_range(0..m)).collect(),
            (0..s.batch_size).map(|_| r.random_range(0..m)).collect(),
        ];
        let x1 = pair.encoders[0].forward(&Tensor::one_hot(&msgs[0], m), Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let x2 = pair.encoders[1].forward(&Tensor::one_hot(&msgs[1], m), Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let sum: Vec<f64> = x1.data().iter().zip(x2.data()).map(|(a, b)| a + b).collect();
        let mut ys = Vec::with_capacity(2);
        for _ in 0..2 {
            let y: Vec<f64> = sum.iter().map(|v| v + std * r.sample::<f64, _>(StandardNormal)).collect();
            ys.push(Tensor::matrix(x1.rows(), x1.cols(), y));
        }
        let weights = [alpha, 1.0 - alpha];
        let mut losses = [0.0; 2];
        let mut gx = vec![0.0; sum.len()];
        for u in 0..2 {
            let p = pair.decoders[u].forward(&ys[u], Mode::Train).map_err(|e| diverged(e, seed, step))?;
            let (loss, g) = cross_entropy(&p, &msgs[u])?;
            if !loss.is_finite() {
                return Err(Error::Divergence { seed, step });
            }
            losses[u] = loss;
            let gy = pair.decoders[u].backward_from_logits(&g.map(|v| v * weights[u]))?;
            gx.iter_mut().zip(gy.data()).for_each(|(a, b)| *a += b);
        }
        // Each transmission reaches both receivers, so both encoders get the
        // summed gradient.
        let gx = Tensor::matrix(x1.rows(), x1.cols(), gx);
        pair.encoders[0].backward(&gx)?;
        pair.encoders[1].backward(&gx)?;
        let lr = s.lr_at(step);
        for (o, net) in opts.iter_mut().zip(pair.encoders.iter_mut().chain(pair.decoders.iter_mut())) {
            o.learning_rate = lr;
            o.step(net);
        }
        alpha = next_alpha(alpha, losses[0], losses[1]);
        pair.alpha_trace.push(alpha);
        pair.loss_trace.push(losses);
        if plateau.push(losses[0] + losses[1]) {
            break;
        }
    }
    Ok(pair)
}

/// Pools two per-user curves on the same grid into one user-averaged curve.
pub fn pool_users(a: &ErrorRateResult, b: &ErrorRateResult) -> ErrorRateResult {
    let points = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| BlerPoint::new(p.snr_db, p.trials + q.trials, p.errors + q.errors))
        .collect();
    ErrorRateResult { points }
}
