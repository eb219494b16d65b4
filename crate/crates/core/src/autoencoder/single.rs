//! Single-antenna `(n, k)` autoencoder.
//!
//! Encoder: one-hot `M` → dense `M` ReLU → dense `n` linear → power
//! normalization. Channel: additive Gaussian noise with variance `β` per real
//! use. Decoder: dense `M` ReLU → dense `M` softmax.

use std::path::Path;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::schedule::{Plateau, Schedule};
use super::Constellation;
use crate::channel::ebno_to_noise_var;
use crate::error::{Error, Result};
use crate::nn::layer::{AvgPowerNormalize, AwgnNoise, Dense, EnergyNormalize};
use crate::nn::{cross_entropy, Activation, Init, Layer, Mode, Network, OptimState, Tensor};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerConstraint {
    /// Every codeword has squared norm `n`.
    Energy,
    /// Mean squared norm over the batch is `n`.
    AvgPower,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AeConfig {
    pub n: usize,
    pub k: usize,
    pub power: PowerConstraint,
    pub train_ebno_db: f64,
    pub init: Init,
    pub schedule: Schedule,
}

impl AeConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            power: PowerConstraint::Energy,
            train_ebno_db: 7.0,
            init: Init::ScaledUniform,
            schedule: Schedule::default(),
        }
    }

    pub fn messages(&self) -> usize {
        1 << self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.n == 0 {
            errs.push("n must be at least 1".to_string());
        }
        if self.k == 0 || self.k > 16 {
            errs.push(format!("k must be in 1..=16, got {}", self.k));
        }
        if let Err(Error::Config(e)) = self.schedule.validate() {
            errs.extend(e);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

fn normalizer(power: PowerConstraint, width: usize) -> Layer {
    match power {
        PowerConstraint::Energy => Layer::EnergyNormalize(EnergyNormalize::default()),
        PowerConstraint::AvgPower => Layer::AvgPowerNormalize(AvgPowerNormalize::new(width as f64)),
    }
}

/// Table-style encoder/decoder pair for `m` messages over `width` real uses.
pub(crate) fn build_pair(m: usize, width: usize, power: PowerConstraint, init: Init, seed: u64) -> Result<(Network, Network)> {
    let mut r = rng::stream(seed, 0x656e_63);
    let encoder = Network::new(
        m,
        vec![
            Layer::Dense(live_embedding(m, init, &mut r)),
            Layer::activation(Activation::Relu),
            Layer::dense(m, width, init, &mut r),
            normalizer(power, width),
        ],
        seed,
    )?;
    let decoder = Network::new(
        width,
        vec![
            Layer::dense(width, m, init, &mut r),
            Layer::activation(Activation::Relu),
            Layer::dense(m, m, init, &mut r),
            Layer::activation(Activation::Softmax),
        ],
        seed,
    )?;
    Ok((encoder, decoder))
}

/// First encoder layer, redrawn until every one-hot message switches on at
/// least one ReLU unit. A message with no active unit would map to the
/// output bias and never receive a gradient.
fn live_embedding(m: usize, init: Init, r: &mut Rng) -> Dense {
    loop {
        let d = Dense::new(m, m, init, r);
        let live = |i: usize| (0..m).any(|j| d.weight[j * m + i] + d.bias[j] > 0.0);
        if (0..m).all(live) {
            return d;
        }
    }
}

/// Message indices for training step `step`: all messages cycled to fill the
/// batch, so every batch is as balanced as its size allows.
pub(crate) fn cycled_batch(step: usize, batch: usize, m: usize) -> Vec<usize> {
    (0..batch).map(|i| (step * batch + i) % m).collect()
}

/// Trained (or freshly initialized) autoencoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Autoencoder {
    pub cfg: AeConfig,
    pub encoder: Network,
    pub decoder: Network,
    pub seed: u64,
    /// Mean training loss per step.
    pub loss_trace: Vec<f64>,
}

impl Autoencoder {
    pub fn new(cfg: AeConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let (encoder, decoder) = build_pair(cfg.messages(), cfg.n, cfg.power, cfg.init, seed)?;
        Ok(Self { cfg, encoder, decoder, seed, loss_trace: Vec::new() })
    }

    /// Noise variance per real use at `ebno_db`.
    pub fn noise_var(&self, ebno_db: f64) -> Result<f64> {
        ebno_to_noise_var(self.cfg.rate(), ebno_db)
    }

    /// Codewords of all messages, one row each.
    pub fn codebook(&mut self) -> Result<Tensor> {
        let m = self.cfg.messages();
        let ids: Vec<usize> = (0..m).collect();
        self.encoder.forward(&Tensor::one_hot(&ids, m), Mode::Eval)
    }

    pub fn constellation(&mut self) -> Result<Constellation> {
        Ok(Constellation::from_real_rows(&self.codebook()?))
    }

    /// Decoded messages for received rows.
    pub fn decode(&mut self, y: &Tensor) -> Result<Vec<usize>> {
        Ok(self.decoder.forward(y, Mode::Eval)?.argmax_rows())
    }

    /// Fraction of noiseless codewords decoded to their own message.
    pub fn self_consistency(&mut self) -> Result<f64> {
        let cb = self.codebook()?;
        let dec = self.decode(&cb)?;
        Ok(dec.iter().enumerate().filter(|(i, d)| i == *d).count() as f64 / dec.len() as f64)
    }

    /// Simulates `blocks` random messages at `ebno_db` and counts decoding
    /// errors. Safe to call from several threads on clones.
    pub fn count_errors(&self, codebook: &Tensor, ebno_db: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
        let std = self.noise_var(ebno_db)?.sqrt();
        let mut decoder = self.decoder.clone();
        let (m, n) = (self.cfg.messages(), self.cfg.n);
        let mut errors = 0u64;
        let mut left = blocks as usize;
        while left > 0 {
            let b = left.min(4096);
            let msgs: Vec<usize> = (0..b).map(|_| rng.random_range(0..m)).collect();
            let mut y = Vec::with_capacity(b * n);
            for &msg in &msgs {
                y.extend(codebook.row(msg).iter().map(|&v| v + std * rng.sample::<f64, _>(StandardNormal)));
            }
            let dec = decoder.forward(&Tensor::matrix(b, n, y), Mode::Eval)?.argmax_rows();
            errors += dec.iter().zip(&msgs).filter(|(a, b)| a != b).count() as u64;
            left -= b;
        }
        Ok(errors)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut ae: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        ae.encoder = revive(ae.encoder)?;
        ae.decoder = revive(ae.decoder)?;
        Ok(ae)
    }
}

/// Trains an `(n, k)` autoencoder at the configured Eb/N0.
pub fn train_single_ae(cfg: AeConfig, seed: u64) -> Result<Autoencoder> {
    let mut ae = Autoencoder::new(cfg, seed)?;
    let s = ae.cfg.schedule;
    let m = ae.cfg.messages();
    let std = ae.noise_var(ae.cfg.train_ebno_db)?.sqrt();
    let mut channel = Network::new(ae.cfg.n, vec![Layer::AwgnNoise(AwgnNoise::new(std))], seed)?;
    channel.reseed(rng::stream_id(&[seed, 0x6368]));
    let mut opt_e = OptimState::adam(s.learning_rate);
    let mut opt_d = OptimState::adam(s.learning_rate);
    let mut plateau = Plateau::new(&s);
    for step in 0..s.steps {
        let msgs = cycled_batch(step, s.batch_size, m);
        let x = ae.encoder.forward(&Tensor::one_hot(&msgs, m), Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let y = channel.forward(&x, Mode::Train)?;
        let p = ae.decoder.forward(&y, Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let (loss, g) = cross_entropy(&p, &msgs)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { seed, step });
        }
        let gy = ae.decoder.backward_from_logits(&g)?;
        let gx = channel.backward(&gy)?;
        ae.encoder.backward(&gx)?;
        opt_e.learning_rate = s.lr_at(step);
        opt_d.learning_rate = s.lr_at(step);
        opt_e.step(&mut ae.encoder);
        opt_d.step(&mut ae.decoder);
        ae.loss_trace.push(loss);
        if plateau.push(loss) {
            log::debug!("({},{}) seed {seed}: plateau at step {step}", ae.cfg.n, ae.cfg.k);
            break;
        }
    }
    Ok(ae)
}

/// Re-validates a deserialized network and rebuilds its buffers.
pub(crate) fn revive(net: Network) -> Result<Network> {
    let mut net = Network::new(net.input_width, net.layers, net.rng_seed)?;
    net.after_load();
    Ok(net)
}

pub(crate) fn diverged(e: Error, seed: u64, step: usize) -> Error {
    match e {
        Error::Numeric(_) => Error::Divergence { seed, step },
        other => other,
    }
}
