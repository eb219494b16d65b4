//! Closed-loop MIMO autoencoder trained on a fixed channel realization.
//!
//! A message in `[0, 2^(k N_t))` is split into `N_t` tokens of `k` bits. The
//! transmitter embeds the tokens, passes them through dense layers with batch
//! normalization and emits `N_t` complex symbols (even columns real, odd
//! imaginary) scaled to unit average energy per antenna. The receiver maps
//! the `N_r` received symbols back to one of the `2^(k N_t)` messages. The
//! complex noise variance is `1 / SNR`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::schedule::{Plateau, Schedule};
use super::single::{diverged, revive};
use crate::baselines::{run_bler, BlerSettings, ErrorRateResult};
use crate::channel::{estimation_error, CMat, ChannelRealization};
use crate::error::{Error, Result};
use crate::nn::layer::{AvgPowerNormalize, AwgnNoise, BatchNorm, ComplexMultiply, Embedding};
use crate::nn::{cross_entropy, Activation, Init, Layer, Mode, Network, OptimState, Tensor};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoAeConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
    pub embed_dim: usize,
    pub tx_hidden: Vec<usize>,
    pub rx_hidden: Vec<usize>,
    pub batch_norm: bool,
    pub train_snr_db: f64,
    /// Each step draws its SNR uniformly from `train_snr_db ± spread / 2`.
    pub train_snr_spread_db: f64,
    pub init: Init,
    pub schedule: Schedule,
}

impl Default for MimoAeConfig {
    fn default() -> Self {
        Self {
            n_t: 2,
            n_r: 2,
            k: 2,
            embed_dim: 8,
            tx_hidden: vec![32, 16, 8],
            rx_hidden: vec![8, 16, 32],
            batch_norm: true,
            train_snr_db: 10.0,
            train_snr_spread_db: 0.0,
            init: Init::ScaledUniform,
            schedule: Schedule::default(),
        }
    }
}

impl MimoAeConfig {
    pub fn classes(&self) -> usize {
        1 << (self.k * self.n_t)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.n_t == 0 || self.n_r == 0 {
            errs.push("antenna counts must be at least 1".to_string());
        }
        if self.k == 0 || self.k * self.n_t > 16 {
            errs.push(format!("k·N_t must be in 1..=16, got {}", self.k * self.n_t));
        }
        if self.embed_dim == 0 || self.tx_hidden.contains(&0) || self.rx_hidden.contains(&0) {
            errs.push("layer widths must be positive".to_string());
        }
        if !(self.train_snr_spread_db >= 0.0) {
            errs.push(format!("train_snr_spread_db must be nonnegative, got {}", self.train_snr_spread_db));
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

    /// Per-antenna token ids of message `m`, most significant first.
    pub fn tokens(&self, m: usize) -> Vec<f64> {
        let mask = (1 << self.k) - 1;
        (0..self.n_t).map(|j| ((m >> (self.k * (self.n_t - 1 - j))) & mask) as f64).collect()
    }

    fn token_batch(&self, msgs: &[usize]) -> Tensor {
        Tensor::matrix(msgs.len(), self.n_t, msgs.iter().flat_map(|&m| self.tokens(m)).collect())
    }
}

fn hidden_stack(layers: &mut Vec<Layer>, mut width: usize, hidden: &[usize], bn: bool, init: Init, r: &mut Rng) -> usize {
    for &h in hidden {
        layers.push(Layer::dense(width, h, init, r));
        layers.push(Layer::activation(Activation::Relu));
        if bn {
            layers.push(Layer::BatchNorm(BatchNorm::new(h)));
        }
        width = h;
    }
    width
}

/// One trained transmitter/receiver pair and the channel it was trained on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MimoAe {
    pub cfg: MimoAeConfig,
    pub channel: ChannelRealization,
    pub encoder: Network,
    pub decoder: Network,
    pub seed: u64,
    pub loss_trace: Vec<f64>,
}

impl MimoAe {
    pub fn new(cfg: MimoAeConfig, channel: ChannelRealization, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if channel.tx() != cfg.n_t || channel.rx() != cfg.n_r {
            return Err(Error::Dimension(format!(
                "channel is {}x{}, config wants {}x{}",
                channel.rx(),
                channel.tx(),
                cfg.n_r,
                cfg.n_t
            )));
        }
        let mut r = rng::stream(seed, 0x6d69_6d6f);
        let mut tx = vec![Layer::Embedding(Embedding::new(1 << cfg.k, cfg.embed_dim, cfg.n_t, &mut r))];
        let w = hidden_stack(&mut tx, cfg.embed_dim * cfg.n_t, &cfg.tx_hidden, cfg.batch_norm, cfg.init, &mut r);
        tx.push(Layer::dense(w, 2 * cfg.n_t, cfg.init, &mut r));
        tx.push(Layer::AvgPowerNormalize(AvgPowerNormalize::new(cfg.n_t as f64)));
        let encoder = Network::new(cfg.n_t, tx, seed)?;

        let mut rx = Vec::new();
        let w = hidden_stack(&mut rx, 2 * cfg.n_r, &cfg.rx_hidden, cfg.batch_norm, cfg.init, &mut r);
        rx.push(Layer::dense(w, cfg.classes(), cfg.init, &mut r));
        rx.push(Layer::activation(Activation::Softmax));
        let decoder = Network::new(2 * cfg.n_r, rx, seed)?;
        Ok(Self { cfg, channel, encoder, decoder, seed, loss_trace: Vec::new() })
    }

    /// Transmit symbols of every message, one row each (interleaved re/im).
    pub fn codebook(&mut self) -> Result<Tensor> {
        let all: Vec<usize> = (0..self.cfg.classes()).collect();
        let t = self.cfg.token_batch(&all);
        self.encoder.forward(&t, Mode::Eval)
    }

    /// Counts message errors over `blocks` transmissions at `snr_db`. When
    /// `est_var > 0` each block sees the physical channel `h + h̃`, with
    /// `h̃ ~ CN(0, est_var)`, while the pair stays matched to `h`.
    pub fn count_errors(&self, codebook: &Tensor, snr_db: f64, est_var: f64, rng: &mut Rng, blocks: u64) -> Result<u64> {
        let (n_t, n_r, m) = (self.cfg.n_t, self.cfg.n_r, self.cfg.classes());
        let std = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
        let mut decoder = self.decoder.clone();
        let h = &self.channel.h;
        let mut errors = 0u64;
        let mut left = blocks as usize;
        while left > 0 {
            let b = left.min(4096);
            let msgs: Vec<usize> = (0..b).map(|_| rng.random_range(0..m)).collect();
            let mut y = Vec::with_capacity(b * 2 * n_r);
            for &msg in &msgs {
                let row = codebook.row(msg);
                let x: Vec<_> = (0..n_t).map(|j| num_complex::Complex64::new(row[2 * j], row[2 * j + 1])).collect();
                let hb = if est_var > 0.0 { h.add(&estimation_error(n_r, n_t, est_var, rng)) } else { h.clone() };
                for v in hb.mul_vec(&x) {
                    y.push(v.re + std * rng.sample::<f64, _>(StandardNormal));
                    y.push(v.im + std * rng.sample::<f64, _>(StandardNormal));
                }
            }
            let dec = decoder.forward(&Tensor::matrix(b, 2 * n_r, y), Mode::Eval)?.argmax_rows();
            errors += dec.iter().zip(&msgs).filter(|(a, b)| a != b).count() as u64;
            left -= b;
        }
        Ok(errors)
    }

    pub(crate) fn revive(mut self) -> Result<Self> {
        self.encoder = revive(self.encoder)?;
        self.decoder = revive(self.decoder)?;
        Ok(self)
    }
}

/// Trains a transmitter/receiver pair on the fixed channel `channel`.
pub fn train_mimo_ae(cfg: MimoAeConfig, channel: ChannelRealization, seed: u64) -> Result<MimoAe> {
    let mut ae = MimoAe::new(cfg, channel, seed)?;
    let s = ae.cfg.schedule;
    let m = ae.cfg.classes();
    let std_at = |snr_db: f64| (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let std = std_at(ae.cfg.train_snr_db);
    let (n_t, n_r) = (ae.cfg.n_t, ae.cfg.n_r);
    let mut chan = Network::new(
        2 * n_t,
        vec![
            Layer::ComplexMultiply(ComplexMultiply::new(n_r, n_t, ae.channel.h.data.clone())),
            Layer::AwgnNoise(AwgnNoise::new(std)),
        ],
        seed,
    )?;
    chan.reseed(rng::stream_id(&[seed, 0x6368]));
    let mut snr_rng = rng::stream(seed, 0x736e_72);
    let spread = ae.cfg.train_snr_spread_db;
    let mut opt_e = OptimState::adam(s.learning_rate);
    let mut opt_d = OptimState::adam(s.learning_rate);
    let mut plateau = Plateau::new(&s);
    for step in 0..s.steps {
        if spread > 0.0 {
            let snr = ae.cfg.train_snr_db + spread * (snr_rng.random::<f64>() - 0.5);
            chan.set_noise_std(std_at(snr));
        }
        let msgs = super::single::cycled_batch(step, s.batch_size, m);
        let tokens = ae.cfg.token_batch(&msgs);
        let x = ae.encoder.forward(&tokens, Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let y = chan.forward(&x, Mode::Train)?;
        let p = ae.decoder.forward(&y, Mode::Train).map_err(|e| diverged(e, seed, step))?;
        let (loss, g) = cross_entropy(&p, &msgs)?;
        if !loss.is_finite() {
            return Err(Error::Divergence { seed, step });
        }
        let gy = ae.decoder.backward_from_logits(&g)?;
        let gx = chan.backward(&gy)?;
        ae.encoder.backward(&gx)?;
        opt_e.learning_rate = s.lr_at(step);
        opt_d.learning_rate = s.lr_at(step);
        opt_e.step(&mut ae.encoder);
        opt_d.step(&mut ae.decoder);
        ae.loss_trace.push(loss);
        if plateau.push(loss) {
            break;
        }
    }
    Ok(ae)
}

/// Stored transmitter/receiver pairs, one per channel realization.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EncodingCodebook {
    pub entries: Vec<MimoAe>,
}

impl EncodingCodebook {
    /// Entry whose channel is nearest to `h_est` in Frobenius norm.
    pub fn select(&self, h_est: &CMat) -> Result<&MimoAe> {
        self.entries
            .iter()
            .min_by(|a, b| a.channel.h.sub(h_est).frobenius().total_cmp(&b.channel.h.sub(h_est).frobenius()))
            .ok_or_else(|| Error::State("empty encoding codebook".into()))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let cb: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let entries = cb.entries.into_iter().map(MimoAe::revive).collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// SER curve of the pair matched to `h_est` when the physical channel deviates
/// from it by estimation error of variance `est_var`.
pub fn eval_mimo_with_estimation_error(
    codebook: &EncodingCodebook,
    h_est: &CMat,
    est_var: f64,
    grid: &[f64],
    settings: &BlerSettings,
) -> Result<ErrorRateResult> {
    if !(est_var >= 0.0) {
        return Err(Error::Domain(format!("estimation-error variance must be nonnegative, got {est_var}")));
    }
    let mut entry = codebook.select(h_est)?.clone();
    let cb = entry.codebook()?;
    run_bler(grid, settings, |snr, r, n| entry.count_errors(&cb, snr, est_var, r, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_rayleigh_mimo;

    #[test]
    fn tokens_split_message_bits() {
        let cfg = MimoAeConfig::default();
        assert_eq!(cfg.classes(), 16);
        assert_eq!(cfg.tokens(0b1101), vec![3.0, 1.0]);
    }

    #[test]
    fn untrained_codebook_has_unit_power_per_antenna() {
        let h = draw_rayleigh_mimo(2, 2, &mut rng::stream(1, 1)).unwrap();
        let mut ae = MimoAe::new(MimoAeConfig::default(), h, 4).unwrap();
        let cb = ae.codebook().unwrap();
        let p: f64 = cb.data().iter().map(|v| v * v).sum::<f64>() / cb.rows() as f64;
        assert!((p - 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_antenna_reduction_builds() {
        let cfg = MimoAeConfig { n_t: 1, n_r: 1, k: 1, ..MimoAeConfig::default() };
        let h = ChannelRealization { h: CMat::identity(1), noise_var: 1.0 };
        let mut ae = MimoAe::new(cfg, h, 1).unwrap();
        assert_eq!(ae.codebook().unwrap().shape(), &[2, 2]);
        assert_eq!(ae.decoder.output_width(), 2);
    }

    #[test]
    fn empty_codebook_is_an_error() {
        assert!(matches!(EncodingCodebook::default().select(&CMat::identity(2)), Err(Error::State(_))));
    }
}
