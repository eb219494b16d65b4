//! Conditional GAN that turns a handful of labeled sensing windows into as
//! many synthetic ones as needed.
//!
//! Both networks see the one-hot label next to their usual input. Samples are
//! standardized with statistics of the real data before training, and
//! generated samples are mapped back.

use rand::seq::IndexedRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::classifier::{Dataset, Standardizer};
use crate::nn::layer::{Activation, BatchNorm, Init, Layer, Mode};
use crate::nn::loss::{gan_discriminator_loss, gan_generator_loss};
use crate::nn::network::Network;
use crate::nn::optim::{OptimKind, OptimState};
use crate::nn::tensor::Tensor;
use crate::rng::{self, Rng};

/// Number of conditioning classes (ACK / no ACK).
pub const CLASSES: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CGanConfig {
    pub hidden: Vec<usize>,
    /// Batch normalization after each generator hidden layer.
    pub batch_norm: bool,
    /// Batch normalization after each discriminator hidden layer.
    pub discriminator_batch_norm: bool,
    pub noise_dim: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    /// Generator minimizes `log(1 - D(G(z)))` when true, otherwise maximizes
    /// `log D(G(z))`.
    pub saturating: bool,
    /// Std of Gaussian noise added to every discriminator input sample
    /// (standardized units) during training.
    pub instance_noise: f64,
    pub seed: u64,
}

impl Default for CGanConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128, 128],
            batch_norm: true,
            discriminator_batch_norm: false,
            noise_dim: 16,
            iterations: 4000,
            learning_rate: 2e-4,
            beta1: 0.5,
            saturating: false,
            instance_noise: 1.0,
            seed: 0,
        }
    }
}

impl CGanConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            errs.push("hidden layers must be nonempty and nonzero".to_string());
        }
        if self.noise_dim == 0 {
            errs.push("noise_dim must be at least 1".into());
        }
        if self.iterations == 0 {
            errs.push("iterations must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            errs.push("learning_rate must be positive".into());
        }
        if !(self.instance_noise >= 0.0) {
            errs.push("instance_noise must be nonnegative".into());
        }
        if !(0.0..1.0).contains(&self.beta1) {
            errs.push("beta1 must lie in [0, 1)".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

fn stack(inputs: usize, hidden: &[usize], out: usize, batch_norm: bool, seed: u64) -> Result<Network> {
    let mut rng = rng::stream(seed, 0x6761_6e);
    let mut layers = Vec::new();
    let mut width = inputs;
    for &h in hidden {
        layers.push(Layer::dense(width, h, Init::ScaledUniform, &mut rng));
        layers.push(Layer::activation(Activation::LeakyRelu));
        if batch_norm {
            layers.push(Layer::BatchNorm(BatchNorm::new(h)));
        }
        width = h;
    }
    layers.push(Layer::dense(width, out, Init::ScaledUniform, &mut rng));
    Network::new(inputs, layers, seed)
}

fn with_labels(x: &Tensor, labels: &[usize]) -> Result<Tensor> {
    Tensor::hstack(x, &Tensor::one_hot(labels, CLASSES))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CGan {
    pub cfg: CGanConfig,
    pub width: usize,
    pub generator: Network,
    pub discriminator: Network,
    pub scaler: Standardizer,
    pub d_loss: Vec<f64>,
    pub g_loss: Vec<f64>,
}

impl CGan {
    /// Untrained generator/discriminator pair for samples of `width` columns.
    pub fn new(width: usize, scaler: Standardizer, cfg: CGanConfig) -> Result<Self> {
        cfg.validate()?;
        let generator = stack(cfg.noise_dim + CLASSES, &cfg.hidden, width, cfg.batch_norm, cfg.seed)?;
        let discriminator = stack(width + CLASSES, &cfg.hidden, 1, cfg.discriminator_batch_norm, cfg.seed ^ 0xd15c)?;
        Ok(Self { cfg, width, generator, discriminator, scaler, d_loss: Vec::new(), g_loss: Vec::new() })
    }

    fn noise(&self, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
        let z: Vec<f64> =
            (0..labels.len() * self.cfg.noise_dim).map(|_| StandardNormal.sample(rng)).collect();
        with_labels(&Tensor::matrix(labels.len(), self.cfg.noise_dim, z), labels)
    }

    /// Standardized synthetic samples for the given labels.
    fn sample_scaled(&mut self, labels: &[usize], mode: Mode, rng: &mut Rng) -> Result<Tensor> {
        let z = self.noise(labels, rng)?;
        self.generator.forward(&z, mode)
    }

    /// Synthetic samples in the original feature units.
    pub fn generate(&mut self, labels: &[usize], rng: &mut Rng) -> Result<Tensor> {
        let x = self.sample_scaled(labels, Mode::Eval, rng)?;
        let mut data = x.into_data();
        for row in data.chunks_mut(self.width) {
            for ((v, m), s) in row.iter_mut().zip(&self.scaler.mean).zip(&self.scaler.scale) {
                *v = *v / s + m;
            }
        }
        Ok(Tensor::matrix(labels.len(), self.width, data))
    }

    /// `n` synthetic samples split evenly between the classes.
    pub fn generate_balanced(&mut self, n: usize, rng: &mut Rng) -> Result<Dataset> {
        let labels: Vec<usize> = (0..n).map(|i| i % CLASSES).collect();
        let x = self.generate(&labels, rng)?;
        Dataset::new(x, labels)
    }

    /// Discriminator logits in eval mode for samples in original units.
    pub fn discriminate(&mut self, data: &Dataset) -> Result<Vec<f64>> {
        let x = with_labels(&self.scaler.apply(&data.features), &data.labels)?;
        Ok(self.discriminator.forward(&x, Mode::Eval)?.into_data())
    }
}

/// Trains a conditional GAN on `real` (original feature units).
///
/// Each iteration takes one discriminator step on all real samples plus as
/// many synthetic ones with the same labels, then one generator step.
pub fn train_cgan(real: &Dataset, cfg: &CGanConfig) -> Result<CGan> {
    if real.len() < 2 {
        return Err(Error::DegenerateData(format!("{} real samples", real.len())));
    }
    if real.labels.iter().any(|&l| l >= CLASSES) {
        return Err(Error::Domain("conditioning labels must be 0 or 1".into()));
    }
    let scaler = Standardizer::fit(&real.features);
    let mut gan = CGan::new(real.features.cols(), scaler, cfg.clone())?;
    let x_real = with_labels(&gan.scaler.apply(&real.features), &real.labels)?;
    let labels = real.labels.clone();
    let n = labels.len();
    let adam = OptimKind::Adam { beta1: cfg.beta1, beta2: 0.999, epsilon: 1e-8 };
    let mut opt_d = OptimState::new(adam, cfg.learning_rate);
    let mut opt_g = OptimState::new(adam, cfg.learning_rate);
    let mut rng = rng::stream(cfg.seed, 0x7472_6169_6e);

    for step in 0..cfg.iterations {
        let fake = gan.sample_scaled(&labels, Mode::Train, &mut rng)?;
        let x = Tensor::vstack(&[&x_real, &with_labels(&fake, &labels)?])?;
        let x = blur(x, gan.width, cfg.instance_noise, &mut rng);
        let logits = gan.discriminator.forward(&x, Mode::Train)?;
        let (real_l, fake_l) = split_rows(&logits, n);
        let (d_loss, g_real, g_fake) = gan_discriminator_loss(&real_l, &fake_l);
        gan.discriminator.backward(&Tensor::vstack(&[&g_real, &g_fake])?)?;
        opt_d.step(&mut gan.discriminator);

        let g_labels: Vec<usize> = (0..n).map(|_| *labels.choose(&mut rng).expect("nonempty")).collect();
        let fake = gan.sample_scaled(&g_labels, Mode::Train, &mut rng)?;
        let x = Tensor::vstack(&[&x_real, &with_labels(&fake, &g_labels)?])?;
        let x = blur(x, gan.width, cfg.instance_noise, &mut rng);
        let logits = gan.discriminator.forward(&x, Mode::Train)?;
        let (_, fake_l) = split_rows(&logits, n);
        let (g_loss, g_fake) = gan_generator_loss(&fake_l, cfg.saturating);
        let zeros = Tensor::zeros(vec![n, 1]);
        let gx = gan.discriminator.backward(&Tensor::vstack(&[&zeros, &g_fake])?)?;
        let w = gan.width;
        let mut g_samples = Vec::with_capacity(n * w);
        for r in n..2 * n {
            g_samples.extend_from_slice(&gx.row(r)[..w]);
        }
        gan.generator.backward(&Tensor::matrix(n, w, g_samples))?;
        opt_g.step(&mut gan.generator);

        if !(d_loss.is_finite() && g_loss.is_finite()) {
            return Err(Error::Divergence { seed: cfg.seed, step });
        }
        gan.d_loss.push(d_loss);
        gan.g_loss.push(g_loss);
    }

    let probe: Vec<usize> = (0..64).map(|i| i % CLASSES).collect();
    let sample = gan.sample_scaled(&probe, Mode::Eval, &mut rng)?;
    let mean = sample.data().iter().sum::<f64>() / sample.len() as f64;
    let var = sample.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / sample.len() as f64;
    if var < 1e-6 {
        log::warn!("generator output variance {var:.2e}: possible mode collapse (seed {})", cfg.seed);
    }
    Ok(gan)
}

/// Adds instance noise to the first `width` (sample) columns.
fn blur(x: Tensor, width: usize, std: f64, rng: &mut Rng) -> Tensor {
    if std == 0.0 {
        return x;
    }
    let cols = x.cols();
    let rows = x.rows();
    let mut data = x.into_data();
    for row in data.chunks_mut(cols) {
        for v in &mut row[..width] {
            let z: f64 = StandardNormal.sample(rng);
            *v += std * z;
        }
    }
    Tensor::matrix(rows, cols, data)
}

fn split_rows(t: &Tensor, n: usize) -> (Tensor, Tensor) {
    let a: Vec<usize> = (0..n).collect();
    let b: Vec<usize> = (n..t.rows()).collect();
    (t.select_rows(&a), t.select_rows(&b))
}
