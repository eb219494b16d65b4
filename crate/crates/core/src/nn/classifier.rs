//! Binary classifiers trained with minibatch cross-entropy, reporting held-out
//! misdetection and false-alarm rates.
//!
//! Class 1 is the "positive" event the classifier tries to detect. A
//! misdetection is a positive sample predicted 0; a false alarm is a negative
//! sample predicted 1.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::layer::{Activation, Init, Layer, Mode};
use super::loss::cross_entropy;
use super::network::Network;
use super::optim::{OptimKind, OptimState};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    CategoricalCrossEntropy,
    GanDiscriminator,
    GanGenerator,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub minibatch_size: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub init: Init,
    pub optimizer: OptimKind,
    pub learning_rate: f64,
    pub seed: u64,
}

impl TrainConfig {
    /// Settings used for the spectrum classifiers: minibatch 25, momentum 0.9,
    /// weights drawn from [-1, 1].
    pub fn spectrum_default(seed: u64) -> Self {
        Self {
            minibatch_size: 25,
            epochs: 100,
            loss: LossKind::CategoricalCrossEntropy,
            init: Init::UniformUnit,
            optimizer: OptimKind::sgd(0.9),
            learning_rate: 0.01,
            seed,
        }
    }
}

/// Labeled samples, one row per sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Tensor,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(features: Tensor, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// First half for training, second half for testing.
    pub fn split_half(&self) -> (Self, Self) {
        let mid = self.len() / 2;
        let a: Vec<usize> = (0..mid).collect();
        let b: Vec<usize> = (mid..self.len()).collect();
        (self.subset(&a), self.subset(&b))
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let features = Tensor::vstack(&[&self.features, &other.features])?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(features, labels)
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for &l in &self.labels {
            c[l.min(1)] += 1;
        }
        c
    }
}

/// Per-column affine scaling fitted on training data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Tensor) -> Self {
        let (n, c) = (x.rows().max(1) as f64, x.cols());
        let mut mean = vec![0.0; c];
        for r in 0..x.rows() {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; c];
        for r in 0..x.rows() {
            for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        let scale = var.iter().map(|v| if *v > 1e-24 { 1.0 / v.sqrt() } else { 1.0 }).collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &Tensor) -> Tensor {
        let c = x.cols();
        let mut out = x.data().to_vec();
        for row in out.chunks_mut(c) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) * s;
            }
        }
        Tensor::matrix(x.rows(), c, out)
    }
}

/// Held-out error rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// P(predict 0 | class 1).
    pub e_md: f64,
    /// P(predict 1 | class 0).
    pub e_fa: f64,
}

impl ErrorReport {
    pub fn max(&self) -> f64 {
        self.e_md.max(self.e_fa)
    }

    pub fn from_predictions(pred: &[usize], truth: &[usize]) -> Self {
        let (mut pos, mut neg, mut md, mut fa) = (0usize, 0usize, 0usize, 0usize);
        for (&p, &t) in pred.iter().zip(truth) {
            if t == 1 {
                pos += 1;
                md += usize::from(p == 0);
            } else {
                neg += 1;
                fa += usize::from(p == 1);
            }
        }
        let rate = |e: usize, n: usize| if n == 0 { 0.0 } else { e as f64 / n as f64 };
        Self { e_md: rate(md, pos), e_fa: rate(fa, neg) }
    }
}

/// Trained network plus its input scaling and decision threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classifier {
    pub net: Network,
    pub scaler: Standardizer,
    /// Predict class 1 when its probability exceeds this value.
    pub threshold: f64,
}

impl Classifier {
    /// Probability of class 1 for each row.
    pub fn scores(&mut self, x: &Tensor) -> Result<Vec<f64>> {
        let p = self.net.forward(&self.scaler.apply(x), Mode::Eval)?;
        Ok((0..p.rows()).map(|r| p.get(r, 1)).collect())
    }

    pub fn predict(&mut self, x: &Tensor) -> Result<Vec<usize>> {
        let t = self.threshold;
        Ok(self.scores(x)?.into_iter().map(|s| usize::from(s > t)).collect())
    }

    /// Further training on `data` with the existing input scaling and a fresh
    /// optimizer. Returns per-epoch mean losses.
    pub fn refine(&mut self, data: &Dataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
        if cfg.minibatch_size == 0 {
            return Err(Error::Config(vec!["minibatch_size must be at least 1".into()]));
        }
        let x = self.scaler.apply(&data.features);
        run_epochs(&mut self.net, &x, &data.labels, cfg)
    }

    pub fn evaluate(&mut self, data: &Dataset) -> Result<ErrorReport> {
        let pred = self.predict(&data.features)?;
        Ok(ErrorReport::from_predictions(&pred, &data.labels))
    }
}

/// Fully connected classifier: hidden layers with `act`, softmax output.
pub fn mlp(
    inputs: usize,
    hidden: &[usize],
    act: Activation,
    classes: usize,
    init: Init,
    seed: u64,
) -> Result<Network> {
    let mut rng = rng::stream(seed, 0x696e_6974);
    let mut layers = Vec::new();
    let mut width = inputs;
    for &h in hidden {
        layers.push(Layer::dense(width, h, init, &mut rng));
        layers.push(Layer::activation(act));
        width = h;
    }
    layers.push(Layer::dense(width, classes, init, &mut rng));
    layers.push(Layer::activation(Activation::Softmax));
    Network::new(inputs, layers, seed)
}

/// Fits `net` on `data` with minibatch cross-entropy and returns the trained
/// classifier. Per-epoch mean training losses are returned alongside.
pub fn fit(net: Network, data: &Dataset, cfg: &TrainConfig) -> Result<(Classifier, Vec<f64>)> {
    if cfg.minibatch_size == 0 {
        return Err(Error::Config(vec!["minibatch_size must be at least 1".into()]));
    }
    if cfg.loss != LossKind::CategoricalCrossEntropy {
        return Err(Error::Config(vec!["classifiers train with categorical cross-entropy".into()]));
    }
    let counts = data.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateData(format!("class counts {counts:?}")));
    }
    let scaler = Standardizer::fit(&data.features);
    let x = scaler.apply(&data.features);
    let mut net = net;
    let trace = run_epochs(&mut net, &x, &data.labels, cfg)?;
    Ok((Classifier { net, scaler, threshold: 0.5 }, trace))
}

fn run_epochs(net: &mut Network, x: &Tensor, labels: &[usize], cfg: &TrainConfig) -> Result<Vec<f64>> {
    let mut opt = OptimState::new(cfg.optimizer, cfg.learning_rate);
    let mut rng = rng::stream(cfg.seed, 0x7368_7566);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut step = 0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.minibatch_size) {
            let xb = x.select_rows(batch);
            let yb: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
            let p = net.forward(&xb, Mode::Train)?;
            let (loss, g) = cross_entropy(&p, &yb)?;
            if !loss.is_finite() {
                return Err(Error::Divergence { seed: cfg.seed, step });
            }
            net.backward_from_logits(&g)?;
            opt.step(net);
            total += loss * batch.len() as f64;
            step += 1;
        }
        trace.push(total / labels.len() as f64);
    }
    Ok(trace)
}

/// Splits `data` in half, trains on the first half and reports errors on the
/// second.
pub fn train_classifier(
    net: Network,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<(Classifier, ErrorReport)> {
    let counts = data.class_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DegenerateData(format!("class counts {counts:?}")));
    }
    let (train, test) = data.split_half();
    let (mut clf, _) = fit(net, &train, cfg)?;
    let report = clf.evaluate(&test)?;
    Ok((clf, report))
}
