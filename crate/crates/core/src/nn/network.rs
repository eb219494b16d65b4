//! Sequential network container.

use serde::{Deserialize, Serialize};

use super::layer::{Activation, Layer, Mode, ParamRef};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Stream id reserved for a network's noise draws.
const NOISE_STREAM: u64 = 0x6e6f_6973_65;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    pub input_width: usize,
    pub layers: Vec<Layer>,
    pub rng_seed: u64,
    #[serde(skip, default = "placeholder_rng")]
    rng: Rng,
    #[serde(skip)]
    trained_forward: bool,
}

fn placeholder_rng() -> Rng {
    rng::stream(0, NOISE_STREAM)
}

impl Network {
    /// Checks layer compatibility and that softmax only appears last.
    pub fn new(input_width: usize, layers: Vec<Layer>, rng_seed: u64) -> Result<Self> {
        let mut width = input_width;
        for (i, layer) in layers.iter().enumerate() {
            width = layer.output_width(width).ok_or_else(|| {
                Error::Dimension(format!("layer {i} ({}) cannot take width {width}", layer.name()))
            })?;
            if let Layer::Activation(a) = layer {
                if a.kind == Activation::Softmax && i + 1 != layers.len() {
                    return Err(Error::Dimension(format!(
                        "softmax at position {i} is not the final layer"
                    )));
                }
            }
        }
        Ok(Self {
            input_width,
            layers,
            rng_seed,
            rng: rng::stream(rng_seed, NOISE_STREAM),
            trained_forward: false,
        })
    }

    pub fn output_width(&self) -> usize {
        self.layers
            .iter()
            .try_fold(self.input_width, |w, l| l.output_width(w))
            .expect("validated at construction")
    }

    /// Resets the noise generator so subsequent draws repeat.
    pub fn reseed(&mut self, seed: u64) {
        self.rng_seed = seed;
        self.rng = rng::stream(seed, NOISE_STREAM);
    }

    /// Sets the standard deviation of every noise layer.
    pub fn set_noise_std(&mut self, std: f64) {
        for l in &mut self.layers {
            if let Layer::AwgnNoise(n) = l {
                n.std = std;
            }
        }
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        if x.cols() != self.input_width {
            return Err(Error::Dimension(format!(
                "network input: expected {} columns, got {}",
                self.input_width,
                x.cols()
            )));
        }
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = layer.forward(&h, mode, &mut self.rng)?;
            if !h.all_finite() {
                return Err(Error::Numeric(format!("non-finite output from {}", layer.name())));
            }
        }
        if mode == Mode::Train {
            self.trained_forward = true;
        }
        Ok(h)
    }

    /// Backpropagates `loss_grad` (gradient at the network output) and returns
    /// the gradient at the input.
    pub fn backward(&mut self, loss_grad: &Tensor) -> Result<Tensor> {
        self.backward_through(loss_grad, self.layers.len())
    }

    /// Like [`Network::backward`], but `logit_grad` is the gradient at the input
    /// of a trailing softmax, which is skipped.
    pub fn backward_from_logits(&mut self, logit_grad: &Tensor) -> Result<Tensor> {
        match self.layers.last() {
            Some(Layer::Activation(a)) if a.kind == Activation::Softmax => {
                self.backward_through(logit_grad, self.layers.len() - 1)
            }
            _ => Err(Error::State("backward_from_logits needs a final softmax layer".into())),
        }
    }

    fn backward_through(&mut self, grad: &Tensor, upto: usize) -> Result<Tensor> {
        if !self.trained_forward {
            return Err(Error::State("backward called before a training forward pass".into()));
        }
        let mut g = grad.clone();
        for layer in self.layers[..upto].iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    /// All trainable parameter arrays in a fixed order.
    pub fn params(&mut self) -> Vec<ParamRef<'_>> {
        self.layers.iter_mut().flat_map(Layer::params).collect()
    }

    pub fn param_count(&mut self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }

    /// Forward pass in eval mode over a batch too large to hold at once.
    pub fn predict_chunked(&mut self, x: &Tensor, chunk: usize) -> Result<Tensor> {
        let mut parts = Vec::new();
        let mut start = 0;
        while start < x.rows() {
            let end = (start + chunk).min(x.rows());
            let idx: Vec<usize> = (start..end).collect();
            parts.push(self.forward(&x.select_rows(&idx), Mode::Eval)?);
            start = end;
        }
        let refs: Vec<&Tensor> = parts.iter().collect();
        Tensor::vstack(&refs)
    }

    pub(crate) fn after_load(&mut self) {
        self.rng = rng::stream(self.rng_seed, NOISE_STREAM);
        self.trained_forward = false;
        for l in &mut self.layers {
            l.restore_buffers();
        }
    }
}
