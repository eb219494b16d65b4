//! Layer kinds and their forward/backward rules.
//!
//! Every layer maps a `(batch, in)` tensor to a `(batch, out)` tensor. Layers
//! that hold parameters keep gradient buffers of identical shape; `backward`
//! overwrites those buffers (it does not accumulate across calls).

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Whether a forward pass is part of training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Weight initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Uniform in [-1, 1] for weights and biases.
    UniformUnit,
    /// Glorot uniform: ±sqrt(6 / (fan_in + fan_out)), zero biases.
    ScaledUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    LeakyRelu,
    Tanh,
    Sigmoid,
    Linear,
    Softmax,
}

/// Negative-side slope of the leaky ReLU.
pub const LEAKY_SLOPE: f64 = 0.2;

/// Mutable view of one parameter array and its gradient.
pub struct ParamRef<'a> {
    pub value: &'a mut [f64],
    pub grad: &'a [f64],
}

fn dim_err(what: &str, expected: usize, got: usize) -> Error {
    Error::Dimension(format!("{what}: expected {expected} columns, got {got}"))
}

fn missing_forward(kind: &str) -> Error {
    Error::State(format!("{kind}: backward called before a training forward pass"))
}

// ---------------------------------------------------------------- dense

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `(outputs, inputs)`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
    #[serde(skip)]
    grad_weight: Vec<f64>,
    #[serde(skip)]
    grad_bias: Vec<f64>,
    #[serde(skip)]
    input: Option<Tensor>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, init: Init, rng: &mut Rng) -> Self {
        let (weight, bias) = match init {
            Init::UniformUnit => {
                let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
                (
                    (0..inputs * outputs).map(|_| u.sample(rng)).collect(),
                    (0..outputs).map(|_| u.sample(rng)).collect(),
                )
            }
            Init::ScaledUniform => {
                let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                let u = Uniform::new_inclusive(-limit, limit).expect("valid range");
                ((0..inputs * outputs).map(|_| u.sample(rng)).collect(), vec![0.0; outputs])
            }
        };
        Self::from_params(inputs, outputs, weight, bias)
    }

    pub fn from_params(inputs: usize, outputs: usize, weight: Vec<f64>, bias: Vec<f64>) -> Self {
        assert_eq!(weight.len(), inputs * outputs);
        assert_eq!(bias.len(), outputs);
        Self {
            inputs,
            outputs,
            weight,
            bias,
            grad_weight: vec![0.0; inputs * outputs],
            grad_bias: vec![0.0; outputs],
            input: None,
        }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        if x.cols() != self.inputs {
            return Err(dim_err("dense", self.inputs, x.cols()));
        }
        let rows = x.rows();
        let mut out = Vec::with_capacity(rows * self.outputs);
        for _ in 0..rows {
            out.extend_from_slice(&self.bias);
        }
        // out += x · Wᵀ
        gemm(rows, self.inputs, self.outputs, x.data(), (self.inputs, 1), &self.weight, (1, self.inputs), 1.0, &mut out);
        if mode == Mode::Train {
            self.input = Some(x.clone());
        }
        Ok(Tensor::matrix(rows, self.outputs, out))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let x = self.input.as_ref().ok_or_else(|| missing_forward("dense"))?;
        if g.cols() != self.outputs || g.rows() != x.rows() {
            return Err(dim_err("dense backward", self.outputs, g.cols()));
        }
        let (rows, n_in, n_out) = (x.rows(), self.inputs, self.outputs);
        self.grad_bias.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..rows {
            for (b, v) in self.grad_bias.iter_mut().zip(g.row(r)) {
                *b += v;
            }
        }
        // dW = Gᵀ · X, dX = G · W
        gemm(n_out, rows, n_in, g.data(), (1, n_out), x.data(), (n_in, 1), 0.0, &mut self.grad_weight);
        let mut gx = vec![0.0; rows * n_in];
        gemm(rows, n_out, n_in, g.data(), (n_out, 1), &self.weight, (n_in, 1), 0.0, &mut gx);
        Ok(Tensor::matrix(x.rows(), self.inputs, gx))
    }

    fn params(&mut self) -> Vec<ParamRef<'_>> {
        vec![
            ParamRef { value: &mut self.weight, grad: &self.grad_weight },
            ParamRef { value: &mut self.bias, grad: &self.grad_bias },
        ]
    }

    fn restore_buffers(&mut self) {
        self.grad_weight = vec![0.0; self.weight.len()];
        self.grad_bias = vec![0.0; self.bias.len()];
    }
}

/// `c = a · b + beta · c` for an `m×k` by `k×n` product into row-major `c`.
/// Strides are `(row, column)`.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], sa: (usize, usize), b: &[f64], sb: (usize, usize), beta: f64, c: &mut [f64]) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() == m * n);
    // SAFETY: the asserts above bound every index the kernel touches for
    // the given dimensions and strides.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), sa.0 as isize, sa.1 as isize,
            b.as_ptr(), sb.0 as isize, sb.1 as isize,
            beta,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- embedding

/// Trainable lookup table.
///
/// Input rows hold `tokens` integer ids (stored as floats) in `[0, vocab)`;
/// the output row is the concatenation of their embedding vectors, so the
/// flatten step is built in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embedding {
    pub vocab: usize,
    pub dim: usize,
    pub tokens: usize,
    /// Row-major `(vocab, dim)`.
    pub table: Vec<f64>,
    #[serde(skip)]
    grad_table: Vec<f64>,
    #[serde(skip)]
    ids: Option<Vec<usize>>,
}

impl Embedding {
    pub fn new(vocab: usize, dim: usize, tokens: usize, rng: &mut Rng) -> Self {
        let u = Uniform::new_inclusive(-0.05, 0.05).expect("valid range");
        let table = (0..vocab * dim).map(|_| u.sample(rng)).collect();
        Self { vocab, dim, tokens, table, grad_table: vec![0.0; vocab * dim], ids: None }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        if x.cols() != self.tokens {
            return Err(dim_err("embedding", self.tokens, x.cols()));
        }
        let mut ids = Vec::with_capacity(x.len());
        for &v in x.data() {
            let id = v.round();
            if (v - id).abs() > 1e-9 || id < 0.0 || id as usize >= self.vocab {
                return Err(Error::Domain(format!("embedding id {v} outside [0, {})", self.vocab)));
            }
            ids.push(id as usize);
        }
        let cols = self.tokens * self.dim;
        let mut out = Vec::with_capacity(x.rows() * cols);
        for &id in &ids {
            out.extend_from_slice(&self.table[id * self.dim..(id + 1) * self.dim]);
        }
        if mode == Mode::Train {
            self.ids = Some(ids);
        }
        Ok(Tensor::matrix(x.rows(), cols, out))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let ids = self.ids.as_ref().ok_or_else(|| missing_forward("embedding"))?;
        if g.len() != ids.len() * self.dim {
            return Err(dim_err("embedding backward", self.tokens * self.dim, g.cols()));
        }
        self.grad_table.iter_mut().for_each(|v| *v = 0.0);
        for (k, &id) in ids.iter().enumerate() {
            let src = &g.data()[k * self.dim..(k + 1) * self.dim];
            for (d, s) in self.grad_table[id * self.dim..(id + 1) * self.dim].iter_mut().zip(src) {
                *d += s;
            }
        }
        // Integer ids carry no gradient.
        Ok(Tensor::zeros(vec![g.rows(), self.tokens]))
    }

    fn params(&mut self) -> Vec<ParamRef<'_>> {
        vec![ParamRef { value: &mut self.table, grad: &self.grad_table }]
    }
}

// ---------------------------------------------------------------- batch norm

pub const BATCH_NORM_EPS: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.99;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchNorm {
    pub features: usize,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    #[serde(skip)]
    grad_gamma: Vec<f64>,
    #[serde(skip)]
    grad_beta: Vec<f64>,
    #[serde(skip)]
    cache: Option<BnCache>,
}

#[derive(Debug, Clone)]
struct BnCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

impl BatchNorm {
    pub fn new(features: usize) -> Self {
        Self {
            features,
            gamma: vec![1.0; features],
            beta: vec![0.0; features],
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            grad_gamma: vec![0.0; features],
            grad_beta: vec![0.0; features],
            cache: None,
        }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let f = self.features;
        if x.cols() != f {
            return Err(dim_err("batch-norm", f, x.cols()));
        }
        let rows = x.rows();
        let (mean, var) = match mode {
            Mode::Train => {
                if rows == 0 {
                    return Err(Error::Dimension("batch-norm on empty batch".into()));
                }
                let mut mean = vec![0.0; f];
                let mut var = vec![0.0; f];
                for r in 0..rows {
                    for (m, v) in mean.iter_mut().zip(x.row(r)) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= rows as f64);
                for r in 0..rows {
                    for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                var.iter_mut().for_each(|s| *s /= rows as f64);
                for j in 0..f {
                    self.running_mean[j] = BATCH_NORM_MOMENTUM * self.running_mean[j]
                        + (1.0 - BATCH_NORM_MOMENTUM) * mean[j];
                    self.running_var[j] = BATCH_NORM_MOMENTUM * self.running_var[j]
                        + (1.0 - BATCH_NORM_MOMENTUM) * var[j];
                }
                (mean, var)
            }
            Mode::Eval => (self.running_mean.clone(), self.running_var.clone()),
        };
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BATCH_NORM_EPS).sqrt()).collect();
        let mut xhat = vec![0.0; rows * f];
        let mut out = vec![0.0; rows * f];
        for r in 0..rows {
            for j in 0..f {
                let h = (x.get(r, j) - mean[j]) * inv_std[j];
                xhat[r * f + j] = h;
                out[r * f + j] = self.gamma[j] * h + self.beta[j];
            }
        }
        if mode == Mode::Train {
            self.cache = Some(BnCache { xhat: Tensor::matrix(rows, f, xhat), inv_std });
        }
        Ok(Tensor::matrix(rows, f, out))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or_else(|| missing_forward("batch-norm"))?;
        let f = self.features;
        let rows = cache.xhat.rows();
        if g.cols() != f || g.rows() != rows {
            return Err(dim_err("batch-norm backward", f, g.cols()));
        }
        let n = rows as f64;
        let mut sum_g = vec![0.0; f];
        let mut sum_gx = vec![0.0; f];
        for r in 0..rows {
            for j in 0..f {
                let gv = g.get(r, j);
                sum_g[j] += gv;
                sum_gx[j] += gv * cache.xhat.get(r, j);
            }
        }
        self.grad_beta.copy_from_slice(&sum_g);
        self.grad_gamma.copy_from_slice(&sum_gx);
        let mut gx = vec![0.0; rows * f];
        for r in 0..rows {
            for j in 0..f {
                let h = cache.xhat.get(r, j);
                gx[r * f + j] = self.gamma[j] * cache.inv_std[j] / n
                    * (n * g.get(r, j) - sum_g[j] - h * sum_gx[j]);
            }
        }
        Ok(Tensor::matrix(rows, f, gx))
    }

    fn params(&mut self) -> Vec<ParamRef<'_>> {
        vec![
            ParamRef { value: &mut self.gamma, grad: &self.grad_gamma },
            ParamRef { value: &mut self.beta, grad: &self.grad_beta },
        ]
    }
}

// ---------------------------------------------------------------- activation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActivationLayer {
    pub kind: Activation,
    #[serde(skip)]
    cache: Option<(Tensor, Tensor)>,
}

impl ActivationLayer {
    pub fn new(kind: Activation) -> Self {
        Self { kind, cache: None }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let y = match self.kind {
            Activation::Relu => x.map(|v| v.max(0.0)),
            Activation::LeakyRelu => x.map(|v| if v > 0.0 { v } else { LEAKY_SLOPE * v }),
            Activation::Tanh => x.map(f64::tanh),
            Activation::Sigmoid => x.map(sigmoid),
            Activation::Linear => x.clone(),
            Activation::Softmax => softmax_rows(x),
        };
        if mode == Mode::Train {
            self.cache = Some((x.clone(), y.clone()));
        }
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let (x, y) = self.cache.as_ref().ok_or_else(|| missing_forward("activation"))?;
        if g.shape() != y.shape() {
            return Err(Error::Dimension("activation backward shape".into()));
        }
        let gd = g.data();
        let mut out = vec![0.0; gd.len()];
        match self.kind {
            Activation::Relu => {
                for ((o, &gv), &xv) in out.iter_mut().zip(gd).zip(x.data()) {
                    *o = if xv > 0.0 { gv } else { 0.0 };
                }
            }
            Activation::LeakyRelu => {
                for ((o, &gv), &xv) in out.iter_mut().zip(gd).zip(x.data()) {
                    *o = if xv > 0.0 { gv } else { LEAKY_SLOPE * gv };
                }
            }
            Activation::Tanh => {
                for ((o, &gv), &yv) in out.iter_mut().zip(gd).zip(y.data()) {
                    *o = gv * (1.0 - yv * yv);
                }
            }
            Activation::Sigmoid => {
                for ((o, &gv), &yv) in out.iter_mut().zip(gd).zip(y.data()) {
                    *o = gv * yv * (1.0 - yv);
                }
            }
            Activation::Linear => out.copy_from_slice(gd),
            Activation::Softmax => {
                let c = y.cols();
                for r in 0..y.rows() {
                    let yr = y.row(r);
                    let gr = g.row(r);
                    let s = dot(yr, gr);
                    for j in 0..c {
                        out[r * c + j] = yr[j] * (gr[j] - s);
                    }
                }
            }
        }
        Ok(Tensor::matrix(g.rows(), g.cols(), out))
    }
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(x: &Tensor) -> Tensor {
    let c = x.cols();
    let mut out = x.data().to_vec();
    for row in out.chunks_mut(c.max(1)) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut s = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            s += *v;
        }
        row.iter_mut().for_each(|v| *v /= s);
    }
    Tensor::matrix(x.rows(), c, out)
}

// ---------------------------------------------------------------- power constraints

/// Scales every row to squared norm `n` (the number of columns).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EnergyNormalize {
    #[serde(skip)]
    cache: Option<(Tensor, Vec<f64>)>,
}

impl EnergyNormalize {
    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let c = x.cols();
        let scale = (c as f64).sqrt();
        let mut norms = Vec::with_capacity(x.rows());
        let mut out = Vec::with_capacity(x.len());
        for r in 0..x.rows() {
            let row = x.row(r);
            let norm = dot(row, row).sqrt();
            if norm == 0.0 {
                return Err(Error::Numeric("energy normalization of an all-zero codeword".into()));
            }
            norms.push(norm);
            out.extend(row.iter().map(|v| v * scale / norm));
        }
        if mode == Mode::Train {
            self.cache = Some((x.clone(), norms));
        }
        Ok(Tensor::matrix(x.rows(), c, out))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let (x, norms) = self.cache.as_ref().ok_or_else(|| missing_forward("energy-normalize"))?;
        let c = x.cols();
        let scale = (c as f64).sqrt();
        let mut out = Vec::with_capacity(x.len());
        for r in 0..x.rows() {
            let (xr, gr, n) = (x.row(r), g.row(r), norms[r]);
            let xg = dot(xr, gr);
            out.extend(xr.iter().zip(gr).map(|(xv, gv)| scale * (gv / n - xv * xg / (n * n * n))));
        }
        Ok(Tensor::matrix(x.rows(), c, out))
    }
}

/// Scales the whole batch so the mean squared row norm equals `power_per_row`.
///
/// The statistic is always taken over the current batch, in both modes, so a
/// batch holding every message once normalizes the codebook exactly under a
/// uniform message prior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvgPowerNormalize {
    pub power_per_row: f64,
    #[serde(skip)]
    cache: Option<(Tensor, f64)>,
}

impl AvgPowerNormalize {
    pub fn new(power_per_row: f64) -> Self {
        Self { power_per_row, cache: None }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        let rows = x.rows() as f64;
        let ss: f64 = x.data().iter().map(|v| v * v).sum();
        if ss == 0.0 {
            return Err(Error::Numeric("average-power normalization of an all-zero batch".into()));
        }
        // mean row power is ss / rows
        let k = (self.power_per_row * rows / ss).sqrt();
        if mode == Mode::Train {
            self.cache = Some((x.clone(), ss));
        }
        Ok(x.map(|v| v * k))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        let (x, ss) = self.cache.as_ref().ok_or_else(|| missing_forward("avg-power-normalize"))?;
        let a = self.power_per_row * x.rows() as f64;
        let k = (a / ss).sqrt();
        let xg = dot(x.data(), g.data());
        let data = x.data().iter().zip(g.data()).map(|(xv, gv)| k * gv - k * xv * xg / ss).collect();
        Ok(Tensor::matrix(x.rows(), x.cols(), data))
    }
}

// ---------------------------------------------------------------- channel layers

/// Additive white Gaussian noise with standard deviation `std` per real entry.
///
/// Models the channel, so it draws fresh noise in both modes. Its backward pass
/// is the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AwgnNoise {
    pub std: f64,
    #[serde(skip)]
    seen_forward: bool,
}

impl AwgnNoise {
    pub fn new(std: f64) -> Self {
        Self { std, seen_forward: false }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode, rng: &mut Rng) -> Result<Tensor> {
        let mut y = x.clone();
        if self.std > 0.0 {
            for v in y.data_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += self.std * z;
            }
        }
        if mode == Mode::Train {
            self.seen_forward = true;
        }
        Ok(y)
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        if !self.seen_forward {
            return Err(missing_forward("awgn-noise"));
        }
        Ok(g.clone())
    }
}

/// Fixed complex matrix product `y = h x` on interleaved (re, im) columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexMultiply {
    pub rx: usize,
    pub tx: usize,
    /// Row-major `(rx, tx)` complex entries.
    pub h: Vec<Complex64>,
    #[serde(skip)]
    seen_forward: bool,
}

impl ComplexMultiply {
    pub fn new(rx: usize, tx: usize, h: Vec<Complex64>) -> Self {
        assert_eq!(h.len(), rx * tx);
        Self { rx, tx, h, seen_forward: false }
    }

    fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor> {
        if x.cols() != 2 * self.tx {
            return Err(dim_err("complex-multiply", 2 * self.tx, x.cols()));
        }
        let mut out = Vec::with_capacity(x.rows() * 2 * self.rx);
        for r in 0..x.rows() {
            let xr = x.row(r);
            for i in 0..self.rx {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..self.tx {
                    acc += self.h[i * self.tx + j] * Complex64::new(xr[2 * j], xr[2 * j + 1]);
                }
                out.push(acc.re);
                out.push(acc.im);
            }
        }
        if mode == Mode::Train {
            self.seen_forward = true;
        }
        Ok(Tensor::matrix(x.rows(), 2 * self.rx, out))
    }

    fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        if !self.seen_forward {
            return Err(missing_forward("complex-multiply"));
        }
        // Real form of y = h x is [[a, -b], [b, a]] per entry; its transpose
        // acting on (g_re, g_im) is conj(h)^T g.
        let mut out = Vec::with_capacity(g.rows() * 2 * self.tx);
        for r in 0..g.rows() {
            let gr = g.row(r);
            for j in 0..self.tx {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..self.rx {
                    acc += self.h[i * self.tx + j].conj() * Complex64::new(gr[2 * i], gr[2 * i + 1]);
                }
                out.push(acc.re);
                out.push(acc.im);
            }
        }
        Ok(Tensor::matrix(g.rows(), 2 * self.tx, out))
    }
}

// ---------------------------------------------------------------- dispatch

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "kebab-case")]
pub enum Layer {
    Dense(Dense),
    Embedding(Embedding),
    BatchNorm(BatchNorm),
    Activation(ActivationLayer),
    EnergyNormalize(EnergyNormalize),
    AvgPowerNormalize(AvgPowerNormalize),
    AwgnNoise(AwgnNoise),
    ComplexMultiply(ComplexMultiply),
}

impl Layer {
    pub fn dense(inputs: usize, outputs: usize, init: Init, rng: &mut Rng) -> Self {
        Layer::Dense(Dense::new(inputs, outputs, init, rng))
    }

    pub fn activation(kind: Activation) -> Self {
        Layer::Activation(ActivationLayer::new(kind))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Embedding(_) => "embedding",
            Layer::BatchNorm(_) => "batch-norm",
            Layer::Activation(a) => match a.kind {
                Activation::Relu => "relu",
                Activation::LeakyRelu => "leaky-relu",
                Activation::Tanh => "tanh",
                Activation::Sigmoid => "sigmoid",
                Activation::Linear => "linear",
                Activation::Softmax => "softmax",
            },
            Layer::EnergyNormalize(_) => "energy-normalize",
            Layer::AvgPowerNormalize(_) => "avg-power-normalize",
            Layer::AwgnNoise(_) => "awgn-noise",
            Layer::ComplexMultiply(_) => "complex-multiply",
        }
    }

    /// Output width for a given input width, or `None` if incompatible.
    pub fn output_width(&self, input: usize) -> Option<usize> {
        match self {
            Layer::Dense(d) => (d.inputs == input).then_some(d.outputs),
            Layer::Embedding(e) => (e.tokens == input).then_some(e.tokens * e.dim),
            Layer::BatchNorm(b) => (b.features == input).then_some(input),
            Layer::ComplexMultiply(c) => (2 * c.tx == input).then_some(2 * c.rx),
            _ => Some(input),
        }
    }

    pub fn forward(&mut self, x: &Tensor, mode: Mode, rng: &mut Rng) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.forward(x, mode),
            Layer::Embedding(l) => l.forward(x, mode),
            Layer::BatchNorm(l) => l.forward(x, mode),
            Layer::Activation(l) => l.forward(x, mode),
            Layer::EnergyNormalize(l) => l.forward(x, mode),
            Layer::AvgPowerNormalize(l) => l.forward(x, mode),
            Layer::AwgnNoise(l) => l.forward(x, mode, rng),
            Layer::ComplexMultiply(l) => l.forward(x, mode),
        }
    }

    pub fn backward(&mut self, g: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(l) => l.backward(g),
            Layer::Embedding(l) => l.backward(g),
            Layer::BatchNorm(l) => l.backward(g),
            Layer::Activation(l) => l.backward(g),
            Layer::EnergyNormalize(l) => l.backward(g),
            Layer::AvgPowerNormalize(l) => l.backward(g),
            Layer::AwgnNoise(l) => l.backward(g),
            Layer::ComplexMultiply(l) => l.backward(g),
        }
    }

    pub fn params(&mut self) -> Vec<ParamRef<'_>> {
        match self {
            Layer::Dense(l) => l.params(),
            Layer::Embedding(l) => l.params(),
            Layer::BatchNorm(l) => l.params(),
            _ => Vec::new(),
        }
    }

    /// Re-creates gradient buffers after deserialization.
    pub(crate) fn restore_buffers(&mut self) {
        match self {
            Layer::Dense(l) => l.restore_buffers(),
            Layer::Embedding(l) => l.grad_table = vec![0.0; l.table.len()],
            Layer::BatchNorm(l) => {
                l.grad_gamma = vec![0.0; l.features];
                l.grad_beta = vec![0.0; l.features];
            }
            _ => {}
        }
    }
}
