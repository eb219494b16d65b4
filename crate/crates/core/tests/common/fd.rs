//! Central finite differences over a network's inputs and parameters.

use dlphy::nn::layer::{AvgPowerNormalize, AwgnNoise, BatchNorm, ComplexMultiply, Embedding, EnergyNormalize};
use dlphy::nn::{Activation, Init, Layer, Mode, Network, Tensor};
use num_complex::Complex64;
use dlphy::rng;
use rand::Rng;

pub const STEP: f64 = 1e-5;

/// Scalar probe `L(y) = Σ c ∘ y` evaluated on a fresh training forward.
fn probe(net: &mut Network, x: &Tensor, c: &[f64], seed: u64) -> f64 {
    net.reseed(seed);
    let y = net.forward(x, Mode::Train).expect("forward");
    y.data().iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Norm-wise relative error between two gradient vectors.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

pub struct Check {
    pub input_error: Option<f64>,
    pub param_error: Option<f64>,
}

impl Check {
    pub fn worst(&self) -> f64 {
        self.input_error.unwrap_or(0.0).max(self.param_error.unwrap_or(0.0))
    }
}

/// Compares analytic and numerical gradients of a random linear probe.
pub fn check_network(net: &mut Network, x: &Tensor, check_input: bool, seed: u64) -> Check {
    let mut r = rng::stream(seed, 99);
    net.reseed(seed);
    let y = net.forward(x, Mode::Train).expect("forward");
    let c: Vec<f64> = (0..y.len()).map(|_| r.random_range(-1.0..1.0)).collect();
    let cg = Tensor::matrix(y.rows(), y.cols(), c.clone());
    let gx = net.backward(&cg).expect("backward");
    let analytic_params: Vec<f64> = net.params().iter().flat_map(|p| p.grad.to_vec()).collect();

    let input_error = check_input.then(|| {
        let mut num = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let mut xp = x.clone();
            xp.data_mut()[i] += STEP;
            let mut xm = x.clone();
            xm.data_mut()[i] -= STEP;
            num.push((probe(net, &xp, &c, seed) - probe(net, &xm, &c, seed)) / (2.0 * STEP));
        }
        rel_error(gx.data(), &num)
    });

    let param_error = (!analytic_params.is_empty()).then(|| {
        let sizes: Vec<usize> = net.params().iter().map(|p| p.value.len()).collect();
        let mut num = Vec::with_capacity(analytic_params.len());
        for (pi, &len) in sizes.iter().enumerate() {
            for k in 0..len {
                let orig = net.params()[pi].value[k];
                net.params()[pi].value[k] = orig + STEP;
                let fp = probe(net, x, &c, seed);
                net.params()[pi].value[k] = orig - STEP;
                let fm = probe(net, x, &c, seed);
                net.params()[pi].value[k] = orig;
                num.push((fp - fm) / (2.0 * STEP));
            }
        }
        rel_error(&analytic_params, &num)
    });

    Check { input_error, param_error }
}

/// Random batch in [-1, 1).
pub fn random_input(rows: usize, cols: usize, seed: u64) -> Tensor {
    let mut r = rng::stream(seed, 7);
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| r.random_range(-1.0..1.0)).collect())
}

pub fn layer_name(l: &Layer) -> &'static str {
    l.name()
}

/// A network exercising one layer kind, and how to feed it.
pub struct Case {
    pub name: &'static str,
    pub build: fn(u64) -> Network,
    /// Batch size of the random real-valued input.
    pub rows: usize,
    /// Feed integer token ids instead; input gradients are then skipped.
    pub tokens: bool,
}

fn with_dense(inputs: usize, width: usize, tail: Vec<Layer>, seed: u64) -> Network {
    let mut r = rng::stream(seed, 1);
    let mut layers = vec![Layer::dense(inputs, width, Init::ScaledUniform, &mut r)];
    layers.extend(tail);
    Network::new(inputs, layers, seed).unwrap()
}

fn act(kind: Activation, seed: u64) -> Network {
    with_dense(4, 5, vec![Layer::activation(kind)], seed)
}

fn token_input(seed: u64) -> Tensor {
    let mut r = rng::stream(seed, 5);
    Tensor::matrix(5, 2, (0..10).map(|_| r.random_range(0..4) as f64).collect())
}

/// One case per layer kind, plus a deep mixed stack.
pub fn layer_cases() -> Vec<Case> {
    vec![
        Case { name: "dense", build: |s| with_dense(5, 3, vec![], s), rows: 4, tokens: false },
        Case { name: "relu", build: |s| act(Activation::Relu, s), rows: 6, tokens: false },
        Case { name: "leaky-relu", build: |s| act(Activation::LeakyRelu, s), rows: 6, tokens: false },
        Case { name: "tanh", build: |s| act(Activation::Tanh, s), rows: 6, tokens: false },
        Case { name: "sigmoid", build: |s| act(Activation::Sigmoid, s), rows: 6, tokens: false },
        Case { name: "linear", build: |s| act(Activation::Linear, s), rows: 6, tokens: false },
        Case { name: "softmax", build: |s| act(Activation::Softmax, s), rows: 6, tokens: false },
        Case {
            name: "batch-norm",
            build: |s| {
                let mut bn = BatchNorm::new(4);
                let mut r = rng::stream(s, 3);
                bn.gamma.iter_mut().for_each(|g| *g = r.random_range(0.5..1.5));
                bn.beta.iter_mut().for_each(|b| *b = r.random_range(-0.5..0.5));
                with_dense(3, 4, vec![Layer::BatchNorm(bn)], s)
            },
            rows: 8,
            tokens: false,
        },
        Case {
            name: "energy-normalize",
            build: |s| with_dense(3, 6, vec![Layer::EnergyNormalize(EnergyNormalize::default())], s),
            rows: 5,
            tokens: false,
        },
        Case {
            name: "avg-power-normalize",
            build: |s| with_dense(3, 4, vec![Layer::AvgPowerNormalize(AvgPowerNormalize::new(2.0))], s),
            rows: 5,
            tokens: false,
        },
        Case {
            name: "awgn",
            build: |s| with_dense(3, 4, vec![Layer::AwgnNoise(AwgnNoise::new(0.3))], s),
            rows: 5,
            tokens: false,
        },
        Case {
            name: "complex-multiply",
            build: |s| {
                let mut r = rng::stream(s, 4);
                let h = (0..6).map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
                with_dense(3, 4, vec![Layer::ComplexMultiply(ComplexMultiply::new(3, 2, h))], s)
            },
            rows: 5,
            tokens: false,
        },
        Case {
            name: "embedding",
            build: |s| {
                let mut r = rng::stream(s, 5);
                let emb = Embedding::new(4, 3, 2, &mut r);
                let dense = Layer::dense(6, 2, Init::ScaledUniform, &mut r);
                Network::new(2, vec![Layer::Embedding(emb), dense, Layer::activation(Activation::Tanh)], s).unwrap()
            },
            rows: 5,
            tokens: true,
        },
        Case {
            name: "deep-stack",
            build: |s| {
                let mut r = rng::stream(s, 6);
                let layers = vec![
                    Layer::dense(4, 6, Init::ScaledUniform, &mut r),
                    Layer::BatchNorm(BatchNorm::new(6)),
                    Layer::activation(Activation::Tanh),
                    Layer::dense(6, 4, Init::ScaledUniform, &mut r),
                    Layer::AvgPowerNormalize(AvgPowerNormalize::new(2.0)),
                    Layer::AwgnNoise(AwgnNoise::new(0.2)),
                    Layer::dense(4, 3, Init::ScaledUniform, &mut r),
                    Layer::activation(Activation::Softmax),
                ];
                Network::new(4, layers, s).unwrap()
            },
            rows: 6,
            tokens: false,
        },
    ]
}

/// Worst relative error of a case over `points` random networks and inputs.
pub fn sweep(case: &Case, points: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..points {
        let mut net = (case.build)(seed);
        let x = if case.tokens { token_input(seed) } else { random_input(case.rows, net.input_width, seed + 1000) };
        worst = worst.max(check_network(&mut net, &x, !case.tokens, seed).worst());
    }
    worst
}
