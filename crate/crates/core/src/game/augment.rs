//! Training `A` from ten real samples, with and without GAN augmentation.

use serde::{Deserialize, Serialize};

use super::dataset::build_dataset_a;
use super::gan::{train_cgan, CGanConfig};
use super::kl::{kl_divergence, DEFAULT_BINS, DEFAULT_SMOOTHING};
use super::play::{operate, prepare, GameConfig};
use super::world::JamRule;
use crate::error::{Error, Result};
use crate::nn::classifier::{fit, Dataset, ErrorReport};
use crate::rng::{self, Rng};
use rand::seq::IndexedRandom;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    /// Real samples per class available to `A`.
    pub real_per_class: usize,
    pub synthetic: usize,
    /// Further listening slots whose samples stand in for the real
    /// conditional distributions when measuring the KL divergence.
    pub reference_slots: usize,
    pub gan: CGanConfig,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { real_per_class: 5, synthetic: 500, reference_slots: 5000, gan: CGanConfig::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentOutcome {
    pub real_only: ErrorReport,
    pub augmented: ErrorReport,
    /// `D(synthetic ‖ real)` for class 0 (no ACK) and class 1 (ACK), with the
    /// real side taken from the reference slots.
    pub kl: [f64; 2],
    pub d_loss: Vec<f64>,
    pub g_loss: Vec<f64>,
}

/// `per_class` samples of each class drawn without replacement, returned in
/// slot order.
pub fn sample_per_class(data: &Dataset, per_class: usize, rng: &mut Rng) -> Result<Dataset> {
    let mut idx = Vec::new();
    for class in 0..2 {
        let pool: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i].min(1) == class).collect();
        if pool.len() < per_class {
            return Err(Error::DegenerateData(format!(
                "{} samples of class {class}, need {per_class}",
                pool.len()
            )));
        }
        idx.extend(pool.choose_multiple(rng, per_class).copied());
    }
    idx.sort_unstable();
    Ok(data.subset(&idx))
}

fn class_rows(data: &Dataset, class: usize) -> crate::nn::tensor::Tensor {
    let idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
    data.features.select_rows(&idx)
}

/// Plays the game up to `A`'s listening phase, then compares a classifier
/// trained on the few real samples with one trained on real plus synthetic
/// samples. Both are tested on the second half of `A`'s data.
pub fn gan_augment(game: &GameConfig, cfg: &AugmentConfig, seed: u64) -> Result<AugmentOutcome> {
    if cfg.reference_slots == 0 {
        return Err(Error::Config(vec!["reference_slots must be positive".into()]));
    }
    let mut prepared = prepare(game, None, seed)?;
    let data = build_dataset_a(&prepared.collection, game.window)?;
    let (train, test) = data.split_half();
    let real = sample_per_class(&train, cfg.real_per_class, &mut rng::stream(seed, 0x7265_616c))?;

    let seed_a = seed ^ 0x6161;
    let (mut c_real, _) = fit(game.adversary_net(seed_a)?, &real, &game.train_config(seed_a))?;
    let real_only = c_real.evaluate(&test)?;

    let gan_cfg = CGanConfig { seed: seed ^ 0x6761, ..cfg.gan.clone() };
    let mut gan = train_cgan(&real, &gan_cfg)?;
    let synthetic = gan.generate_balanced(cfg.synthetic, &mut rng::stream(seed, 0x7379_6e))?;
    let mixed = real.concat(&synthetic)?;
    let (mut c_mixed, _) = fit(game.adversary_net(seed_a)?, &mixed, &game.train_config(seed_a))?;
    let augmented = c_mixed.evaluate(&test)?;

    let k = game.window;
    let reference_logs = prepared.world.run(
        cfg.reference_slots + k - 1,
        operate(&mut prepared.c_t, game, None),
        JamRule::Off,
    )?;
    let reference = build_dataset_a(&reference_logs, k)?;
    let mut kl = [0.0; 2];
    for (c, kl_c) in kl.iter_mut().enumerate() {
        let p = class_rows(&synthetic, c);
        let q = class_rows(&reference, c);
        if q.rows() == 0 {
            return Err(Error::DegenerateData(format!("no reference samples of class {c}")));
        }
        *kl_c = kl_divergence(&p, &q, DEFAULT_BINS, DEFAULT_SMOOTHING);
    }
    Ok(AugmentOutcome { real_only, augmented, kl, d_loss: gan.d_loss, g_loss: gan.g_loss })
}
