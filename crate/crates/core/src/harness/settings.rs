//! Tunable settings of each experiment, with the defaults used to reproduce
//! the reference figures and tables.

use serde::{Deserialize, Serialize};

use crate::autoencoder::{AeConfig, MimoAeConfig, PowerConstraint, Schedule};
use crate::baselines::BlerSettings;
use crate::error::{Error, Result};
use crate::game::{AugmentConfig, GameConfig};

/// Inclusive SNR grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        // Rounded so that 0.1-step grids print as 0.3 rather than 0.30000000000000004.
        (0..n).map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9).collect()
    }

    fn check(&self, name: &str, errs: &mut Vec<String>) {
        if !(self.step > 0.0 && self.step.is_finite()) {
            errs.push(format!("{name}.step must be positive, got {}", self.step));
        } else if !(self.stop >= self.start && self.start.is_finite() && self.stop.is_finite()) {
            errs.push(format!("{name}.stop must not be below {name}.start"));
        } else if (self.stop - self.start) / self.step > 10_000.0 {
            errs.push(format!("{name} has more than 10000 points"));
        }
    }
}

/// Stopping rule of a Monte-Carlo error-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarlo {
    pub min_errors: u64,
    pub max_trials: u64,
    /// Blocks per parallel chunk.
    pub chunk: u64,
}

impl MonteCarlo {
    pub fn settings(&self, seed: u64) -> BlerSettings {
        BlerSettings { min_errors: self.min_errors, max_trials: self.max_trials, chunk: self.chunk, seed }
    }

    fn check(&self, name: &str, errs: &mut Vec<String>) {
        if self.max_trials == 0 || self.chunk == 0 {
            errs.push(format!("{name}.max_trials and {name}.chunk must be positive"));
        }
        if self.max_trials > i64::MAX as u64 || self.min_errors > i64::MAX as u64 {
            errs.push(format!("{name} counts must fit in a signed 64-bit integer"));
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig5aSettings {
    pub ae: AeConfig,
    /// Independently trained autoencoders; the best on a validation run is kept.
    pub train_seeds: usize,
    pub validation_ebno_db: f64,
    pub validation_blocks: u64,
    pub grid: Grid,
    pub mc: MonteCarlo,
}

impl Default for Fig5aSettings {
    fn default() -> Self {
        let schedule = Schedule { steps: 30_000, plateau_window: 0, lr_drop: 0.3, ..Schedule::default() };
        Self {
            ae: AeConfig { schedule, ..AeConfig::new(7, 4) },
            train_seeds: 3,
            validation_ebno_db: 6.0,
            validation_blocks: 1 << 18,
            grid: Grid::new(0.0, 8.0, 0.5),
            mc: MonteCarlo { min_errors: 200, max_trials: 1 << 22, chunk: 4096 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig5bSettings {
    pub ae22: AeConfig,
    pub ae88: AeConfig,
    pub grid: Grid,
    pub mc: MonteCarlo,
}

impl Default for Fig5bSettings {
    fn default() -> Self {
        Self {
            ae22: AeConfig::new(2, 2),
            ae88: AeConfig::new(8, 8),
            grid: Grid::new(0.0, 10.0, 0.5),
            mc: MonteCarlo { min_errors: 200, max_trials: 1 << 21, chunk: 4096 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig6Settings {
    pub ae22: AeConfig,
    pub ae24: AeConfig,
    pub ae24_avg: AeConfig,
}

impl Default for Fig6Settings {
    fn default() -> Self {
        Self {
            ae22: AeConfig::new(2, 2),
            ae24: AeConfig::new(2, 4),
            ae24_avg: AeConfig { power: PowerConstraint::AvgPower, ..AeConfig::new(2, 4) },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig10aSettings {
    pub mimo: MimoAeConfig,
    /// Fixed Rayleigh draws; one autoencoder is trained per draw.
    pub draws: usize,
    pub grid: Grid,
    /// Transmissions per SNR point and draw.
    pub trials_per_point: u64,
}

fn mimo_defaults() -> MimoAeConfig {
    MimoAeConfig {
        schedule: Schedule { plateau_window: 0, lr_drop: 0.3, ..Schedule::default() },
        ..MimoAeConfig::default()
    }
}

impl Default for Fig10aSettings {
    fn default() -> Self {
        Self { mimo: mimo_defaults(), draws: 16, grid: Grid::new(0.0, 40.0, 1.0), trials_per_point: 1 << 16 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig10bSettings {
    pub mimo: MimoAeConfig,
    /// Which fixed draw (offset from the run seed) to train on.
    pub draw: u64,
    pub est_vars: Vec<f64>,
    pub grid: Grid,
    pub mc: MonteCarlo,
}

impl Default for Fig10bSettings {
    fn default() -> Self {
        Self {
            mimo: mimo_defaults(),
            draw: 1,
            est_vars: vec![0.0, 0.01, 0.02, 0.04],
            grid: Grid::new(0.0, 40.0, 2.0),
            mc: MonteCarlo { min_errors: 400, max_trials: 1 << 18, chunk: 4096 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig11bSettings {
    /// `(n, k)` systems.
    pub systems: Vec<[usize; 2]>,
    pub train_ebno_db: f64,
    pub schedule: Schedule,
    pub grid: Grid,
    pub mc: MonteCarlo,
}

impl Default for Fig11bSettings {
    fn default() -> Self {
        Self {
            systems: vec![[1, 1], [2, 2], [4, 8]],
            train_ebno_db: 7.0,
            schedule: Schedule { steps: 30_000, plateau_window: 0, lr_drop: 0.3, ..Schedule::default() },
            grid: Grid::new(0.0, 14.0, 0.5),
            mc: MonteCarlo { min_errors: 200, max_trials: 1 << 21, chunk: 4096 },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table3Settings {
    pub game: GameConfig,
    /// Independent games pooled per attack; replicate `r` uses seed `seed + r`.
    pub replicates: usize,
    /// Fixed thresholds of the sensing jammer.
    pub taus: Vec<f64>,
    /// Thresholds searched for the best sensing jammer.
    pub tau_search: Grid,
}

impl Default for Table3Settings {
    fn default() -> Self {
        Self { game: GameConfig::default(), replicates: 40, taus: vec![3.4, 4.7], tau_search: Grid::new(0.5, 20.0, 0.1) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig23aSettings {
    pub game: GameConfig,
    pub replicates: usize,
    /// Defense budgets in percent of slots.
    pub p_d: Vec<f64>,
}

impl Default for Fig23aSettings {
    fn default() -> Self {
        Self { game: GameConfig::default(), replicates: 40, p_d: vec![0.0, 5.0, 10.0, 20.0, 40.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GanAugmentSettings {
    pub game: GameConfig,
    pub augment: AugmentConfig,
    pub replicates: usize,
}

impl Default for GanAugmentSettings {
    fn default() -> Self {
        Self { game: GameConfig::default(), augment: AugmentConfig::default(), replicates: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    None,
    DlJammer,
    SensingJammer,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSettings {
    pub game: GameConfig,
    pub attack: AttackKind,
    /// Threshold of the sensing jammer.
    pub tau: f64,
    /// Defense budget in percent of slots; 0 disables the defense.
    pub p_d: f64,
}

impl Default for CustomSettings {
    fn default() -> Self {
        Self { game: GameConfig::default(), attack: AttackKind::DlJammer, tau: 4.7, p_d: 0.0 }
    }
}

/// Settings of one experiment.
#[derive(Debug, Clone)]
pub enum Settings {
    Fig5a(Fig5aSettings),
    Fig5b(Fig5bSettings),
    Fig6(Fig6Settings),
    Fig10a(Fig10aSettings),
    Fig10b(Fig10bSettings),
    Fig11b(Fig11bSettings),
    Table3(Table3Settings),
    Fig23a(Fig23aSettings),
    GanAugment(GanAugmentSettings),
    Custom(CustomSettings),
}

fn collect(prefix: &str, r: Result<()>, errs: &mut Vec<String>) {
    match r {
        Ok(()) => {}
        Err(Error::Config(v)) => errs.extend(v.into_iter().map(|e| format!("{prefix}: {e}"))),
        Err(e) => errs.push(format!("{prefix}: {e}")),
    }
}

fn check_p_d(name: &str, p: f64, errs: &mut Vec<String>) {
    if !(0.0..=100.0).contains(&p) {
        errs.push(format!("{name} must lie in [0, 100], got {p}"));
    }
}

fn check_replicates(n: usize, errs: &mut Vec<String>) {
    if n == 0 {
        errs.push("replicates must be at least 1".into());
    }
}

impl Settings {
    /// Every violated constraint, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut errs = Vec::new();
        match self {
            Settings::Fig5a(s) => {
                collect("ae", s.ae.validate(), &mut errs);
                if s.train_seeds == 0 {
                    errs.push("train_seeds must be at least 1".into());
                }
                if s.validation_blocks == 0 {
                    errs.push("validation_blocks must be positive".into());
                }
                s.grid.check("grid", &mut errs);
                s.mc.check("mc", &mut errs);
            }
            Settings::Fig5b(s) => {
                collect("ae22", s.ae22.validate(), &mut errs);
                collect("ae88", s.ae88.validate(), &mut errs);
                s.grid.check("grid", &mut errs);
                s.mc.check("mc", &mut errs);
            }
            Settings::Fig6(s) => {
                collect("ae22", s.ae22.validate(), &mut errs);
                collect("ae24", s.ae24.validate(), &mut errs);
                collect("ae24_avg", s.ae24_avg.validate(), &mut errs);
            }
            Settings::Fig10a(s) => {
                collect("mimo", s.mimo.validate(), &mut errs);
                if s.draws == 0 {
                    errs.push("draws must be at least 1".into());
                }
                if s.trials_per_point == 0 || s.trials_per_point > i64::MAX as u64 {
                    errs.push("trials_per_point must be positive".into());
                }
                s.grid.check("grid", &mut errs);
            }
            Settings::Fig10b(s) => {
                collect("mimo", s.mimo.validate(), &mut errs);
                if s.est_vars.is_empty() {
                    errs.push("est_vars must not be empty".into());
                }
                for (i, v) in s.est_vars.iter().enumerate() {
                    if !(*v >= 0.0 && v.is_finite()) {
                        errs.push(format!("est_vars[{i}] must be a nonnegative variance, got {v}"));
                    }
                }
                s.grid.check("grid", &mut errs);
                s.mc.check("mc", &mut errs);
            }
            Settings::Fig11b(s) => {
                if s.systems.is_empty() {
                    errs.push("systems must not be empty".into());
                }
                for (i, [n, k]) in s.systems.iter().enumerate() {
                    if *n == 0 || *k == 0 || *k > 16 {
                        errs.push(format!("systems[{i}] = ({n}, {k}) needs n >= 1 and 1 <= k <= 16"));
                    } else if crate::baselines::scheme_for(*n, *k).is_err() {
                        errs.push(format!("systems[{i}] = ({n}, {k}) has no time-sharing baseline"));
                    }
                }
                collect("schedule", s.schedule.validate(), &mut errs);
                s.grid.check("grid", &mut errs);
                s.mc.check("mc", &mut errs);
            }
            Settings::Table3(s) => {
                collect("game", s.game.validate(), &mut errs);
                check_replicates(s.replicates, &mut errs);
                for (i, t) in s.taus.iter().enumerate() {
                    if !(*t > 0.0) {
                        errs.push(format!("taus[{i}] must be positive, got {t}"));
                    }
                }
                s.tau_search.check("tau_search", &mut errs);
                if s.tau_search.start <= 0.0 {
                    errs.push("tau_search.start must be positive".into());
                }
            }
            Settings::Fig23a(s) => {
                collect("game", s.game.validate(), &mut errs);
                check_replicates(s.replicates, &mut errs);
                if s.p_d.is_empty() {
                    errs.push("p_d must not be empty".into());
                }
                for (i, p) in s.p_d.iter().enumerate() {
                    check_p_d(&format!("p_d[{i}]"), *p, &mut errs);
                }
                if s.game.online_epochs > 0 {
                    errs.push("game.online_epochs must be 0 when the defense is active".into());
                }
            }
            Settings::GanAugment(s) => {
                collect("game", s.game.validate(), &mut errs);
                collect("augment.gan", s.augment.gan.validate(), &mut errs);
                check_replicates(s.replicates, &mut errs);
                if s.augment.real_per_class == 0 {
                    errs.push("augment.real_per_class must be at least 1".into());
                }
                if s.augment.synthetic < 2 {
                    errs.push("augment.synthetic must be at least 2".into());
                }
                if s.augment.reference_slots == 0 {
                    errs.push("augment.reference_slots must be positive".into());
                }
            }
            Settings::Custom(s) => {
                collect("game", s.game.validate(), &mut errs);
                check_p_d("p_d", s.p_d, &mut errs);
                if s.attack == AttackKind::SensingJammer && !(s.tau > 0.0) {
                    errs.push(format!("tau must be positive, got {}", s.tau));
                }
                if s.p_d > 0.0 && s.game.online_epochs > 0 {
                    errs.push("game.online_epochs must be 0 when the defense is active".into());
                }
            }
        }
        errs
    }
}
