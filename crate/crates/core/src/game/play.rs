//! Full game runs: train `T`, let `A` observe, then play the test slots.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::dataset::{build_dataset_a, build_dataset_t, LabelSource};
use super::defense::{DefensePolicy, Ranking};
use super::scenario::Scenario;
use super::world::{sensing_jammer_decision, JamRule, SlotLog, TxRule, World};
use crate::error::{Error, Result};
use crate::nn::classifier::{fit, mlp, Classifier, ErrorReport, TrainConfig};
use crate::nn::layer::{Activation, Init};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Attack {
    None,
    DlJammer,
    SensingJammer { tau: f64 },
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attack::None => write!(f, "none"),
            Attack::DlJammer => write!(f, "dl-jammer"),
            Attack::SensingJammer { tau } => write!(f, "sensing-jammer(tau={tau})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameConfig {
    pub scenario: Scenario,
    /// Readings per classifier sample, for both `T` and `A`.
    pub window: usize,
    /// Samples collected by `T` and by `A` before testing.
    pub collect_slots: usize,
    pub test_slots: usize,
    /// `T` transmits iff its busy score is below this.
    pub eta: f64,
    pub t_hidden: Vec<usize>,
    pub t_activation: Activation,
    pub a_hidden: Vec<usize>,
    pub a_activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub t_labels: LabelSource,
    pub defense_ranking: Ranking,
    /// When positive, `T` refines its classifier for this many epochs on each
    /// test slot in which it transmitted, labeled by the ACK outcome. Zero
    /// trains once before operating.
    pub online_epochs: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            window: 10,
            collect_slots: 1000,
            test_slots: 500,
            eta: 0.25,
            t_hidden: vec![100],
            t_activation: Activation::Sigmoid,
            a_hidden: vec![50, 50],
            a_activation: Activation::Tanh,
            epochs: 100,
            learning_rate: 0.01,
            t_labels: LabelSource::Ack,
            defense_ranking: Ranking::Extremeness,
            online_epochs: 0,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = match self.scenario.validate() {
            Err(Error::Config(v)) => v,
            Err(e) => vec![e.to_string()],
            Ok(()) => Vec::new(),
        };
        if self.window == 0 {
            errs.push("window must be at least 1".into());
        }
        if self.collect_slots < 4 {
            errs.push("collect_slots must be at least 4".into());
        }
        if self.test_slots == 0 {
            errs.push("test_slots must be at least 1".into());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            errs.push(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if self.epochs == 0 {
            errs.push("epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0) {
            errs.push("learning_rate must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let mut c = TrainConfig::spectrum_default(seed);
        c.epochs = self.epochs;
        c.learning_rate = self.learning_rate;
        c
    }

    /// Untrained `A` classifier network.
    pub fn adversary_net(&self, seed: u64) -> Result<crate::nn::network::Network> {
        mlp(self.window, &self.a_hidden, self.a_activation, 2, Init::UniformUnit, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub slots: usize,
    pub attempts: usize,
    pub successes: usize,
    /// Successes per slot.
    pub throughput: f64,
    /// Successes per attempt (0 when `T` never transmitted).
    pub success_ratio: f64,
}

impl Metrics {
    pub fn from_logs(logs: &[SlotLog]) -> Self {
        let attempts = logs.iter().filter(|l| l.t_transmitted).count();
        let successes = logs.iter().filter(|l| l.ack).count();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        Self {
            slots: logs.len(),
            attempts,
            successes,
            throughput: ratio(successes, logs.len()),
            success_ratio: ratio(successes, attempts),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameOutcome {
    pub attack: Attack,
    pub metrics: Metrics,
    /// `T`'s held-out errors against the true channel state (class 1 = idle).
    pub t_errors: ErrorReport,
    /// `A`'s held-out errors on its own collected data (class 1 = ACK).
    pub a_errors: ErrorReport,
    /// Jamming decisions in the test slots against what `R` would have
    /// acknowledged without jamming.
    pub jam_errors: ErrorReport,
    pub collection_logs: Vec<SlotLog>,
    pub logs: Vec<SlotLog>,
}

/// `T`'s trained classifier and its held-out errors against the true state.
pub fn train_transmitter(cfg: &GameConfig, logs: &[SlotLog], seed: u64) -> Result<(Classifier, ErrorReport)> {
    let data = build_dataset_t(logs, cfg.window, cfg.t_labels)?;
    let truth = build_dataset_t(logs, cfg.window, LabelSource::ChannelState)?;
    let (train, _) = data.split_half();
    let (_, test) = truth.split_half();
    let net = mlp(cfg.window, &cfg.t_hidden, cfg.t_activation, 2, Init::UniformUnit, seed)?;
    let (mut clf, _) = fit(net, &train, &cfg.train_config(seed))?;
    clf.threshold = 1.0 - cfg.eta;
    let report = clf.evaluate(&test)?;
    Ok((clf, report))
}

fn jam_rule(attack: Attack, c_a: &mut Classifier) -> JamRule<'_> {
    match attack {
        Attack::None => JamRule::Off,
        Attack::DlJammer => JamRule::Classifier(c_a),
        Attack::SensingJammer { tau } => JamRule::Threshold(tau),
    }
}

pub(crate) fn operate<'a>(c: &'a mut Classifier, cfg: &GameConfig, defense: Option<&'a DefensePolicy>) -> TxRule<'a> {
    TxRule::Sensing { classifier: c, eta: cfg.eta, defense }
}

/// Plays one game. With the same seed, every attack type sees identical
/// traffic and channel draws.
///
/// Phases: `T` probes every slot to collect labels and trains its classifier;
/// `T` then operates normally (with the defense, if any) while `A` listens
/// and trains its classifier; finally the test slots are played under
/// `attack`.
pub fn run_game(
    cfg: &GameConfig,
    attack: Attack,
    defense: Option<&DefensePolicy>,
    seed: u64,
) -> Result<GameOutcome> {
    let Prepared { mut world, mut c_t, t_errors, collection } = prepare(cfg, defense, seed)?;
    let data = build_dataset_a(&collection, cfg.window)?;
    let (train, test) = data.split_half();
    let seed_a = seed ^ 0x6161;
    let (mut c_a, _) = fit(cfg.adversary_net(seed_a)?, &train, &cfg.train_config(seed_a))?;
    let a_errors = c_a.evaluate(&test)?;

    let logs = if cfg.online_epochs == 0 {
        world.run(cfg.test_slots, operate(&mut c_t, cfg, defense), jam_rule(attack, &mut c_a))?
    } else {
        if defense.is_some() {
            return Err(Error::Config(vec!["online retraining cannot be combined with the defense".into()]));
        }
        let mut history: Vec<SlotLog> = collection[collection.len() + 1 - cfg.window..].to_vec();
        let mut logs = Vec::with_capacity(cfg.test_slots);
        for _ in 0..cfg.test_slots {
            let l = world.run(1, operate(&mut c_t, cfg, None), jam_rule(attack, &mut c_a))?.remove(0);
            history.push(l.clone());
            if l.t_transmitted {
                let sample = build_dataset_t(&history, cfg.window, LabelSource::Ack)?;
                let train = TrainConfig { epochs: cfg.online_epochs, ..cfg.train_config(seed ^ 0x6f6e ^ l.t) };
                c_t.refine(&sample, &train)?;
            }
            history.remove(0);
            logs.push(l);
        }
        logs
    };
    let pred: Vec<usize> = logs.iter().map(|l| usize::from(l.a_jammed)).collect();
    let truth: Vec<usize> = logs.iter().map(|l| usize::from(l.ack_unjammed)).collect();
    Ok(GameOutcome {
        attack,
        metrics: Metrics::from_logs(&logs),
        t_errors,
        a_errors,
        jam_errors: ErrorReport::from_predictions(&pred, &truth),
        collection_logs: collection,
        logs,
    })
}

/// State after `T` has trained and `A` has listened.
pub struct Prepared {
    pub world: World,
    pub c_t: Classifier,
    pub t_errors: ErrorReport,
    /// Slots observed by `A`, including `window - 1` leading slots of history.
    pub collection: Vec<SlotLog>,
}

/// Runs the probing phase, trains `T`, then runs `A`'s listening phase.
pub fn prepare(cfg: &GameConfig, defense: Option<&DefensePolicy>, seed: u64) -> Result<Prepared> {
    cfg.validate()?;
    let k = cfg.window;
    let mut world = World::new(cfg.scenario.clone(), k, seed)?;
    let probe = world.run(cfg.collect_slots + k - 1, TxRule::Probe, JamRule::Off)?;
    let (mut c_t, t_errors) = train_transmitter(cfg, &probe, seed ^ 0x7474)?;
    let collection = world.run(cfg.collect_slots + k - 1, operate(&mut c_t, cfg, defense), JamRule::Off)?;
    Ok(Prepared { world, c_t, t_errors, collection })
}

/// Errors of the threshold jammer on `A`'s collected data, one entry per
/// threshold.
pub fn tau_sweep(logs: &[SlotLog], taus: &[f64]) -> Vec<(f64, ErrorReport)> {
    let truth: Vec<usize> = logs.iter().map(|l| usize::from(l.ack_heard)).collect();
    taus.iter()
        .map(|&tau| {
            let pred: Vec<usize> =
                logs.iter().map(|l| usize::from(sensing_jammer_decision(l.sensing_a, tau))).collect();
            (tau, ErrorReport::from_predictions(&pred, &truth))
        })
        .collect()
}

/// Threshold with the smallest `max(e_MD, e_FA)`; the lowest one on ties.
pub fn best_tau(sweep: &[(f64, ErrorReport)]) -> Option<f64> {
    sweep
        .iter()
        .min_by(|a, b| a.1.max().total_cmp(&b.1.max()).then(a.0.total_cmp(&b.0)))
        .map(|(t, _)| *t)
}

/// Slot logs as CSV, preceded by a `# seed=` line.
pub fn slot_logs_to_csv(seed: u64, logs: &[SlotLog]) -> String {
    let mut out = format!("# seed={seed}\nt,channel_busy,sensing_T,sensing_A,T_transmitted,A_jammed,ack,S_T,flipped\n");
    for l in logs {
        let s = l.s_t.map(|v| format!("{v:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{},{},{},{}\n",
            l.t,
            u8::from(l.channel_busy),
            l.sensing_t,
            l.sensing_a,
            u8::from(l.t_transmitted),
            u8::from(l.a_jammed),
            u8::from(l.ack),
            s,
            u8::from(l.flipped)
        ));
    }
    out
}

/// One row per attack type: `attack_type,throughput,success_ratio`.
pub fn metrics_to_csv(seed: u64, rows: &[(String, Metrics)]) -> String {
    let mut out = format!("# seed={seed}\nattack_type,throughput,success_ratio\n");
    for (name, m) in rows {
        out.push_str(&format!("{name},{:.6},{:.6}\n", m.throughput, m.success_ratio));
    }
    out
}
