//! Slot-by-slot simulation of `T`, `R`, `B` and `A`.
//!
//! A slot runs in a fixed order:
//!
//! 1. `B` advances its queue and transmits or stays silent.
//! 2. `T` senses the channel (only `B` can be on the air) and decides whether
//!    to transmit.
//! 3. `A` senses during `T`'s data period, so its reading contains `B` and `T`,
//!    then decides whether to jam the rest of the packet.
//! 4. `R` acknowledges the packet iff its SINR exceeds the threshold, counting
//!    every concurrent transmitter as interference.
//!
//! Random draws are keyed by `(seed, slot, purpose)`, so two runs with the same
//! seed see the same traffic, sensing noise and shadowing in every slot even
//! when the players act differently.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::background::{step_background, BackgroundState};
use super::defense::{apply_defense, DefensePolicy};
use super::scenario::{Node, Scenario};
use super::sensing::sense;
use crate::channel::link::link_gain;
use crate::error::{Error, Result};
use crate::nn::classifier::Classifier;
use crate::nn::tensor::Tensor;
use crate::rng::{self, Rng};

const BACKGROUND: u64 = 0;
const SENSE_T: u64 = 1;
const SENSE_A: u64 = 2;
const LINKS: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotLog {
    pub t: u64,
    pub channel_busy: bool,
    pub sensing_t: f64,
    pub sensing_a: f64,
    pub t_transmitted: bool,
    pub a_jammed: bool,
    pub ack: bool,
    /// The ACK as `A` perceives it.
    pub ack_heard: bool,
    /// Whether `R` would have acknowledged the packet had `A` stayed silent.
    pub ack_unjammed: bool,
    /// Busy score of `T`'s classifier, when one was used.
    pub s_t: Option<f64>,
    pub flipped: bool,
}

/// How `T` decides to transmit.
pub enum TxRule<'a> {
    /// Transmit in every slot (label collection).
    Probe,
    Silent,
    /// Transmit iff the busy score is below `eta`, with optional defensive flips.
    Sensing { classifier: &'a mut Classifier, eta: f64, defense: Option<&'a DefensePolicy> },
}

/// How `A` decides to jam.
pub enum JamRule<'a> {
    Off,
    /// Jam iff the reading exceeds the threshold.
    Threshold(f64),
    /// Jam iff the classifier predicts an ACK.
    Classifier(&'a mut Classifier),
}

pub fn sensing_jammer_decision(reading: f64, tau: f64) -> bool {
    reading > tau
}

pub struct World {
    pub scenario: Scenario,
    pub window: usize,
    seed: u64,
    background: BackgroundState,
    t: u64,
    readings_t: Vec<f64>,
    readings_a: Vec<f64>,
}

impl World {
    /// Builds the world and runs `window - 1` quiet slots so that every later
    /// slot has a full sensing history.
    pub fn new(scenario: Scenario, window: usize, seed: u64) -> Result<Self> {
        scenario.validate()?;
        if window == 0 {
            return Err(Error::Config(vec!["window must be at least 1".into()]));
        }
        let mut w = Self {
            scenario,
            window,
            seed,
            background: BackgroundState::default(),
            t: 0,
            readings_t: Vec::new(),
            readings_a: Vec::new(),
        };
        w.run(window - 1, TxRule::Silent, JamRule::Off)?;
        Ok(w)
    }

    /// Index of the next slot.
    pub fn slot(&self) -> u64 {
        self.t
    }

    fn rng(&self, t: u64, purpose: u64) -> Rng {
        rng::stream(self.seed, rng::stream_id(&[t, purpose]))
    }

    fn window_rows(&self, readings: &[f64], slots: &[usize]) -> Tensor {
        let k = self.window;
        let mut data = Vec::with_capacity(slots.len() * k);
        for &t in slots {
            data.extend_from_slice(&readings[t + 1 - k..=t]);
        }
        Tensor::matrix(slots.len(), k, data)
    }

    pub fn run(&mut self, slots: usize, tx: TxRule<'_>, jam: JamRule<'_>) -> Result<Vec<SlotLog>> {
        if let JamRule::Threshold(tau) = jam {
            if !(tau > 0.0) {
                return Err(Error::Domain(format!("sensing threshold must be positive, got {tau}")));
            }
        }
        let start = self.t as usize;
        let scn = self.scenario.clone();

        let mut busy = Vec::with_capacity(slots);
        for i in 0..slots {
            let t = (start + i) as u64;
            let mut r = self.rng(t, BACKGROUND);
            let b = step_background(&mut self.background, scn.arrival_rate, scn.activation_prob, &mut r);
            let on_air: &[Node] = if b { &[Node::Background] } else { &[] };
            let s = sense(&scn, Node::Transmitter, on_air, &mut self.rng(t, SENSE_T))?;
            self.readings_t.push(s);
            busy.push(b);
        }

        let (transmit, scores, flipped) = match tx {
            TxRule::Probe => (vec![true; slots], vec![None; slots], vec![false; slots]),
            TxRule::Silent => (vec![false; slots], vec![None; slots], vec![false; slots]),
            TxRule::Sensing { classifier, eta, defense } => {
                let idx: Vec<usize> = (start..start + slots).collect();
                let x = self.window_rows(&self.readings_t, &idx);
                let s: Vec<f64> = classifier.scores(&x)?.into_iter().map(|p| 1.0 - p).collect();
                let idle: Vec<bool> = s.iter().map(|&v| v < eta).collect();
                let (transmit, flips) = match defense {
                    Some(d) => apply_defense(&idle, &s, d),
                    None => (idle, vec![false; slots]),
                };
                (transmit, s.into_iter().map(Some).collect(), flips)
            }
        };

        let mut jam = jam;
        let p_t = 10f64.powf(scn.tx_power_db / 10.0);
        let p_a = 10f64.powf(scn.jam_power_db / 10.0);
        let (l_tr, l_br, l_ar) = (
            scn.link(Node::Transmitter, Node::Receiver)?,
            scn.link(Node::Background, Node::Receiver)?,
            scn.link(Node::Adversary, Node::Receiver)?,
        );
        let mut logs = Vec::with_capacity(slots);
        for i in 0..slots {
            let t = start + i;
            let mut on_air = Vec::with_capacity(2);
            if busy[i] {
                on_air.push(Node::Background);
            }
            if transmit[i] {
                on_air.push(Node::Transmitter);
            }
            let s_a = sense(&scn, Node::Adversary, &on_air, &mut self.rng(t as u64, SENSE_A))?;
            self.readings_a.push(s_a);
            let jammed = match &mut jam {
                JamRule::Off => false,
                JamRule::Threshold(tau) => sensing_jammer_decision(s_a, *tau),
                JamRule::Classifier(c) => {
                    let x = self.window_rows(&self.readings_a, &[t]);
                    c.predict(&x)?[0] == 1
                }
            };

            let mut r = self.rng(t as u64, LINKS);
            let signal = p_t * link_gain(&l_tr, &mut r);
            let i_b = if busy[i] { p_t * link_gain(&l_br, &mut r) } else { 0.0 };
            let i_a = p_a * link_gain(&l_ar, &mut r);
            let missed = r.random::<f64>() < scn.ack_miss_prob;
            let ack_unjammed = transmit[i] && signal / (1.0 + i_b) > scn.sinr_threshold;
            let i_a = if jammed { i_a } else { 0.0 };
            let ack = transmit[i] && signal / (1.0 + i_b + i_a) > scn.sinr_threshold;

            logs.push(SlotLog {
                t: t as u64,
                channel_busy: busy[i],
                sensing_t: self.readings_t[t],
                sensing_a: s_a,
                t_transmitted: transmit[i],
                a_jammed: jammed,
                ack,
                ack_heard: ack && !missed,
                ack_unjammed,
                s_t: scores[i],
                flipped: flipped[i],
            });
        }
        self.t += slots as u64;
        Ok(logs)
    }
}
