//! Node layout, powers and traffic parameters of the spectrum game.

use serde::{Deserialize, Serialize};

use crate::channel::link::LinkModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    /// Secondary transmitter `T`.
    Transmitter,
    /// Its receiver `R`.
    Receiver,
    /// Background (primary) user `B`.
    Background,
    /// Adversary `A`.
    Adversary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub transmitter: [f64; 2],
    pub receiver: [f64; 2],
    pub background: [f64; 2],
    pub adversary: [f64; 2],
    /// Power of `T` and `B`, dB above unit noise.
    pub tx_power_db: f64,
    pub jam_power_db: f64,
    /// Linear SINR needed at `R` for a successful packet.
    pub sinr_threshold: f64,
    pub shadowing_sigma_db: f64,
    /// Whether sensing links (into `T` and `A`) are shadowed too. Off by
    /// default: shadowing then only affects the SINR at `R`.
    pub sensing_shadowing: bool,
    /// Bernoulli packet arrival rate at `B`.
    pub arrival_rate: f64,
    /// Probability that an idle `B` with queued packets starts transmitting.
    pub activation_prob: f64,
    /// Complex samples averaged into one sensing reading.
    pub sensing_samples: usize,
    /// Probability that `A` fails to notice an ACK.
    pub ack_miss_prob: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            transmitter: [0.0, 0.0],
            receiver: [10.0, 0.0],
            background: [0.0, 10.0],
            adversary: [10.0, 10.0],
            tx_power_db: 30.0,
            jam_power_db: 30.0,
            sinr_threshold: 3.0,
            shadowing_sigma_db: 3.04,
            sensing_shadowing: false,
            arrival_rate: 0.2,
            activation_prob: 0.8,
            sensing_samples: 12,
            ack_miss_prob: 0.0,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("tx_power_db", self.tx_power_db),
            ("jam_power_db", self.jam_power_db),
            ("shadowing_sigma_db", self.shadowing_sigma_db),
        ] {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite"));
            }
        }
        if self.shadowing_sigma_db < 0.0 {
            errs.push("shadowing_sigma_db must be nonnegative".into());
        }
        if !(self.sinr_threshold > 0.0) {
            errs.push("sinr_threshold must be positive".into());
        }
        for (name, p) in [
            ("arrival_rate", self.arrival_rate),
            ("activation_prob", self.activation_prob),
            ("ack_miss_prob", self.ack_miss_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                errs.push(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.sensing_samples == 0 {
            errs.push("sensing_samples must be at least 1".into());
        }
        let nodes = [Node::Transmitter, Node::Receiver, Node::Background, Node::Adversary];
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if self.distance(a, b) <= 0.0 {
                    errs.push(format!("{a:?} and {b:?} share a position"));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn position(&self, node: Node) -> [f64; 2] {
        match node {
            Node::Transmitter => self.transmitter,
            Node::Receiver => self.receiver,
            Node::Background => self.background,
            Node::Adversary => self.adversary,
        }
    }

    pub fn distance(&self, a: Node, b: Node) -> f64 {
        let (p, q) = (self.position(a), self.position(b));
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    pub fn power_db(&self, node: Node) -> f64 {
        match node {
            Node::Adversary => self.jam_power_db,
            _ => self.tx_power_db,
        }
    }

    pub fn link(&self, from: Node, to: Node) -> Result<LinkModel> {
        LinkModel::new(self.distance(from, to), self.power_db(from), self.shadowing_sigma_db)
    }

    /// Link used for sensing readings at `to`.
    pub fn sensing_link(&self, from: Node, to: Node) -> Result<LinkModel> {
        let sigma = if self.sensing_shadowing { self.shadowing_sigma_db } else { 0.0 };
        LinkModel::new(self.distance(from, to), self.power_db(from), sigma)
    }
}
