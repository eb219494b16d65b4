//! Network checkpoints.
//!
//! A checkpoint is a JSON document:
//!
//! ```text
//! { "format": "dlphy-network", "version": 1, "network": { "input_width": .., "rng_seed": ..,
//!   "layers": [ { "layer": "dense", "inputs": .., "outputs": .., "weight": [..], "bias": [..] }, .. ] } }
//! ```
//!
//! Layer objects carry a `layer` tag (`dense`, `embedding`, `batch-norm`,
//! `activation`, `energy-normalize`, `avg-power-normalize`, `awgn-noise`,
//! `complex-multiply`) followed by that layer's parameters. Gradient buffers
//! and forward caches are not stored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::error::{Error, Result};

pub const FORMAT: &str = "dlphy-network";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    network: Network,
}

pub fn to_string(net: &Network) -> Result<String> {
    let env = Envelope { format: FORMAT.into(), version: VERSION, network: net.clone() };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn from_str(s: &str) -> Result<Network> {
    let env: Envelope = serde_json::from_str(s)?;
    if env.format != FORMAT {
        return Err(Error::Serde(format!("not a network checkpoint: format {:?}", env.format)));
    }
    if env.version != VERSION {
        return Err(Error::Serde(format!("unsupported checkpoint version {}", env.version)));
    }
    let mut net = Network::new(env.network.input_width, env.network.layers, env.network.rng_seed)?;
    net.after_load();
    Ok(net)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(net)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    from_str(&std::fs::read_to_string(path)?)
}
