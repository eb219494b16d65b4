//! Sliding-window datasets built from slot logs.

use serde::{Deserialize, Serialize};

use super::world::SlotLog;
use crate::error::{Error, Result};
use crate::nn::classifier::Dataset;
use crate::nn::tensor::Tensor;

/// Where `T`'s training labels come from. Class 1 is "idle" in both cases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSource {
    /// Whether the probing transmission was acknowledged.
    #[default]
    Ack,
    /// The true channel state.
    ChannelState,
}

fn windows(
    logs: &[SlotLog],
    window: usize,
    reading: impl Fn(&SlotLog) -> f64,
    label: impl Fn(&SlotLog) -> bool,
) -> Result<Dataset> {
    if window == 0 || logs.len() < window {
        return Err(Error::Domain(format!(
            "{} slots cannot fill a window of {window}",
            logs.len()
        )));
    }
    let n = logs.len() + 1 - window;
    let mut data = Vec::with_capacity(n * window);
    let mut labels = Vec::with_capacity(n);
    for end in window - 1..logs.len() {
        data.extend(logs[end + 1 - window..=end].iter().map(&reading));
        labels.push(usize::from(label(&logs[end])));
    }
    Dataset::new(Tensor::matrix(n, window, data), labels)
}

/// `T`'s samples: the last `window` readings at `T` ending at each slot.
pub fn build_dataset_t(logs: &[SlotLog], window: usize, labels: LabelSource) -> Result<Dataset> {
    match labels {
        LabelSource::Ack => windows(logs, window, |l| l.sensing_t, |l| l.ack),
        LabelSource::ChannelState => windows(logs, window, |l| l.sensing_t, |l| !l.channel_busy),
    }
}

/// `A`'s samples: the last `window` readings at `A`, labeled 1 when `A` heard
/// an ACK.
pub fn build_dataset_a(logs: &[SlotLog], window: usize) -> Result<Dataset> {
    windows(logs, window, |l| l.sensing_a, |l| l.ack_heard)
}
