//! Bursty background user: Bernoulli arrivals into a queue, served one packet
//! per slot once the user activates.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundState {
    pub queue: u64,
    pub busy: bool,
}

/// Advances one slot and returns whether `B` transmits in it.
///
/// A packet arrives with probability `arrival_rate`. An idle user with a
/// nonempty queue activates with probability `activation_prob`; an active user
/// sends one packet per slot until its queue is empty.
pub fn step_background(
    state: &mut BackgroundState,
    arrival_rate: f64,
    activation_prob: f64,
    rng: &mut Rng,
) -> bool {
    if rng.random::<f64>() < arrival_rate {
        state.queue += 1;
    }
    let activate = rng.random::<f64>() < activation_prob;
    if !state.busy && state.queue > 0 && activate {
        state.busy = true;
    }
    if !state.busy {
        return false;
    }
    state.queue -= 1;
    if state.queue == 0 {
        state.busy = false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn silent_without_arrivals() {
        let mut s = BackgroundState::default();
        let mut r = rng::stream(1, 1);
        assert!((0..1000).all(|_| !step_background(&mut s, 0.0, 1.0, &mut r)));
    }

    #[test]
    fn saturated_user_always_transmits() {
        let mut s = BackgroundState::default();
        let mut r = rng::stream(1, 2);
        assert!((0..1000).all(|_| step_background(&mut s, 1.0, 1.0, &mut r)));
    }
}
