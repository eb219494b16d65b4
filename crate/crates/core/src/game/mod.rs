//! Slotted spectrum game between a cognitive transmitter `T`, its receiver
//! `R`, a bursty background user `B` and a jamming adversary `A`.
//!
//! `T` learns from its own sensing history when the channel is idle. `A`
//! learns from its sensing history when `T` is about to be acknowledged, and
//! jams those slots. `T` can fight back by deliberately making a small number
//! of wrong decisions, and `A` can stretch a tiny dataset with a conditional
//! GAN.

pub mod augment;
pub mod background;
pub mod dataset;
pub mod defense;
pub mod gan;
pub mod kl;
pub mod play;
pub mod scenario;
pub mod sensing;
pub mod world;

pub use augment::{gan_augment, AugmentConfig, AugmentOutcome};
pub use background::{step_background, BackgroundState};
pub use dataset::{build_dataset_a, build_dataset_t, LabelSource};
pub use defense::{apply_defense, DefensePolicy, Ranking};
pub use gan::{train_cgan, CGan, CGanConfig};
pub use kl::{kl_divergence, kl_histograms};
pub use play::{
    best_tau, metrics_to_csv, prepare, run_game, slot_logs_to_csv, tau_sweep, train_transmitter, Attack,
    GameConfig, GameOutcome, Metrics, Prepared,
};
pub use scenario::{Node, Scenario};
pub use sensing::sense;
pub use world::{sensing_jammer_decision, JamRule, SlotLog, TxRule, World};
