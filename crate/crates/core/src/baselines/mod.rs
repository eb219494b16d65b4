//! Classical transceivers and the Monte-Carlo error-rate harness.

pub mod analytic;
pub mod bler;
pub mod hamming;
pub mod mimo_svd;
pub mod modulation;
pub mod systems;
pub mod time_sharing;

pub use bler::{curves_to_csv, run_bler, run_bler_checkpointed, wilson_interval, PointState, BlerPoint, BlerSettings, ErrorRateResult};
pub use hamming::Hamming74;
pub use mimo_svd::{svd_closed_loop_mimo, SvdErrors, SvdLink};
pub use modulation::ModScheme;
pub use systems::{hamming_blocks, uncoded_bpsk_blocks, HammingDecoder};
pub use time_sharing::{scheme_for, time_sharing_blocks};
