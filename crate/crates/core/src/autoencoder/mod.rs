//! Learned end-to-end transceivers.

pub mod constellation;
pub mod ic;
pub mod mimo;
pub mod schedule;
pub mod single;

pub use constellation::Constellation;
pub use ic::{next_alpha, pool_users, train_ic_pair, IcConfig, IcPair};
pub use mimo::{eval_mimo_with_estimation_error, train_mimo_ae, EncodingCodebook, MimoAe, MimoAeConfig};
pub use schedule::Schedule;
pub use single::{train_single_ae, AeConfig, Autoencoder, PowerConstraint};
