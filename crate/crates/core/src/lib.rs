//! Learned end-to-end physical-layer transceivers and the classical systems
//! they are measured against, plus a slotted adversarial spectrum game.
//!
//! * [`nn`]: dense networks, backpropagation, SGD-momentum and Adam.
//! * [`channel`]: AWGN, Rayleigh MIMO, SVD, estimation error, path loss.
//! * [`baselines`]: BPSK/QPSK/16-QAM, Hamming(7,4), SVD precoding,
//!   time sharing, and the Monte-Carlo error-rate harness.
//! * [`autoencoder`]: single-antenna, MIMO, and two-user interference-channel
//!   autoencoders.
//! * [`game`]: background traffic, spectrum sensing classifiers, jamming,
//!   conditional GAN augmentation, and the label-flipping defense.
//! * [`harness`]: experiment configs, reproducible runs, CSV outputs.

pub mod autoencoder;
pub mod baselines;
pub mod channel;
pub mod error;
pub mod game;
pub mod harness;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};
