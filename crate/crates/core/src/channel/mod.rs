//! Channel models.

pub mod awgn;
pub mod cmat;
pub mod link;
pub mod mimo;
pub mod svd;

use num_complex::Complex64;

/// Complex baseband samples.
pub type ComplexVec = Vec<Complex64>;

pub use awgn::{add_real_awgn, apply_awgn, ebno_to_noise_var};
pub use cmat::CMat;
pub use link::{link_gain, outage_probability, LinkModel};
pub use mimo::{complex_gaussian, draw_rayleigh_mimo, estimation_error, mmse_error_variance, ChannelRealization};
pub use svd::{svd_channel, Svd};
