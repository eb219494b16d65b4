//! Minimal feedforward training engine.


pub mod checkpoint;
pub mod classifier;
pub mod layer;
pub mod loss;
pub mod network;
pub mod optim;
pub mod tensor;

pub use classifier::{fit, mlp, train_classifier, Classifier, Dataset, ErrorReport, LossKind, Standardizer, TrainConfig};
pub use layer::{Activation, Init, Layer, Mode, ParamRef};
pub use loss::{cross_entropy, gan_discriminator_loss, gan_generator_loss};
pub use network::Network;
pub use optim::{OptimKind, OptimState};
pub use tensor::Tensor;
