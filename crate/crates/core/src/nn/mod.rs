//! Dense feed-forward Q-networks with exact reverse-mode gradients.

mod matrix;
mod network;
mod optim;

pub use matrix::Matrix;
pub use network::{gradient_check, mse_loss, Activation, Layer, NetworkParams};
pub use optim::{OptimizerConfig, OptimizerKind, OptimizerState};
