//! Target-aligned reinforcement learning on desk-scale problems.
//!
//! The crate houses a small dense Q-network with exact gradients ([`nn`]),
//! the per-transition target alignment score ([`alignment`]), ring-buffer
//! replay ([`replay`]), three episodic environments with a tabular oracle
//! ([`envs`]), DQN/DDQN agents with alignment-based oversampling
//! ([`agents`]) and a Monte Carlo harness for the correlated update model
//! ([`theorysim`]).
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below pin the 64-bit instantiation used by the experiment runner.

pub mod agents;
pub mod alignment;
pub mod envs;
pub mod error;
pub mod nn;
pub mod replay;
pub mod rng;
pub mod scalar;
pub mod theorysim;

pub use error::{Result, TarlError};
pub use scalar::Scalar;

/// 64-bit network parameters.
pub type Network = nn::NetworkParams<f64>;
/// 32-bit network parameters.
pub type Network32 = nn::NetworkParams<f32>;
/// 64-bit dense matrix.
pub type Mat = nn::Matrix<f64>;
/// 64-bit agent.
pub type DqnAgent = agents::Agent<f64>;
/// 32-bit agent.
pub type DqnAgent32 = agents::Agent<f32>;
/// 64-bit transition.
pub type Transition = replay::Transition<f64>;
/// 64-bit replay buffer.
pub type ReplayBuffer = replay::ReplayBuffer<f64>;
/// 64-bit error pair.
pub type ErrorPair = alignment::ErrorPair<f64>;
/// 64-bit alignment score.
pub type AlignmentScore = alignment::AlignmentScore<f64>;
/// 64-bit update-model parameters.
pub type UpdateModelParams = theorysim::UpdateModelParams<f64>;
