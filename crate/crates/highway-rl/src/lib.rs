//! Highway driving microsimulation and continuous-action policy optimization.
//!
//! The crate bundles a scripted-traffic highway environment (kinematic
//! bicycle dynamics, IDM car following, MOBIL lane changes), a from-scratch
//! actor-critic network, a clipped-surrogate PPO trainer with truncated GAE,
//! a noisy cross-entropy-method baseline, and an evaluation harness that
//! emits training curves, evaluation summaries and checkpoints.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `highway-rl` binary for the train/eval/baseline/adapt CLI.

pub mod behavior;
pub mod env;
mod error;
pub mod kinematics;
pub mod net;

pub use error::{Error, Result};
