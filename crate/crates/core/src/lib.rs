//! Gaussian measure estimation and conditional sampling for degree-2
//! polynomial threshold regions.
//!
//! * [`numerics`]: normal CDF and tails, truncated sampling, Jacobi eigen,
//!   log-domain probabilities, seeded RNG.
//! * [`quadform`]: quadratic forms, decoupling, normalization, rounding.
//! * [`grid`]: the discretized Gaussian and its per-coordinate oracles.
//! * [`counter`]: deterministic `(1±ε)` counting plus reference oracles.
//! * [`sampler`]: counting-to-sampling bisection and the continuous lift.
//! * [`hardness`]: Subset-Sum based hard instances and their geometry.
//! * [`densifier`]: the online-learning densifier loop.

pub mod counter;
pub mod densifier;
pub mod error;
pub mod grid;
pub mod hardness;
pub mod numerics;
pub mod quadform;
pub mod sampler;

pub use error::{Error, Result};
