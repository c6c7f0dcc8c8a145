//! Scalar numerical primitives shared by every other module.

pub mod compensated;
pub mod eigen;
pub mod logprob;
pub mod normal;
pub mod rng;

pub use eigen::{jacobi_eigen, Matrix, SymEigen};
pub use logprob::LogProb;
pub use normal::{interval_mass, log_interval_mass, std_normal_cdf, truncated_normal_sample};
pub use rng::Rng;
