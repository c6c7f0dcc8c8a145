//! Multiplicative-error counting for decoupled quadratic constraints, with
//! brute-force and Monte Carlo references.

pub mod brute;
pub mod cdf;
pub mod engine;
pub mod mc;

pub use brute::{exact_conditional_pmf, exact_tail_bruteforce};
pub use cdf::CompressedCdf;
pub use engine::{count, count_ptf_gaussian, count_with_floor, CountResult, PtfCountConfig, Slack};
pub use mc::mc_count;
