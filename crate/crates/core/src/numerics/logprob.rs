//! Probabilities stored as natural logarithms.

use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// A probability `p ∈ [0, 1]` held as `ln p`. Exact zero is `-∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a log value. Slightly positive inputs (rounding noise from a
    /// sum that should be 1) are clamped to zero.
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan() && ln <= 1e-9, "log-probability {ln} out of range");
        LogProb(ln.min(0.0))
    }

    pub fn from_prob(p: f64) -> Self {
        debug_assert!((0.0..=1.0 + 1e-9).contains(&p), "probability {p} out of range");
        LogProb(p.ln().min(0.0))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `ln(eᵃ − eᵇ)`, or `None` when the difference would be negative.
    pub fn checked_sub(self, other: LogProb) -> Option<LogProb> {
        match self.0.partial_cmp(&other.0)? {
            Ordering::Less => None,
            Ordering::Equal => Some(LogProb::ZERO),
            Ordering::Greater if other.is_zero() => Some(self),
            Ordering::Greater => Some(LogProb(self.0 + (-(other.0 - self.0).exp_m1()).ln())),
        }
    }

    /// Log-sum-exp of a slice, computed with one shared shift and a
    /// compensated sum so long sums stay accurate.
    pub fn sum_slice(terms: &[LogProb]) -> LogProb {
        let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogProb::ZERO;
        }
        let s = crate::numerics::compensated::sum(terms.iter().map(|t| (t.0 - max).exp()));
        LogProb::from_ln(max + s.ln())
    }
}

impl Add for LogProb {
    type Output = LogProb;
    fn add(self, rhs: LogProb) -> LogProb {
        let (hi, lo) = if self.0 >= rhs.0 { (self.0, rhs.0) } else { (rhs.0, self.0) };
        if lo == f64::NEG_INFINITY {
            return LogProb(hi);
        }
        LogProb::from_ln(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogProb {
    type Output = LogProb;
    fn mul(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

impl PartialOrd for LogProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> LogProb {
        let v: Vec<LogProb> = iter.collect();
        LogProb::sum_slice(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_one() {
        assert!(LogProb::ZERO.is_zero());
        assert_eq!((LogProb::ZERO + LogProb::ONE).ln(), 0.0);
        assert!((LogProb::ZERO * LogProb::ONE).is_zero());
        assert_eq!(LogProb::from_prob(0.0), LogProb::ZERO);
    }

    #[test]
    fn no_underflow_far_below_f64() {
        let a = LogProb::from_ln(-1e6);
        let b = LogProb::from_ln(-1e6 - 2f64.ln());
        let s = a + b;
        assert!((s.ln() - (-1e6 + 1.5f64.ln())).abs() < 1e-9);
        assert!(b < a);
        let d = a.checked_sub(b).unwrap();
        assert!((d.ln() - b.ln()).abs() < 1e-9);
        assert!(b.checked_sub(a).is_none());
    }

    #[test]
    fn long_sum_is_accurate() {
        let k = 1_000_000;
        let p = 1.0 / k as f64;
        let s: LogProb = (0..k).map(|_| LogProb::from_prob(p)).sum();
        assert!(s.ln().abs() < 1e-10);
    }
}
