//! The discretized Gaussian on the lattice `{−B, −B+τ, …, B}`.
//!
//! Grid point `κ` owns the cell `[κ, κ+τ)`, except that `−B` owns
//! `(−∞, −B+τ)` and `B` owns `[B, ∞)`, so cell masses sum to exactly one.
//! Points are addressed by index `k ∈ [0, K)` with `κ = −B + kτ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::normal::{interval_mass, log_interval_mass};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tau: f64,
    #[serde(rename = "B")]
    pub trunc: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(tau: f64, trunc: f64, n: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if !(trunc >= 1.0 && trunc.is_finite()) {
            return Err(Error::InvalidParameter(format!("B must be at least 1, got {trunc}")));
        }
        let steps = trunc / tau;
        if steps.fract() != 0.0 || steps * tau != trunc || steps > 1e9 {
            return Err(Error::InvalidParameter(format!("B/tau must be an integer, got {steps}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(GridSpec { tau, trunc, n })
    }

    /// Truncation radius `max(n, ⌈√(2 ln(20n/ε))⌉)`, which puts at most
    /// ε/10 of Gaussian mass beyond ±B across all coordinates.
    pub fn default_trunc(n: usize, eps: f64) -> f64 {
        let tail = (2.0 * (20.0 * n as f64 / eps).ln()).sqrt().ceil();
        (n as f64).max(tail)
    }

    /// Points per coordinate, `2B/τ + 1`.
    pub fn points(&self) -> usize {
        (2.0 * self.trunc / self.tau) as usize + 1
    }

    pub fn point(&self, k: usize) -> f64 {
        -self.trunc + k as f64 * self.tau
    }

    pub fn cell_lower(&self, k: usize) -> f64 {
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            self.point(k)
        }
    }

    pub fn cell_upper(&self, k: usize) -> f64 {
        if k + 1 >= self.points() {
            f64::INFINITY
        } else {
            self.point(k) + self.tau
        }
    }

    /// Index of the cell containing `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let k = ((x + self.trunc) / self.tau).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.points() - 1)
        }
    }

    /// The grid point owning `x`.
    pub fn round_to_grid(&self, x: f64) -> f64 {
        self.point(self.index_of(x))
    }

    /// Total number of grid points, as a float (it may exceed `usize`).
    pub fn total_points(&self) -> f64 {
        (self.points() as f64).powi(self.n as i32)
    }

    pub fn full_range(&self) -> IndexRange {
        IndexRange { lo: 0, hi: self.points() - 1 }
    }

    pub fn full_box(&self) -> CoordinateBox {
        CoordinateBox { ranges: vec![self.full_range(); self.n] }
    }

    /// Gaussian mass of the union of cells `lo..=hi`.
    pub fn range_mass(&self, r: IndexRange) -> f64 {
        interval_mass(self.cell_lower(r.lo), self.cell_upper(r.hi)).unwrap_or(0.0)
    }

    pub fn log_range_mass(&self, r: IndexRange) -> f64 {
        log_interval_mass(self.cell_lower(r.lo), self.cell_upper(r.hi)).unwrap_or(f64::NEG_INFINITY)
    }

    fn check_range(&self, r: IndexRange) -> Result<()> {
        if r.lo > r.hi || r.hi >= self.points() {
            return Err(Error::InvalidParameter(format!(
                "index range {}..={} invalid for {} grid points",
                r.lo,
                r.hi,
                self.points()
            )));
        }
        Ok(())
    }

    /// Probability of grid index `k` for one coordinate, conditioned on
    /// the coordinate lying in `restriction`.
    pub fn coordinate_mass(&self, k: usize, restriction: IndexRange) -> Result<f64> {
        self.check_range(restriction)?;
        if !restriction.contains(k) {
            return Ok(0.0);
        }
        let total = self.range_mass(restriction);
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.range_mass(IndexRange { lo: k, hi: k }) / total)
    }

    /// `Pr[ν₁ ≤ aκ² + bκ ≤ ν₂]` for one (restricted) coordinate. The feasible
    /// set of a quadratic on each monotone side of its vertex is a single run
    /// of indices, found by binary search; each run costs one interval mass.
    pub fn oracle_quadratic(
        &self,
        a: f64,
        b: f64,
        nu1: f64,
        nu2: f64,
        restriction: IndexRange,
    ) -> Result<f64> {
        self.check_range(restriction)?;
        if nu1.is_nan() || nu2.is_nan() || nu1 > nu2 {
            return Err(Error::InvalidInterval { a: nu1, b: nu2 });
        }
        let total = self.range_mass(restriction);
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let y = |k: usize| value_at(a, b, self.point(k));
        let inside = |v: f64| nu1 <= v && v <= nu2;
        let IndexRange { lo, hi } = restriction;

        let mut pieces: Vec<IndexRange> = Vec::with_capacity(2);
        if a == 0.0 {
            pieces.push(restriction);
        } else {
            let vertex = -b / (2.0 * a);
            let split = lo + partition(hi - lo + 1, |i| self.point(lo + i) < vertex);
            if split > lo {
                pieces.push(IndexRange { lo, hi: split - 1 });
            }
            if split <= hi {
                pieces.push(IndexRange { lo: split, hi });
            }
        }

        let mut mass = 0.0;
        for piece in pieces {
            let increasing = y(piece.hi) >= y(piece.lo);
            let len = piece.hi - piece.lo + 1;
            let at = |i: usize| y(piece.lo + i);
            // Runs in "sorted" order: positions below ν₁ first, then inside, then above.
            let (below, not_above) = if increasing {
                (partition(len, |i| at(i) < nu1), partition(len, |i| at(i) <= nu2))
            } else {
                (partition(len, |i| at(i) > nu2), partition(len, |i| at(i) >= nu1))
            };
            if below < not_above {
                let run = IndexRange { lo: piece.lo + below, hi: piece.lo + not_above - 1 };
                debug_assert!(inside(y(run.lo)) && inside(y(run.hi)));
                mass += self.range_mass(run);
            }
        }
        Ok((mass / total).min(1.0))
    }

    /// Exact pmf of `Y = aκ² + bκ` for one (restricted) coordinate, as
    /// ascending `(value, probability)` pairs with equal values merged.
    pub fn support_and_pmf(&self, a: f64, b: f64, restriction: IndexRange) -> Result<Vec<(f64, f64)>> {
        self.check_range(restriction)?;
        let total = self.range_mass(restriction);
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        let atoms = (restriction.lo..=restriction.hi)
            .map(|k| (value_at(a, b, self.point(k)), self.range_mass(IndexRange { lo: k, hi: k }) / total));
        Ok(merge_atoms(atoms.collect(), |x, y| x + y))
    }

    /// Log-domain variant of [`GridSpec::support_and_pmf`], used by the
    /// counting engine where per-cell masses can be astronomically small.
    pub fn support_and_log_pmf(&self, a: f64, b: f64, restriction: IndexRange) -> Result<Vec<(f64, f64)>> {
        self.check_range(restriction)?;
        let total = self.log_range_mass(restriction);
        if total == f64::NEG_INFINITY {
            return Err(Error::ZeroMass);
        }
        let atoms = (restriction.lo..=restriction.hi).map(|k| {
            (value_at(a, b, self.point(k)), self.log_range_mass(IndexRange { lo: k, hi: k }) - total)
        });
        Ok(merge_atoms(atoms.collect(), log_add))
    }
}

/// `aκ² + bκ`, the single formula shared by every code path so that
/// membership decisions agree bit for bit.
pub fn value_at(a: f64, b: f64, kappa: f64) -> f64 {
    a * kappa * kappa + b * kappa
}

fn log_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

fn partition(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn merge_atoms(mut atoms: Vec<(f64, f64)>, combine: impl Fn(f64, f64) -> f64) -> Vec<(f64, f64)> {
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = combine(last.1, p),
            _ => out.push((v, p)),
        }
    }
    out
}

/// Inclusive range of grid indices for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl IndexRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        IndexRange { lo, hi }
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, k: usize) -> bool {
        self.lo <= k && k <= self.hi
    }
}

/// Per-coordinate index restrictions `[κ⁽¹⁾ⱼ, κ⁽²⁾ⱼ]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoordinateBox {
    pub ranges: Vec<IndexRange>,
}

impl CoordinateBox {
    /// Number of grid points in the box, as a float.
    pub fn cardinality(&self) -> f64 {
        self.ranges.iter().map(|r| r.len() as f64).product()
    }

    pub fn lo_points(&self, spec: &GridSpec) -> Vec<f64> {
        self.ranges.iter().map(|r| spec.point(r.lo)).collect()
    }

    pub fn hi_points(&self, spec: &GridSpec) -> Vec<f64> {
        self.ranges.iter().map(|r| spec.point(r.hi)).collect()
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<()> {
        if self.ranges.len() != spec.n {
            return Err(Error::DimensionMismatch { expected: spec.n, got: self.ranges.len() });
        }
        for r in &self.ranges {
            spec.check_range(*r)?;
        }
        Ok(())
    }
}
