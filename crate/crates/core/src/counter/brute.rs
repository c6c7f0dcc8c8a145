//! Exhaustive reference oracles for small grids.

use crate::error::{Error, Result};
use crate::grid::{CoordinateBox, GridSpec, IndexRange};
use crate::numerics::compensated;
use crate::quadform::DecoupledConstraint;

/// Largest grid that the dense oracles will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

fn check_size(bx: &CoordinateBox, limit: f64) -> Result<()> {
    let size = bx.cardinality();
    if size > limit {
        return Err(Error::GridTooLarge { size, limit });
    }
    Ok(())
}

/// Exact pmf of `Σ Yᵢ` by dense convolution: all pairwise sums, sorted,
/// with equal values merged by compensated summation.
pub fn exact_sum_pmfs(pmfs: &[Vec<(f64, f64)>]) -> Vec<Vec<(f64, f64)>> {
    let mut out: Vec<Vec<(f64, f64)>> = Vec::with_capacity(pmfs.len());
    for pmf in pmfs {
        let next = match out.last() {
            None => pmf.clone(),
            Some(prev) => {
                let mut sums: Vec<(f64, f64)> = Vec::with_capacity(prev.len() * pmf.len());
                for &(v, p) in prev {
                    for &(w, q) in pmf {
                        sums.push((v + w, p * q));
                    }
                }
                merge_sorted(sums)
            }
        };
        out.push(next);
    }
    out
}

fn merge_sorted(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::new();
    let mut i = 0;
    while i < atoms.len() {
        let v = atoms[i].0;
        let j = i + atoms[i..].partition_point(|a| a.0 == v);
        out.push((v, compensated::sum(atoms[i..j].iter().map(|a| a.1))));
        i = j;
    }
    out
}

/// Exact `Pr[Σ Yᵢ ≤ θ]` for the box-conditioned discretized Gaussian.
pub fn exact_tail_bruteforce(dc: &DecoupledConstraint, spec: &GridSpec, bx: &CoordinateBox) -> Result<f64> {
    if dc.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: dc.n() });
    }
    bx.validate(spec)?;
    check_size(bx, BRUTE_FORCE_LIMIT)?;
    let pmfs = (0..spec.n)
        .map(|i| spec.support_and_pmf(dc.lambda[i], dc.mu[i], bx.ranges[i]))
        .collect::<Result<Vec<_>>>()?;
    let dist = exact_sum_pmfs(&pmfs).pop().unwrap_or_default();
    let p = compensated::sum(dist.iter().take_while(|a| a.0 <= dc.theta).map(|a| a.1));
    Ok(p.clamp(0.0, 1.0))
}

/// Every accepted grid point of the box (as index vectors, lexicographic
/// order) with its probability under the discretized Gaussian conditioned
/// on acceptance. Also returns the acceptance probability.
pub fn exact_conditional_pmf(
    dc: &DecoupledConstraint,
    spec: &GridSpec,
    bx: &CoordinateBox,
) -> Result<(Vec<(Vec<usize>, f64)>, f64)> {
    bx.validate(spec)?;
    check_size(bx, BRUTE_FORCE_LIMIT)?;
    let n = spec.n;
    let masses: Vec<Vec<f64>> = bx
        .ranges
        .iter()
        .map(|r| {
            (r.lo..=r.hi)
                .map(|k| spec.coordinate_mass(k, *r))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    let mut idx: Vec<usize> = bx.ranges.iter().map(|r| r.lo).collect();
    let mut point = vec![0.0; n];
    'outer: loop {
        for i in 0..n {
            point[i] = spec.point(idx[i]);
        }
        if dc.accepts(&point)? {
            let w: f64 = (0..n).map(|i| masses[i][idx[i] - bx.ranges[i].lo]).product();
            out.push((idx.clone(), w));
        }
        for i in (0..n).rev() {
            if idx[i] < bx.ranges[i].hi {
                idx[i] += 1;
                continue 'outer;
            }
            idx[i] = bx.ranges[i].lo;
        }
        break;
    }
    let total = compensated::sum(out.iter().map(|e| e.1));
    if total > 0.0 {
        for e in &mut out {
            e.1 /= total;
        }
    }
    Ok((out, total))
}

/// Sum of exact cell masses over one coordinate range, conditioned on a
/// parent range.
pub fn conditional_range_mass(spec: &GridSpec, part: IndexRange, parent: IndexRange) -> f64 {
    spec.range_mass(part) / spec.range_mass(parent)
}
