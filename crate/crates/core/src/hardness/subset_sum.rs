//! Exhaustive Subset-Sum solving by meet-in-the-middle.

use std::collections::HashMap;

use super::{SubsetSumInstance, Variant};
use crate::error::{Error, Result};

/// Largest dimension the exhaustive solver accepts.
pub const MAX_SOLVE_DIM: usize = 20;

fn subset_sums(w: &[u64]) -> Vec<u128> {
    let mut sums = vec![0u128; 1 << w.len()];
    for mask in 1usize..sums.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + w[low] as u128;
    }
    sums
}

/// Every 0/1 vector `y` with `w·y = target`, as bitmasks.
fn zero_one_solutions(w: &[u64], target: u128) -> Vec<u64> {
    let half = w.len() / 2;
    let (left, right) = w.split_at(half);
    let mut by_sum: HashMap<u128, Vec<u64>> = HashMap::new();
    for (mask, s) in subset_sums(left).into_iter().enumerate() {
        by_sum.entry(s).or_default().push(mask as u64);
    }
    let mut out = Vec::new();
    for (rmask, s) in subset_sums(right).into_iter().enumerate() {
        if s > target {
            continue;
        }
        if let Some(lefts) = by_sum.get(&(target - s)) {
            out.extend(lefts.iter().map(|&l| l | ((rmask as u64) << half)));
        }
    }
    out
}

/// All satisfying vertices, in lexicographic order. Entries are 0/1 for
/// `cube01` and ±1 for `pm1`.
pub fn solutions(inst: &SubsetSumInstance) -> Result<Vec<Vec<i8>>> {
    inst.validate()?;
    let n = inst.n();
    if n > MAX_SOLVE_DIM {
        return Err(Error::InvalidParameter(format!("exhaustive search supports n ≤ {MAX_SOLVE_DIM}, got {n}")));
    }
    // w·z = w₀ over ±1 is w·y = (w₀ + Σw)/2 over 0/1 with z = 2y − 1.
    let target = match inst.variant {
        Variant::Cube01 => Some(inst.w0 as u128),
        Variant::Pm1 => {
            let twice = inst.w0 as u128 + inst.w.iter().map(|&v| v as u128).sum::<u128>();
            (twice % 2 == 0).then_some(twice / 2)
        }
    };
    let Some(target) = target else {
        return Ok(Vec::new());
    };
    let (off, on) = match inst.variant {
        Variant::Cube01 => (0, 1),
        Variant::Pm1 => (-1, 1),
    };
    let mut out: Vec<Vec<i8>> = zero_one_solutions(&inst.w, target)
        .into_iter()
        .map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { on } else { off }).collect())
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(variant: Variant, w0: u64, w: &[u64]) -> SubsetSumInstance {
        SubsetSumInstance::new(variant, w0, w.to_vec(), 4.0).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(solutions(&inst(Variant::Cube01, 8, &[3, 5])).unwrap(), vec![vec![1, 1]]);
        assert!(solutions(&inst(Variant::Cube01, 1, &[2, 2])).unwrap().is_empty());
        assert_eq!(solutions(&inst(Variant::Cube01, 0, &[2, 2])).unwrap(), vec![vec![0, 0]]);
        assert!(solutions(&inst(Variant::Pm1, 1, &[2, 4, 6])).unwrap().is_empty());
        assert_eq!(solutions(&inst(Variant::Pm1, 2, &[1, 3])).unwrap(), vec![vec![-1, 1]]);
    }

    #[test]
    fn agrees_with_enumeration() {
        let w = [5u64, 1, 4, 2, 3, 7, 6];
        for w0 in 0..30 {
            for variant in [Variant::Cube01, Variant::Pm1] {
                let it = inst(variant, w0, &w);
                let mut brute = Vec::new();
                for mask in 0..1u32 << w.len() {
                    let z: Vec<i8> = (0..w.len())
                        .map(|i| match (mask >> i & 1, variant) {
                            (1, _) => 1,
                            (_, Variant::Cube01) => 0,
                            _ => -1,
                        })
                        .collect();
                    if it.is_solution(&z) {
                        brute.push(z);
                    }
                }
                brute.sort();
                assert_eq!(solutions(&it).unwrap(), brute);
            }
        }
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(solutions(&inst(Variant::Cube01, 1, &[1; 21])).is_err());
    }
}
