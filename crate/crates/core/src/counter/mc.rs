//! Monte Carlo reference estimator.

use rand::RngCore;
use rayon::prelude::*;

use crate::error::Result;
use crate::numerics::Rng;
use crate::quadform::QuadraticForm;

/// Draws per independent stream. Fixed, so results do not depend on how
/// many threads share the work.
const CHUNK: usize = 4096;

/// z-value for a two-sided 99% normal interval.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Half-width of the 99% normal-approximation interval for a proportion.
pub fn ci99(p: f64, n: usize) -> f64 {
    Z99 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Runs `f(rng, count)` over fixed-size chunks, each on its own derived
/// stream, and adds the results.
pub fn chunked_count<F>(n_samples: usize, rng: &mut Rng, f: F) -> u64
where
    F: Fn(&mut Rng, usize) -> u64 + Sync,
{
    let base = Rng::new(rng.next_u64());
    let chunks = n_samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = base.split(c as u64);
            let len = CHUNK.min(n_samples - c * CHUNK);
            f(&mut r, len)
        })
        .sum()
}

/// Fraction of standard normal draws with `q(x) ≥ 0`, and its 99% CI
/// half-width.
pub fn mc_count(q: &QuadraticForm, n_samples: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    q.validate()?;
    let n_samples = n_samples.max(1);
    let hits = chunked_count(n_samples, rng, |r, len| {
        let mut x = vec![0.0; q.n];
        let mut hits = 0;
        for _ in 0..len {
            x.iter_mut().for_each(|v| *v = r.standard_normal());
            if q.sign_at(&x).unwrap_or(-1) == 1 {
                hits += 1;
            }
        }
        hits
    });
    let p = hits as f64 / n_samples as f64;
    Ok((p, ci99(p, n_samples)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let mut rng = Rng::new(1);
        let (p, ci) = mc_count(&QuadraticForm::constant(2, 1.0), 1000, &mut rng).unwrap();
        assert_eq!((p, ci), (1.0, 0.0));
        let half = QuadraticForm::new(vec![vec![0.0]], vec![1.0], 0.0).unwrap();
        let (p, ci) = mc_count(&half, 100_000, &mut rng).unwrap();
        assert!((p - 0.5).abs() <= ci);
    }

    #[test]
    fn chi_square_reference() {
        let q = QuadraticForm::new(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![0.0; 2], 2.0).unwrap();
        let (p, ci) = mc_count(&q, 1_000_000, &mut Rng::new(9)).unwrap();
        assert!((p - 0.632_120_558_828_557_7).abs() <= ci);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let q = QuadraticForm::new(vec![vec![1.0]], vec![0.0], -1.0).unwrap();
        let a = mc_count(&q, 50_000, &mut Rng::new(4)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_count(&q, 50_000, &mut Rng::new(4)).unwrap());
        assert_eq!(a, b);
    }
}
