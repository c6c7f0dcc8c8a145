//! Checks that the constructions behave as their geometry promises.

use serde::Serialize;

use super::{l2_ball_point, simplex_point, solutions, step_into_cube, Classification, Deg2Ptf, QuarticForm, Variant};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Largest dimension for exhaustive vertex enumeration.
pub const MAX_ENUM_DIM: usize = 12;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub points: usize,
    /// Points where the geometry predicted a sign.
    pub predicted: usize,
    /// Predicted points whose actual sign disagreed.
    pub counterexamples: usize,
}

/// Vertices `z` where `f_W(z) = +1` disagrees with `z` solving `W`.
fn vertex_mismatches(n: usize, variant: Variant, sign: impl Fn(&[f64]) -> Result<i8>, solves: impl Fn(&[i8]) -> bool) -> Result<usize> {
    if n > MAX_ENUM_DIM {
        return Err(Error::InvalidParameter(format!("vertex enumeration supports n ≤ {MAX_ENUM_DIM}")));
    }
    let low = if variant == Variant::Cube01 { 0 } else { -1 };
    let mut bad = 0;
    for mask in 0u32..1 << n {
        let z: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { low }).collect();
        let x: Vec<f64> = z.iter().map(|&v| v as f64).collect();
        if (sign(&x)? == 1) != solves(&z) {
            bad += 1;
        }
    }
    Ok(bad)
}

pub fn deg2_vertex_mismatches(ptf: &Deg2Ptf) -> Result<usize> {
    vertex_mismatches(ptf.n(), Variant::Cube01, |x| ptf.sign(x), |z| ptf.instance.is_solution(z))
}

pub fn deg4_vertex_mismatches(q: &QuarticForm) -> Result<usize> {
    vertex_mismatches(q.n(), Variant::Pm1, |x| q.sign(x), |z| q.instance.is_solution(z))
}

/// A radius drawn around one of the three decision shells.
fn shell_radius(alpha: f64, beta: f64, bad: f64, rng: &mut Rng) -> f64 {
    let base = match rng.below(3) {
        0 => 1.5 * beta,
        1 => 2.0 * alpha,
        _ => 1.5 * bad,
    };
    base * rng.uniform()
}

fn random_vertex(n: usize, low: i8, sols: &[Vec<i8>], rng: &mut Rng) -> Vec<i8> {
    if !sols.is_empty() && rng.coin() {
        return sols[rng.below(sols.len() as u64) as usize].clone();
    }
    (0..n).map(|_| if rng.coin() { 1 } else { low }).collect()
}

fn tally(report: &mut SweepReport, c: &Classification, actual: i8) {
    report.points += 1;
    if let Some(p) = c.predicted {
        report.predicted += 1;
        if p != actual {
            report.counterexamples += 1;
        }
    }
}

/// Classifies `points` cube points (a third uniform, the rest near
/// vertices at radii straddling each shell) and counts wrong predictions.
pub fn sweep_deg2(ptf: &Deg2Ptf, points: usize, rng: &mut Rng) -> Result<SweepReport> {
    let (alpha, beta) = ptf.radii()?;
    let bad = 0.25 / ptf.instance.norm();
    let n = ptf.n();
    let sols = solutions(&ptf.instance)?;
    let mut report = SweepReport::default();
    for _ in 0..points {
        let x = if rng.below(3) == 0 {
            (0..n).map(|_| rng.uniform()).collect()
        } else {
            let z = random_vertex(n, 0, &sols, rng);
            let r = shell_radius(alpha, beta, bad, rng).min(1.0);
            step_into_cube(&z, &simplex_point(n, r, rng))
        };
        tally(&mut report, &ptf.classify(&x)?, ptf.sign(&x)?);
    }
    Ok(report)
}

/// Degree-4 analogue of [`sweep_deg2`], with Gaussian background points.
pub fn sweep_deg4(q: &QuarticForm, points: usize, rng: &mut Rng) -> Result<SweepReport> {
    let (alpha, beta) = q.radii()?;
    let bad = 0.25 / q.instance.norm();
    let n = q.n();
    let sols = solutions(&q.instance)?;
    let mut report = SweepReport::default();
    for _ in 0..points {
        let x = if rng.below(3) == 0 {
            (0..n).map(|_| rng.standard_normal()).collect()
        } else {
            let z: Vec<f64> = random_vertex(n, -1, &sols, rng).iter().map(|&v| v as f64).collect();
            let r = shell_radius(alpha, beta, bad, rng);
            l2_ball_point(&z, r, rng)
        };
        tally(&mut report, &q.classify(&x)?, q.sign(&x)?);
    }
    Ok(report)
}
