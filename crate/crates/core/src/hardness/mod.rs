//! Subset-Sum based hard instances for degree-2 (uniform on the unit cube)
//! and degree-4 (standard Gaussian) threshold functions.
//!
//! Each satisfying assignment `z` of an instance `W = (w₀, w)` becomes a
//! tiny region `S_z` of positive points around the matching vertex, and the
//! rest of space is negative. The radii `α` (every positive point is this
//! close to some vertex) and `β` (every point this close to a solution is
//! positive) make the geometry checkable.

mod deg2;
mod deg4;
mod subset_sum;
pub mod validate;

pub use deg2::{alpha_beta_deg2, gen_deg2_cube_instance, sample_region_uniform_deg2, Deg2Ptf};
pub use deg4::{gen_deg4_gauss_instance, sample_region_gauss_deg4, QuarticForm};
pub use subset_sum::{solutions, MAX_SOLVE_DIM};

use serde::{Deserialize, Serialize};

use crate::counter::mc::{ci99, Z99};
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Default penalty constant `c` in `M = c·n`.
pub const DEFAULT_C: f64 = 4.0;

/// Which hypercube vertices encode assignments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `z ∈ {0,1}ⁿ`, background uniform on `[0,1]ⁿ`.
    Cube01,
    /// `z ∈ {−1,1}ⁿ`, background `N(0,1)ⁿ`.
    Pm1,
}

fn default_c() -> f64 {
    DEFAULT_C
}

/// A Subset-Sum instance: find a vertex `z` with `w·z = w₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    pub variant: Variant,
    pub w0: u64,
    pub w: Vec<u64>,
    #[serde(default = "default_c")]
    pub c: f64,
}

impl SubsetSumInstance {
    pub fn new(variant: Variant, w0: u64, w: Vec<u64>, c: f64) -> Result<Self> {
        let inst = SubsetSumInstance { variant, w0, w, c };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.w.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if !(self.c.is_finite() && self.c >= 1.0) {
            return Err(Error::InvalidParameter(format!("penalty constant c = {} must be at least 1", self.c)));
        }
        if self.w.iter().chain([&self.w0]).any(|&v| v > 1 << 60) {
            return Err(Error::InvalidParameter("weights are capped at 2^60".into()));
        }
        Ok(())
    }

    /// `‖w‖₂`.
    pub fn norm(&self) -> f64 {
        self.w.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt()
    }

    /// Whether the vertex `z` (entries in `{0,1}` or `{−1,1}` according to
    /// the variant) satisfies `w·z = w₀`, in exact integer arithmetic.
    pub fn is_solution(&self, z: &[i8]) -> bool {
        if z.len() != self.n() {
            return false;
        }
        let dot: i128 = self.w.iter().zip(z).map(|(&w, &s)| w as i128 * s as i128).sum();
        dot == self.w0 as i128
    }

    /// Parses the JSON instance format.
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: SubsetSumInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Where a point sits relative to the vertex geometry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Farther than `α` from every vertex.
    FarFromAll,
    /// Within `β` of a solution vertex.
    NearSolution(Vec<i8>),
    /// Within `1/(4‖w‖₂)` of a non-solution vertex.
    NearNonSolution(Vec<i8>),
    /// Close to a vertex but in neither guaranteed shell.
    Indeterminate(Vec<i8>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub region: Region,
    /// The sign the geometry guarantees, when it guarantees one.
    pub predicted: Option<i8>,
}

/// Shared decision rule once the nearest vertex and its distance are known.
fn classify_from(inst: &SubsetSumInstance, z: Vec<i8>, dist: f64, alpha: f64, beta: f64) -> Classification {
    let bad_radius = 0.25 / inst.norm();
    let (region, predicted) = if dist > alpha {
        (Region::FarFromAll, Some(-1))
    } else if inst.is_solution(&z) {
        if dist <= beta {
            (Region::NearSolution(z), Some(1))
        } else {
            (Region::Indeterminate(z), None)
        }
    } else if dist <= bad_radius {
        (Region::NearNonSolution(z), Some(-1))
    } else {
        (Region::Indeterminate(z), None)
    };
    Classification { region, predicted }
}

/// `+1` when `value ≤ 1/2`, so a tie counts as positive.
fn threshold_sign(value: f64) -> i8 {
    if value <= 0.5 {
        1
    } else {
        -1
    }
}

fn check_radii(alpha: f64, beta: f64, norm: f64) -> Result<()> {
    let ok = beta < alpha && alpha < 0.5 && beta < 0.25 / norm;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "radii out of order (alpha {alpha:e}, beta {beta:e}); increase c"
        )))
    }
}

/// One accepted draw from a region sampler.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionDraw {
    pub x: Vec<f64>,
    /// Proposals spent, including the accepted one.
    pub proposals: usize,
}

/// Default cap on rejection-sampler proposals.
pub const MAX_REGION_RETRIES: usize = 100_000;

/// Which ball and which measure the region estimator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Lebesgue measure on `[0,1]ⁿ`, over the ℓ1 ball around a cube vertex.
    CubeUniform,
    /// Standard Gaussian measure, over the ℓ2 ball.
    Gaussian,
}

/// Uniform draw from the corner simplex `{t ≥ 0, Σt ≤ r}`.
pub(crate) fn simplex_point(n: usize, r: f64, rng: &mut Rng) -> Vec<f64> {
    let e: Vec<f64> = (0..=n).map(|_| rng.exponential()).collect();
    let total: f64 = e.iter().sum();
    e[..n].iter().map(|v| r * v / total).collect()
}

/// The point `z` moved by `t` into the cube (each coordinate steps away from
/// its 0/1 bound).
pub(crate) fn step_into_cube(z: &[i8], t: &[f64]) -> Vec<f64> {
    z.iter().zip(t).map(|(&zi, &ti)| if zi == 0 { ti } else { 1.0 - ti }).collect()
}

/// Uniform draw from the ℓ2 ball of radius `r` around `center`.
pub(crate) fn l2_ball_point(center: &[f64], r: f64, rng: &mut Rng) -> Vec<f64> {
    let n = center.len();
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let scale = r * rng.uniform().powf(1.0 / n as f64) / norm;
        return center.iter().zip(&g).map(|(c, v)| c + scale * v).collect();
    }
}

/// Volume of the unit ℓ2 ball in dimension `n`.
pub(crate) fn unit_ball_volume(n: usize) -> f64 {
    let (mut v, start) = if n % 2 == 0 { (1.0, 2) } else { (2.0, 3) };
    let mut k = start;
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Monte Carlo estimate of the measure of `{x in the radius ball around z :
/// f(x) = +1}` with a 99% half-width.
///
/// For [`Measure::CubeUniform`] `z` must be a 0/1 vertex and the ball is the
/// ℓ1 ball clipped to the cube (volume `rⁿ/n!` while `r ≤ 1`). For
/// [`Measure::Gaussian`] the ball is the ℓ2 ball and each hit is weighted by
/// the Gaussian density.
pub fn region_mass_mc<F>(f: F, z: &[f64], radius: f64, measure: Measure, n_samples: usize, rng: &mut Rng) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> i8,
{
    let n = z.len();
    if n_samples == 0 || !(radius > 0.0) {
        return Err(Error::InvalidParameter("need a positive radius and sample count".into()));
    }
    match measure {
        Measure::CubeUniform => {
            if radius > 1.0 {
                return Err(Error::InvalidParameter("cube corner radius must be at most 1".into()));
            }
            let vertex: Vec<i8> = z.iter().map(|&v| if v >= 0.5 { 1 } else { 0 }).collect();
            let mut hits = 0usize;
            for _ in 0..n_samples {
                let t = simplex_point(n, radius, rng);
                if f(&step_into_cube(&vertex, &t)) == 1 {
                    hits += 1;
                }
            }
            let vol = (n as f64 * radius.ln() - ln_factorial(n)).exp();
            let p = hits as f64 / n_samples as f64;
            Ok((vol * p, vol * ci99(p, n_samples)))
        }
        Measure::Gaussian => {
            let ln_vol = unit_ball_volume(n).ln() + n as f64 * radius.ln();
            let ln_norm = -0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..n_samples {
                let x = l2_ball_point(z, radius, rng);
                if f(&x) == 1 {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    let w = (ln_vol + ln_norm - 0.5 * r2).exp();
                    sum += w;
                    sq += w * w;
                }
            }
            let m = n_samples as f64;
            let mean = sum / m;
            let var = (sq / m - mean * mean).max(0.0);
            Ok((mean, Z99 * (var / m).sqrt()))
        }
    }
}
