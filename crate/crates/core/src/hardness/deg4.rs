//! Degree-4 construction under the standard Gaussian:
//! `p_W(x) = (w·x − w₀)² + λ Σ (xᵢ² − 1)²` with
//! `λ = c·n·max(‖w‖₂², n)`, and `f_W = sign(1/2 − p_W)`.
//!
//! Degree-4 forms are evaluation-only; nothing here feeds the counter.

use super::{check_radii, classify_from, l2_ball_point, threshold_sign, unit_ball_volume, Classification, RegionDraw};
use super::{SubsetSumInstance, Variant};
use crate::error::{Error, Result};
use crate::numerics::compensated::{sum, Dot2};
use crate::numerics::Rng;

#[derive(Clone, Debug)]
pub struct QuarticForm {
    pub instance: SubsetSumInstance,
    pub lambda: f64,
    w: Vec<f64>,
}

/// Builds the quartic for a `pm1` instance together with its ℓ2 radii
/// `(α, β)`.
pub fn gen_deg4_gauss_instance(inst: &SubsetSumInstance) -> Result<(QuarticForm, f64, f64)> {
    inst.validate()?;
    if inst.variant != Variant::Pm1 {
        return Err(Error::InvalidParameter("degree-4 construction needs a pm1 instance".into()));
    }
    let n = inst.n() as f64;
    let norm = inst.norm();
    let q = QuarticForm {
        instance: inst.clone(),
        lambda: inst.c * n * (norm * norm).max(n),
        w: inst.w.iter().map(|&v| v as f64).collect(),
    };
    let (alpha, beta) = q.radii()?;
    Ok((q, alpha, beta))
}

impl QuarticForm {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    /// `α = ½(1 − √(1 − √(2/λ)))`, and `β` the positive root of
    /// `(‖w‖₂² + λ(2 + X)²)X² = 1/2`.
    pub fn radii(&self) -> Result<(f64, f64)> {
        let lam = self.lambda;
        if !(lam > 2.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lam} must exceed 2")));
        }
        let s = (2.0 / lam).sqrt();
        let alpha = 0.5 * s / (1.0 + (1.0 - s).sqrt());
        let beta = self.solve_beta();
        check_radii(alpha, beta, self.instance.norm())?;
        Ok((alpha, beta))
    }

    fn beta_residual(&self, x: f64) -> f64 {
        let norm2: f64 = self.w.iter().map(|v| v * v).sum();
        (norm2 + self.lambda * (2.0 + x) * (2.0 + x)) * x * x - 0.5
    }

    fn solve_beta(&self) -> f64 {
        // The residual is increasing on X > 0 and positive at 1/√(8λ).
        let (mut lo, mut hi) = (0.0, 1.0 / (8.0 * self.lambda).sqrt());
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return lo;
            }
            if self.beta_residual(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// `p_W(x)` in compensated arithmetic.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let mut acc = Dot2::new();
        for (wi, xi) in self.w.iter().zip(x) {
            acc.add_product(*wi, *xi);
        }
        acc.add(-(self.instance.w0 as f64));
        let r = acc.value();
        let penalty = sum(x.iter().map(|&xi| {
            let d = (xi - 1.0) * (xi + 1.0);
            d * d
        }));
        Ok(r.mul_add(r, self.lambda * penalty))
    }

    /// `f_W(x)`, with a tie counted as `+1`.
    pub fn sign(&self, x: &[f64]) -> Result<i8> {
        Ok(threshold_sign(self.value(x)?))
    }

    /// Nearest ±1 vertex in ℓ2 and the sign the geometry guarantees there.
    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let z: Vec<i8> = x.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect();
        let dist = sum(x.iter().zip(&z).map(|(&v, &zi)| (v - zi as f64) * (v - zi as f64))).sqrt();
        let (alpha, beta) = self.radii()?;
        Ok(classify_from(&self.instance, z, dist, alpha, beta))
    }

    /// `vol(B²(·, α)) · max over the ball of the Gaussian density`: the
    /// region sampler's acceptance rate times this is the Gaussian mass
    /// of the region.
    pub fn acceptance_scale(&self) -> Result<f64> {
        let (alpha, _) = self.radii()?;
        let n = self.n() as f64;
        let closest = n.sqrt() - alpha;
        let ln = unit_ball_volume(self.n()).ln() + n * alpha.ln()
            - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
            - 0.5 * closest * closest;
        Ok(ln.exp())
    }
}

/// Draw from `N(0,1)ⁿ` restricted to `S_z = f_W⁻¹(1) ∩ B²(z, α)`: uniform
/// ball proposals accepted with the Gaussian density relative to its
/// maximum over the ball, then filtered by `f_W`.
pub fn sample_region_gauss_deg4(z: &[i8], quartic: &QuarticForm, max_retries: usize, rng: &mut Rng) -> Result<RegionDraw> {
    if !quartic.instance.is_solution(z) || z.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::InvalidParameter("z is not a solution vertex".into()));
    }
    let (alpha, _) = quartic.radii()?;
    let center: Vec<f64> = z.iter().map(|&v| v as f64).collect();
    let closest = (z.len() as f64).sqrt() - alpha;
    for proposals in 1..=max_retries {
        let x = l2_ball_point(&center, alpha, rng);
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let keep = (-0.5 * (r2 - closest * closest)).exp();
        if rng.uniform() < keep && quartic.sign(&x)? == 1 {
            return Ok(RegionDraw { x, proposals });
        }
    }
    Err(Error::RetryLimit { retries: max_retries })
}
