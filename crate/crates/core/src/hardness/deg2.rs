//! Degree-2 construction over the unit cube:
//! `p_W(x) = (w·x − w₀)² + λ Σ xᵢ(1 − xᵢ)` with `λ = c·n·‖w‖₂`, and
//! `f_W = sign(1/2 − p_W)`.

use super::{check_radii, classify_from, simplex_point, step_into_cube, threshold_sign, Classification, RegionDraw};
use super::{SubsetSumInstance, Variant};
use crate::error::{Error, Result};
use crate::numerics::compensated::{sum, Dot2};
use crate::numerics::Rng;
use crate::quadform::QuadraticForm;

#[derive(Clone, Debug)]
pub struct Deg2Ptf {
    pub instance: SubsetSumInstance,
    /// `M = c·n`.
    pub m: f64,
    /// `λ = M·‖w‖₂`.
    pub lambda: f64,
    w: Vec<f64>,
}

/// Builds the degree-2 polynomial for a `cube01` instance.
pub fn gen_deg2_cube_instance(inst: &SubsetSumInstance) -> Result<Deg2Ptf> {
    inst.validate()?;
    if inst.variant != Variant::Cube01 {
        return Err(Error::InvalidParameter("degree-2 construction needs a cube01 instance".into()));
    }
    let m = inst.c * inst.n() as f64;
    Ok(Deg2Ptf {
        instance: inst.clone(),
        m,
        lambda: m * inst.norm(),
        w: inst.w.iter().map(|&v| v as f64).collect(),
    })
}

/// `α = ½(1 − √(1 − 2/λ))` and `β = (√(M² + 2) − M)/(2‖w‖₂)`, both in
/// cancellation-free form.
pub fn alpha_beta_deg2(inst: &SubsetSumInstance) -> Result<(f64, f64)> {
    let p = gen_deg2_cube_instance(inst)?;
    p.radii()
}

impl Deg2Ptf {
    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn radii(&self) -> Result<(f64, f64)> {
        let lam = self.lambda;
        if !(lam > 2.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lam} must exceed 2")));
        }
        let norm = self.instance.norm();
        let alpha = (1.0 / lam) / (1.0 + (1.0 - 2.0 / lam).sqrt());
        let beta = 1.0 / (norm * ((self.m * self.m + 2.0).sqrt() + self.m));
        check_radii(alpha, beta, norm)?;
        Ok((alpha, beta))
    }

    /// `p_W(x)` with the linear residual in compensated arithmetic.
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
        let penalty = sum(x.iter().map(|&xi| xi * (1.0 - xi)));
        Ok(r.mul_add(r, self.lambda * penalty))
    }

    /// `f_W(x) = sign(1/2 − p_W(x))`, with a tie counted as `+1`.
    pub fn sign(&self, x: &[f64]) -> Result<i8> {
        Ok(threshold_sign(self.value(x)?))
    }

    /// `p_W` as a general quadratic form: `A = wwᵀ − λI`,
    /// `b = λ·1 − 2w₀w`, `c = w₀²`.
    pub fn polynomial(&self) -> QuadraticForm {
        let n = self.n();
        let w0 = self.instance.w0 as f64;
        let a = (0..n)
            .map(|i| (0..n).map(|j| self.w[i] * self.w[j] - if i == j { self.lambda } else { 0.0 }).collect())
            .collect();
        let b = self.w.iter().map(|wi| self.lambda - 2.0 * w0 * wi).collect();
        QuadraticForm { n, a, b, c: w0 * w0 }
    }

    /// The form `1/2 − p_W`, whose sign is `f_W`.
    pub fn threshold_form(&self) -> QuadraticForm {
        let p = self.polynomial();
        QuadraticForm {
            n: p.n,
            a: p.a.iter().map(|row| row.iter().map(|v| -v).collect()).collect(),
            b: p.b.iter().map(|v| -v).collect(),
            c: 0.5 - p.c,
        }
    }

    /// Nearest vertex in ℓ1 and the sign the geometry guarantees there.
    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::OutOfCube);
        }
        let z: Vec<i8> = x.iter().map(|&v| if v >= 0.5 { 1 } else { 0 }).collect();
        let dist = sum(x.iter().zip(&z).map(|(&v, &zi)| (v - zi as f64).abs()));
        let (alpha, beta) = self.radii()?;
        Ok(classify_from(&self.instance, z, dist, alpha, beta))
    }
}

/// Uniform draw from `S_z = f_W⁻¹(1) ∩ B¹(z, α) ∩ [0,1]ⁿ` by rejection.
///
/// Only the orthant of the ℓ1 ball pointing into the cube is proposed,
/// which is the same law as proposing the whole ball and discarding
/// out-of-cube points. `proposals` counts in-cube proposals.
pub fn sample_region_uniform_deg2(z: &[i8], ptf: &Deg2Ptf, max_retries: usize, rng: &mut Rng) -> Result<RegionDraw> {
    if !ptf.instance.is_solution(z) || z.iter().any(|&v| v != 0 && v != 1) {
        return Err(Error::InvalidParameter("z is not a solution vertex".into()));
    }
    let (alpha, _) = ptf.radii()?;
    for proposals in 1..=max_retries {
        let x = step_into_cube(z, &simplex_point(z.len(), alpha, rng));
        if ptf.sign(&x)? == 1 {
            return Ok(RegionDraw { x, proposals });
        }
    }
    Err(Error::RetryLimit { retries: max_retries })
}
