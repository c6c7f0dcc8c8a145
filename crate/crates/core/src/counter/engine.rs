//! Deterministic multiplicative counting over the discretized Gaussian.

use serde::{Deserialize, Serialize};

use crate::counter::cdf::CompressedCdf;
use crate::error::{Error, Result};
use crate::grid::{CoordinateBox, GridSpec};
use crate::numerics::normal::upper_tail;
use crate::quadform::{DecoupledConstraint, QuadraticForm, RoundingConfig};

/// Error terms separating the discretized answer from the continuous one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    /// Bound on the Gaussian measure where coefficient rounding flips the sign.
    pub rounding: f64,
    /// Additive width from snapping points to the grid.
    pub discretization: f64,
    /// Gaussian mass outside `[−B, B]ⁿ`.
    pub truncation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub estimate: f64,
    pub log_estimate: f64,
    pub eps: f64,
    pub slack: Slack,
    pub below_floor: bool,
}

impl CountResult {
    fn exact(p: f64, eps: f64) -> Self {
        CountResult {
            estimate: p,
            log_estimate: p.ln(),
            eps,
            slack: Slack::default(),
            below_floor: false,
        }
    }
}

/// Default reporting floor `2^{−4n}`.
pub fn default_floor(n: usize) -> f64 {
    2f64.powi(-4 * n as i32)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")))
    }
}

/// Per-coordinate log pmfs of `Yᵢ = λᵢκ² + μᵢκ` over the box.
pub fn coordinate_pmfs(dc: &DecoupledConstraint, spec: &GridSpec, bx: &CoordinateBox) -> Result<Vec<Vec<(f64, f64)>>> {
    if dc.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: dc.n() });
    }
    bx.validate(spec)?;
    (0..spec.n)
        .map(|i| spec.support_and_log_pmf(dc.lambda[i], dc.mu[i], bx.ranges[i]))
        .collect()
}

/// Sequential convolution with per-step sparsification at `eps_step`. The
/// result after step `i` covers `Y₁ + … + Y_{i+1}`.
pub fn convolution_chain(pmfs: &[Vec<(f64, f64)>], eps_step: f64) -> Vec<CompressedCdf> {
    let mut out: Vec<CompressedCdf> = Vec::with_capacity(pmfs.len());
    for pmf in pmfs {
        let next = match out.last() {
            None => CompressedCdf::from_log_pmf(pmf).sparsify(eps_step),
            Some(prev) => prev.convolve(pmf, eps_step),
        };
        out.push(next);
    }
    out
}

/// The compressed CDF of `Σ Yᵢ` at overall accuracy `eps`.
pub fn sum_cdf(dc: &DecoupledConstraint, spec: &GridSpec, bx: &CoordinateBox, eps: f64) -> Result<CompressedCdf> {
    check_eps(eps)?;
    let pmfs = coordinate_pmfs(dc, spec, bx)?;
    let step = eps / (2.0 * spec.n as f64);
    Ok(convolution_chain(&pmfs, step).pop().unwrap_or_else(CompressedCdf::unit))
}

/// Centered estimate `√c·G(t)`, capped at 1.
pub fn centered_ln(cdf: &CompressedCdf, t: f64) -> f64 {
    (cdf.ln_at(t) + 0.5 * cdf.ln_err()).min(0.0)
}

/// `Pr[Σ Yᵢ ≤ θ]` for the (box-conditioned) discretized Gaussian, within a
/// factor `1+eps` of the exact value.
pub fn count(dc: &DecoupledConstraint, spec: &GridSpec, bx: &CoordinateBox, eps: f64) -> Result<CountResult> {
    count_with_floor(dc, spec, bx, eps, default_floor(spec.n))
}

pub fn count_with_floor(
    dc: &DecoupledConstraint,
    spec: &GridSpec,
    bx: &CoordinateBox,
    eps: f64,
    floor: f64,
) -> Result<CountResult> {
    let cdf = sum_cdf(dc, spec, bx, eps)?;
    let log_estimate = centered_ln(&cdf, dc.theta);
    let estimate = log_estimate.exp();
    let slack = Slack {
        rounding: 0.0,
        discretization: discretization_slack(dc, spec, &cdf),
        truncation: truncation_slack(spec),
    };
    Ok(CountResult { estimate, log_estimate, eps, slack, below_floor: estimate < floor })
}

/// Width `c·G(θ+Δ) − G(θ−Δ)` where Δ bounds how far snapping a point to its
/// interior cell can move the statistic.
fn discretization_slack(dc: &DecoupledConstraint, spec: &GridSpec, cdf: &CompressedCdf) -> f64 {
    let (b, tau) = (spec.trunc, spec.tau);
    let delta: f64 = dc
        .lambda
        .iter()
        .zip(&dc.mu)
        .map(|(l, m)| l.abs() * (2.0 * b + tau) * tau + m.abs() * tau)
        .sum();
    let hi = (cdf.ln_at(dc.theta + delta) + cdf.ln_err()).exp().min(1.0);
    let lo = cdf.ln_at(dc.theta - delta).exp();
    (hi - lo).max(0.0)
}

fn truncation_slack(spec: &GridSpec) -> f64 {
    (2.0 * spec.n as f64 * upper_tail(spec.trunc)).min(1.0)
}

/// Settings for the end-to-end pipeline on a raw polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtfCountConfig {
    pub tau: f64,
    /// Truncation radius; `None` picks [`GridSpec::default_trunc`].
    pub trunc: Option<f64>,
    pub gamma: f64,
    /// Reporting floor; `None` uses `2^{−4n}`.
    pub floor: Option<f64>,
}

impl Default for PtfCountConfig {
    fn default() -> Self {
        PtfCountConfig { tau: 2f64.powi(-8), trunc: None, gamma: 2f64.powi(-20), floor: None }
    }
}

impl PtfCountConfig {
    pub fn grid(&self, n: usize, eps: f64) -> Result<GridSpec> {
        GridSpec::new(self.tau, self.trunc.unwrap_or_else(|| GridSpec::default_trunc(n, eps)), n)
    }

    pub fn rounding(&self) -> Result<RoundingConfig> {
        RoundingConfig::new(self.gamma, self.tau)
    }
}

/// The decoupled, normalized and rounded constraint for `q`, plus the
/// normalized one before rounding. Constant polynomials surface as
/// [`Error::ConstantPolynomial`].
pub fn prepare(q: &QuadraticForm, cfg: &RoundingConfig) -> Result<(DecoupledConstraint, DecoupledConstraint)> {
    let normalized = q.decouple()?.normalize()?;
    let rounded = normalized.round_coefficients(cfg);
    Ok((normalized, rounded))
}

/// Estimates `Pr_{G∼N(0,I)}[q(G) ≥ 0]`.
pub fn count_ptf_gaussian(q: &QuadraticForm, eps: f64, cfg: &PtfCountConfig) -> Result<CountResult> {
    check_eps(eps)?;
    let rounding = cfg.rounding()?;
    let (normalized, rounded) = match prepare(q, &rounding) {
        Ok(pair) => pair,
        Err(Error::ConstantPolynomial { accepts }) => {
            return Ok(CountResult::exact(if accepts { 1.0 } else { 0.0 }, eps));
        }
        Err(e) => return Err(e),
    };
    let spec = cfg.grid(q.n, eps)?;
    let floor = cfg.floor.unwrap_or_else(|| default_floor(q.n));
    let mut res = count_with_floor(&rounded, &spec, &spec.full_box(), eps, floor)?;
    res.slack.rounding = normalized.perturbation_slack(&rounded);
    Ok(res)
}
