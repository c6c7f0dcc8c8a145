//! Planted-target harness: run the densifier on a known `f` and measure
//! both densifier conditions by Monte Carlo.

use serde::{Deserialize, Serialize};

use super::{densify, DensifierConfig, Densified, TranscriptEntry};
use crate::counter::mc::ci99;
use crate::counter::{count_ptf_gaussian, PtfCountConfig};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::quadform::QuadraticForm;
use crate::sampler::{PtfSampleConfig, PtfSampler};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Densifier settings; `p_hat` is replaced by the harness's estimate.
    pub densifier: DensifierConfig,
    /// Monte Carlo draws for each validation measurement.
    pub validation_samples: usize,
    /// Below this mass, conditioned draws come from the sampler instead of
    /// rejection.
    pub rejection_floor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { densifier: DensifierConfig::default(), validation_samples: 100_000, rejection_floor: 1e-4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlantedReport {
    pub n: usize,
    pub p_hat: f64,
    pub gamma: f64,
    pub mistake_budget: usize,
    pub terminated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub mistakes: usize,
    pub steps: usize,
    /// `Pr_{x∼N_f}[g(x) = 1]` and its 99% half-width.
    pub coverage: f64,
    pub coverage_ci: f64,
    /// `Pr_{x∼N_g}[f(x) = 1]` and its 99% half-width.
    pub density: f64,
    pub density_ci: f64,
    /// Fraction of fed examples whose label disagreed with `f`.
    pub label_noise: f64,
    pub kappa_flip_rate: f64,
    /// The returned hypothesis, when the run terminated.
    pub g: Option<QuadraticForm>,
    #[serde(skip)]
    pub transcript: Vec<TranscriptEntry>,
}

/// Draws from `N(0,I)` conditioned on `q ≥ 0`, by rejection when the mass
/// is at least `floor` and by the filtered grid sampler otherwise.
struct Conditioned {
    q: QuadraticForm,
    sampler: Option<PtfSampler>,
}

impl Conditioned {
    fn new(q: &QuadraticForm, mass: f64, floor: f64, count: &PtfCountConfig) -> Result<Self> {
        let sampler = if mass >= floor {
            None
        } else {
            let opts = PtfSampleConfig { count: *count, exact_filter: true, max_retries: 1000 };
            Some(PtfSampler::new(q, 0.1, &opts).map_err(|e| match e {
                Error::BelowFloor { estimate, .. } => {
                    Error::Starved(format!("mass {estimate:e} is below both the rejection and counting floors"))
                }
                other => other,
            })?)
        };
        Ok(Conditioned { q: q.clone(), sampler })
    }

    fn draw(&mut self, rng: &mut Rng) -> Result<Vec<f64>> {
        if let Some(s) = self.sampler.as_mut() {
            return Ok(s.sample(rng)?.x);
        }
        let mut x = vec![0.0; self.q.n];
        loop {
            x.iter_mut().for_each(|v| *v = rng.standard_normal());
            if self.q.sign_at(&x)? == 1 {
                return Ok(x.clone());
            }
        }
    }
}

fn fraction(hits: usize, total: usize) -> (f64, f64) {
    let p = hits as f64 / total as f64;
    (p, ci99(p, total))
}

/// Runs the densifier against the planted target `f` and validates the
/// result. Budget exhaustion comes back as a report with
/// `terminated = false`; every other failure is an error.
pub fn planted_experiment(f: &QuadraticForm, cfg: &ExperimentConfig, rng: &mut Rng) -> Result<PlantedReport> {
    f.validate()?;
    let d = &cfg.densifier;
    // A (1 ± ε/3) estimate inflated by (1 + ε/3) lies in [p, (1+ε)p).
    let third = d.eps / 3.0;
    let est = count_ptf_gaussian(f, third, &PtfCountConfig::default())?;
    if est.estimate == 0.0 {
        return Err(Error::Starved("target region is empty".into()));
    }
    let p_hat = est.estimate * (1.0 + third);
    let dcfg = DensifierConfig { p_hat, ..*d };
    let mut positives = Conditioned::new(f, est.estimate, cfg.rejection_floor, &d.count)?;
    let oracle = |x: &[f64]| f.sign_at(x).unwrap_or(-1);
    let mut report = PlantedReport {
        n: f.n,
        p_hat,
        gamma: dcfg.gamma(),
        mistake_budget: dcfg.mistake_budget,
        terminated: false,
        failure: None,
        mistakes: 0,
        steps: 0,
        coverage: 0.0,
        coverage_ci: 0.0,
        density: 0.0,
        density_ci: 0.0,
        label_noise: 0.0,
        kappa_flip_rate: 0.0,
        g: None,
        transcript: Vec::new(),
    };
    let run = densify(f.n, &mut |r: &mut Rng| positives.draw(r), Some(&oracle), &dcfg, rng);
    let Densified { g, mistakes, steps, g_mass, fed, mislabeled, kappa_flips, transcript, .. } = match run {
        Ok(done) => done,
        Err(fail) if matches!(fail.error, Error::BudgetExhausted { .. }) => {
            report.mistakes = fail.mistakes;
            report.failure = Some(fail.error.to_string());
            report.transcript = fail.transcript;
            return Ok(report);
        }
        Err(fail) => return Err(fail.error),
    };
    report.terminated = true;
    report.transcript = transcript;
    report.mistakes = mistakes;
    report.steps = steps;
    report.label_noise = mislabeled.unwrap_or(0) as f64 / fed.max(1) as f64;
    report.kappa_flip_rate = kappa_flips as f64 / fed.max(1) as f64;

    let m = cfg.validation_samples.max(1);
    let mut covered = 0;
    for _ in 0..m {
        if g.sign_at(&positives.draw(rng)?)? == 1 {
            covered += 1;
        }
    }
    (report.coverage, report.coverage_ci) = fraction(covered, m);

    let mut from_g = Conditioned::new(&g, g_mass, cfg.rejection_floor, &d.count)?;
    let mut inside = 0;
    for _ in 0..m {
        if f.sign_at(&from_g.draw(rng)?)? == 1 {
            inside += 1;
        }
    }
    (report.density, report.density_ci) = fraction(inside, m);
    report.g = Some(g);
    Ok(report)
}
