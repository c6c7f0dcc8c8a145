//! Densifier for degree-2 threshold functions under the standard Gaussian.
//!
//! Given positive samples of an unknown `f`, the loop grows an online
//! halfspace learner over the degree-2 feature expansion until its
//! hypothesis `g` covers the positives and `f` occupies at least a `γ/2`
//! fraction of `g`'s Gaussian mass. Uncovered positives are fed as `+1`;
//! otherwise a draw from `N(0,I)` conditioned on `g` is fed as `−1`.

mod experiment;
mod features;
mod learner;

pub use experiment::{planted_experiment, ExperimentConfig, PlantedReport};
pub use features::{feature_dim, feature_map, form_from_weights, weights_from_form};
pub use learner::{make_learner, EllipsoidLearner, LearnerKind, OnlineLearner, PerceptronLearner, ELLIPSOID_RADIUS};

use serde::{Deserialize, Serialize};

use crate::counter::{count_ptf_gaussian, PtfCountConfig};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::quadform::QuadraticForm;
use crate::sampler::{PtfSampleConfig, PtfSampler};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensifierConfig {
    pub eps: f64,
    pub delta: f64,
    /// Target density; `None` means `1/(8M)`.
    pub gamma: Option<f64>,
    /// Positive-sample budget; `None` means `⌈(m² + ln(1/δ))/ε²⌉`.
    pub n_plus: Option<usize>,
    /// Mistake budget `M`.
    pub mistake_budget: usize,
    /// Grid step applied to points before they reach the learner.
    pub kappa: f64,
    /// Estimate of `Pr[f = 1]`, at least the truth and below `(1+ε)` times it.
    pub p_hat: f64,
    pub learner: LearnerKind,
    /// Separation floor `ρ` bounding the learner's total corrections.
    pub margin: f64,
    /// Grid used to count and sample hypotheses.
    pub count: PtfCountConfig,
    /// Cap on loop iterations, mistakes or not; `None` means `20M + 100`.
    pub max_steps: Option<usize>,
}

impl Default for DensifierConfig {
    fn default() -> Self {
        DensifierConfig {
            eps: 0.1,
            delta: 0.1,
            gamma: None,
            n_plus: None,
            mistake_budget: 64,
            kappa: 2f64.powi(-16),
            p_hat: 1.0,
            learner: LearnerKind::Ellipsoid,
            margin: 1e-3,
            count: PtfCountConfig::default(),
            max_steps: None,
        }
    }
}

impl DensifierConfig {
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0 / (8.0 * self.mistake_budget.max(1) as f64))
    }

    /// Minimum positive-sample count for dimension `n`.
    pub fn min_positives(&self, n: usize) -> usize {
        let m = feature_dim(n) as f64;
        ((m * m + (1.0 / self.delta).ln()) / (self.eps * self.eps)).ceil() as usize
    }

    pub fn n_plus(&self, n: usize) -> usize {
        self.n_plus.unwrap_or_else(|| self.min_positives(n))
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps.unwrap_or(20 * self.mistake_budget + 100)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.eps) || !unit(self.delta) {
            return Err(Error::InvalidParameter("eps and delta must lie in (0, 1]".into()));
        }
        let gamma = self.gamma();
        if !(gamma > 0.0 && gamma * 4.0 * self.mistake_budget as f64 <= 1.0) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive and at most 1/(4M)")));
        }
        if self.n_plus(n) < self.min_positives(n) {
            return Err(Error::InvalidParameter(format!(
                "n_plus = {} is below the required {}",
                self.n_plus(n),
                self.min_positives(n)
            )));
        }
        if !(self.kappa > 0.0 && self.p_hat > 0.0 && self.margin > 0.0) {
            return Err(Error::InvalidParameter("kappa, p_hat and margin must be positive".into()));
        }
        Ok(())
    }
}

/// `[x]_κ`: each coordinate rounded to the nearest multiple of `κ`.
pub fn discretize(x: &[f64], kappa: f64) -> Vec<f64> {
    x.iter().map(|v| (v / kappa).round() * kappa).collect()
}

/// One line of the run transcript.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub step: usize,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    /// A positive sample the hypothesis rejected was fed as `+1`.
    PosMistake { x: Vec<f64> },
    /// A draw from the hypothesis was fed as `−1`.
    NegFeed {
        x: Vec<f64>,
        mistake: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        true_label: Option<i8>,
    },
    /// Gaussian mass of the current hypothesis.
    Count { estimate: f64, p_hat: f64, ratio: f64 },
    Terminate { mistakes: usize, ratio: f64 },
}

/// Transcript as JSON lines.
pub fn transcript_jsonl(entries: &[TranscriptEntry]) -> String {
    entries.iter().map(|e| serde_json::to_string(e).expect("transcript entries serialize") + "\n").collect()
}

#[derive(Clone, Debug)]
pub struct Densified {
    /// The returned threshold function `g`.
    pub g: QuadraticForm,
    pub weights: Vec<f64>,
    pub mistakes: usize,
    pub steps: usize,
    /// Estimated `Pr[g = 1]` at termination.
    pub g_mass: f64,
    pub transcript: Vec<TranscriptEntry>,
    /// Examples fed to the learner.
    pub fed: usize,
    /// Fed examples whose label disagreed with the validation oracle.
    pub mislabeled: Option<usize>,
    /// Fed points whose hypothesis sign changed under `κ`-rounding.
    pub kappa_flips: usize,
}

/// A failed run keeps its transcript for diagnosis.
#[derive(Debug)]
pub struct DensifyFailure {
    pub error: Error,
    pub transcript: Vec<TranscriptEntry>,
    pub mistakes: usize,
}

impl From<DensifyFailure> for Error {
    fn from(f: DensifyFailure) -> Error {
        f.error
    }
}

/// Counting and sampling state for one hypothesis.
struct Hypothesis {
    form: QuadraticForm,
    mass: f64,
    sampler: Option<PtfSampler>,
}

struct Run<'a> {
    n: usize,
    cfg: &'a DensifierConfig,
    learner: Box<dyn OnlineLearner>,
    transcript: Vec<TranscriptEntry>,
    fed: usize,
    mislabeled: usize,
    kappa_flips: usize,
}

impl Run<'_> {
    fn hypothesis(&self) -> Result<QuadraticForm> {
        form_from_weights(self.n, self.learner.weights())
    }

    /// Feeds `[x]_κ` with `label`, tracking rounding flips and label noise.
    fn feed(&mut self, x: &[f64], label: i8, oracle: Option<&dyn Fn(&[f64]) -> i8>) -> Result<(bool, Option<i8>)> {
        let h = self.hypothesis()?;
        let xk = discretize(x, self.cfg.kappa);
        if h.sign_at(x)? != h.sign_at(&xk)? {
            self.kappa_flips += 1;
        }
        let truth = oracle.map(|f| f(x));
        if truth.is_some_and(|t| t != label) {
            self.mislabeled += 1;
        }
        self.fed += 1;
        Ok((self.learner.update(&feature_map(&xk), label), truth))
    }
}

/// Runs the densifier loop.
///
/// `positive` draws from `N(0,I)` conditioned on `f = 1`; `oracle`, when
/// given, is the true `f`, used only to measure label noise.
pub fn densify(
    n: usize,
    positive: &mut dyn FnMut(&mut Rng) -> Result<Vec<f64>>,
    oracle: Option<&dyn Fn(&[f64]) -> i8>,
    cfg: &DensifierConfig,
    rng: &mut Rng,
) -> std::result::Result<Densified, DensifyFailure> {
    let mut run = Run {
        n,
        cfg,
        learner: make_learner(cfg.learner, feature_dim(n), cfg.margin),
        transcript: Vec::new(),
        fed: 0,
        mislabeled: 0,
        kappa_flips: 0,
    };
    match densify_inner(&mut run, positive, oracle, rng) {
        Ok((g, steps, g_mass)) => Ok(Densified {
            weights: run.learner.weights().to_vec(),
            g,
            mistakes: run.learner.mistakes(),
            steps,
            g_mass,
            transcript: run.transcript,
            fed: run.fed,
            mislabeled: oracle.map(|_| run.mislabeled),
            kappa_flips: run.kappa_flips,
        }),
        Err(error) => Err(DensifyFailure { error, mistakes: run.learner.mistakes(), transcript: run.transcript }),
    }
}

fn densify_inner(
    run: &mut Run,
    positive: &mut dyn FnMut(&mut Rng) -> Result<Vec<f64>>,
    oracle: Option<&dyn Fn(&[f64]) -> i8>,
    rng: &mut Rng,
) -> Result<(QuadraticForm, usize, f64)> {
    let cfg = run.cfg;
    cfg.validate(run.n)?;
    let budget = cfg.mistake_budget;
    let gamma = cfg.gamma();
    let mut pos = Vec::with_capacity(cfg.n_plus(run.n));
    for _ in 0..cfg.n_plus(run.n) {
        let x = positive(rng)?;
        if x.len() != run.n {
            return Err(Error::DimensionMismatch { expected: run.n, got: x.len() });
        }
        let feat = feature_map(&discretize(&x, cfg.kappa));
        pos.push((x, feat));
    }
    let sample_opts = PtfSampleConfig { count: cfg.count, exact_filter: false, ..Default::default() };
    let mut current: Option<Hypothesis> = None;
    for step in 0..cfg.max_steps() {
        if let Some(i) = pos.iter().position(|(_, v)| run.learner.predict(v) == -1) {
            let x = pos[i].0.clone();
            run.feed(&x, 1, oracle)?;
            run.transcript.push(TranscriptEntry { step, event: Event::PosMistake { x } });
            current = None;
        } else {
            let hyp = match current.as_mut() {
                Some(h) => h,
                None => {
                    let form = run.hypothesis()?;
                    let mass = count_ptf_gaussian(&form, cfg.delta, &cfg.count)?.estimate;
                    let ratio = cfg.p_hat / mass;
                    run.transcript.push(TranscriptEntry {
                        step,
                        event: Event::Count { estimate: mass, p_hat: cfg.p_hat, ratio },
                    });
                    current.insert(Hypothesis { form, mass, sampler: None })
                }
            };
            if cfg.p_hat >= 0.5 * gamma * hyp.mass {
                let ratio = cfg.p_hat / hyp.mass;
                let mistakes = run.learner.mistakes();
                run.transcript.push(TranscriptEntry { step, event: Event::Terminate { mistakes, ratio } });
                return Ok((hyp.form.clone(), step, hyp.mass));
            }
            if hyp.sampler.is_none() {
                hyp.sampler = Some(PtfSampler::new(&hyp.form, cfg.delta, &sample_opts)?);
            }
            let x = hyp.sampler.as_mut().expect("sampler was just built").sample(rng)?.x;
            let (mistake, true_label) = run.feed(&x, -1, oracle)?;
            run.transcript.push(TranscriptEntry { step, event: Event::NegFeed { x, mistake, true_label } });
            if mistake {
                current = None;
            }
        }
        if run.learner.mistakes() > budget {
            return Err(Error::BudgetExhausted { budget });
        }
        check_kappa(run)?;
    }
    Err(Error::BudgetExhausted { budget })
}

/// At most 1% of fed points may change hypothesis sign under rounding.
fn check_kappa(run: &Run) -> Result<()> {
    if run.kappa_flips > 0 && run.kappa_flips as f64 >= 0.01 * run.fed as f64 {
        return Err(Error::InvalidParameter(format!(
            "kappa = {} changed the sign of {} of {} fed points",
            run.cfg.kappa, run.kappa_flips, run.fed
        )));
    }
    Ok(())
}
