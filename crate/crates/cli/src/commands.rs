use std::fmt::Write as _;
use std::fs;

use serde::Serialize;
use serde_json::json;

use quadgauss::counter::{count_ptf_gaussian, PtfCountConfig};
use quadgauss::densifier::{planted_experiment, transcript_jsonl, DensifierConfig, ExperimentConfig, LearnerKind};
use quadgauss::hardness::{gen_deg2_cube_instance, gen_deg4_gauss_instance, solutions, SubsetSumInstance, Variant};
use quadgauss::numerics::Rng;
use quadgauss::quadform::{parse_instance, QuadraticForm};
use quadgauss::sampler::{PtfSampleConfig, PtfSampler};
use quadgauss::Error;

use crate::{DensifyArgs, GenArgs, Global, LearnerArg, VariantArg};

pub const DEFAULT_EPS: f64 = 0.05;
pub const DEFAULT_DENSIFY_EPS: f64 = 0.1;
const FILTER_RETRIES: usize = 100;

/// A failed command: the process exit code and a diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BelowFloor { .. } | Error::AllBranchesZero { .. } => 2,
            Error::FilterExhausted { .. } => 3,
            Error::BudgetExhausted { .. } => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

pub type Outcome = Result<(), Failure>;

pub fn count_config(g: &Global) -> PtfCountConfig {
    PtfCountConfig { tau: g.tau, trunc: g.trunc_b, gamma: g.gamma, floor: None }
}

fn read_instance_text(g: &Global) -> Result<String, Failure> {
    let path = g.instance.as_ref().ok_or_else(|| Failure::new(1, "--instance PATH is required"))?;
    fs::read_to_string(path).map_err(|e| Failure::new(1, format!("cannot read {}: {e}", path.display())))
}

fn read_form(g: &Global) -> Result<QuadraticForm, Failure> {
    Ok(parse_instance(&read_instance_text(g)?)?)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("report types serialize")
}

pub fn count(g: &Global) -> Outcome {
    let q = read_form(g)?;
    let res = count_ptf_gaussian(&q, g.eps.unwrap_or(DEFAULT_EPS), &count_config(g))?;
    println!("{}", to_json(&res));
    if res.below_floor {
        return Err(Failure::new(2, format!("estimate {:e} is below the counting floor", res.estimate)));
    }
    Ok(())
}

pub fn sample(g: &Global) -> Outcome {
    let q = read_form(g)?;
    if g.samples == 0 {
        return Ok(());
    }
    let opts = PtfSampleConfig { count: count_config(g), exact_filter: g.filter, max_retries: FILTER_RETRIES };
    let mut sampler = PtfSampler::new(&q, g.eps.unwrap_or(DEFAULT_EPS), &opts)?;
    let mut rng = Rng::new(g.seed);
    let mut points = Vec::with_capacity(g.samples);
    for _ in 0..g.samples {
        points.push(sampler.sample(&mut rng)?.x);
    }
    if g.json {
        println!("{}", to_json(&json!({ "samples": points })));
    } else {
        let mut out = String::new();
        for x in &points {
            let line: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(" ")).expect("writing to a String");
        }
        print!("{out}");
    }
    Ok(())
}

fn subset_sum_instance(g: &Global, args: &GenArgs) -> Result<SubsetSumInstance, Failure> {
    if g.instance.is_some() {
        return Ok(SubsetSumInstance::from_json(&read_instance_text(g)?)?);
    }
    let variant = match args.variant {
        Some(VariantArg::Cube01) => Variant::Cube01,
        Some(VariantArg::Pm1) => Variant::Pm1,
        None => return Err(Failure::new(1, "--variant is required without --instance")),
    };
    let w0 = args.w0.ok_or_else(|| Failure::new(1, "--w0 is required without --instance"))?;
    Ok(SubsetSumInstance::new(variant, w0, args.w.clone(), args.c)?)
}

pub fn geninstance(g: &Global, args: &GenArgs) -> Outcome {
    let inst = subset_sum_instance(g, args)?;
    let sols = solutions(&inst)?;
    let report = match inst.variant {
        Variant::Cube01 => {
            let ptf = gen_deg2_cube_instance(&inst)?;
            let (alpha, beta) = ptf.radii()?;
            json!({
                "instance": inst,
                "lambda": ptf.lambda,
                "alpha": alpha,
                "beta": beta,
                "solutions": sols,
                "polynomial": ptf.polynomial(),
                "threshold_form": ptf.threshold_form(),
            })
        }
        Variant::Pm1 => {
            let (q, alpha, beta) = gen_deg4_gauss_instance(&inst)?;
            json!({
                "instance": inst,
                "lambda": q.lambda,
                "alpha": alpha,
                "beta": beta,
                "solutions": sols,
            })
        }
    };
    println!("{}", to_json(&report));
    Ok(())
}

pub fn densify(g: &Global, args: &DensifyArgs) -> Outcome {
    let f = read_form(g)?;
    let densifier = DensifierConfig {
        eps: g.eps.unwrap_or(DEFAULT_DENSIFY_EPS),
        delta: args.delta,
        gamma: args.density_gamma,
        mistake_budget: args.budget,
        learner: match args.learner {
            LearnerArg::Ellipsoid => LearnerKind::Ellipsoid,
            LearnerArg::Perceptron => LearnerKind::Perceptron,
        },
        count: count_config(g),
        ..DensifierConfig::default()
    };
    let cfg = ExperimentConfig { densifier, validation_samples: args.validation_samples, ..ExperimentConfig::default() };
    let mut rng = Rng::new(g.seed);
    let report = planted_experiment(&f, &cfg, &mut rng)?;
    if let Some(path) = &args.transcript {
        fs::write(path, transcript_jsonl(&report.transcript))
            .map_err(|e| Failure::new(1, format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{}", to_json(&report));
    if !report.terminated {
        let why = report.failure.clone().unwrap_or_default();
        return Err(Failure::new(4, format!("{why} after {} mistakes", report.mistakes)));
    }
    Ok(())
}
