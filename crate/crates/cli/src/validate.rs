//! Release gate over the shipped corpus. Each check prints one JSON line;
//! any failure exits with code 5.

use serde_json::{json, Value};

use quadgauss::counter::{count_ptf_gaussian, mc_count, PtfCountConfig};
use quadgauss::hardness::validate::{deg2_vertex_mismatches, deg4_vertex_mismatches, sweep_deg2, sweep_deg4};
use quadgauss::hardness::{gen_deg2_cube_instance, gen_deg4_gauss_instance, solutions, SubsetSumInstance, Variant};
use quadgauss::numerics::{std_normal_cdf, Rng};
use quadgauss::quadform::parse_instance;
use quadgauss::Result;

use crate::commands::{Failure, Outcome};
use crate::Global;

const CORPUS: &[(&str, &str)] = &[
    ("chi2", include_str!("../corpus/chi2.json")),
    ("chi1", include_str!("../corpus/chi1.json")),
    ("constant_positive", include_str!("../corpus/constant_positive.json")),
    ("halfspace", include_str!("../corpus/halfspace.json")),
    ("decoupled", include_str!("../corpus/decoupled.json")),
    ("cube01_small", include_str!("../corpus/cube01_small.json")),
    ("cube01_symmetric", include_str!("../corpus/cube01_symmetric.json")),
    ("pm1_small", include_str!("../corpus/pm1_small.json")),
    ("pm1_unsatisfiable", include_str!("../corpus/pm1_unsatisfiable.json")),
];

const COUNT_EPS: f64 = 0.02;
const MC_SAMPLES: usize = 200_000;
const SWEEP_POINTS: usize = 3_000;

/// Closed-form Gaussian masses for the corpus polynomials that have one.
fn closed_form(name: &str) -> Option<f64> {
    match name {
        "chi2" => Some(1.0 - (-1.0f64).exp()),
        "chi1" => Some(2.0 * std_normal_cdf(-1.0)),
        "constant_positive" => Some(1.0),
        "halfspace" => Some(std_normal_cdf(-1.0)),
        _ => None,
    }
}

fn check_form(name: &str, text: &str, rng: &mut Rng) -> Result<(bool, Value)> {
    let q = parse_instance(text)?;
    let cfg = PtfCountConfig { trunc: Some(6.0), ..PtfCountConfig::default() };
    let res = count_ptf_gaussian(&q, COUNT_EPS, &cfg)?;
    let (reference, tolerance, source) = match closed_form(name) {
        Some(p) => (p, 1.5 * COUNT_EPS * p, "closed_form"),
        None => {
            let (p, ci) = mc_count(&q, MC_SAMPLES, rng)?;
            (p, 1.5 * COUNT_EPS * p + ci, "monte_carlo")
        }
    };
    let pass = !res.below_floor && (res.estimate - reference).abs() <= tolerance;
    Ok((pass, json!({ "estimate": res.estimate, "reference": reference, "source": source })))
}

fn check_hardness(text: &str, rng: &mut Rng) -> Result<(bool, Value)> {
    let inst = SubsetSumInstance::from_json(text)?;
    let sols = solutions(&inst)?;
    let found = sols.iter().all(|z| inst.is_solution(z));
    let (vertex_bad, sweep, residual) = match inst.variant {
        Variant::Cube01 => {
            let ptf = gen_deg2_cube_instance(&inst)?;
            let (alpha, _) = ptf.radii()?;
            // α solves λ·α(1 − α) = 1/2.
            let residual = (ptf.lambda * alpha * (1.0 - alpha) - 0.5).abs();
            (deg2_vertex_mismatches(&ptf)?, sweep_deg2(&ptf, SWEEP_POINTS, rng)?, residual)
        }
        Variant::Pm1 => {
            let (q, alpha, _) = gen_deg4_gauss_instance(&inst)?;
            // α solves λ·(4α(1 − α))² = 2.
            let residual = (q.lambda * (4.0 * alpha * (1.0 - alpha)).powi(2) - 2.0).abs();
            (deg4_vertex_mismatches(&q)?, sweep_deg4(&q, SWEEP_POINTS, rng)?, residual)
        }
    };
    let pass = found && vertex_bad == 0 && sweep.counterexamples == 0 && residual <= 1e-9;
    Ok((
        pass,
        json!({
            "solutions": sols,
            "vertex_mismatches": vertex_bad,
            "sweep": sweep,
            "alpha_residual": residual,
        }),
    ))
}

pub fn run(g: &Global) -> Outcome {
    let rng = Rng::new(g.seed);
    let mut failures = 0;
    for (i, (name, text)) in CORPUS.iter().enumerate() {
        let mut sub = rng.split(i as u64);
        let outcome = if text.contains("\"variant\"") { check_hardness(text, &mut sub) } else { check_form(name, text, &mut sub) };
        let line = match outcome {
            Ok((pass, detail)) => {
                failures += usize::from(!pass);
                json!({ "check": name, "pass": pass, "detail": detail })
            }
            Err(e) => {
                failures += 1;
                json!({ "check": name, "pass": false, "error": e.to_string() })
            }
        };
        println!("{line}");
    }
    if failures > 0 {
        return Err(Failure::new(5, format!("{failures} corpus check(s) failed")));
    }
    Ok(())
}
