use std::collections::HashMap;

use quadgauss::counter::exact_conditional_pmf;
use quadgauss::grid::GridSpec;
use quadgauss::numerics::normal::{interval_mass, pdf};
use quadgauss::numerics::Rng;
use quadgauss::quadform::{DecoupledConstraint, QuadraticForm, RoundingConfig};
use quadgauss::sampler::{
    enumerate_sampler_distribution, enumerate_sampler_distribution_with, lift_to_continuous, sample_grid_point,
    GeneralOracle, PtfSampleConfig, PtfSampler, SamplerConfig,
};

fn random_instance(n: usize, rng: &mut Rng) -> DecoupledConstraint {
    let lambda: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let mu: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let d = DecoupledConstraint::axis_aligned(lambda, mu, 0.0).unwrap().normalize().unwrap();
    let mut r = d.round_coefficients(&RoundingConfig::new(2f64.powi(-20), 0.5).unwrap());
    let mean: f64 = r.lambda.iter().sum();
    r.theta = mean + (3.0 * rng.uniform() - 1.0) * r.gaussian_variance().sqrt();
    r
}

#[test]
fn tv_and_per_leaf_ratio() {
    let mut rng = Rng::new(404);
    for i in 0..10 {
        let n = 1 + i % 2;
        let spec = if n == 1 { GridSpec::new(2f64.powi(-6), 4.0, 1) } else { GridSpec::new(0.125, 3.0, 2) }.unwrap();
        let dc = random_instance(n, &mut rng);
        for eps in [0.1, 0.05] {
            let cfg = SamplerConfig::new(eps, &spec).unwrap();
            let leaves = enumerate_sampler_distribution(&dc, &spec, &cfg).unwrap();
            let (exact, _) = exact_conditional_pmf(&dc, &spec, &spec.full_box()).unwrap();
            let truth: HashMap<Vec<usize>, f64> = exact.into_iter().collect();
            let total: f64 = leaves.iter().map(|l| l.prob).sum();
            assert!((total - 1.0).abs() <= 1e-10);
            let mut tv = 0.0;
            for leaf in &leaves {
                let t = *truth.get(&leaf.point).expect("sampler produced a rejected point");
                tv += (leaf.prob - t).abs();
                let bound = 2.0 * cfg.delta * leaf.depth as f64;
                let ratio = leaf.prob / t;
                assert!(ratio >= 1.0 - bound && ratio <= 1.0 + bound, "ratio {ratio} depth {}", leaf.depth);
                assert!(leaf.depth <= cfg.max_depth);
            }
            let missing: f64 = truth.iter().filter(|(k, _)| !leaves.iter().any(|l| &l.point == *k)).map(|e| e.1).sum();
            tv = 0.5 * (tv + missing);
            assert!(tv <= eps, "tv {tv}");
        }
    }
}

#[test]
fn suffix_oracle_agrees_with_general_counter() {
    let mut rng = Rng::new(17);
    for _ in 0..5 {
        let spec = GridSpec::new(0.25, 2.0, 3).unwrap();
        let dc = random_instance(3, &mut rng);
        let cfg = SamplerConfig::new(0.1, &spec).unwrap();
        let fast = enumerate_sampler_distribution(&dc, &spec, &cfg).unwrap();
        let mut general = GeneralOracle::new(&dc, &spec, cfg.delta);
        let slow = enumerate_sampler_distribution_with(&spec, &cfg, &mut general).unwrap();
        assert_eq!(fast.len(), slow.len());
        for (a, b) in fast.iter().zip(&slow) {
            assert_eq!(a.point, b.point);
            let bound = 2.0 * cfg.delta * a.depth as f64;
            assert!((a.prob / b.prob - 1.0).abs() <= 2.0 * bound + 1e-12);
        }
    }
}

#[test]
fn symmetric_instance_is_swap_invariant() {
    let spec = GridSpec::new(0.25, 2.0, 2).unwrap();
    let dc = DecoupledConstraint::axis_aligned(vec![1.0, 1.0], vec![0.0, 0.0], 1.5).unwrap();
    let cfg = SamplerConfig::new(0.05, &spec).unwrap();
    let leaves = enumerate_sampler_distribution(&dc, &spec, &cfg).unwrap();
    let map: HashMap<Vec<usize>, f64> = leaves.iter().map(|l| (l.point.clone(), l.prob)).collect();
    let (exact, _) = exact_conditional_pmf(&dc, &spec, &spec.full_box()).unwrap();
    let truth: HashMap<Vec<usize>, f64> = exact.into_iter().collect();
    for (k, p) in &map {
        assert!((p - map[&vec![k[1], k[0]]]).abs() <= 1e-9);
    }
    let tv: f64 = 0.5 * map.iter().map(|(k, p)| (p - truth[k]).abs()).sum::<f64>();
    assert!(tv <= 0.05);
}

#[test]
fn samples_are_members_and_reproducible() {
    let mut rng = Rng::new(3);
    let spec = GridSpec::new(2f64.powi(-5), 3.0, 3).unwrap();
    let dc = random_instance(3, &mut rng);
    let cfg = SamplerConfig::new(0.05, &spec).unwrap();
    let draw = |seed| {
        let mut r = Rng::new(seed);
        (0..200).map(|_| sample_grid_point(&dc, &spec, &cfg, &mut r).unwrap()).collect::<Vec<_>>()
    };
    let a = draw(1);
    assert_eq!(a, draw(1));
    assert_ne!(a, draw(2));
    for k in a {
        let pt: Vec<f64> = k.iter().map(|&i| spec.point(i)).collect();
        assert!(dc.accepts(&pt).unwrap());
    }
}

#[test]
fn lift_matches_truncated_means() {
    let spec = GridSpec::new(0.5, 2.0, 1).unwrap();
    let mut rng = Rng::new(21);
    for k in [0usize, 3, 4, 8] {
        let (a, b) = (spec.cell_lower(k), spec.cell_upper(k));
        let mass = interval_mass(a, b).unwrap();
        let mean = (pdf(a) - pdf(b)) / mass;
        let m = 100_000;
        let xs: Vec<f64> = (0..m).map(|_| lift_to_continuous(&[k], &spec, &mut rng).unwrap()[0]).collect();
        let avg = xs.iter().sum::<f64>() / m as f64;
        let var = xs.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / (m - 1) as f64;
        assert!((avg - mean).abs() <= 3.0 * (var / m as f64).sqrt() + 1e-12, "k={k}");
        assert!(xs.iter().all(|&x| a <= x && x < b));
    }
}

#[test]
fn exact_filter_postcondition() {
    let q = QuadraticForm::new(vec![vec![-1.0, 0.5], vec![0.5, -1.0]], vec![0.3, 0.0], 1.0).unwrap();
    let opts = PtfSampleConfig { exact_filter: true, ..Default::default() };
    let mut s = PtfSampler::new(&q, 0.1, &opts).unwrap();
    let mut rng = Rng::new(8);
    for _ in 0..500 {
        let p = s.sample(&mut rng).unwrap();
        assert!(p.filtered && q.sign_at(&p.x).unwrap() == 1);
    }
}
