use proptest::prelude::*;
use quadgauss::hardness::validate::{deg2_vertex_mismatches, deg4_vertex_mismatches, sweep_deg2, sweep_deg4};
use quadgauss::hardness::{
    alpha_beta_deg2, gen_deg2_cube_instance, gen_deg4_gauss_instance, region_mass_mc, sample_region_gauss_deg4,
    sample_region_uniform_deg2, solutions, Measure, SubsetSumInstance, Variant, MAX_REGION_RETRIES,
};
use quadgauss::numerics::Rng;

fn planted(variant: Variant, n: usize, max_w: u64, rng: &mut Rng) -> SubsetSumInstance {
    let w: Vec<u64> = (0..n).map(|_| 1 + rng.below(max_w)).collect();
    let w0 = match variant {
        Variant::Cube01 => w.iter().filter(|_| rng.coin()).sum(),
        Variant::Pm1 => loop {
            let s: i64 = w.iter().map(|&v| if rng.coin() { v as i64 } else { -(v as i64) }).sum();
            if s >= 0 {
                break s as u64;
            }
        },
    };
    SubsetSumInstance::new(variant, w0, w, 4.0).unwrap()
}

#[test]
fn deg2_geometry_on_random_instances() {
    let mut rng = Rng::new(55);
    for i in 0..12 {
        let n = 2 + i % 7;
        let inst = planted(Variant::Cube01, n, 1 << 20, &mut rng);
        let ptf = gen_deg2_cube_instance(&inst).unwrap();
        assert_eq!(deg2_vertex_mismatches(&ptf).unwrap(), 0);
        let rep = sweep_deg2(&ptf, 3000, &mut rng).unwrap();
        assert_eq!(rep.counterexamples, 0, "{inst:?}");
        assert!(rep.predicted > rep.points / 2);
    }
}

#[test]
fn deg4_geometry_on_random_instances() {
    let mut rng = Rng::new(56);
    for i in 0..12 {
        let n = 2 + i % 7;
        let inst = planted(Variant::Pm1, n, 1 << 20, &mut rng);
        let (q, _, _) = gen_deg4_gauss_instance(&inst).unwrap();
        assert_eq!(deg4_vertex_mismatches(&q).unwrap(), 0);
        let rep = sweep_deg4(&q, 3000, &mut rng).unwrap();
        assert_eq!(rep.counterexamples, 0, "{inst:?}");
    }
}

#[test]
fn uniform_region_sampler() {
    let mut rng = Rng::new(57);
    for n in 2..=6 {
        let inst = planted(Variant::Cube01, n, 50, &mut rng);
        let ptf = gen_deg2_cube_instance(&inst).unwrap();
        let (alpha, beta) = ptf.radii().unwrap();
        let z = solutions(&inst).unwrap()[0].clone();
        let draws = 2000;
        let mut proposals = 0;
        for _ in 0..draws {
            let d = sample_region_uniform_deg2(&z, &ptf, MAX_REGION_RETRIES, &mut rng).unwrap();
            proposals += d.proposals;
            assert_eq!(ptf.sign(&d.x).unwrap(), 1);
            let dist: f64 = d.x.iter().zip(&z).map(|(x, &zi)| (x - zi as f64).abs()).sum();
            assert!(dist <= alpha * (1.0 + 1e-12));
        }
        let rate = draws as f64 / proposals as f64;
        assert!(rate >= (beta / alpha).powi(n as i32) / 4.0, "n={n} rate={rate}");
    }
}

#[test]
fn samplers_reject_non_solutions() {
    let inst = SubsetSumInstance::new(Variant::Cube01, 8, vec![3, 5], 4.0).unwrap();
    let ptf = gen_deg2_cube_instance(&inst).unwrap();
    let mut rng = Rng::new(1);
    assert!(sample_region_uniform_deg2(&[1, 0], &ptf, 10, &mut rng).is_err());
    let pm = SubsetSumInstance::new(Variant::Pm1, 2, vec![1, 3], 4.0).unwrap();
    let (q, _, _) = gen_deg4_gauss_instance(&pm).unwrap();
    assert!(sample_region_gauss_deg4(&[1, 1], &q, 10, &mut rng).is_err());
}

#[test]
fn gaussian_region_sampler_and_mass_consistency() {
    let mut rng = Rng::new(58);
    let inst = SubsetSumInstance::new(Variant::Pm1, 3, vec![1, 3, 7], 4.0).unwrap();
    let sols = solutions(&inst).unwrap();
    assert_eq!(sols.len(), 1);
    let z = &sols[0];
    let (q, alpha, _) = gen_deg4_gauss_instance(&inst).unwrap();
    let draws = 5000;
    let mut proposals = 0;
    for _ in 0..draws {
        let d = sample_region_gauss_deg4(z, &q, MAX_REGION_RETRIES, &mut rng).unwrap();
        proposals += d.proposals;
        let dist: f64 = d.x.iter().zip(z).map(|(x, &zi)| (x - zi as f64).powi(2)).sum::<f64>().sqrt();
        assert!(dist <= alpha * (1.0 + 1e-12));
        assert_eq!(q.sign(&d.x).unwrap(), 1);
    }
    let rate = draws as f64 / proposals as f64;
    let via_sampler = rate * q.acceptance_scale().unwrap();
    let sampler_ci = 2.6 * (rate * (1.0 - rate) / proposals as f64).sqrt() * q.acceptance_scale().unwrap();
    let center: Vec<f64> = z.iter().map(|&v| v as f64).collect();
    let (direct, ci) =
        region_mass_mc(|x| q.sign(x).unwrap(), &center, alpha, Measure::Gaussian, 200_000, &mut rng).unwrap();
    assert!((via_sampler - direct).abs() <= sampler_ci + ci, "{via_sampler} vs {direct}");
}

#[test]
fn symmetric_regions_have_comparable_mass() {
    let mut rng = Rng::new(59);
    for n in 2..=6 {
        let inst = SubsetSumInstance::new(Variant::Cube01, (n / 2) as u64, vec![1; n], 4.0).unwrap();
        let ptf = gen_deg2_cube_instance(&inst).unwrap();
        let (alpha, beta) = ptf.radii().unwrap();
        let mut masses = Vec::new();
        for z in solutions(&inst).unwrap() {
            let zf: Vec<f64> = z.iter().map(|&v| v as f64).collect();
            let (m, ci) =
                region_mass_mc(|x| ptf.sign(x).unwrap(), &zf, alpha, Measure::CubeUniform, 4000, &mut rng).unwrap();
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!(m + ci >= beta.powi(n as i32) / fact && m - ci <= alpha.powi(n as i32) / fact);
            masses.push((m - ci, m + ci));
        }
        for a in &masses {
            for b in &masses {
                assert!(a.1 * 2.0 >= b.0, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn unsatisfiable_region_is_empty() {
    let inst = SubsetSumInstance::new(Variant::Cube01, 1, vec![2, 2], 4.0).unwrap();
    let ptf = gen_deg2_cube_instance(&inst).unwrap();
    let (alpha, _) = ptf.radii().unwrap();
    let mut rng = Rng::new(2);
    for z in [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
        let (m, _) = region_mass_mc(|x| ptf.sign(x).unwrap(), &z, alpha, Measure::CubeUniform, 2000, &mut rng).unwrap();
        assert_eq!(m, 0.0);
    }
}

#[test]
fn regions_are_disjoint() {
    let mut rng = Rng::new(60);
    let inst = SubsetSumInstance::new(Variant::Cube01, 2, vec![1; 4], 4.0).unwrap();
    let ptf = gen_deg2_cube_instance(&inst).unwrap();
    let (_, beta) = ptf.radii().unwrap();
    let sols = solutions(&inst).unwrap();
    for z in &sols {
        for _ in 0..200 {
            let d = sample_region_uniform_deg2(z, &ptf, MAX_REGION_RETRIES, &mut rng).unwrap();
            for other in sols.iter().filter(|o| *o != z) {
                let dist: f64 = d.x.iter().zip(other).map(|(x, &o)| (x - o as f64).abs()).sum();
                assert!(dist > beta);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn radii_ordering(w in prop::collection::vec(1u64..1 << 30, 1..10), w0 in 0u64..1000, c in 1.0f64..16.0) {
        let inst = SubsetSumInstance::new(Variant::Cube01, w0, w.clone(), c).unwrap();
        match alpha_beta_deg2(&inst) {
            Ok((a, b)) => prop_assert!(b < a && a < 0.5 && b < 0.25 / inst.norm()),
            Err(_) => prop_assert!(c < 4.0 || c * inst.n() as f64 * inst.norm() <= 2.0),
        }
        let pm = SubsetSumInstance::new(Variant::Pm1, w0, w, c).unwrap();
        match gen_deg4_gauss_instance(&pm) {
            Ok((_, a, b)) => prop_assert!(b < a && a < 0.5 && b < 0.25 / pm.norm()),
            Err(_) => prop_assert!(c < 4.0),
        }
    }
}
