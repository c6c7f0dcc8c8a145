use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use quadgauss::numerics::normal::{interval_mass, std_normal_cdf};
use quadgauss::numerics::{jacobi_eigen, LogProb};

fn frob(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn cdf_symmetry(x in -10.0f64..10.0) {
        prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn cdf_monotone(x in -12.0f64..12.0, d in 0.0f64..1.0) {
        prop_assert!(std_normal_cdf(x) <= std_normal_cdf(x + d));
    }

    #[test]
    fn interval_mass_additive(a in -9.0f64..9.0, w1 in 0.0f64..4.0, w2 in 0.0f64..4.0) {
        let (b, c) = (a + w1, a + w1 + w2);
        let whole = interval_mass(a, c).unwrap();
        let parts = interval_mass(a, b).unwrap() + interval_mass(b, c).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-13);
    }

    #[test]
    fn interval_mass_relative_accuracy(a in 0.0f64..30.0, w in 1e-9f64..3.0) {
        // Reference: narrow-width quadrature and tail differences must agree
        // with a finer split of the same interval.
        let whole = interval_mass(a, a + w).unwrap();
        let half = interval_mass(a, a + w / 2.0).unwrap() + interval_mass(a + w / 2.0, a + w).unwrap();
        if whole > 1e-300 {
            prop_assert!(((whole - half) / whole).abs() <= 1e-12);
        }
    }

    #[test]
    fn jacobi_matches_reference(n in 1usize..=8, seed in any::<u64>()) {
        let mut rng = quadgauss::numerics::Rng::new(seed);
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.standard_normal();
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let e = jacobi_eigen(&a).unwrap();
        let r = &e.vectors;
        let mut recon = vec![vec![0.0; n]; n];
        let mut ortho = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                recon[i][j] = a[i][j] - (0..n).map(|k| r[i][k] * e.values[k] * r[j][k]).sum::<f64>();
                ortho[i][j] = (0..n).map(|k| r[k][i] * r[k][j]).sum::<f64>() - if i == j { 1.0 } else { 0.0 };
            }
        }
        prop_assert!(frob(&recon) <= 1e-10 * frob(&a));
        prop_assert!(frob(&ortho) <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));

        let reference = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| a[i][j]));
        let mut want: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        want.sort_by(|x, y| y.total_cmp(x));
        for (g, w) in e.values.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10 * frob(&a).max(1.0));
        }
    }

    #[test]
    fn logprob_sum_matches_direct(ps in prop::collection::vec(1e-300f64..1.0, 1..200)) {
        let total: f64 = ps.iter().sum();
        let scale = 1.0 / (total * 1.0001);
        let terms: Vec<LogProb> = ps.iter().map(|p| LogProb::from_prob(p * scale)).collect();
        let s: LogProb = terms.iter().copied().sum();
        let pairwise = terms.iter().fold(LogProb::ZERO, |acc, t| acc + *t);
        let want = (total * scale).ln();
        prop_assert!((s.ln() - want).abs() <= 1e-10);
        prop_assert!((pairwise.ln() - want).abs() <= 1e-10);
    }
}
