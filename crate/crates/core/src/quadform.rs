//! Degree-2 polynomials, their threshold functions, and the decoupled
//! canonical form `Σ λᵢyᵢ² + μᵢyᵢ ≤ θ` used by the counter and sampler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::compensated::Dot2;
use crate::numerics::eigen::{asymmetry, identity, jacobi_eigen, Matrix};

/// `p(x) = xᵀAx + bᵀx + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: f64,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

impl QuadraticForm {
    pub fn new(a: Matrix, b: Vec<f64>, c: f64) -> Result<Self> {
        let q = QuadraticForm { n: b.len(), a, b, c };
        q.validate()?;
        Ok(q)
    }

    /// The constant polynomial `c` in dimension `n`.
    pub fn constant(n: usize, c: f64) -> Self {
        QuadraticForm { n, a: vec![vec![0.0; n]; n], b: vec![0.0; n], c }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        check_dim(self.n, self.b.len())?;
        check_dim(self.n, self.a.len())?;
        let dev = asymmetry(&self.a).ok_or(Error::DimensionMismatch {
            expected: self.n,
            got: self.a.iter().map(Vec::len).find(|&l| l != self.n).unwrap_or(0),
        })?;
        let scale = self.a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if dev > 1e-12 * scale {
            return Err(Error::Asymmetric { deviation: dev });
        }
        let finite = self.a.iter().flatten().chain(&self.b).chain([&self.c]).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// `p(x)`, accumulated in compensated arithmetic so large cancelling
    /// terms do not swamp the result.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.n, x.len())?;
        let mut acc = Dot2::new();
        for (i, row) in self.a.iter().enumerate() {
            for (j, &aij) in row.iter().enumerate() {
                if aij == 0.0 {
                    continue;
                }
                let p = x[i] * x[j];
                let e = x[i].mul_add(x[j], -p);
                acc.add_product(aij, p);
                acc.add_product(aij, e);
            }
        }
        for (bi, xi) in self.b.iter().zip(x) {
            acc.add_product(*bi, *xi);
        }
        acc.add(self.c);
        Ok(acc.value())
    }

    /// `+1` iff `p(x) ≥ 0` (zero counts as positive).
    pub fn sign_at(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.evaluate(x)? >= 0.0 { 1 } else { -1 })
    }

    /// Rotates into eigen-coordinates so the quadratic separates.
    pub fn decouple(&self) -> Result<DecoupledConstraint> {
        self.validate()?;
        let eig = jacobi_eigen(&self.a)?;
        let r = eig.vectors;
        let lambda = eig.values.iter().map(|v| -v).collect();
        let mu = (0..self.n)
            .map(|k| -(0..self.n).map(|i| r[i][k] * self.b[i]).sum::<f64>())
            .collect();
        Ok(DecoupledConstraint { lambda, mu, theta: self.c, rotation: r, normalized: false })
    }
}

/// `{Ry : Σ λᵢyᵢ² + μᵢyᵢ ≤ θ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoupledConstraint {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub theta: f64,
    /// Orthonormal; column `k` is the original-space direction of `yₖ`.
    pub rotation: Matrix,
    pub normalized: bool,
}

impl DecoupledConstraint {
    /// A constraint already in coordinate form (identity rotation).
    pub fn axis_aligned(lambda: Vec<f64>, mu: Vec<f64>, theta: f64) -> Result<Self> {
        check_dim(lambda.len(), mu.len())?;
        if lambda.is_empty() {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let n = lambda.len();
        Ok(DecoupledConstraint { lambda, mu, theta, rotation: identity(n), normalized: false })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `Σ λᵢyᵢ² + μᵢyᵢ` in compensated arithmetic.
    pub fn statistic(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.n(), y.len())?;
        let mut acc = Dot2::new();
        for ((l, m), yi) in self.lambda.iter().zip(&self.mu).zip(y) {
            let sq = yi * yi;
            acc.add_product(*l, sq);
            acc.add_product(*l, yi.mul_add(*yi, -sq));
            acc.add_product(*m, *yi);
        }
        Ok(acc.value())
    }

    pub fn accepts(&self, y: &[f64]) -> Result<bool> {
        Ok(self.statistic(y)? <= self.theta)
    }

    /// `x = R y`.
    pub fn to_original(&self, y: &[f64]) -> Vec<f64> {
        self.rotation.iter().map(|row| row.iter().zip(y).map(|(r, v)| r * v).sum()).collect()
    }

    /// `y = Rᵀ x`.
    pub fn to_decoupled(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|k| (0..n).map(|i| self.rotation[i][k] * x[i]).sum()).collect()
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.lambda.iter().chain(&self.mu).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scales so that `Σ(λᵢ² + μᵢ²) = 1`.
    pub fn normalize(&self) -> Result<Self> {
        let s = self.coefficient_norm();
        if s == 0.0 {
            return Err(Error::ConstantPolynomial { accepts: self.theta >= 0.0 });
        }
        let inv = 1.0 / s;
        Ok(DecoupledConstraint {
            lambda: self.lambda.iter().map(|v| v * inv).collect(),
            mu: self.mu.iter().map(|v| v * inv).collect(),
            theta: self.theta * inv,
            rotation: self.rotation.clone(),
            normalized: true,
        })
    }

    /// Rounds every λᵢ and μᵢ to the nearest multiple of γ. θ is untouched.
    /// Intended for normalized input, where the perturbation is bounded by
    /// `nγ²/2` in squared coefficient norm.
    pub fn round_coefficients(&self, cfg: &RoundingConfig) -> Self {
        let g = cfg.gamma;
        let r = |v: &f64| (v / g).round() * g;
        DecoupledConstraint {
            lambda: self.lambda.iter().map(r).collect(),
            mu: self.mu.iter().map(r).collect(),
            theta: self.theta,
            rotation: self.rotation.clone(),
            normalized: false,
        }
    }

    /// Variance of `Σ λᵢGᵢ² + μᵢGᵢ` under the standard Gaussian: `Σ(2λᵢ² + μᵢ²)`.
    pub fn gaussian_variance(&self) -> f64 {
        self.lambda.iter().zip(&self.mu).map(|(l, m)| 2.0 * l * l + m * m).sum()
    }

    /// Upper bound on the Gaussian probability that this constraint and
    /// `other` disagree, from the relative variance of their difference.
    pub fn perturbation_slack(&self, other: &DecoupledConstraint) -> f64 {
        let diff = DecoupledConstraint {
            lambda: self.lambda.iter().zip(&other.lambda).map(|(a, b)| a - b).collect(),
            mu: self.mu.iter().zip(&other.mu).map(|(a, b)| a - b).collect(),
            theta: 0.0,
            rotation: Vec::new(),
            normalized: false,
        };
        let rel = diff.gaussian_variance() / self.gaussian_variance();
        (4.0 * rel.powf(1.0 / 12.0)).min(1.0)
    }
}

fn is_power_of_two(x: f64) -> bool {
    x > 0.0 && x.is_finite() && x == 2f64.powi(x.log2().round() as i32)
}

/// Coefficient rounding step γ and grid step τ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub gamma: f64,
    pub tau: f64,
}

impl RoundingConfig {
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("tau", tau)] {
            if !(v > 0.0 && v < 1.0) || !is_power_of_two(v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a power of two in (0, 1), got {v}"
                )));
            }
        }
        Ok(RoundingConfig { gamma, tau })
    }
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig { gamma: 2f64.powi(-20), tau: 2f64.powi(-10) }
    }
}

#[derive(Deserialize)]
struct DecoupledFile {
    lambda: Vec<f64>,
    mu: Vec<f64>,
    theta: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InstanceFile {
    Full(QuadraticForm),
    Decoupled { decoupled: DecoupledFile },
}

/// Parses either instance layout into a validated [`QuadraticForm`]. A
/// decoupled instance `Σλy² + μy ≤ θ` becomes `p(x) = −Σλx² − μx + θ`.
pub fn parse_instance(text: &str) -> Result<QuadraticForm> {
    match serde_json::from_str::<InstanceFile>(text)? {
        InstanceFile::Full(q) => {
            q.validate()?;
            Ok(q)
        }
        InstanceFile::Decoupled { decoupled: d } => {
            check_dim(d.lambda.len(), d.mu.len())?;
            let n = d.lambda.len();
            let mut a = vec![vec![0.0; n]; n];
            for (i, l) in d.lambda.iter().enumerate() {
                a[i][i] = -l;
            }
            QuadraticForm::new(a, d.mu.iter().map(|m| -m).collect(), d.theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi2() -> QuadraticForm {
        QuadraticForm::new(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![0.0, 0.0], 2.0).unwrap()
    }

    #[test]
    fn evaluation_and_sign() {
        let q = QuadraticForm::constant(3, 5.0);
        assert_eq!(q.evaluate(&[1.0, -2.0, 7.0]).unwrap(), 5.0);
        let q = QuadraticForm::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0; 2], -2.0).unwrap();
        assert_eq!(q.evaluate(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(q.sign_at(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(QuadraticForm::constant(1, -0.3).sign_at(&[0.0]).unwrap(), -1);
        assert_eq!(QuadraticForm::constant(1, 2.0).sign_at(&[0.0]).unwrap(), 1);
        assert!(q.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn decouple_examples() {
        let d = chi2().decouple().unwrap();
        assert_eq!(d.lambda, vec![1.0, 1.0]);
        assert_eq!(d.mu, vec![0.0, 0.0]);
        assert_eq!(d.theta, 2.0);
        assert_eq!(d.rotation, identity(2));

        let q = QuadraticForm::new(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], vec![0.0; 2], 1.0).unwrap();
        let d = q.decouple().unwrap();
        let mut l = d.lambda.clone();
        l.sort_by(f64::total_cmp);
        assert!((l[0] + 1.0).abs() < 1e-15 && (l[1] - 1.0).abs() < 1e-15);
        assert_eq!(d.theta, 1.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(d.rotation.iter().flatten().all(|v| (v.abs() - h).abs() < 1e-15));

        let q = QuadraticForm::new(vec![vec![0.0]], vec![1.0], 0.0).unwrap();
        let d = q.decouple().unwrap();
        assert_eq!((d.lambda[0], d.mu[0], d.theta), (0.0, -1.0, 0.0));
    }

    #[test]
    fn normalize_and_round() {
        let d = DecoupledConstraint::axis_aligned(vec![3.0, 0.0], vec![4.0, 0.0], 1.0).unwrap();
        let n = d.normalize().unwrap();
        assert!((n.lambda[0] - 0.6).abs() < 1e-15 && (n.mu[0] - 0.8).abs() < 1e-15);
        assert!((n.theta - 0.2).abs() < 1e-15);
        assert_eq!(n.normalize().unwrap().lambda, n.lambda);

        let z = DecoupledConstraint::axis_aligned(vec![0.0], vec![0.0], -1.0).unwrap();
        assert!(matches!(z.normalize(), Err(Error::ConstantPolynomial { accepts: false })));

        let cfg = RoundingConfig::new(0.25, 0.5).unwrap();
        let r = n.round_coefficients(&cfg);
        assert_eq!((r.lambda[0], r.mu[0]), (0.5, 0.75));
        let s: f64 = r.lambda.iter().chain(&r.mu).map(|v| v * v).sum();
        assert!((0.5..=1.5).contains(&s));

        let cfg = RoundingConfig::new(2f64.powi(-10), 0.5).unwrap();
        let on_grid = DecoupledConstraint::axis_aligned(vec![0.5, 0.25], vec![0.125, 0.0], 0.0).unwrap();
        assert_eq!(on_grid.round_coefficients(&cfg).lambda, on_grid.lambda);
        assert!(RoundingConfig::new(0.3, 0.5).is_err());
        assert!(RoundingConfig::new(1.0, 0.5).is_err());
    }

    #[test]
    fn variance_identity() {
        let v = |l: f64, m: f64| {
            DecoupledConstraint::axis_aligned(vec![l], vec![m], 0.0).unwrap().gaussian_variance()
        };
        assert_eq!(v(1.0, 0.0), 2.0);
        assert_eq!(v(0.0, 1.0), 1.0);
        assert_eq!(v(1.0, 1.0), 3.0);
    }

    #[test]
    fn instance_formats() {
        let q = parse_instance(r#"{"n":2,"A":[[-1,0],[0,-1]],"b":[0,0],"c":2}"#).unwrap();
        assert_eq!(q, chi2());
        let q = parse_instance(r#"{"decoupled":{"lambda":[1,1],"mu":[0,0],"theta":2}}"#).unwrap();
        assert_eq!(q, chi2());
        assert!(parse_instance(r#"{"n":2,"A":[[0,1],[2,0]],"b":[0,0],"c":0}"#).is_err());
        assert!(parse_instance(r#"{"n":2,"A":[[0]],"b":[0,0],"c":0}"#).is_err());
        assert!(parse_instance("not json").is_err());
    }
}
