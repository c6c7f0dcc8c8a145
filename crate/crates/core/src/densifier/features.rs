//! Degree-2 monomial expansion: a degree-2 threshold function over `Rⁿ` is
//! a halfspace through the origin over `Rᵐ`.

use crate::error::{Error, Result};
use crate::quadform::QuadraticForm;

/// `m = n + n(n+1)/2 + 1`: linear terms, products `xᵢxⱼ` with `i ≤ j`, and
/// a bias.
pub fn feature_dim(n: usize) -> usize {
    n + n * (n + 1) / 2 + 1
}

/// `(x₁,…,xₙ, x₁², x₁x₂, …, x₁xₙ, x₂², …, xₙ², 1)`.
pub fn feature_map(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut v = Vec::with_capacity(feature_dim(n));
    v.extend_from_slice(x);
    for i in 0..n {
        for j in i..n {
            v.push(x[i] * x[j]);
        }
    }
    v.push(1.0);
    v
}

/// The polynomial `v·feature_map(x)`.
pub fn form_from_weights(n: usize, v: &[f64]) -> Result<QuadraticForm> {
    if v.len() != feature_dim(n) {
        return Err(Error::DimensionMismatch { expected: feature_dim(n), got: v.len() });
    }
    let mut a = vec![vec![0.0; n]; n];
    let mut k = n;
    for i in 0..n {
        for j in i..n {
            if i == j {
                a[i][i] = v[k];
            } else {
                a[i][j] = 0.5 * v[k];
                a[j][i] = 0.5 * v[k];
            }
            k += 1;
        }
    }
    QuadraticForm::new(a, v[..n].to_vec(), v[k])
}

/// Inverse of [`form_from_weights`].
pub fn weights_from_form(q: &QuadraticForm) -> Vec<f64> {
    let n = q.n;
    let mut v = Vec::with_capacity(feature_dim(n));
    v.extend_from_slice(&q.b);
    for i in 0..n {
        for j in i..n {
            v.push(if i == j { q.a[i][i] } else { q.a[i][j] + q.a[j][i] });
        }
    }
    v.push(q.c);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(feature_map(&[2.0]), vec![2.0, 4.0, 1.0]);
        assert_eq!(feature_map(&[0.0, 0.0]), vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(feature_map(&[1.0, 2.0, 3.0]).len(), feature_dim(3));
        assert_eq!(feature_map(&[1.0, 2.0]), vec![1.0, 2.0, 1.0, 2.0, 4.0, 1.0]);
    }

    #[test]
    fn bijection() {
        let v: Vec<f64> = (0..feature_dim(3)).map(|k| k as f64 - 4.5).collect();
        let q = form_from_weights(3, &v).unwrap();
        assert_eq!(weights_from_form(&q), v);
        assert!(form_from_weights(3, &v[1..]).is_err());
    }
}
