//! Cyclic Jacobi eigendecomposition of small dense symmetric matrices.

use crate::error::{Error, Result};

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

/// `A = R·diag(values)·Rᵀ`; column `k` of `vectors` is the eigenvector of
/// `values[k]`. Values are sorted descending.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Largest |A_ij − A_ji|, or `None` if `a` is not square.
pub fn asymmetry(a: &Matrix) -> Option<f64> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            dev = dev.max((a[i][j] - a[j][i]).abs());
        }
    }
    Some(dev)
}

pub fn jacobi_eigen(a: &Matrix) -> Result<SymEigen> {
    let n = a.len();
    let dev = asymmetry(a).ok_or(Error::DimensionMismatch {
        expected: n,
        got: a.iter().map(Vec::len).find(|&l| l != n).unwrap_or(n),
    })?;
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    if dev > 1e-12 * scale || a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Asymmetric { deviation: dev });
    }

    let mut m: Matrix = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect())
        .collect();
    let mut v = identity(n);
    let frob2: f64 = m.iter().flatten().map(|x| x * x).sum();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off <= 1e-32 * frob2 || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for row in m.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p][k], m[q][k]);
                    m[p][k] = c * pk - s * qk;
                    m[q][k] = s * pk + c * qk;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&k| m[k][k]).collect();
    let vectors = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    Ok(SymEigen { values, vectors })
}
