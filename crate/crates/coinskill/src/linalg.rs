//! Dense symmetric matrices and a cyclic Jacobi eigensolver.
//!
//! The matrices here are small (one row per worker), so a dependency-free
//! dense solver is adequate: cyclic Jacobi sweeps until the off-diagonal
//! Frobenius mass drops below `1e-14 * ||M||_F`.

use crate::error::{Error, Result};

/// Row-major dense square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.frobenius_norm());
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let v = self.get(i, j);
                    acc += v * v;
                }
            }
        }
        acc.sqrt()
    }
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &SquareMatrix) -> Result<Vec<f64>> {
    if !m.is_symmetric() {
        return Err(Error::Parameter(
            "eigensolver requires a symmetric matrix".into(),
        ));
    }
    let n = m.dim();
    if n == 0 {
        return Ok(vec![]);
    }
    let mut a = m.clone();
    let stop = 1e-14 * a.frobenius_norm().max(f64::MIN_POSITIVE);
    // A symmetric n x n matrix diagonalizes in O(n^2 log(1/eps)) rotations;
    // the sweep cap is a safety net, not an expected exit.
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        if a.off_diagonal_norm() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Rotation angle from the standard Jacobi formulas.
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(m: &SquareMatrix) -> Result<f64> {
    let eigs = symmetric_eigenvalues(m)?;
    eigs.first()
        .copied()
        .ok_or_else(|| Error::Parameter("empty matrix".into()))
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
pub fn spectral_norm_sym(m: &SquareMatrix) -> Result<f64> {
    let eigs = symmetric_eigenvalues(m)?;
    Ok(eigs.iter().fold(0.0f64, |acc, e| acc.max(e.abs())))
}
