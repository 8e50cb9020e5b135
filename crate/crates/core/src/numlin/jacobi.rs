//! Cyclic Jacobi eigensolver for real symmetric matrices.

use super::matrix::{Matrix, SymMatrix};
use crate::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Relative off-diagonal threshold, scaled by the Frobenius norm of the input.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenpairs sorted by eigenvalue, largest first. Column `i` of
/// `eigenvectors` belongs to `eigenvalues[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// `V diag(λ) Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let d = self.dim();
        let v = &self.eigenvectors;
        Matrix::from_fn(d, d, |i, j| {
            (0..d).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)]).sum()
        })
    }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps run until the largest off-diagonal magnitude drops below
/// `1e-12 * ||A||_F`. Eigenvalues come back in descending order and every
/// eigenvector is signed so that its largest-magnitude entry is nonnegative.
pub fn jacobi_eigh(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Argument("empty matrix".into()));
    }
    let mut m = a.as_matrix().as_slice().to_vec();
    // rows of `vt` are the eigenvectors
    let mut vt = Matrix::identity(n).into_vec();
    let tol = OFF_DIAGONAL_TOL * a.frobenius_norm();

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&m, n);
        if off <= tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, n, p, q, c, s, t, apq);
                rotate_rows(&mut vt, n, p, q, c, s);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&i| m[i * n + i]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = &vt[src * n..(src + 1) * n];
        let sign = sign_of_largest(v);
        for (row, &x) in v.iter().enumerate() {
            eigenvectors[(row, col)] = sign * x;
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `A <- Jᵀ A J` for the rotation in the (p, q) plane, with `a_pq` driven to 0.
#[allow(clippy::too_many_arguments)]
fn rotate(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64, t: f64, apq: f64) {
    m[p * n + p] -= t * apq;
    m[q * n + q] += t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * n + p];
        let akq = m[k * n + q];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        m[k * n + p] = new_kp;
        m[p * n + k] = new_kp;
        m[k * n + q] = new_kq;
        m[q * n + k] = new_kq;
    }
}

fn rotate_rows(vt: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = vt.split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for (vp, vq) in row_p.iter_mut().zip(row_q.iter_mut()) {
        let (a, b) = (*vp, *vq);
        *vp = c * a - s * b;
        *vq = s * a + c * b;
    }
}

fn max_off_diagonal(m: &[f64], n: usize) -> f64 {
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            off = off.max(m[i * n + j].abs());
        }
    }
    off
}

/// +1 or -1 such that the largest-magnitude entry (first on ties) becomes nonnegative.
pub(crate) fn sign_of_largest(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}
