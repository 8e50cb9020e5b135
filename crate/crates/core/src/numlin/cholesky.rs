use super::matrix::{Matrix, SymMatrix};
use crate::{Error, Result};

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: Matrix,
}

pub fn cholesky(a: &SymMatrix) -> Result<Cholesky> {
    let n = a.dim();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        // also catches NaN
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(Cholesky { l })
}

impl Cholesky {
    /// Wraps an existing factor. The strict upper triangle must be zero and
    /// the diagonal strictly positive.
    pub fn from_factor(l: Matrix) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::Argument("Cholesky factor must be square".into()));
        }
        for i in 0..l.rows() {
            if !(l[(i, i)] > 0.0) || !l[(i, i)].is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i });
            }
            if (i + 1..l.cols()).any(|j| l[(i, j)] != 0.0) {
                return Err(Error::Argument(format!(
                    "Cholesky factor has nonzero entries above the diagonal in row {i}"
                )));
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut v = y[i];
            for k in 0..i {
                v -= row[k] * y[k];
            }
            y[i] = v / row[i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(y.len(), n);
        let mut x = y.to_vec();
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in i + 1..n {
                v -= self.l[(k, i)] * x[k];
            }
            x[i] = v / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹ M`, applied column-wise through row operations.
    pub(crate) fn solve_lower_matrix(&self, m: &Matrix) -> Matrix {
        let n = self.dim();
        assert_eq!(m.rows(), n);
        let mut x = m.clone();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                if lik == 0.0 {
                    continue;
                }
                sub_scaled_row(&mut x, k, i, lik);
            }
            let lii = self.l[(i, i)];
            for v in x.row_mut(i) {
                *v /= lii;
            }
        }
        x
    }

    /// `L⁻ᵀ M`, applied column-wise through row operations.
    pub(crate) fn solve_upper_matrix(&self, m: &Matrix) -> Matrix {
        let n = self.dim();
        assert_eq!(m.rows(), n);
        let mut x = m.clone();
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = self.l[(k, i)];
                if lki == 0.0 {
                    continue;
                }
                sub_scaled_row(&mut x, k, i, lki);
            }
            let lii = self.l[(i, i)];
            for v in x.row_mut(i) {
                *v /= lii;
            }
        }
        x
    }
}

/// `row[dst] -= alpha * row[src]` for `src != dst`.
fn sub_scaled_row(x: &mut Matrix, src: usize, dst: usize, alpha: f64) {
    let cols = x.cols();
    let data = x.as_mut_slice();
    let (s, d) = if src < dst {
        let (lo, hi) = data.split_at_mut(dst * cols);
        (&lo[src * cols..(src + 1) * cols], &mut hi[..cols])
    } else {
        let (lo, hi) = data.split_at_mut(src * cols);
        (&hi[..cols], &mut lo[dst * cols..(dst + 1) * cols])
    };
    for (xd, xs) in d.iter_mut().zip(s) {
        *xd -= alpha * xs;
    }
}
