#![allow(dead_code)]

use foodlda::numlin::{Matrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix {
    let m = random_matrix(rng, d, d);
    let mut s = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            s[(i, j)] = m[(i, j)];
            s[(j, i)] = m[(i, j)];
        }
    }
    SymMatrix::from_full(s).unwrap()
}

/// `M Mᵀ + d I`, comfortably positive definite.
pub fn random_spd(rng: &mut ChaCha8Rng, d: usize) -> SymMatrix {
    let m = random_matrix(rng, d, d);
    let mut s = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            s[(i, j)] = (0..d).map(|k| m[(i, k)] * m[(j, k)]).sum::<f64>() + if i == j { d as f64 } else { 0.0 };
        }
    }
    SymMatrix::symmetrize(&s).unwrap()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 1e-300, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| m[i][n + j])
}

pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| a.row(i).iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn naive_mean(x: &Matrix) -> Vec<f64> {
    (0..x.cols())
        .map(|j| (0..x.rows()).map(|i| x[(i, j)]).sum::<f64>() / x.rows() as f64)
        .collect()
}

/// Sample covariance straight from the definition.
pub fn naive_cov(x: &Matrix) -> Matrix {
    let mu = naive_mean(x);
    let n = x.rows();
    Matrix::from_fn(x.cols(), x.cols(), |a, b| {
        (0..n).map(|i| (x[(i, a)] - mu[a]) * (x[(i, b)] - mu[b])).sum::<f64>() / (n - 1) as f64
    })
}

/// Entry-wise closeness up to an overall sign.
pub fn close_up_to_sign(a: &[f64], b: &[f64], tol: f64) -> bool {
    let same = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
    let flip = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= tol);
    same || flip
}

/// Angle between the lines spanned by `a` and `b`.
pub fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let chord = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x / na - sign * y / nb).powi(2))
        .sum::<f64>()
        .sqrt();
    2.0 * (chord / 2.0).asin()
}
