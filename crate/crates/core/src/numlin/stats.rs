//! Chunked two-pass moments and Gram matrices over a [`RowSource`].
//!
//! Resident memory is bounded by one or two row blocks plus the output, never
//! by the number of rows. Sums are accumulated row by row in source order, so
//! results do not depend on the chunk size at all.

use super::matrix::{dot, Matrix, SymMatrix};
use super::source::{chunks, RowSource};
use crate::{Error, Result};

fn read_checked<S: RowSource>(source: &S, start: usize, end: usize) -> Result<Matrix> {
    let block = source.read_block(start, end)?;
    if block.cols() != source.dim() || block.rows() != end - start {
        return Err(Error::Argument(format!(
            "source returned a {}x{} block for rows {start}..{end} of dimension {}",
            block.rows(),
            block.cols(),
            source.dim()
        )));
    }
    Ok(block)
}

/// Column means.
pub fn streaming_mean<S: RowSource>(source: &S, chunk: usize) -> Result<Vec<f64>> {
    let (n, d) = (source.n_rows(), source.dim());
    if n == 0 {
        return Err(Error::Degenerate("mean of zero rows".into()));
    }
    let mut sum = vec![0.0; d];
    for (s, e) in chunks(n, chunk) {
        let block = read_checked(source, s, e)?;
        for row in block.row_iter() {
            for (acc, x) in sum.iter_mut().zip(row) {
                *acc += x;
            }
        }
    }
    Ok(sum.into_iter().map(|v| v / n as f64).collect())
}

/// Mean vector and sample covariance (divisor `n - 1`).
pub fn streaming_mean_cov<S: RowSource>(source: &S, chunk: usize) -> Result<(Vec<f64>, SymMatrix)> {
    let n = source.n_rows();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "covariance needs at least 2 rows, got {n}"
        )));
    }
    let mean = streaming_mean(source, chunk)?;
    let d = mean.len();
    let mut acc = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for (s, e) in chunks(n, chunk) {
        let block = read_checked(source, s, e)?;
        for row in block.row_iter() {
            for ((c, x), m) in centered.iter_mut().zip(row).zip(&mean) {
                *c = x - m;
            }
            accumulate_lower_outer(&mut acc, &centered);
        }
    }
    Ok((mean, SymMatrix::from_lower_accumulator(d, &acc, 1.0 / (n - 1) as f64)))
}

/// `acc[i*d + j] += x_i x_j` for `j <= i`.
pub(crate) fn accumulate_lower_outer(acc: &mut [f64], x: &[f64]) {
    let d = x.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &mut acc[i * d..i * d + i + 1];
        for (a, &xj) in row.iter_mut().zip(&x[..=i]) {
            *a += xi * xj;
        }
    }
}

/// Trace of the sample covariance, i.e. the total variance, without forming
/// the `d x d` matrix.
pub fn total_variance<S: RowSource>(source: &S, mean: &[f64], chunk: usize) -> Result<f64> {
    let n = source.n_rows();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "variance needs at least 2 rows, got {n}"
        )));
    }
    check_mean(source, mean)?;
    let mut ss = 0.0;
    for (s, e) in chunks(n, chunk) {
        let block = read_checked(source, s, e)?;
        for row in block.row_iter() {
            ss += row.iter().zip(mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>();
        }
    }
    Ok(ss / (n - 1) as f64)
}

fn check_mean<S: RowSource>(source: &S, mean: &[f64]) -> Result<()> {
    if mean.len() != source.dim() {
        return Err(Error::Argument(format!(
            "mean has length {}, rows have dimension {}",
            mean.len(),
            source.dim()
        )));
    }
    Ok(())
}

fn centered_block<S: RowSource>(source: &S, mean: &[f64], start: usize, end: usize) -> Result<Matrix> {
    let mut block = read_checked(source, start, end)?;
    for i in 0..block.rows() {
        for (x, m) in block.row_mut(i).iter_mut().zip(mean) {
            *x -= m;
        }
    }
    Ok(block)
}

/// `G(i, j) = (x_i - μ)·(x_j - μ)`, built block pair by block pair so only
/// two chunks of rows are resident at once.
pub fn gram_matrix<S: RowSource>(source: &S, mean: &[f64], chunk: usize) -> Result<SymMatrix> {
    check_mean(source, mean)?;
    let n = source.n_rows();
    if n == 0 {
        return Err(Error::Degenerate("Gram matrix of zero rows".into()));
    }
    let mut g = Matrix::zeros(n, n);
    let bounds: Vec<_> = chunks(n, chunk).collect();
    for (bi, &(si, ei)) in bounds.iter().enumerate() {
        let a = centered_block(source, mean, si, ei)?;
        for &(sj, ej) in &bounds[bi..] {
            let b = if sj == si {
                None
            } else {
                Some(centered_block(source, mean, sj, ej)?)
            };
            let b = b.as_ref().unwrap_or(&a);
            for i in si..ei {
                let xi = a.row(i - si);
                let j_end = if sj == si { i + 1 } else { ej };
                for j in sj..j_end {
                    let v = dot(xi, b.row(j - sj));
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
        }
    }
    SymMatrix::from_full(g)
}
