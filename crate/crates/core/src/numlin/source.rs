use super::matrix::Matrix;
use crate::{Error, Result};

/// Re-readable, row-addressable supply of feature rows.
///
/// Implementors hand out contiguous blocks so that consumers can stream
/// through a dataset with memory proportional to the block size.
pub trait RowSource {
    fn n_rows(&self) -> usize;

    fn dim(&self) -> usize;

    /// Rows `start..end` as an `(end - start) x dim` block.
    fn read_block(&self, start: usize, end: usize) -> Result<Matrix>;
}

impl RowSource for Matrix {
    fn n_rows(&self) -> usize {
        self.rows()
    }

    fn dim(&self) -> usize {
        self.cols()
    }

    fn read_block(&self, start: usize, end: usize) -> Result<Matrix> {
        check_range(start, end, self.rows())?;
        Matrix::from_vec(
            end - start,
            self.cols(),
            self.as_slice()[start * self.cols()..end * self.cols()].to_vec(),
        )
    }
}

impl<S: RowSource + ?Sized> RowSource for &S {
    fn n_rows(&self) -> usize {
        (**self).n_rows()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn read_block(&self, start: usize, end: usize) -> Result<Matrix> {
        (**self).read_block(start, end)
    }
}

pub(crate) fn check_range(start: usize, end: usize, n: usize) -> Result<()> {
    if start > end || end > n {
        return Err(Error::Argument(format!(
            "row range {start}..{end} outside 0..{n}"
        )));
    }
    Ok(())
}

/// A subset of another source's rows, in the given order.
#[derive(Debug, Clone)]
pub struct RowSelection<S> {
    source: S,
    rows: Vec<usize>,
}

impl<S: RowSource> RowSelection<S> {
    pub fn new(source: S, rows: Vec<usize>) -> Result<Self> {
        let n = source.n_rows();
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::Argument(format!("row {bad} outside 0..{n}")));
        }
        Ok(Self { source, rows })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }
}

impl<S: RowSource> RowSource for RowSelection<S> {
    fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn dim(&self) -> usize {
        self.source.dim()
    }

    fn read_block(&self, start: usize, end: usize) -> Result<Matrix> {
        check_range(start, end, self.rows.len())?;
        let d = self.source.dim();
        let wanted = &self.rows[start..end];
        let mut data = Vec::with_capacity(wanted.len() * d);
        // coalesce ascending runs into single reads
        let mut i = 0;
        while i < wanted.len() {
            let mut j = i + 1;
            while j < wanted.len() && wanted[j] == wanted[j - 1] + 1 {
                j += 1;
            }
            let block = self.source.read_block(wanted[i], wanted[j - 1] + 1)?;
            data.extend_from_slice(block.as_slice());
            i = j;
        }
        Matrix::from_vec(wanted.len(), d, data)
    }
}

/// Applies a row-wise map to every block of an inner source.
pub struct MappedRows<S, F> {
    source: S,
    dim: usize,
    map: F,
}

impl<S, F> MappedRows<S, F>
where
    S: RowSource,
    F: Fn(&Matrix) -> Result<Matrix>,
{
    pub fn new(source: S, dim: usize, map: F) -> Self {
        Self { source, dim, map }
    }
}

impl<S, F> RowSource for MappedRows<S, F>
where
    S: RowSource,
    F: Fn(&Matrix) -> Result<Matrix>,
{
    fn n_rows(&self) -> usize {
        self.source.n_rows()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn read_block(&self, start: usize, end: usize) -> Result<Matrix> {
        let out = (self.map)(&self.source.read_block(start, end)?)?;
        if out.rows() != end - start || out.cols() != self.dim {
            return Err(Error::Argument(format!(
                "row map produced a {}x{} block, expected {}x{}",
                out.rows(),
                out.cols(),
                end - start,
                self.dim
            )));
        }
        Ok(out)
    }
}

/// Iterates `(start, end)` chunk bounds over `0..n`.
pub(crate) fn chunks(n: usize, chunk: usize) -> impl Iterator<Item = (usize, usize)> {
    let chunk = chunk.max(1);
    (0..n).step_by(chunk).map(move |s| (s, (s + chunk).min(n)))
}
