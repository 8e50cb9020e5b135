//! Dense linear algebra for the pipeline: streaming moments, Jacobi
//! eigendecomposition, Cholesky factorization and the generalized symmetric
//! definite eigenproblem. Everything accumulates in `f64`.

mod cholesky;
mod generalized;
mod jacobi;
mod matrix;
mod source;
mod stats;

pub use cholesky::{cholesky, Cholesky};
pub use generalized::{generalized_eigh, generalized_eigh_factored};
pub use jacobi::{jacobi_eigh, EigenDecomposition, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use matrix::{dot, norm, Matrix, SymMatrix};
pub use source::{MappedRows, RowSelection, RowSource};
pub use stats::{gram_matrix, streaming_mean, streaming_mean_cov, total_variance};

pub(crate) use jacobi::sign_of_largest;
pub(crate) use source::{check_range, chunks};
pub(crate) use stats::accumulate_lower_outer;
