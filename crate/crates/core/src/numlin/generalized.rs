use super::cholesky::{cholesky, Cholesky};
use super::jacobi::{jacobi_eigh, sign_of_largest, EigenDecomposition};
use super::matrix::SymMatrix;
use crate::{Error, Result};

/// Solves `A v = λ B v` for symmetric `A` and symmetric positive definite `B`.
///
/// With `B = L Lᵀ` the problem reduces to the ordinary symmetric problem
/// `C y = λ y` where `C = L⁻¹ A L⁻ᵀ`; eigenvectors map back as `v = L⁻ᵀ y`
/// and are therefore B-orthonormal (`Vᵀ B V = I`).
pub fn generalized_eigh(a: &SymMatrix, b: &SymMatrix) -> Result<EigenDecomposition> {
    let factor = cholesky(b)?;
    generalized_eigh_factored(a, &factor)
}

/// Same as [`generalized_eigh`] with `B` supplied through its Cholesky factor.
pub fn generalized_eigh_factored(a: &SymMatrix, b: &Cholesky) -> Result<EigenDecomposition> {
    if a.dim() != b.dim() {
        return Err(Error::Argument(format!(
            "dimension mismatch: A is {0}x{0}, B is {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    // L⁻¹ A, then L⁻¹ (L⁻¹ A)ᵀ = L⁻¹ A L⁻ᵀ since A is symmetric
    let half = b.solve_lower_matrix(a.as_matrix());
    let reduced = b.solve_lower_matrix(&half.transpose());
    let reduced = SymMatrix::symmetrize(&reduced)?;
    let inner = jacobi_eigh(&reduced)?;

    let mut vectors = b.solve_upper_matrix(&inner.eigenvectors);
    let d = vectors.rows();
    for j in 0..d {
        let col = vectors.column(j);
        if sign_of_largest(&col) < 0.0 {
            for i in 0..d {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: inner.eigenvalues,
        eigenvectors: vectors,
    })
}
