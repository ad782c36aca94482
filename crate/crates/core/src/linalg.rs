//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

use crate::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Solution of a Hermitian positive (semi-)definite system.
#[derive(Debug, Clone)]
pub struct HermitianSolve {
    pub solution: CMatrix,
    /// True when diagonal loading was needed to factorise.
    pub regularized: bool,
}

/// Reciprocal condition estimate below which diagonal loading is applied.
const MIN_RCOND: f64 = 1e-12;

/// Relative diagonal loading `eps = 1e-9 * trace(A) / n`.
pub const RIDGE_SCALE: f64 = 1e-9;

/// Solves `A X = B` for Hermitian `A`, falling back to `A + eps I` when the
/// Cholesky factorisation fails or is badly conditioned.
pub fn solve_hermitian(a: &CMatrix, b: &CMatrix) -> HermitianSolve {
    let n = a.nrows();
    if n == 0 {
        return HermitianSolve { solution: CMatrix::zeros(0, b.ncols()), regularized: false };
    }
    if let Some(chol) = a.clone().cholesky() {
        let diag: Vec<f64> = (0..n).map(|i| chol.l_dirty()[(i, i)].re).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if max > 0.0 && (min / max).powi(2) > MIN_RCOND {
            return HermitianSolve { solution: chol.solve(b), regularized: false };
        }
    }
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    let eps = (RIDGE_SCALE * trace / n as f64).max(f64::MIN_POSITIVE);
    let mut loaded = a.clone();
    for i in 0..n {
        loaded[(i, i)] += Complex64::new(eps, 0.0);
    }
    let solution = match loaded.clone().cholesky() {
        Some(chol) => chol.solve(b),
        None => loaded
            .lu()
            .solve(b)
            .unwrap_or_else(|| CMatrix::zeros(n, b.ncols())),
    };
    HermitianSolve { solution, regularized: true }
}

/// Squared Frobenius norm.
pub fn energy(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum()
}

/// Row vector as a `1 x n` matrix.
pub fn row_matrix(samples: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(1, samples.len(), samples)
}

/// Stacks equal-length rows into a matrix.
pub fn stack_rows<'a>(rows: impl IntoIterator<Item = &'a [Complex64]>, ncols: usize) -> CMatrix {
    let rows: Vec<&[Complex64]> = rows.into_iter().collect();
    let mut m = CMatrix::zeros(rows.len(), ncols);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    m
}
