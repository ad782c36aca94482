//! Least-squares interference cancellation.

use crate::linalg::{solve_hermitian, CMatrix};

/// Residual after projecting out the decoded signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SicResult {
    pub residual: CMatrix,
    /// True when `X X^H` needed diagonal loading.
    pub regularized: bool,
}

/// `Y' = Y - Y X^H (X X^H)^-1 X`, where the rows of `x` are the
/// reconstructed signals and `y` is the originally received slot.
pub fn ls_sic(y: &CMatrix, x: &CMatrix) -> SicResult {
    if x.nrows() == 0 {
        return SicResult { residual: y.clone(), regularized: false };
    }
    let xh = x.adjoint();
    let gram = x * &xh;
    let cross = y * &xh;
    // H = cross * gram^-1, so H^H = gram^-1 cross^H with a Hermitian gram.
    let sol = solve_hermitian(&gram, &cross.adjoint());
    let h = sol.solution.adjoint();
    SicResult { residual: y - h * x, regularized: sol.regularized }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_gaussian;
    use crate::linalg::energy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0))
    }

    #[test]
    fn empty_set_is_identity() {
        let y = random(3, 20, 1);
        assert_eq!(ls_sic(&y, &CMatrix::zeros(0, 20)).residual, y);
    }

    #[test]
    fn removes_a_single_noiseless_user() {
        let x = random(1, 20, 2);
        let h = random(4, 1, 3);
        let y = &h * &x;
        assert!(energy(&ls_sic(&y, &x).residual) < 1e-20);
    }

    #[test]
    fn residual_orthogonal_and_idempotent() {
        let x = random(5, 40, 4);
        let y = random(6, 40, 5);
        let r = ls_sic(&y, &x);
        assert!(!r.regularized);
        let scale = energy(&y).sqrt() * energy(&x).sqrt();
        assert!(energy(&(&r.residual * x.adjoint())).sqrt() / scale < 1e-8);
        let again = ls_sic(&r.residual, &x).residual;
        assert!(energy(&(&again - &r.residual)).sqrt() / energy(&y).sqrt() < 1e-8);
    }

    #[test]
    fn duplicated_rows_are_regularized() {
        let x1 = random(1, 10, 6);
        let x = CMatrix::from_fn(2, 10, |_, c| x1[(0, c)]);
        let y = random(2, 10, 7);
        let r = ls_sic(&y, &x);
        assert!(r.regularized);
        assert!(r.residual.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    }
}
