//! Small dense kernels shared by the factored solvers.
//!
//! Factors are stored as `A` (m×d) and `Bᵀ` (n×d) so both live in row-major
//! arrays whose rows are the per-entry feature vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{FgsrError, Result};

pub(crate) fn gram(a: &ArrayView2<'_, f64>) -> Array2<f64> {
    a.t().dot(a)
}

fn to_na(x: &Array2<f64>) -> DMatrix<f64> {
    let (r, c) = x.dim();
    DMatrix::from_fn(r, c, |i, j| x[[i, j]])
}

fn from_na(x: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((x.nrows(), x.ncols()), |(i, j)| x[(i, j)])
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub(crate) fn top_eigenvalue(g: &Array2<f64>) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(to_na(g))
        .eigenvalues
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v))
}

/// Returns `rhs · g⁻¹` for a symmetric positive definite `g`.
pub(crate) fn spd_solve_right(rhs: &Array2<f64>, g: &Array2<f64>) -> Result<Array2<f64>> {
    let chol = to_na(g).cholesky().ok_or_else(|| {
        FgsrError::invalid(
            "regularization",
            "normal-equation matrix is not positive definite",
        )
    })?;
    let x = chol.solve(&to_na(&rhs.t().to_owned()));
    Ok(from_na(&x)
        .reversed_axes()
        .as_standard_layout()
        .into_owned())
}

/// `‖A·Bᵀ‖_F²` from the two Gram matrices.
pub(crate) fn product_norm_sq(a: &ArrayView2<'_, f64>, bt: &ArrayView2<'_, f64>) -> f64 {
    frob_inner(&gram(a), &gram(bt))
}

/// `‖A·Bᵀ − A₀·B₀ᵀ‖_F²` without forming either product.
pub(crate) fn product_diff_norm_sq(
    a: &ArrayView2<'_, f64>,
    bt: &ArrayView2<'_, f64>,
    a0: &ArrayView2<'_, f64>,
    bt0: &ArrayView2<'_, f64>,
) -> f64 {
    let cross = frob_inner(&a.t().dot(a0), &bt.t().dot(bt0));
    (product_norm_sq(a, bt) + product_norm_sq(a0, bt0) - 2.0 * cross).max(0.0)
}

fn frob_inner(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Singular values of `A·Bᵀ`, computed through thin QR factors of `A` and `Bᵀ`.
pub(crate) fn product_singular_values(
    a: &ArrayView2<'_, f64>,
    bt: &ArrayView2<'_, f64>,
) -> Vec<f64> {
    if a.ncols() == 0 || a.nrows() == 0 || bt.nrows() == 0 {
        return Vec::new();
    }
    let ra = to_na(&a.to_owned()).qr().r();
    let rb = to_na(&bt.to_owned()).qr().r();
    let core = ra * rb.transpose();
    let mut s: Vec<f64> = core.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Keeps the columns flagged in `keep`.
pub(crate) fn select_columns(x: &Array2<f64>, keep: &[bool]) -> Array2<f64> {
    let idx: Vec<usize> = keep
        .iter()
        .enumerate()
        .filter_map(|(j, &k)| k.then_some(j))
        .collect();
    x.select(Axis(1), &idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{seeded_rng, standard_normal_array, thin_svd, DenseMatrix};
    use approx::assert_relative_eq;

    #[test]
    fn gram_traces_match_dense_products() {
        let mut rng = seeded_rng(1, 9);
        let a = standard_normal_array(7, 3, &mut rng);
        let bt = standard_normal_array(5, 3, &mut rng);
        let a0 = standard_normal_array(7, 2, &mut rng);
        let bt0 = standard_normal_array(5, 2, &mut rng);
        let p = a.dot(&bt.t());
        let p0 = a0.dot(&bt0.t());
        let dense = |x: &Array2<f64>| x.iter().map(|v| v * v).sum::<f64>();
        assert_relative_eq!(
            product_norm_sq(&a.view(), &bt.view()),
            dense(&p),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            product_diff_norm_sq(&a.view(), &bt.view(), &a0.view(), &bt0.view()),
            dense(&(&p - &p0)),
            max_relative = 1e-10
        );
        let s = product_singular_values(&a.view(), &bt.view());
        let oracle = thin_svd(&DenseMatrix::from_array(p).unwrap()).unwrap().s;
        for (x, y) in s.iter().zip(&oracle) {
            assert_relative_eq!(x, y, max_relative = 1e-10);
        }
    }

    #[test]
    fn spd_solve_and_eigen() {
        let mut rng = seeded_rng(2, 9);
        let x = standard_normal_array(6, 4, &mut rng);
        let g = gram(&x.view()) + Array2::<f64>::eye(4);
        let rhs = standard_normal_array(3, 4, &mut rng);
        let sol = spd_solve_right(&rhs, &g).unwrap();
        let back = sol.dot(&g);
        for (u, v) in back.iter().zip(rhs.iter()) {
            assert!((u - v).abs() < 1e-10);
        }
        let top = top_eigenvalue(&gram(&x.view()));
        let s = thin_svd(&DenseMatrix::from_array(x).unwrap()).unwrap().s;
        assert_relative_eq!(top, s[0] * s[0], max_relative = 1e-10);
        assert_eq!(top_eigenvalue(&Array2::zeros((0, 0))), 0.0);
        assert!(spd_solve_right(&rhs, &Array2::zeros((4, 4))).is_err());
    }
}
