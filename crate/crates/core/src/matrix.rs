//! Dense matrix value type, thin SVD, and seeded random generation.
//!
//! Every matrix that flows through the crate (data, factors, corruption) is a
//! [`DenseMatrix`]. Entries are row-major and always finite: constructors
//! reject NaN and infinities so solvers never have to re-check their inputs.

use faer::Mat;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FgsrError, Result};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Sweep budget of the bidiagonal QR iteration for `k` singular values.
pub fn svd_iteration_budget(k: usize) -> usize {
    32 * k * k
}

const POWER_MAX_ITERS: usize = 2_000;
const POWER_REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(Array2<f64>);

impl DenseMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(FgsrError::Dimension(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                values.len()
            )));
        }
        let array = Array2::from_shape_vec((rows, cols), values)
            .map_err(|e| FgsrError::Dimension(e.to_string()))?;
        Self::from_array(array)
    }

    pub fn from_array(array: Array2<f64>) -> Result<Self> {
        if let Some(((row, col), _)) = array.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(FgsrError::NonFinite { row, col });
        }
        Ok(DenseMatrix(array.as_standard_layout().into_owned()))
    }

    /// Wraps an array produced by crate-internal arithmetic on finite inputs.
    pub(crate) fn from_array_unchecked(array: Array2<f64>) -> Self {
        debug_assert!(array.iter().all(|v| v.is_finite()));
        DenseMatrix(array.as_standard_layout().into_owned())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix(Array2::zeros((rows, cols)))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(Array2::eye(n))
    }

    /// Square diagonal matrix.
    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        Self::from_array(Array2::from_diag(&Array1::from(diag.to_vec())))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[[row, col]]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        self.0
            .as_slice()
            .expect("DenseMatrix is always stored in standard layout")
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix(self.0.t().as_standard_layout().into_owned())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return Err(FgsrError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(DenseMatrix(self.0.dot(&other.0)))
    }

    pub fn scaled(&self, factor: f64) -> DenseMatrix {
        DenseMatrix(&self.0 * factor)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix(&self.0 - &other.0))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        Ok(DenseMatrix(&self.0 + &other.0))
    }

    /// Euclidean norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        column_norms(&self.0.view())
    }

    /// Euclidean norm of every row.
    pub fn row_norms(&self) -> Vec<f64> {
        self.0
            .axis_iter(Axis(0))
            .map(|row| row.dot(&row).sqrt())
            .collect()
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(FgsrError::Dimension(format!(
                "shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}

pub(crate) fn column_norms(a: &ArrayView2<'_, f64>) -> Vec<f64> {
    let mut sq = vec![0.0; a.ncols()];
    for row in a.axis_iter(Axis(0)) {
        for (acc, v) in sq.iter_mut().zip(row.iter()) {
            *acc += v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Thin singular value decomposition `u · diag(s) · vt`.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub vt: DenseMatrix,
}

impl ThinSvd {
    /// Number of singular values above `RANK_THRESHOLD · s[0]`.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.s)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.as_array().clone();
        for (mut col, &sigma) in us.axis_iter_mut(Axis(1)).zip(&self.s) {
            col *= sigma;
        }
        DenseMatrix(us.dot(self.vt.as_array()))
    }
}

pub fn numerical_rank(s: &[f64]) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&v| v > RANK_THRESHOLD * top).count(),
        _ => 0,
    }
}

pub fn thin_svd(x: &DenseMatrix) -> Result<ThinSvd> {
    let (m, n) = x.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok(ThinSvd {
            u: DenseMatrix::zeros(m, 0),
            s: Vec::new(),
            vt: DenseMatrix::zeros(0, n),
        });
    }
    let a = Mat::from_fn(m, n, |i, j| x.0[[i, j]]);
    let svd = a.thin_svd().map_err(|_| FgsrError::SvdNoConvergence {
        budget: svd_iteration_budget(k),
    })?;
    let sv = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());

    // Re-sort defensively on ties and negative zeros.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let s = order.iter().map(|&i| sv[i].max(0.0)).collect();
    let u = Array2::from_shape_fn((m, k), |(r, c)| u[(r, order[c])]);
    let vt = Array2::from_shape_fn((k, n), |(r, c)| v[(c, order[r])]);
    Ok(ThinSvd {
        u: DenseMatrix(u),
        s,
        vt: DenseMatrix(vt),
    })
}

pub fn frobenius_norm(x: &DenseMatrix) -> f64 {
    x.values().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest eigenvalue of `xᵀx` (the squared spectral norm) by power iteration.
pub fn spectral_norm_sq_estimate(x: &DenseMatrix) -> f64 {
    spectral_norm_sq_of(&x.view())
}

pub(crate) fn spectral_norm_sq_of(x: &ArrayView2<'_, f64>) -> f64 {
    let (m, n) = x.dim();
    if m == 0 || n == 0 {
        return 0.0;
    }
    power_iteration(n, |v, out| {
        let xv = x.dot(&ndarray::aview1(v));
        let xtxv = x.t().dot(&xv);
        out.copy_from_slice(xtxv.as_slice().expect("contiguous"));
    })
}

/// Power iteration for the dominant eigenvalue of a symmetric positive
/// semidefinite operator given as a matrix-vector product.
pub(crate) fn power_iteration(dim: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    // Fixed pseudo-random start so the estimate is a pure function of the operator.
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed0f_90e7);
    let mut v: Vec<f64> = (0..dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect::<Vec<f64>>();
    let mut w = vec![0.0; dim];
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        apply(&v, &mut w);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let done = (rayleigh - lambda).abs() <= POWER_REL_TOL * rayleigh.abs();
        lambda = rayleigh;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if done {
            break;
        }
    }
    lambda.max(0.0)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Seeded generator used for every random draw in the crate: ChaCha8 keyed by
/// `seed`, with `stream` selecting an independent sub-sequence.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn standard_normal_array(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng))
}

/// Product of an `m×r` and an `r×n` standard normal matrix.
pub fn random_low_rank(m: usize, n: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    if r > m.min(n) {
        return Err(FgsrError::Dimension(format!(
            "rank {r} exceeds min({m}, {n})"
        )));
    }
    let mut rng = seeded_rng(seed, 0);
    let left = standard_normal_array(m, r, &mut rng);
    let right = standard_normal_array(r, n, &mut rng);
    Ok(DenseMatrix(left.dot(&right)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn random_dense(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = seeded_rng(seed, 7);
        DenseMatrix(standard_normal_array(m, n, &mut rng))
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0; 3]),
            Err(FgsrError::Dimension(_))
        ));
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(FgsrError::NonFinite { row: 0, col: 1 })
        ));
        assert!(DenseMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn svd_of_diagonal() {
        let x = DenseMatrix::from_diag(&[3.0, 1.0]).unwrap();
        let svd = thin_svd(&x).unwrap();
        assert_relative_eq!(svd.s[0], 3.0, epsilon = 1e-14);
        assert_relative_eq!(svd.s[1], 1.0, epsilon = 1e-14);
        // Signs of singular vectors are not unique; u·vt is.
        let eye = Array2::<f64>::eye(2);
        let uu = svd.u.as_array().mapv(f64::abs);
        let vv = svd.vt.as_array().mapv(f64::abs);
        assert!(max_abs_diff(&uu, &eye) < 1e-14);
        assert!(max_abs_diff(&vv, &eye) < 1e-14);
        assert!(max_abs_diff(svd.reconstruct().as_array(), x.as_array()) < 1e-14);
    }

    #[test]
    fn svd_of_zero_matrix() {
        let svd = thin_svd(&DenseMatrix::zeros(4, 3)).unwrap();
        assert_eq!(svd.s, vec![0.0, 0.0, 0.0]);
        assert_eq!(svd.rank(), 0);
    }

    #[test]
    fn svd_invariants_on_random_input() {
        let x = random_dense(20, 15, 1);
        let svd = thin_svd(&x).unwrap();
        assert_eq!(svd.s.len(), 15);
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.s.iter().all(|&v| v >= 0.0));
        let utu = svd.u.as_array().t().dot(svd.u.as_array());
        let vvt = svd.vt.as_array().dot(&svd.vt.as_array().t());
        assert!(max_abs_diff(&utu, &Array2::eye(15)) < 1e-10);
        assert!(max_abs_diff(&vvt, &Array2::eye(15)) < 1e-10);
        let resid = x.sub(&svd.reconstruct()).unwrap();
        assert!(frobenius_norm(&resid) / frobenius_norm(&x) < 1e-10);
    }

    #[test]
    fn svd_reconstructs_rank_deficient_inputs() {
        for seed in 0..20 {
            let x = random_low_rank(20, 15, 3, seed).unwrap();
            let svd = thin_svd(&x).unwrap();
            let err = frobenius_norm(&svd.reconstruct().sub(&x).unwrap()) / frobenius_norm(&x);
            assert!(err <= 1e-10, "seed {seed}: {err}");
            assert_eq!(svd.rank(), 3);
        }
    }

    #[test]
    fn svd_of_wide_and_empty_inputs() {
        let x = random_dense(4, 9, 2);
        let svd = thin_svd(&x).unwrap();
        assert_eq!(svd.u.shape(), (4, 4));
        assert_eq!(svd.vt.shape(), (4, 9));
        let svd = thin_svd(&DenseMatrix::zeros(0, 3)).unwrap();
        assert!(svd.s.is_empty());
    }

    #[test]
    fn random_low_rank_shapes_and_rank() {
        let zero = random_low_rank(5, 5, 0, 9).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let x = random_low_rank(20, 15, 5, 11).unwrap();
        let svd = thin_svd(&x).unwrap();
        assert_eq!(svd.s.iter().filter(|&&v| v > 1e-8).count(), 5);
        assert_eq!(svd.rank(), 5);

        assert_eq!(x, random_low_rank(20, 15, 5, 11).unwrap());
        assert_ne!(x, random_low_rank(20, 15, 5, 12).unwrap());
        assert!(matches!(
            random_low_rank(4, 3, 4, 0),
            Err(FgsrError::Dimension(_))
        ));
    }

    #[test]
    fn full_size_generator_has_rank_fifty() {
        let x = random_low_rank(500, 500, 50, 2024).unwrap();
        assert_eq!(thin_svd(&x).unwrap().rank(), 50);
    }

    #[test]
    fn frobenius_examples() {
        assert_relative_eq!(frobenius_norm(&DenseMatrix::identity(3)), 3f64.sqrt());
        assert_eq!(frobenius_norm(&DenseMatrix::zeros(2, 2)), 0.0);
        assert_relative_eq!(
            frobenius_norm(&DenseMatrix::new(1, 2, vec![3.0, 4.0]).unwrap()),
            5.0
        );
    }

    #[test]
    fn spectral_estimate_examples() {
        let d = DenseMatrix::from_diag(&[2.0, 1.0]).unwrap();
        assert_relative_eq!(spectral_norm_sq_estimate(&d), 4.0, max_relative = 1e-9);
        assert_eq!(spectral_norm_sq_estimate(&DenseMatrix::zeros(3, 3)), 0.0);
        let x = random_dense(10, 10, 4);
        let top = thin_svd(&x).unwrap().s[0];
        assert_relative_eq!(
            spectral_norm_sq_estimate(&x),
            top * top,
            max_relative = 1e-5
        );
    }

    #[test]
    fn spectral_estimate_handles_start_orthogonal_to_ones() {
        let x = DenseMatrix::new(1, 2, vec![1.0, -1.0]).unwrap();
        assert_relative_eq!(spectral_norm_sq_estimate(&x), 2.0, max_relative = 1e-9);
    }
}
