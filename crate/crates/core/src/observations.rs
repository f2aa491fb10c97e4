//! The observed index set Ω together with the observed values.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::matrix::{power_iteration, DenseMatrix};

/// Entries `(i, j, value)` of a partially observed `rows × cols` matrix,
/// stored sorted by row and then column with no duplicate indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    rows: usize,
    cols: usize,
    row_index: Vec<usize>,
    col_index: Vec<usize>,
    values: Vec<f64>,
}

impl ObservationSet {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, v) in &entries {
            if i >= rows || j >= cols {
                return Err(FgsrError::Dimension(format!(
                    "index ({i}, {j}) lies outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(FgsrError::NonFinite { row: i, col: j });
            }
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(FgsrError::Dimension(format!(
                "duplicate index ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(ObservationSet {
            rows,
            cols,
            row_index: entries.iter().map(|e| e.0).collect(),
            col_index: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        })
    }

    /// Every entry of `x`.
    pub fn full(x: &DenseMatrix) -> Self {
        let (rows, cols) = x.shape();
        ObservationSet {
            rows,
            cols,
            row_index: (0..rows)
                .flat_map(|i| std::iter::repeat_n(i, cols))
                .collect(),
            col_index: (0..rows).flat_map(|_| 0..cols).collect(),
            values: x.values().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.row_index
            .iter()
            .zip(&self.col_index)
            .zip(&self.values)
            .map(|((&i, &j), &v)| (i, j, v))
    }

    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_index
            .iter()
            .copied()
            .zip(self.col_index.iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let start = self.row_index.partition_point(|&r| r < i);
        let end = self.row_index.partition_point(|&r| r <= i);
        self.col_index[start..end]
            .binary_search(&j)
            .ok()
            .map(|k| self.values[start + k])
    }

    /// Fraction of observed entries.
    pub fn sampling_rate(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        self.len() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn same_indices(&self, other: &ObservationSet) -> bool {
        self.shape() == other.shape()
            && self.row_index == other.row_index
            && self.col_index == other.col_index
    }

    /// Same index set carrying new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(FgsrError::Dimension(format!(
                "{} values for {} observed entries",
                values.len(),
                self.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FgsrError::NonFinite {
                row: self.row_index[k],
                col: self.col_index[k],
            });
        }
        Ok(ObservationSet {
            values,
            ..self.clone()
        })
    }

    /// Splits into the entries where `pick(k)` is true and the rest.
    pub fn partition(&self, mut pick: impl FnMut(usize) -> bool) -> (Self, Self) {
        let mut yes = Vec::new();
        let mut no = Vec::new();
        for (k, e) in self.iter().enumerate() {
            if pick(k) {
                yes.push(e);
            } else {
                no.push(e);
            }
        }
        let build = |entries: Vec<(usize, usize, f64)>| {
            ObservationSet::new(self.rows, self.cols, entries).expect("subset of a valid set")
        };
        (build(yes), build(no))
    }

    /// Dense matrix with the observed values and zeros elsewhere.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut x = Array2::zeros((self.rows, self.cols));
        for (i, j, v) in self.iter() {
            x[[i, j]] = v;
        }
        DenseMatrix::from_array_unchecked(x)
    }

    pub fn mean_abs(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.len() as f64
    }

    pub fn rms(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.len() as f64).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Squared spectral norm of the zero-filled observation matrix.
    pub(crate) fn spectral_norm_sq(&self) -> f64 {
        let mut tmp = vec![0.0; self.rows];
        power_iteration(self.cols, |v, out| {
            tmp.iter_mut().for_each(|t| *t = 0.0);
            for (i, j, x) in self.iter() {
                tmp[i] += x * v[j];
            }
            out.iter_mut().for_each(|o| *o = 0.0);
            for (i, j, x) in self.iter() {
                out[j] += x * tmp[i];
            }
        })
    }

    /// Entries of `A·Bᵀ` at the observed indices.
    pub(crate) fn sample_product(
        &self,
        a: &ArrayView2<'_, f64>,
        bt: &ArrayView2<'_, f64>,
    ) -> Vec<f64> {
        self.indices()
            .map(|(i, j)| a.row(i).dot(&bt.row(j)))
            .collect()
    }

    /// `S·Bᵀ` (m×d) where `S` holds `s` on Ω and zeros elsewhere.
    pub(crate) fn sparse_times(&self, s: &[f64], bt: &ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, bt.ncols()));
        for ((i, j), &v) in self.indices().zip(s) {
            out.row_mut(i).scaled_add(v, &bt.row(j));
        }
        out
    }

    /// `Sᵀ·A` (n×d) where `S` holds `s` on Ω and zeros elsewhere.
    pub(crate) fn sparse_t_times(&self, s: &[f64], a: &ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.cols, a.ncols()));
        for ((i, j), &v) in self.indices().zip(s) {
            out.row_mut(j).scaled_add(v, &a.row(i));
        }
        out
    }
}

/// Values of `x` at the indices of `omega`.
pub fn project_omega(x: &DenseMatrix, omega: &ObservationSet) -> Result<ObservationSet> {
    if x.shape() != omega.shape() {
        return Err(FgsrError::Dimension(format!(
            "matrix is {:?} but the observation set is {:?}",
            x.shape(),
            omega.shape()
        )));
    }
    let values = omega.indices().map(|(i, j)| x.get(i, j)).collect();
    Ok(ObservationSet {
        values,
        ..omega.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{seeded_rng, spectral_norm_sq_estimate, standard_normal_array};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn rand_mat(m: usize, n: usize, seed: u64) -> DenseMatrix {
        DenseMatrix::from_array(standard_normal_array(m, n, &mut seeded_rng(seed, 1))).unwrap()
    }

    fn random_omega(m: usize, n: usize, p: f64, seed: u64) -> ObservationSet {
        let mut rng = seeded_rng(seed, 2);
        let mut entries = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.random::<f64>() < p {
                    entries.push((i, j, rng.random::<f64>()));
                }
            }
        }
        ObservationSet::new(m, n, entries).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ObservationSet::new(2, 2, vec![(2, 0, 1.0)]).is_err());
        assert!(ObservationSet::new(2, 2, vec![(0, 0, f64::NAN)]).is_err());
        assert!(ObservationSet::new(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0)]).is_err());
        let o = ObservationSet::new(2, 3, vec![(1, 2, 5.0), (0, 1, 4.0)]).unwrap();
        assert_eq!(o.iter().collect::<Vec<_>>(), vec![(0, 1, 4.0), (1, 2, 5.0)]);
        assert_eq!(o.get(1, 2), Some(5.0));
        assert_eq!(o.get(1, 1), None);
        assert!(o.with_values(vec![1.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let x = rand_mat(4, 5, 1);
        let all = ObservationSet::full(&x);
        let p = project_omega(&x, &all).unwrap();
        assert_eq!(p.to_dense(), x);
        let empty = ObservationSet::new(4, 5, vec![]).unwrap();
        assert!(project_omega(&x, &empty).unwrap().is_empty());
        let omega = random_omega(4, 5, 0.5, 3);
        let p = project_omega(&x, &omega).unwrap();
        for (i, j, v) in p.iter() {
            assert_eq!(v, x.get(i, j));
        }
        assert!(project_omega(&rand_mat(3, 5, 2), &omega).is_err());
    }

    #[test]
    fn sparse_kernels_match_dense() {
        let (m, n, d) = (9, 7, 3);
        let omega = random_omega(m, n, 0.4, 4);
        let mut rng = seeded_rng(5, 3);
        let a = standard_normal_array(m, d, &mut rng);
        let bt = standard_normal_array(n, d, &mut rng);
        let s = omega.to_dense().into_array();
        let ab = a.dot(&bt.t());
        for ((i, j), v) in omega
            .indices()
            .zip(omega.sample_product(&a.view(), &bt.view()))
        {
            assert_relative_eq!(v, ab[[i, j]], max_relative = 1e-12);
        }
        let sb = omega.sparse_times(omega.values(), &bt.view());
        let sta = omega.sparse_t_times(omega.values(), &a.view());
        for (u, v) in sb.iter().zip(s.dot(&bt).iter()) {
            assert!((u - v).abs() < 1e-12);
        }
        for (u, v) in sta.iter().zip(s.t().dot(&a).iter()) {
            assert!((u - v).abs() < 1e-12);
        }
        assert_relative_eq!(
            omega.spectral_norm_sq(),
            spectral_norm_sq_estimate(&omega.to_dense()),
            max_relative = 1e-8
        );
    }

    #[test]
    fn partition_and_stats() {
        let omega = random_omega(6, 6, 0.7, 6);
        let (a, b) = omega.partition(|k| k % 3 == 0);
        assert_eq!(a.len() + b.len(), omega.len());
        let o = ObservationSet::new(1, 2, vec![(0, 0, 3.0), (0, 1, -4.0)]).unwrap();
        assert_relative_eq!(o.mean_abs(), 3.5);
        assert_relative_eq!(o.rms(), (12.5f64).sqrt());
        assert_relative_eq!(o.sampling_rate(), 1.0);
    }
}
