//! Group norms, Schatten-p quantities and factor group-sparse regularizers.
//!
//! A factor group-sparse regularizer (FGSR) scores a factorization `X = A·B`
//! by the column norms of `A` and the row norms of `B`:
//!
//! ```text
//! group-L2 B:   Σ_j (1/q)‖a_j‖^q + α‖b_j‖      = (1 + 1/q)   α^{q/(q+1)} Σ σ_i^{q/(q+1)}
//! Frobenius B:  Σ_j (1/q)‖a_j‖^q + (α/2)‖b_j‖² = (1/2 + 1/q) α^{q/(q+2)} Σ σ_i^{2q/(2+q)}
//! ```
//!
//! where the right-hand sides are the minimum over all factorizations. The
//! minimizers are built from the SVD of `X` in [`optimal_factors`]; that closed
//! form is what the solvers are checked against.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::matrix::{numerical_rank, thin_svd, DenseMatrix, RANK_THRESHOLD};

/// Exponent on the column norms of `A`; restricted to dyadic values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QExponent {
    One,
    Half,
    Quarter,
    Eighth,
}

impl QExponent {
    pub const ALL: [QExponent; 4] = [
        QExponent::One,
        QExponent::Half,
        QExponent::Quarter,
        QExponent::Eighth,
    ];

    pub fn value(self) -> f64 {
        match self {
            QExponent::One => 1.0,
            QExponent::Half => 0.5,
            QExponent::Quarter => 0.25,
            QExponent::Eighth => 0.125,
        }
    }

    pub fn from_value(q: f64) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| (e.value() - q).abs() < 1e-12)
            .ok_or_else(|| FgsrError::invalid("q", format!("{q} is not one of 1, 1/2, 1/4, 1/8")))
    }
}

impl fmt::Display for QExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QExponent::One => "1",
            QExponent::Half => "1/2",
            QExponent::Quarter => "1/4",
            QExponent::Eighth => "1/8",
        };
        f.write_str(s)
    }
}

impl FromStr for QExponent {
    type Err = FgsrError;

    /// Accepts `1`, `1/2`, `0.5` and so on.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad_q(s))?;
                let den: f64 = den.trim().parse().map_err(|_| bad_q(s))?;
                num / den
            }
            None => s.parse().map_err(|_| bad_q(s))?,
        };
        Self::from_value(value)
    }
}

fn bad_q(s: &str) -> FgsrError {
    FgsrError::invalid("q", format!("cannot parse `{s}`"))
}

/// How the rows of `B` are penalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BPenalty {
    /// `α Σ_j ‖b_j‖`
    GroupL2,
    /// `(α/2) Σ_j ‖b_j‖²`
    HalfFrobeniusSq,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgsrSpec {
    pub q: QExponent,
    pub alpha: f64,
    pub b_penalty: BPenalty,
}

impl FgsrSpec {
    pub fn new(q: QExponent, alpha: f64, b_penalty: BPenalty) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FgsrError::invalid(
                "alpha",
                format!("{alpha} is not positive"),
            ));
        }
        Ok(FgsrSpec {
            q,
            alpha,
            b_penalty,
        })
    }

    /// The Schatten exponent p whose p-th power sum this regularizer matches.
    pub fn schatten_p(&self) -> f64 {
        let q = self.q.value();
        match self.b_penalty {
            BPenalty::GroupL2 => q / (q + 1.0),
            BPenalty::HalfFrobeniusSq => 2.0 * q / (2.0 + q),
        }
    }

    /// Minimum of the factored objective for a matrix with these singular values.
    pub fn closed_form(&self, singular_values: &[f64]) -> f64 {
        let q = self.q.value();
        let p = self.schatten_p();
        let sum = schatten_sum(singular_values, p);
        match self.b_penalty {
            BPenalty::GroupL2 => (1.0 + 1.0 / q) * self.alpha.powf(q / (q + 1.0)) * sum,
            BPenalty::HalfFrobeniusSq => (0.5 + 1.0 / q) * self.alpha.powf(q / (q + 2.0)) * sum,
        }
    }

    /// Norm targets `(‖a‖, ‖b‖)` of the optimal rank-one split of a term with
    /// product norm `c = ‖a‖·‖b‖`.
    pub fn balanced_norms(&self, c: f64) -> (f64, f64) {
        let q = self.q.value();
        let (ea, eb, k) = match self.b_penalty {
            BPenalty::GroupL2 => (1.0 / (q + 1.0), q / (q + 1.0), q + 1.0),
            BPenalty::HalfFrobeniusSq => (2.0 / (q + 2.0), q / (q + 2.0), q + 2.0),
        };
        (
            self.alpha.powf(1.0 / k) * c.powf(ea),
            self.alpha.powf(-1.0 / k) * c.powf(eb),
        )
    }
}

/// A factorization `X = A·B` with `A` m×d and `B` d×n.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    /// `false` for a column j whose `a_j` and `b_j` are both within the prune tolerance.
    pub active_columns: Vec<bool>,
}

impl FactorPair {
    pub fn new(a: DenseMatrix, b: DenseMatrix, prune_tol: f64) -> Result<Self> {
        if a.cols() != b.rows() {
            return Err(FgsrError::Dimension(format!(
                "A has {} columns but B has {} rows",
                a.cols(),
                b.rows()
            )));
        }
        let active_columns = a
            .column_norms()
            .iter()
            .zip(b.row_norms())
            .map(|(&na, nb)| na > prune_tol || nb > prune_tol)
            .collect();
        Ok(FactorPair {
            a,
            b,
            active_columns,
        })
    }

    pub fn width(&self) -> usize {
        self.a.cols()
    }

    pub fn active_count(&self) -> usize {
        self.active_columns.iter().filter(|&&x| x).count()
    }

    pub fn product(&self) -> DenseMatrix {
        DenseMatrix::from_array_unchecked(self.a.as_array().dot(self.b.as_array()))
    }
}

/// `Σ_j ‖x_j‖` over columns.
pub fn group_l21(x: &DenseMatrix) -> f64 {
    x.column_norms().iter().sum()
}

/// `Σ_j ‖x_j‖^q` over columns, with `0^q = 0`.
pub fn group_l2q_pow(x: &DenseMatrix, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(FgsrError::invalid("q", format!("{q} is outside (0, 1]")));
    }
    Ok(x.column_norms().iter().map(|&n| pow_or_zero(n, q)).sum())
}

fn pow_or_zero(v: f64, e: f64) -> f64 {
    if v > 0.0 {
        v.powf(e)
    } else {
        0.0
    }
}

fn schatten_sum(singular_values: &[f64], p: f64) -> f64 {
    let Some(&top) = singular_values.first() else {
        return 0.0;
    };
    singular_values
        .iter()
        .filter(|&&s| s > RANK_THRESHOLD * top)
        .map(|&s| s.powf(p))
        .sum()
}

/// `Σ σ_i(x)^p`; singular values under the rank threshold contribute nothing.
pub fn schatten_p_power(x: &DenseMatrix, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(FgsrError::invalid("p", format!("{p} is outside (0, 1]")));
    }
    let svd = thin_svd(x)?;
    Ok(schatten_sum(&svd.s, p))
}

pub fn factored_objective(f: &FactorPair, spec: &FgsrSpec) -> f64 {
    let q = spec.q.value();
    let a_term: f64 =
        f.a.column_norms()
            .iter()
            .map(|&n| pow_or_zero(n, q) / q)
            .sum();
    let b_norms = f.b.row_norms();
    let b_term = match spec.b_penalty {
        BPenalty::GroupL2 => spec.alpha * b_norms.iter().sum::<f64>(),
        BPenalty::HalfFrobeniusSq => 0.5 * spec.alpha * b_norms.iter().map(|n| n * n).sum::<f64>(),
    };
    a_term + b_term
}

/// Minimizing factorization of `x` of width `d`, built from its SVD.
pub fn optimal_factors(x: &DenseMatrix, spec: &FgsrSpec, d: usize) -> Result<FactorPair> {
    let svd = thin_svd(x)?;
    let rank = numerical_rank(&svd.s);
    if d < rank {
        return Err(FgsrError::InfeasibleRank { d, rank });
    }
    let (m, n) = x.shape();
    let mut a = Array2::zeros((m, d));
    let mut b = Array2::zeros((d, n));
    for j in 0..rank {
        let (na, nb) = spec.balanced_norms(svd.s[j]);
        a.column_mut(j).assign(&(&svd.u.as_array().column(j) * na));
        b.row_mut(j).assign(&(&svd.vt.as_array().row(j) * nb));
    }
    let mut active_columns = vec![false; d];
    active_columns[..rank].iter_mut().for_each(|x| *x = true);
    Ok(FactorPair {
        a: DenseMatrix::from_array_unchecked(a),
        b: DenseMatrix::from_array_unchecked(b),
        active_columns,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FgsrKind {
    /// `½ min ‖A‖_{2,1} + ‖Bᵀ‖_{2,1}`, equal to `Σ σ^{1/2}`.
    Half,
    /// `2/(3α^{1/3}) min ‖A‖_{2,1} + (α/2)‖B‖_F²`, equal to `Σ σ^{2/3}`.
    TwoThirds,
}

pub fn fgsr_value(x: &DenseMatrix, which: FgsrKind, alpha: f64) -> Result<f64> {
    match which {
        FgsrKind::Half => {
            let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::GroupL2)?;
            let f = optimal_factors(x, &spec, x.rows().min(x.cols()))?;
            Ok(0.5 * factored_objective(&f, &spec))
        }
        FgsrKind::TwoThirds => {
            let spec = FgsrSpec::new(QExponent::One, alpha, BPenalty::HalfFrobeniusSq)?;
            let f = optimal_factors(x, &spec, x.rows().min(x.cols()))?;
            Ok(2.0 / (3.0 * alpha.cbrt()) * factored_objective(&f, &spec))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_low_rank, seeded_rng, standard_normal_array};
    use approx::assert_relative_eq;

    fn rand_mat(m: usize, n: usize, seed: u64) -> DenseMatrix {
        DenseMatrix::from_array(standard_normal_array(m, n, &mut seeded_rng(seed, 3))).unwrap()
    }

    fn with_singular_values(s: &[f64], m: usize, n: usize, seed: u64) -> DenseMatrix {
        // Random orthonormal frames from the SVD of a random matrix.
        let u = thin_svd(&rand_mat(m, s.len(), seed)).unwrap().u;
        let v = thin_svd(&rand_mat(n, s.len(), seed + 1)).unwrap().u;
        let mut us = u.into_array();
        for (mut col, &sv) in us.columns_mut().into_iter().zip(s) {
            col *= sv;
        }
        DenseMatrix::from_array(us.dot(&v.as_array().t())).unwrap()
    }

    #[test]
    fn q_parsing() {
        assert_eq!("1/4".parse::<QExponent>().unwrap(), QExponent::Quarter);
        assert_eq!("0.5".parse::<QExponent>().unwrap(), QExponent::Half);
        assert_eq!("1".parse::<QExponent>().unwrap(), QExponent::One);
        assert!("1/3".parse::<QExponent>().is_err());
        assert!("x".parse::<QExponent>().is_err());
        assert!(FgsrSpec::new(QExponent::One, 0.0, BPenalty::GroupL2).is_err());
    }

    #[test]
    fn group_l21_examples() {
        assert_relative_eq!(group_l21(&DenseMatrix::identity(2)), 2.0);
        assert_relative_eq!(
            group_l21(&DenseMatrix::new(2, 1, vec![3.0, 4.0]).unwrap()),
            5.0
        );
        let x = rand_mat(6, 4, 1);
        let direct: f64 = (0..4)
            .map(|j| (0..6).map(|i| x.get(i, j).powi(2)).sum::<f64>().sqrt())
            .sum();
        assert_relative_eq!(group_l21(&x), direct, max_relative = 1e-12);
    }

    #[test]
    fn group_l2q_examples() {
        assert_relative_eq!(group_l2q_pow(&DenseMatrix::identity(2), 1.0).unwrap(), 2.0);
        let d = DenseMatrix::from_diag(&[4.0, 0.0]).unwrap();
        assert_relative_eq!(group_l2q_pow(&d, 0.5).unwrap(), 2.0);
        let x = rand_mat(6, 4, 2);
        let direct: f64 = (0..4)
            .map(|j| {
                (0..6)
                    .map(|i| x.get(i, j).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    .powf(0.25)
            })
            .sum();
        assert_relative_eq!(
            group_l2q_pow(&x, 0.25).unwrap(),
            direct,
            max_relative = 1e-12
        );
        assert!(group_l2q_pow(&x, 0.0).is_err());
        assert!(group_l2q_pow(&x, 1.5).is_err());
    }

    #[test]
    fn schatten_examples() {
        let d = DenseMatrix::from_diag(&[1.0, 8.0]).unwrap();
        assert_relative_eq!(
            schatten_p_power(&d, 2.0 / 3.0).unwrap(),
            5.0,
            max_relative = 1e-12
        );
        let x = rand_mat(7, 5, 3);
        let nuclear: f64 = thin_svd(&x).unwrap().s.iter().sum();
        assert_relative_eq!(
            schatten_p_power(&x, 1.0).unwrap(),
            nuclear,
            max_relative = 1e-12
        );
        assert!(schatten_p_power(&x, 0.0).is_err());
    }

    #[test]
    fn schatten_half_matches_group_factorization() {
        let x = random_low_rank(20, 15, 5, 4).unwrap();
        let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::GroupL2).unwrap();
        let f = optimal_factors(&x, &spec, 5).unwrap();
        assert_relative_eq!(
            schatten_p_power(&x, 0.5).unwrap(),
            factored_objective(&f, &spec) / 2.0,
            max_relative = 1e-10
        );
    }

    #[test]
    fn factored_objective_examples() {
        let eye = DenseMatrix::identity(2);
        let f = FactorPair::new(eye.clone(), eye.clone(), 0.0).unwrap();
        let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::GroupL2).unwrap();
        assert_relative_eq!(factored_objective(&f, &spec), 4.0);

        let f = FactorPair::new(eye.clone(), eye.scaled(2.0), 0.0).unwrap();
        let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::HalfFrobeniusSq).unwrap();
        assert_relative_eq!(factored_objective(&f, &spec), 6.0);
    }

    #[test]
    fn optimal_factor_examples() {
        let x = DenseMatrix::new(1, 1, vec![4.0]).unwrap();
        let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::GroupL2).unwrap();
        let f = optimal_factors(&x, &spec, 1).unwrap();
        assert_relative_eq!(f.a.get(0, 0).abs(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(f.b.get(0, 0).abs(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(factored_objective(&f, &spec), 4.0, max_relative = 1e-12);

        let x = with_singular_values(&[8.0, 1.0], 5, 4, 10);
        let spec = FgsrSpec::new(QExponent::One, 1.0, BPenalty::HalfFrobeniusSq).unwrap();
        let f = optimal_factors(&x, &spec, 2).unwrap();
        assert_relative_eq!(factored_objective(&f, &spec), 7.5, max_relative = 1e-10);
        let rhs = 1.5 * schatten_p_power(&x, 2.0 / 3.0).unwrap();
        assert_relative_eq!(rhs, 7.5, max_relative = 1e-10);
    }

    #[test]
    fn optimal_factors_quarter_power_worked_case() {
        let x = random_low_rank(12, 9, 4, 5).unwrap();
        let spec = FgsrSpec::new(QExponent::Quarter, 1.0, BPenalty::HalfFrobeniusSq).unwrap();
        let f = optimal_factors(&x, &spec, 4).unwrap();
        let rhs = 4.5 * schatten_p_power(&x, 2.0 / 9.0).unwrap();
        assert_relative_eq!(factored_objective(&f, &spec), rhs, max_relative = 1e-9);
    }

    #[test]
    fn optimal_factors_half_power_frobenius() {
        let x = rand_mat(8, 6, 9);
        let spec = FgsrSpec::new(QExponent::Half, 1.0, BPenalty::HalfFrobeniusSq).unwrap();
        let f = optimal_factors(&x, &spec, 6).unwrap();
        let rhs = 2.5 * schatten_p_power(&x, 0.4).unwrap();
        assert_relative_eq!(factored_objective(&f, &spec), rhs, max_relative = 1e-9);
    }

    #[test]
    fn optimal_factors_reconstructs_and_pads() {
        let x = random_low_rank(10, 8, 3, 6).unwrap();
        let spec = FgsrSpec::new(QExponent::Half, 2.0, BPenalty::GroupL2).unwrap();
        let f = optimal_factors(&x, &spec, 6).unwrap();
        assert_eq!(
            f.active_columns,
            vec![true, true, true, false, false, false]
        );
        assert_eq!(f.active_count(), 3);
        let resid = f.product().sub(&x).unwrap();
        assert!(crate::matrix::frobenius_norm(&resid) / crate::matrix::frobenius_norm(&x) < 1e-9);
        assert!(matches!(
            optimal_factors(&x, &spec, 2),
            Err(FgsrError::InfeasibleRank { d: 2, rank: 3 })
        ));
    }

    #[test]
    fn fgsr_value_examples() {
        let d = DenseMatrix::from_diag(&[4.0, 0.0]).unwrap();
        assert_relative_eq!(
            fgsr_value(&d, FgsrKind::Half, 1.0).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        let d = DenseMatrix::from_diag(&[1.0, 8.0]).unwrap();
        assert_relative_eq!(
            fgsr_value(&d, FgsrKind::TwoThirds, 1.0).unwrap(),
            5.0,
            max_relative = 1e-12
        );
        let x = rand_mat(9, 7, 8);
        let base = fgsr_value(&x, FgsrKind::TwoThirds, 1.0).unwrap();
        for alpha in [0.1, 10.0] {
            assert_relative_eq!(
                fgsr_value(&x, FgsrKind::TwoThirds, alpha).unwrap(),
                base,
                max_relative = 1e-9
            );
        }
    }
}
