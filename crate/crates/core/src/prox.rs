//! Proximal operators for the group and entrywise penalties, plus the
//! reweighting state that turns `(1/q)Σ‖a_j‖^q` into a sequence of weighted
//! group-lasso subproblems.

use ndarray::{Array2, ArrayViewMut2, Axis};

use crate::error::{FgsrError, Result};
use crate::matrix::DenseMatrix;

/// Default multiplicative decay of the smoothing term per outer iteration.
pub const EPSILON_DECAY: f64 = 0.9;

/// Reweighting weights for a `(1/q)Σ‖a_j‖^q` penalty with `q < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReweightState {
    pub weights: Vec<f64>,
    /// Current smoothing added to each column norm.
    pub epsilon: f64,
    /// Multiplier applied to `epsilon` after each update.
    pub decay: f64,
    /// Lower bound for `epsilon`.
    pub epsilon_min: f64,
}

impl ReweightState {
    pub fn new(d: usize, epsilon: f64, decay: f64, epsilon_min: f64) -> Result<Self> {
        if !(epsilon_min > 0.0 && epsilon_min.is_finite()) {
            return Err(FgsrError::invalid(
                "epsilon_min",
                "must be positive and finite",
            ));
        }
        if !(epsilon >= epsilon_min && epsilon.is_finite()) {
            return Err(FgsrError::invalid(
                "epsilon",
                "must be finite and at least epsilon_min",
            ));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(FgsrError::invalid("decay", "must lie in (0, 1]"));
        }
        Ok(ReweightState {
            weights: vec![1.0; d],
            epsilon,
            decay,
            epsilon_min,
        })
    }

    /// Drops the weights of columns that are no longer tracked.
    pub(crate) fn retain(&mut self, keep: &[bool]) {
        let mut it = keep.iter();
        self.weights.retain(|_| *it.next().unwrap_or(&true));
    }
}

/// Column-wise shrinkage `max(0, 1 − λ/‖a_j‖)·a_j`.
pub fn prox_group_l2(x: &DenseMatrix, lambda: f64) -> DenseMatrix {
    let mut out = x.as_array().clone();
    shrink_columns(out.view_mut(), |_| lambda);
    DenseMatrix::from_array_unchecked(out)
}

/// Column-wise shrinkage with a per-column threshold.
pub fn prox_weighted_group_l2(x: &DenseMatrix, lambdas: &[f64]) -> Result<DenseMatrix> {
    if lambdas.len() != x.cols() {
        return Err(FgsrError::Dimension(format!(
            "{} thresholds for {} columns",
            lambdas.len(),
            x.cols()
        )));
    }
    let mut out = x.as_array().clone();
    shrink_columns(out.view_mut(), |j| lambdas[j]);
    Ok(DenseMatrix::from_array_unchecked(out))
}

pub(crate) fn shrink_columns(mut x: ArrayViewMut2<'_, f64>, lambda: impl Fn(usize) -> f64) {
    for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
        let norm = col.dot(&col).sqrt();
        let t = lambda(j);
        if norm <= t || norm == 0.0 {
            col.fill(0.0);
        } else {
            col *= 1.0 - t / norm;
        }
    }
}

/// Entrywise soft threshold `sign(x)·max(0, |x| − λ)`.
pub fn prox_l1(x: &DenseMatrix, lambda: f64) -> DenseMatrix {
    DenseMatrix::from_array_unchecked(soft_threshold(x.as_array(), lambda))
}

pub(crate) fn soft_threshold(x: &Array2<f64>, lambda: f64) -> Array2<f64> {
    x.mapv(|v| soft_threshold_scalar(v, lambda))
}

pub(crate) fn soft_threshold_scalar(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Sets `weights[j] = (‖a_j‖ + ε)^{q−1}` and then decays `ε` toward its floor.
pub fn reweight_update(a: &DenseMatrix, q: f64, state: &ReweightState) -> Result<ReweightState> {
    if !(q > 0.0 && q < 1.0) {
        return Err(FgsrError::invalid("q", format!("{q} is outside (0, 1)")));
    }
    let mut next = state.clone();
    next.weights = reweight_weights(&a.column_norms(), q, state.epsilon);
    next.epsilon = (state.epsilon * state.decay).max(state.epsilon_min);
    Ok(next)
}

pub(crate) fn reweight_weights(norms: &[f64], q: f64, epsilon: f64) -> Vec<f64> {
    norms.iter().map(|&n| (n + epsilon).powf(q - 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{seeded_rng, standard_normal_array};
    use approx::assert_relative_eq;

    fn rand_mat(m: usize, n: usize, seed: u64) -> DenseMatrix {
        DenseMatrix::from_array(standard_normal_array(m, n, &mut seeded_rng(seed, 5))).unwrap()
    }

    #[test]
    fn group_shrink_examples() {
        let x = DenseMatrix::new(2, 1, vec![3.0, 4.0]).unwrap();
        let y = prox_group_l2(&x, 2.0);
        assert_relative_eq!(y.get(0, 0), 1.8, max_relative = 1e-14);
        assert_relative_eq!(y.get(1, 0), 2.4, max_relative = 1e-14);
        assert_eq!(prox_group_l2(&x, 6.0).values(), &[0.0, 0.0]);
        assert_eq!(
            prox_group_l2(&DenseMatrix::zeros(3, 2), 1.0),
            DenseMatrix::zeros(3, 2)
        );
    }

    #[test]
    fn group_shrink_matches_descent_oracle() {
        // Minimize λ‖u‖ + ½‖u − x‖² along the ray u = t·x/‖x‖, which contains the minimizer.
        let x = rand_mat(5, 1, 1);
        let lambda = 0.7;
        let norm = x.column_norms()[0];
        let f = |t: f64| lambda * t.abs() + 0.5 * (t - norm).powi(2);
        let (mut lo, mut hi) = (0.0_f64, norm);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        let y = prox_group_l2(&x, lambda);
        for i in 0..5 {
            assert!((y.get(i, 0) - t * x.get(i, 0) / norm).abs() < 1e-6);
        }
    }

    #[test]
    fn l1_examples() {
        let x = DenseMatrix::new(1, 2, vec![5.0, -1.0]).unwrap();
        assert_eq!(prox_l1(&x, 2.0).values(), &[3.0, 0.0]);
        let x = rand_mat(6, 4, 2);
        let y = prox_l1(&x, 0.3);
        for (v, w) in x.values().iter().zip(y.values()) {
            let expect = v.signum() * (v.abs() - 0.3).max(0.0);
            assert_eq!(*w, expect);
        }
    }

    #[test]
    fn zero_threshold_is_identity() {
        let x = rand_mat(4, 3, 3);
        assert_eq!(prox_group_l2(&x, 0.0), x);
        assert_eq!(prox_l1(&x, 0.0), x);
    }

    #[test]
    fn weighted_examples() {
        let x = DenseMatrix::new(2, 2, vec![3.0, 3.0, 4.0, 4.0]).unwrap();
        let y = prox_weighted_group_l2(&x, &[0.0, 1e300]).unwrap();
        assert_eq!(y.values(), &[3.0, 0.0, 4.0, 0.0]);
        let x = rand_mat(5, 4, 4);
        assert_eq!(
            prox_weighted_group_l2(&x, &[0.5; 4]).unwrap(),
            prox_group_l2(&x, 0.5)
        );
        let lambdas = [0.1, 0.9, 2.5, 0.0];
        let y = prox_weighted_group_l2(&x, &lambdas).unwrap();
        let norms = x.column_norms();
        for j in 0..4 {
            let factor = (1.0 - lambdas[j] / norms[j]).max(0.0);
            for i in 0..5 {
                assert_relative_eq!(y.get(i, j), factor * x.get(i, j), max_relative = 1e-14);
            }
        }
        assert!(prox_weighted_group_l2(&x, &[0.1; 3]).is_err());
    }

    #[test]
    fn reweight_examples() {
        let state = ReweightState::new(2, 1e-300, 0.9, 1e-300).unwrap();
        let eye = DenseMatrix::identity(2);
        let next = reweight_update(&eye, 0.5, &state).unwrap();
        assert_relative_eq!(next.weights[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(next.weights[1], 1.0, max_relative = 1e-12);

        let x = DenseMatrix::new(1, 1, vec![4.0]).unwrap();
        let next = reweight_update(
            &x,
            0.5,
            &ReweightState::new(1, 1e-300, 0.9, 1e-300).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(next.weights[0], 0.5, max_relative = 1e-12);
        assert!(reweight_update(&x, 1.0, &state).is_err());
    }

    #[test]
    fn reweight_orders_and_decays() {
        let x = rand_mat(6, 5, 6);
        let norms = x.column_norms();
        let mut state = ReweightState::new(5, 1e-2, 0.9, 1e-8).unwrap();
        for _ in 0..300 {
            state = reweight_update(&x, 0.25, &state).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    if norms[i] > norms[j] {
                        assert!(state.weights[i] < state.weights[j]);
                    }
                }
            }
            assert!(state.weights.iter().all(|w| w.is_finite() && *w > 0.0));
        }
        assert_eq!(state.epsilon, 1e-8);
    }

    #[test]
    fn reweight_state_validation() {
        assert!(ReweightState::new(2, 1e-2, 0.9, 0.0).is_err());
        assert!(ReweightState::new(2, 1e-9, 0.9, 1e-8).is_err());
        assert!(ReweightState::new(2, 1e-2, 1.5, 1e-8).is_err());
        let mut s = ReweightState::new(3, 1.0, 0.9, 1e-8).unwrap();
        s.weights = vec![1.0, 2.0, 3.0];
        s.retain(&[true, false, true]);
        assert_eq!(s.weights, vec![1.0, 3.0]);
    }
}
