//! Robust PCA: split `M_e = AB + E` with a factored low-rank penalty on
//! `(A, B)` and an ℓ₁ penalty on `E`, solved by ADMM.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::linalg::{gram, product_singular_values, spd_solve_right, top_eigenvalue};
use crate::lrmc::{
    a_penalty, b_penalty_value, col_norms, decay, default_alpha, diverged, prox_linear_step,
    prune_mask, reweight_state, thresholds, Factors, ResolvedParams, SolverConfig,
    DIVERGENCE_LIMIT, STEP_SAFETY,
};
use crate::matrix::{numerical_rank, spectral_norm_sq_of, DenseMatrix};
use crate::prox::{shrink_columns, soft_threshold};
use crate::regularizers::{BPenalty, FactorPair, FgsrSpec};

/// Ridge weight of the Frobenius baseline when `gamma` is not set.
pub const F_NUCLEAR_RPCA_WEIGHT: f64 = 1.0;
/// A run has converged only once `‖M_e − AB − E‖_F ≤ PRIMAL_TOL·‖M_e‖_F`
/// in addition to the relative-change test.
pub const PRIMAL_TOL: f64 = 1e-6;
/// Growth of `μ` per iteration while the iterates are stationary but the
/// constraint is not yet met.
const POLISH_GROWTH: f64 = 1.5;
/// Largest multiple of the initial `μ` reachable by polishing.
const POLISH_CAP: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct RpcaResult {
    pub low_rank: DenseMatrix,
    pub sparse: DenseMatrix,
    pub factors: FactorPair,
    pub revealed_rank: usize,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    pub rel_change_trace: Vec<f64>,
    pub rank_trace: Vec<usize>,
    /// `‖M_e − AB − E‖_F` at the last iterate.
    pub primal_residual: f64,
    pub params: ResolvedParams,
}

/// Summary statistics of a decomposition, for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RpcaSummary {
    pub revealed_rank: usize,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub sparse_support: usize,
}

impl RpcaResult {
    pub fn summary(&self) -> RpcaSummary {
        RpcaSummary {
            revealed_rank: self.revealed_rank,
            iterations: self.iterations,
            converged: self.converged,
            primal_residual: self.primal_residual,
            sparse_support: self.sparse.values().iter().filter(|v| **v != 0.0).count(),
        }
    }
}

/// Default ℓ₁ weight `1/√max(m, n)`.
pub fn default_lambda(m: usize, n: usize) -> f64 {
    1.0 / (m.max(n).max(1) as f64).sqrt()
}

#[derive(Clone, Copy)]
enum Model {
    Fgsr { q: f64, alpha: f64, mode: BPenalty },
    FNuclear { weight: f64 },
}

/// ADMM for `(1/q)Σ‖a_j‖^q + penalty(B) + λ‖E‖₁  s.t.  M_e = AB + E`.
pub fn solve_rpca(m_e: &DenseMatrix, config: &SolverConfig) -> Result<RpcaResult> {
    config.validate()?;
    let sigma1 = spectral_norm_sq_of(&m_e.view()).sqrt();
    let alpha = config
        .alpha
        .unwrap_or_else(|| default_alpha(config.q, config.b_penalty, sigma1, config.balance));
    run(
        m_e,
        config,
        Model::Fgsr {
            q: config.q.value(),
            alpha,
            mode: config.b_penalty,
        },
        sigma1,
    )
}

/// Baseline with `(γ/2)(‖A‖_F² + ‖B‖_F²)` in place of the group penalty; `γ`
/// defaults to [`F_NUCLEAR_RPCA_WEIGHT`].
pub fn solve_rpca_f_nuclear(m_e: &DenseMatrix, config: &SolverConfig) -> Result<RpcaResult> {
    config.validate()?;
    let sigma1 = spectral_norm_sq_of(&m_e.view()).sqrt();
    let weight = match config.gamma {
        Some(g) if g > 0.0 => g,
        Some(_) => {
            return Err(FgsrError::invalid(
                "gamma",
                "must be positive for this solver",
            ))
        }
        None => F_NUCLEAR_RPCA_WEIGHT,
    };
    run(m_e, config, Model::FNuclear { weight }, sigma1)
}

fn run(m_e: &DenseMatrix, config: &SolverConfig, model: Model, sigma1: f64) -> Result<RpcaResult> {
    let (m, n) = m_e.shape();
    let lambda = config.lambda.unwrap_or_else(|| default_lambda(m, n));
    let me = m_e.as_array();
    let data_norm = me.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut params = ResolvedParams {
        lambda: Some(lambda),
        ..Default::default()
    };
    if data_norm == 0.0 || m == 0 || n == 0 {
        return Ok(RpcaResult {
            low_rank: DenseMatrix::zeros(m, n),
            sparse: DenseMatrix::zeros(m, n),
            factors: FactorPair {
                a: DenseMatrix::zeros(m, config.d),
                b: DenseMatrix::zeros(config.d, n),
                active_columns: vec![false; config.d],
            },
            revealed_rank: 0,
            iterations: 0,
            converged: true,
            objective_trace: Vec::new(),
            rel_change_trace: Vec::new(),
            rank_trace: Vec::new(),
            primal_residual: 0.0,
            params,
        });
    }
    let kappa = match model {
        Model::Fgsr {
            mode: BPenalty::GroupL2,
            ..
        } => 0.5 * config.kappa,
        _ => config.kappa,
    };
    let mut mu = config.mu.unwrap_or(config.balance / (kappa * sigma1));
    let mu_cap = POLISH_CAP * mu;
    let (spec, q) = match model {
        Model::Fgsr { q, alpha, mode } => {
            params.alpha = Some(alpha);
            (Some(FgsrSpec::new(config.q, alpha, mode)?), q)
        }
        Model::FNuclear { weight } => {
            params.gamma = Some(weight);
            (None, 1.0)
        }
    };
    let mean_abs = me.iter().map(|v| v.abs()).sum::<f64>() / (m * n) as f64;
    let mut f = Factors::init(m, n, config.d, mean_abs, config.seed, spec.as_ref());
    let mut rw = match model {
        Model::Fgsr { .. } => reweight_state(q, &f.a),
        Model::FNuclear { .. } => None,
    };
    let mut e = Array2::<f64>::zeros((m, n));
    let mut dual = Array2::<f64>::zeros((m, n));
    let mut ab = f.product();

    let mut objective_trace = Vec::new();
    let mut rel_change_trace = Vec::new();
    let mut rank_trace = Vec::new();
    let mut converged = false;
    let mut primal = data_norm;

    for it in 0..config.max_iters {
        let mut t = me - &e;
        t.scaled_add(1.0 / mu, &dual);
        let ab_old = ab;

        match model {
            Model::Fgsr { alpha, mode, .. } => {
                let lip = mu * top_eigenvalue(&gram(&f.bt.view())) * (1.0 + STEP_SAFETY);
                let grad = (&t - &ab_old).dot(&f.bt) * (-mu);
                let lambdas = thresholds(&f.a, q, &mut rw, 1.0);
                f.a = prox_linear_step(&f.a.view(), &grad.view(), lip, &lambdas);
                let keep = prune_mask(&col_norms(&f.a), config.prune_tol);
                f.retain(&keep);
                if let Some(s) = rw.as_mut() {
                    s.retain(&keep);
                }
                if f.len() == 0 {
                    ab = f.product();
                    break;
                }
                let ta = t.t().dot(&f.a);
                let gram_a = gram(&f.a.view());
                match mode {
                    BPenalty::HalfFrobeniusSq => {
                        let k = f.len();
                        let g = &gram_a * mu + Array2::<f64>::eye(k) * alpha;
                        f.bt = spd_solve_right(&(ta * mu), &g)?;
                    }
                    BPenalty::GroupL2 => {
                        let lip_b = mu * top_eigenvalue(&gram_a) * (1.0 + STEP_SAFETY);
                        let grad_b = (f.bt.dot(&gram_a) - ta) * mu;
                        f.bt.scaled_add(-1.0 / lip_b, &grad_b);
                        shrink_columns(f.bt.view_mut(), |_| alpha / lip_b);
                        let keep = prune_mask(&col_norms(&f.bt), config.prune_tol);
                        f.retain(&keep);
                        if let Some(s) = rw.as_mut() {
                            s.retain(&keep);
                        }
                        if f.len() == 0 {
                            ab = f.product();
                            break;
                        }
                    }
                }
            }
            Model::FNuclear { weight } => {
                let k = f.len();
                let g = gram(&f.bt.view()) * mu + Array2::<f64>::eye(k) * weight;
                f.a = spd_solve_right(&(t.dot(&f.bt) * mu), &g)?;
                let g = gram(&f.a.view()) * mu + Array2::<f64>::eye(k) * weight;
                f.bt = spd_solve_right(&(t.t().dot(&f.a) * mu), &g)?;
            }
        }

        ab = f.product();
        let mut z = me - &ab;
        z.scaled_add(1.0 / mu, &dual);
        e = soft_threshold(&z, lambda / mu);
        let resid = me - &ab - &e;
        dual.scaled_add(mu, &resid);
        primal = resid.iter().map(|v| v * v).sum::<f64>().sqrt();

        let change = (&ab - &ab_old).iter().map(|v| v * v).sum::<f64>().sqrt();
        let prev = ab_old.iter().map(|v| v * v).sum::<f64>().sqrt();
        let product_change = change / prev.max(f64::MIN_POSITIVE);
        let low_rank_term = match model {
            Model::Fgsr { alpha, mode, .. } => {
                a_penalty(&col_norms(&f.a), q, &rw) + b_penalty_value(&f.bt, alpha, mode)
            }
            Model::FNuclear { weight } => {
                0.5 * weight
                    * (f.a.iter().map(|v| v * v).sum::<f64>()
                        + f.bt.iter().map(|v| v * v).sum::<f64>())
            }
        };
        let objective = low_rank_term + lambda * e.iter().map(|v| v.abs()).sum::<f64>();
        let objective_change = objective_trace.last().map_or(f64::INFINITY, |&o: &f64| {
            (objective - o).abs() / objective.abs().max(f64::MIN_POSITIVE)
        });
        let rel_change = product_change.max(objective_change);
        objective_trace.push(objective);
        rel_change_trace.push(rel_change);
        rank_trace.push(f.len());
        if !objective.is_finite()
            || !product_change.is_finite()
            || primal > DIVERGENCE_LIMIT * data_norm
        {
            return Err(diverged(
                it + 1,
                "primal residual",
                primal,
                &objective_trace,
            ));
        }
        if config.adaptive_mu {
            let dual_res = mu * change;
            if primal > 10.0 * dual_res {
                mu *= 2.0;
            } else if dual_res > 10.0 * primal {
                mu /= 2.0;
            }
        }
        decay(&mut rw);
        if rel_change < config.rel_tol {
            if primal <= PRIMAL_TOL * data_norm {
                converged = true;
                break;
            }
            mu = (mu * POLISH_GROWTH).min(mu_cap);
        }
    }
    params.mu = Some(mu);

    let revealed_rank = match model {
        Model::Fgsr { .. } => f.len(),
        Model::FNuclear { .. } => {
            numerical_rank(&product_singular_values(&f.a.view(), &f.bt.view()))
        }
    };
    let mut factors = f.into_pair();
    if matches!(model, Model::FNuclear { .. }) {
        factors.active_columns.iter_mut().for_each(|x| *x = true);
    }
    Ok(RpcaResult {
        low_rank: DenseMatrix::from_array_unchecked(ab),
        sparse: DenseMatrix::from_array_unchecked(e),
        factors,
        revealed_rank,
        iterations: objective_trace.len(),
        converged,
        objective_trace,
        rel_change_trace,
        rank_trace,
        primal_residual: primal,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{gen_rpca_instance, relative_error};
    use crate::matrix::{frobenius_norm, random_low_rank};
    use crate::regularizers::QExponent;

    fn planted(
        m: usize,
        r: usize,
        density: f64,
        seed: u64,
    ) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        let (l, s) = gen_rpca_instance(m, m, r, density, 1.0, seed).unwrap();
        let m_e = l.add(&s).unwrap();
        (l, s, m_e)
    }

    #[test]
    fn clean_input_with_large_lambda_has_no_sparse_part() {
        let m = random_low_rank(40, 30, 3, 1).unwrap();
        let c = SolverConfig {
            d: 8,
            lambda: Some(10.0),
            ..Default::default()
        };
        let res = solve_rpca(&m, &c).unwrap();
        assert!(res.sparse.values().iter().all(|&v| v == 0.0));
        assert!(relative_error(&m, &res.low_rank).unwrap() <= 1e-5);
        assert_eq!(res.revealed_rank, 3);
    }

    #[test]
    fn planted_decomposition_is_recovered() {
        let (l, s, m_e) = planted(100, 5, 0.2, 2);
        let c = SolverConfig {
            d: 10,
            ..Default::default()
        };
        let res = solve_rpca(&m_e, &c).unwrap();
        assert!(relative_error(&l, &res.low_rank).unwrap() <= 1e-2);
        assert!(res.converged);
        assert_eq!(res.revealed_rank, 5);
        let data_norm = frobenius_norm(&m_e);
        assert!(res.primal_residual <= PRIMAL_TOL * data_norm);
        let recon = res.low_rank.add(&res.sparse).unwrap();
        let gap = frobenius_norm(&m_e.sub(&recon).unwrap());
        assert!((gap - res.primal_residual).abs() <= 1e-9 * data_norm);

        let total = (100 * 100) as f64;
        let planted_fraction = s.values().iter().filter(|v| **v != 0.0).count() as f64 / total;
        let found_fraction = res.summary().sparse_support as f64 / total;
        assert!(
            (found_fraction - planted_fraction).abs() <= 0.1,
            "{found_fraction} vs {planted_fraction}"
        );
    }

    #[test]
    fn other_exponents_and_penalties_recover() {
        let (l, _, m_e) = planted(60, 3, 0.1, 3);
        for (q, b_penalty) in [
            (QExponent::Half, BPenalty::HalfFrobeniusSq),
            (QExponent::One, BPenalty::GroupL2),
        ] {
            let c = SolverConfig {
                d: 9,
                q,
                b_penalty,
                ..Default::default()
            };
            let res = solve_rpca(&m_e, &c).unwrap();
            let err = relative_error(&l, &res.low_rank).unwrap();
            assert!(err <= 1e-2, "{q:?} {b_penalty:?}: {err}");
        }
    }

    #[test]
    fn scaling_the_input_scales_the_output() {
        let (_, _, m_e) = planted(40, 3, 0.1, 4);
        let c = SolverConfig {
            d: 6,
            lambda: Some(0.15),
            ..Default::default()
        };
        let base = solve_rpca(&m_e, &c).unwrap();
        let scaled = solve_rpca(&m_e.scaled(3.0), &c).unwrap();
        let l_err = relative_error(&base.low_rank.scaled(3.0), &scaled.low_rank).unwrap();
        assert!(l_err <= 1e-4, "{l_err}");
        let s_gap = frobenius_norm(&base.sparse.scaled(3.0).sub(&scaled.sparse).unwrap());
        assert!(s_gap <= 1e-4 * frobenius_norm(&m_e.scaled(3.0)), "{s_gap}");
        assert_eq!(base.revealed_rank, scaled.revealed_rank);
    }

    #[test]
    fn f_nuclear_on_clean_input() {
        let m = random_low_rank(40, 30, 3, 5).unwrap();
        let c = SolverConfig {
            d: 3,
            gamma: Some(1e-3),
            lambda: Some(10.0),
            ..Default::default()
        };
        let res = solve_rpca_f_nuclear(&m, &c).unwrap();
        let recon = res.low_rank.add(&res.sparse).unwrap();
        assert!(relative_error(&m, &recon).unwrap() <= 1e-5);
        assert!(relative_error(&m, &res.low_rank).unwrap() <= 1e-3);
    }

    #[test]
    fn zero_input_and_validation() {
        let z = DenseMatrix::zeros(5, 4);
        let res = solve_rpca(&z, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res
            .low_rank
            .values()
            .iter()
            .chain(res.sparse.values())
            .all(|&v| v == 0.0));
        let m = random_low_rank(5, 4, 1, 0).unwrap();
        assert!(solve_rpca(
            &m,
            &SolverConfig {
                d: 0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(solve_rpca_f_nuclear(
            &m,
            &SolverConfig {
                gamma: Some(0.0),
                ..Default::default()
            }
        )
        .is_err());
        assert_eq!(default_lambda(100, 400), 0.05);
    }
}
