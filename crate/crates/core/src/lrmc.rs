//! Matrix completion solvers.
//!
//! * [`solve_noiseless_admm`]: linearized ADMM for exact completion under the
//!   constraint `P_Ω(X) = P_Ω(M)`.
//! * [`solve_noisy_palm`] and [`solve_generalized`]: proximal alternating
//!   linearized minimization of a least-squares fit plus the factored penalty,
//!   with iterative reweighting when `q < 1`.
//! * [`solve_f_nuclear`] and [`solve_svt_nuclear`]: nuclear-norm baselines.
//!
//! All factored solvers store `A` (m×d) and `Bᵀ` (n×d), drop pruned columns
//! from storage, and expand back to the configured width on return.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::linalg::{
    gram, product_diff_norm_sq, product_norm_sq, product_singular_values, select_columns,
    spd_solve_right, top_eigenvalue,
};
use crate::matrix::{numerical_rank, seeded_rng, standard_normal_array, thin_svd, DenseMatrix};
use crate::observations::ObservationSet;
use crate::prox::{reweight_weights, shrink_columns, ReweightState, EPSILON_DECAY};
use crate::regularizers::{BPenalty, FactorPair, FgsrSpec, QExponent};

/// Relative safety margin added to every Lipschitz estimate.
pub const STEP_SAFETY: f64 = 1e-6;
/// A run is declared divergent once its residual exceeds this multiple of the data norm.
pub const DIVERGENCE_LIMIT: f64 = 1e12;
const BACKTRACK_FACTOR: f64 = 1.1;
const MAX_BACKTRACKS: usize = 200;
/// Initial reweighting smoothing, relative to the largest initial column norm of `A`.
const EPSILON_START: f64 = 1.0;
/// Smoothing floor, relative to the same scale.
const EPSILON_FLOOR: f64 = 1e-8;
const INIT_STREAM: u64 = 7;
/// The constrained solver has converged only once the factor product also
/// matches the observations: `‖P_Ω(M − AB)‖_F ≤ PRIMAL_TOL·‖P_Ω(M)‖_F`.
pub const PRIMAL_TOL: f64 = 1e-5;

/// Hyperparameters for every solver. `None` selects a data-driven default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial factor width.
    pub d: usize,
    /// Weight of the `B` penalty.
    pub alpha: Option<f64>,
    /// Data-fit weight of the noisy model.
    pub beta: Option<f64>,
    /// Regularization weight of the generalized model and the baselines.
    pub gamma: Option<f64>,
    /// Weight of the ℓ₁ corruption term in robust PCA.
    pub lambda: Option<f64>,
    pub q: QExponent,
    pub b_penalty: BPenalty,
    /// ADMM penalty parameter.
    pub mu: Option<f64>,
    /// Per-step shrinkage ratio that sets the default ADMM penalty.
    pub kappa: f64,
    /// Marginal penalty at the top singular value that sets the default `alpha`.
    pub balance: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Columns with norm at most `prune_tol` times the largest column norm are removed.
    pub prune_tol: f64,
    /// Residual balancing of the ADMM penalty.
    pub adaptive_mu: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            d: 10,
            alpha: None,
            beta: None,
            gamma: None,
            lambda: None,
            q: QExponent::One,
            b_penalty: BPenalty::HalfFrobeniusSq,
            mu: None,
            kappa: 0.02,
            balance: 0.5,
            rel_tol: 1e-5,
            max_iters: 1000,
            prune_tol: 1e-8,
            adaptive_mu: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(FgsrError::invalid("d", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(FgsrError::invalid("max_iters", "must be at least 1"));
        }
        check_positive("rel_tol", Some(self.rel_tol))?;
        check_positive("kappa", Some(self.kappa))?;
        check_positive("balance", Some(self.balance))?;
        check_positive("prune_tol", Some(self.prune_tol))?;
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("lambda", self.lambda)?;
        check_positive("mu", self.mu)?;
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(FgsrError::invalid(
                    "gamma",
                    format!("{g} is not a nonnegative number"),
                ));
            }
        }
        Ok(())
    }
}

fn check_positive(name: &'static str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(FgsrError::invalid(
            name,
            format!("{x} is not a positive number"),
        )),
        _ => Ok(()),
    }
}

/// Parameter values a run actually used after defaults were resolved.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    pub x_hat: DenseMatrix,
    pub factors: FactorPair,
    pub revealed_rank: usize,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub rel_change_trace: Vec<f64>,
    /// Number of stored factor columns after each iteration.
    pub rank_trace: Vec<usize>,
    /// True when the relative change fell below `rel_tol`; false on the iteration cap.
    pub converged: bool,
    pub params: ResolvedParams,
}

/// `max(1, ⌊|Ω| / (m + n)⌋)`.
pub fn default_rank_heuristic(omega: &ObservationSet) -> usize {
    let (m, n) = omega.shape();
    (omega.len() / (m + n).max(1)).max(1)
}

/// Default `alpha`: the closed-form penalty has marginal cost `balance` at the
/// top singular value `sigma1`.
pub fn default_alpha(q: QExponent, b_penalty: BPenalty, sigma1: f64, balance: f64) -> f64 {
    let q = q.value();
    match b_penalty {
        BPenalty::HalfFrobeniusSq => balance.powf((q + 2.0) / q) * sigma1.powf((2.0 - q) / q),
        BPenalty::GroupL2 => balance.powf((q + 1.0) / q) * sigma1.powf(1.0 / q),
    }
}

/// Default regularization weight for the noisy models.
pub fn default_gamma(omega: &ObservationSet) -> f64 {
    0.5 * omega.rms()
}

/// Estimate of the top singular value of the full matrix behind `omega`.
pub(crate) fn sigma1_estimate(omega: &ObservationSet) -> f64 {
    let rho = omega.sampling_rate();
    if rho == 0.0 {
        return 0.0;
    }
    omega.spectral_norm_sq().sqrt() / rho
}

/// Factor storage with pruned columns removed.
pub(crate) struct Factors {
    pub a: Array2<f64>,
    pub bt: Array2<f64>,
    /// Original column index of every stored column.
    pub ids: Vec<usize>,
    pub width: usize,
}

impl Factors {
    /// Gaussian entries with variance `scale / d`; with an `FgsrSpec`, every column
    /// pair is rescaled to the optimal split of its product norm.
    pub fn init(
        m: usize,
        n: usize,
        d: usize,
        scale: f64,
        seed: u64,
        spec: Option<&FgsrSpec>,
    ) -> Self {
        let mut rng = seeded_rng(seed, INIT_STREAM);
        let sd = (scale.max(f64::MIN_POSITIVE) / d as f64).sqrt();
        let mut a = standard_normal_array(m, d, &mut rng) * sd;
        let mut bt = standard_normal_array(n, d, &mut rng) * sd;
        if let Some(spec) = spec {
            for j in 0..d {
                let na = a.column(j).dot(&a.column(j)).sqrt();
                let nb = bt.column(j).dot(&bt.column(j)).sqrt();
                if na > 0.0 && nb > 0.0 {
                    let (ta, tb) = spec.balanced_norms(na * nb);
                    a.column_mut(j).mapv_inplace(|v| v * ta / na);
                    bt.column_mut(j).mapv_inplace(|v| v * tb / nb);
                }
            }
        }
        Factors {
            a,
            bt,
            ids: (0..d).collect(),
            width: d,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn retain(&mut self, keep: &[bool]) {
        self.a = select_columns(&self.a, keep);
        self.bt = select_columns(&self.bt, keep);
        let mut it = keep.iter();
        self.ids.retain(|_| *it.next().unwrap_or(&true));
    }

    pub fn product(&self) -> Array2<f64> {
        self.a.dot(&self.bt.t())
    }

    pub fn into_pair(self) -> FactorPair {
        let m = self.a.nrows();
        let n = self.bt.nrows();
        let mut a = Array2::zeros((m, self.width));
        let mut b = Array2::zeros((self.width, n));
        let mut active = vec![false; self.width];
        for (k, &j) in self.ids.iter().enumerate() {
            a.column_mut(j).assign(&self.a.column(k));
            b.row_mut(j).assign(&self.bt.column(k));
            active[j] = true;
        }
        FactorPair {
            a: DenseMatrix::from_array_unchecked(a),
            b: DenseMatrix::from_array_unchecked(b),
            active_columns: active,
        }
    }
}

/// Flags columns whose norm exceeds `tol` times the largest norm.
pub(crate) fn prune_mask(norms: &[f64], tol: f64) -> Vec<bool> {
    let top = norms.iter().fold(0.0_f64, |m, &v| m.max(v));
    norms.iter().map(|&v| top > 0.0 && v > tol * top).collect()
}

pub(crate) fn col_norms(x: &Array2<f64>) -> Vec<f64> {
    crate::matrix::column_norms(&x.view())
}

/// Reweighting schedule for `q < 1`; `None` when `q = 1`.
pub(crate) fn reweight_state(q: f64, a: &Array2<f64>) -> Option<ReweightState> {
    if q >= 1.0 {
        return None;
    }
    let scale = col_norms(a)
        .into_iter()
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    Some(
        ReweightState::new(
            a.ncols(),
            EPSILON_START * scale,
            EPSILON_DECAY,
            EPSILON_FLOOR * scale,
        )
        .expect("schedule constants are valid"),
    )
}

pub(crate) fn decay(state: &mut Option<ReweightState>) {
    if let Some(s) = state {
        s.epsilon = (s.epsilon * s.decay).max(s.epsilon_min);
    }
}

/// `(1/q)Σ(‖a_j‖ + ε)^q`, or `Σ‖a_j‖` when `q = 1`.
pub(crate) fn a_penalty(norms: &[f64], q: f64, state: &Option<ReweightState>) -> f64 {
    match state {
        None => norms.iter().sum(),
        Some(s) => norms.iter().map(|&n| (n + s.epsilon).powf(q) / q).sum(),
    }
}

pub(crate) fn b_penalty_value(bt: &Array2<f64>, alpha: f64, mode: BPenalty) -> f64 {
    match mode {
        BPenalty::HalfFrobeniusSq => 0.5 * alpha * bt.iter().map(|v| v * v).sum::<f64>(),
        BPenalty::GroupL2 => alpha * col_norms(bt).iter().sum::<f64>(),
    }
}

/// Per-column thresholds `base·w_j`, refreshing the weights from `a` first.
pub(crate) fn thresholds(
    a: &Array2<f64>,
    q: f64,
    state: &mut Option<ReweightState>,
    base: f64,
) -> Vec<f64> {
    match state {
        None => vec![base; a.ncols()],
        Some(s) => {
            s.weights = reweight_weights(&col_norms(a), q, s.epsilon);
            s.weights.iter().map(|w| base * w).collect()
        }
    }
}

/// One linearized proximal step on `A`: `prox(A − τ·grad)` with per-column
/// thresholds `τ·lambdas[j]`, where `τ = 1 / lipschitz`.
pub(crate) fn prox_linear_step(
    a: &ArrayView2<'_, f64>,
    grad: &ArrayView2<'_, f64>,
    lipschitz: f64,
    lambdas: &[f64],
) -> Array2<f64> {
    let tau = 1.0 / lipschitz;
    let mut y = a.to_owned();
    y.scaled_add(-tau, grad);
    shrink_columns(y.view_mut(), |j| tau * lambdas[j]);
    y
}

pub(crate) fn diverged(
    iteration: usize,
    quantity: &'static str,
    value: f64,
    trace: &[f64],
) -> FgsrError {
    FgsrError::Diverged {
        iteration,
        quantity,
        value,
        objective_trace: trace.to_vec(),
    }
}

fn check_input(omega: &ObservationSet, config: &SolverConfig) -> Result<()> {
    config.validate()?;
    if omega.is_empty() {
        return Err(FgsrError::EmptyObservations);
    }
    Ok(())
}

fn zero_result(
    omega: &ObservationSet,
    config: &SolverConfig,
    params: ResolvedParams,
) -> RecoveryResult {
    let (m, n) = omega.shape();
    RecoveryResult {
        x_hat: DenseMatrix::zeros(m, n),
        factors: FactorPair {
            a: DenseMatrix::zeros(m, config.d),
            b: DenseMatrix::zeros(config.d, n),
            active_columns: vec![false; config.d],
        },
        revealed_rank: 0,
        iterations: 0,
        objective_trace: Vec::new(),
        rel_change_trace: Vec::new(),
        rank_trace: Vec::new(),
        converged: true,
        params,
    }
}

/// Linearized ADMM for
/// `min (1/q)Σ‖a_j‖^q + penalty(B)  s.t.  X = AB, P_Ω(X) = P_Ω(M)`.
///
/// The returned `x_hat` equals the observations on Ω exactly.
pub fn solve_noiseless_admm(
    omega: &ObservationSet,
    config: &SolverConfig,
) -> Result<RecoveryResult> {
    check_input(omega, config)?;
    let (m, n) = omega.shape();
    let sigma1 = sigma1_estimate(omega);
    if sigma1 == 0.0 {
        return Ok(zero_result(omega, config, ResolvedParams::default()));
    }
    let q = config.q.value();
    let mode = config.b_penalty;
    let alpha = config
        .alpha
        .unwrap_or_else(|| default_alpha(config.q, mode, sigma1, config.balance));
    let kappa = match mode {
        BPenalty::HalfFrobeniusSq => config.kappa,
        BPenalty::GroupL2 => 0.5 * config.kappa,
    };
    let mut mu = config.mu.unwrap_or(config.balance / (kappa * sigma1));
    let spec = FgsrSpec::new(config.q, alpha, mode)?;

    let mut f = Factors::init(m, n, config.d, omega.mean_abs(), config.seed, Some(&spec));
    let mut rw = reweight_state(q, &f.a);
    let obs = omega.values();
    let data_norm = omega.norm_sq().sqrt();
    let mut lam = vec![0.0; omega.len()];
    let mut ab = omega.sample_product(&f.a.view(), &f.bt.view());

    let mut objective_trace = Vec::new();
    let mut rel_change_trace = Vec::new();
    let mut rank_trace = Vec::new();
    let mut converged = false;
    let mut mu_trace = mu;

    for it in 0..config.max_iters {
        // Residual of the augmented term; it vanishes off Ω.
        let s: Vec<f64> = (0..obs.len())
            .map(|k| obs[k] + lam[k] / mu - ab[k])
            .collect();
        let a_old = f.a.clone();
        let bt_old = f.bt.clone();
        let ab_old = ab.clone();

        let lip = mu * top_eigenvalue(&gram(&f.bt.view())) * (1.0 + STEP_SAFETY);
        let grad = omega.sparse_times(&s, &f.bt.view()) * (-mu);
        let lambdas = thresholds(&f.a, q, &mut rw, 1.0);
        let a_new = prox_linear_step(&f.a.view(), &grad.view(), lip, &lambdas);
        let keep = prune_mask(&col_norms(&a_new), config.prune_tol);
        f.a = a_new;
        f.retain(&keep);
        if f.len() == 0 {
            break;
        }
        if let Some(state) = rw.as_mut() {
            state.retain(&keep);
        }
        let bt_kept = f.bt.clone();

        // Tᵀ·A with T = A_old·B_old + S.
        let ta = bt_old.dot(&a_old.t().dot(&f.a)) + omega.sparse_t_times(&s, &f.a.view());
        match mode {
            BPenalty::HalfFrobeniusSq => {
                let k = f.a.ncols();
                let g = gram(&f.a.view()) * mu + Array2::<f64>::eye(k) * alpha;
                f.bt = spd_solve_right(&(ta * mu), &g)?;
            }
            BPenalty::GroupL2 => {
                let gram_a = gram(&f.a.view());
                let lip_b = mu * top_eigenvalue(&gram_a) * (1.0 + STEP_SAFETY);
                let grad_b = (bt_kept.dot(&gram_a) - ta) * mu;
                let mut y = bt_kept.clone();
                y.scaled_add(-1.0 / lip_b, &grad_b);
                shrink_columns(y.view_mut(), |_| alpha / lip_b);
                f.bt = y;
                let keep = prune_mask(&col_norms(&f.bt), config.prune_tol);
                f.retain(&keep);
                if f.len() == 0 {
                    break;
                }
                if let Some(state) = rw.as_mut() {
                    state.retain(&keep);
                }
            }
        }

        ab = omega.sample_product(&f.a.view(), &f.bt.view());
        let mut primal_sq = 0.0;
        let mut omega_change_sq = 0.0;
        for k in 0..obs.len() {
            let r = obs[k] - ab[k];
            lam[k] += mu * r;
            primal_sq += r * r;
            omega_change_sq += (ab[k] - ab_old[k]).powi(2);
        }
        let full_change_sq =
            product_diff_norm_sq(&f.a.view(), &f.bt.view(), &a_old.view(), &bt_old.view());
        let old_off_sq = product_norm_sq(&a_old.view(), &bt_old.view())
            - ab_old.iter().map(|v| v * v).sum::<f64>();
        let x_old_sq = data_norm * data_norm + old_off_sq.max(0.0);
        let rel_change =
            ((full_change_sq - omega_change_sq).max(0.0) / x_old_sq.max(f64::MIN_POSITIVE)).sqrt();

        let objective = a_penalty(&col_norms(&f.a), q, &rw) + b_penalty_value(&f.bt, alpha, mode);
        objective_trace.push(objective);
        rel_change_trace.push(rel_change);
        rank_trace.push(f.len());
        let primal = primal_sq.sqrt();
        if !objective.is_finite()
            || !rel_change.is_finite()
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
            let dual = mu * full_change_sq.sqrt();
            if primal > 10.0 * dual {
                mu *= 2.0;
            } else if dual > 10.0 * primal {
                mu /= 2.0;
            }
        }
        mu_trace = mu;
        decay(&mut rw);
        if rel_change < config.rel_tol && primal <= PRIMAL_TOL * data_norm {
            converged = true;
            break;
        }
    }

    let mut x = f.product();
    for (i, j, v) in omega.iter() {
        x[[i, j]] = v;
    }
    let iterations = objective_trace.len();
    let revealed_rank = f.len();
    Ok(RecoveryResult {
        x_hat: DenseMatrix::from_array_unchecked(x),
        factors: f.into_pair(),
        revealed_rank,
        iterations,
        objective_trace,
        rel_change_trace,
        rank_trace,
        converged,
        params: ResolvedParams {
            alpha: Some(alpha),
            mu: Some(mu_trace),
            ..Default::default()
        },
    })
}

#[derive(Clone, Copy, Debug)]
enum PalmModel {
    Fgsr { q: f64, alpha: f64, mode: BPenalty },
    FNuclear,
}

struct PalmState<'a> {
    omega: &'a ObservationSet,
    g: f64,
    model: PalmModel,
    rw: Option<ReweightState>,
}

impl PalmState<'_> {
    fn objective(&self, a: &Array2<f64>, bt: &Array2<f64>, ab: &[f64]) -> f64 {
        let fit = 0.5
            * ab.iter()
                .zip(self.omega.values())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>();
        let reg = match self.model {
            PalmModel::Fgsr { q, alpha, mode } => {
                a_penalty(&col_norms(a), q, &self.rw) + b_penalty_value(bt, alpha, mode)
            }
            PalmModel::FNuclear => {
                0.5 * (a.iter().map(|v| v * v).sum::<f64>() + bt.iter().map(|v| v * v).sum::<f64>())
            }
        };
        fit + self.g * reg
    }

    fn residual(&self, ab: &[f64]) -> Vec<f64> {
        ab.iter()
            .zip(self.omega.values())
            .map(|(x, y)| x - y)
            .collect()
    }
}

/// PALM on `½‖P_Ω(M − AB)‖² + g·R(A, B)`; the recorded objective is
/// multiplied by `report_scale`.
fn palm(
    omega: &ObservationSet,
    config: &SolverConfig,
    model: PalmModel,
    g: f64,
    report_scale: f64,
    params: ResolvedParams,
) -> Result<RecoveryResult> {
    let (m, n) = omega.shape();
    let spec = match model {
        PalmModel::Fgsr { alpha, mode, .. } => Some(FgsrSpec::new(config.q, alpha, mode)?),
        PalmModel::FNuclear => None,
    };
    let mut f = Factors::init(m, n, config.d, omega.mean_abs(), config.seed, spec.as_ref());
    let q = match model {
        PalmModel::Fgsr { q, .. } => q,
        PalmModel::FNuclear => 1.0,
    };
    let mut st = PalmState {
        omega,
        g,
        model,
        rw: reweight_state(q, &f.a),
    };
    let data_norm = omega.norm_sq().sqrt();
    let mut ab = omega.sample_product(&f.a.view(), &f.bt.view());
    let mut objective_trace = Vec::new();
    let mut rel_change_trace = Vec::new();
    let mut rank_trace = Vec::new();
    let mut converged = false;

    for it in 0..config.max_iters {
        let a_old = f.a.clone();
        let bt_old = f.bt.clone();

        // A-step.
        let start = st.objective(&f.a, &f.bt, &ab);
        let r = st.residual(&ab);
        let grad = omega.sparse_times(&r, &f.bt.view());
        let lb = top_eigenvalue(&gram(&f.bt.view()));
        let lambdas = match model {
            PalmModel::Fgsr { .. } => thresholds(&f.a, q, &mut st.rw, g),
            PalmModel::FNuclear => Vec::new(),
        };
        let step_a = |lip: f64| match model {
            PalmModel::Fgsr { .. } => prox_linear_step(&f.a.view(), &grad.view(), lip, &lambdas),
            PalmModel::FNuclear => {
                let mut y = f.a.clone();
                y.scaled_add(-1.0 / lip, &(&grad + &(&f.a * g)));
                y
            }
        };
        let base = match model {
            PalmModel::Fgsr { .. } => lb,
            PalmModel::FNuclear => lb + g,
        };
        let (a_new, ab_new) = backtrack(base, start, |lip| {
            let a = step_a(lip);
            let ab = omega.sample_product(&a.view(), &f.bt.view());
            let obj = st.objective(&a, &f.bt, &ab);
            (a, ab, obj)
        });
        f.a = a_new;
        ab = ab_new;
        if matches!(model, PalmModel::Fgsr { .. }) {
            let keep = prune_mask(&col_norms(&f.a), config.prune_tol);
            if keep.iter().all(|&k| !k) {
                f.retain(&keep);
                break;
            }
            if keep.iter().any(|&k| !k) {
                f.retain(&keep);
                if let Some(s) = st.rw.as_mut() {
                    s.retain(&keep);
                }
                ab = omega.sample_product(&f.a.view(), &f.bt.view());
            }
        }

        // B-step.
        let start = st.objective(&f.a, &f.bt, &ab);
        let r = st.residual(&ab);
        let grad = omega.sparse_t_times(&r, &f.a.view());
        let la = top_eigenvalue(&gram(&f.a.view()));
        let (base, shrink, smooth) = match model {
            PalmModel::Fgsr {
                alpha,
                mode: BPenalty::HalfFrobeniusSq,
                ..
            } => (la + g * alpha, 0.0, g * alpha),
            PalmModel::Fgsr {
                alpha,
                mode: BPenalty::GroupL2,
                ..
            } => (la, g * alpha, 0.0),
            PalmModel::FNuclear => (la + g, 0.0, g),
        };
        let (bt_new, ab_new) = backtrack(base, start, |lip| {
            let mut y = f.bt.clone();
            y.scaled_add(-1.0 / lip, &(&grad + &(&f.bt * smooth)));
            if shrink > 0.0 {
                shrink_columns(y.view_mut(), |_| shrink / lip);
            }
            let ab = omega.sample_product(&f.a.view(), &y.view());
            let obj = st.objective(&f.a, &y, &ab);
            (y, ab, obj)
        });
        f.bt = bt_new;
        ab = ab_new;
        if shrink > 0.0 {
            let keep = prune_mask(&col_norms(&f.bt), config.prune_tol);
            if keep.iter().all(|&k| !k) {
                f.retain(&keep);
                break;
            }
            if keep.iter().any(|&k| !k) {
                f.retain(&keep);
                if let Some(s) = st.rw.as_mut() {
                    s.retain(&keep);
                }
                ab = omega.sample_product(&f.a.view(), &f.bt.view());
            }
        }

        let objective = st.objective(&f.a, &f.bt, &ab);
        let prev_sq = product_norm_sq(&a_old.view(), &bt_old.view());
        let change_sq =
            product_diff_norm_sq(&f.a.view(), &f.bt.view(), &a_old.view(), &bt_old.view());
        let rel_change = (change_sq / prev_sq.max(f64::MIN_POSITIVE)).sqrt();
        objective_trace.push(objective * report_scale);
        rel_change_trace.push(rel_change);
        rank_trace.push(f.len());
        let fit = (2.0 * objective).sqrt();
        if !objective.is_finite()
            || !rel_change.is_finite()
            || fit > DIVERGENCE_LIMIT * data_norm.max(1.0)
        {
            return Err(diverged(it + 1, "objective", objective, &objective_trace));
        }
        decay(&mut st.rw);
        if rel_change < config.rel_tol {
            converged = true;
            break;
        }
    }

    let x = f.product();
    let revealed_rank = match model {
        PalmModel::Fgsr { .. } => f.len(),
        PalmModel::FNuclear => numerical_rank(&product_singular_values(&f.a.view(), &f.bt.view())),
    };
    let mut factors = f.into_pair();
    if matches!(model, PalmModel::FNuclear) {
        factors.active_columns.iter_mut().for_each(|x| *x = true);
    }
    Ok(RecoveryResult {
        x_hat: DenseMatrix::from_array_unchecked(x),
        factors,
        revealed_rank,
        iterations: objective_trace.len(),
        objective_trace,
        rel_change_trace,
        rank_trace,
        converged,
        params,
    })
}

/// Runs `step` with Lipschitz estimate `base·(1 + δ)`, growing it by 10%
/// until the objective does not increase.
fn backtrack<F>(base: f64, start: f64, mut step: F) -> (Array2<f64>, Vec<f64>)
where
    F: FnMut(f64) -> (Array2<f64>, Vec<f64>, f64),
{
    let mut lip = (base * (1.0 + STEP_SAFETY)).max(f64::MIN_POSITIVE);
    let slack = 1e-12 * start.abs();
    let mut tries = 0;
    loop {
        let (x, ab, obj) = step(lip);
        if obj <= start + slack || tries >= MAX_BACKTRACKS {
            return (x, ab);
        }
        lip *= BACKTRACK_FACTOR;
        tries += 1;
    }
}

fn resolve_fgsr_alpha(omega: &ObservationSet, config: &SolverConfig, q: QExponent) -> f64 {
    config.alpha.unwrap_or_else(|| {
        default_alpha(q, config.b_penalty, sigma1_estimate(omega), config.balance)
    })
}

/// PALM for `‖A‖_{2,1} + penalty(B) + (β/2)‖P_Ω(M_e − AB)‖²` (`q` is fixed to 1).
pub fn solve_noisy_palm(omega: &ObservationSet, config: &SolverConfig) -> Result<RecoveryResult> {
    check_input(omega, config)?;
    if omega.norm_sq() == 0.0 {
        return Ok(zero_result(omega, config, ResolvedParams::default()));
    }
    let beta = config.beta.unwrap_or_else(|| 1.0 / default_gamma(omega));
    let alpha = resolve_fgsr_alpha(omega, config, QExponent::One);
    let model = PalmModel::Fgsr {
        q: 1.0,
        alpha,
        mode: config.b_penalty,
    };
    let cfg = SolverConfig {
        q: QExponent::One,
        ..config.clone()
    };
    let params = ResolvedParams {
        alpha: Some(alpha),
        gamma: Some(1.0 / beta),
        ..Default::default()
    };
    palm(omega, &cfg, model, 1.0 / beta, beta, params)
}

/// Reweighted PALM for `½‖P_Ω(M_e − AB)‖² + γ((1/q)Σ‖a_j‖^q + penalty(B))`.
pub fn solve_generalized(omega: &ObservationSet, config: &SolverConfig) -> Result<RecoveryResult> {
    check_input(omega, config)?;
    if omega.norm_sq() == 0.0 {
        return Ok(zero_result(omega, config, ResolvedParams::default()));
    }
    let gamma = config.gamma.unwrap_or_else(|| default_gamma(omega));
    let alpha = resolve_fgsr_alpha(omega, config, config.q);
    let model = PalmModel::Fgsr {
        q: config.q.value(),
        alpha,
        mode: config.b_penalty,
    };
    let params = ResolvedParams {
        alpha: Some(alpha),
        gamma: Some(gamma),
        ..Default::default()
    };
    palm(omega, config, model, gamma, 1.0, params)
}

/// PALM for `½‖P_Ω(M_e − AB)‖² + (γ/2)(‖A‖_F² + ‖B‖_F²)`. No columns are
/// pruned; the revealed rank counts singular values of `AB` above the rank threshold.
pub fn solve_f_nuclear(omega: &ObservationSet, config: &SolverConfig) -> Result<RecoveryResult> {
    check_input(omega, config)?;
    let gamma = config.gamma.unwrap_or_else(|| default_gamma(omega));
    let params = ResolvedParams {
        gamma: Some(gamma),
        ..Default::default()
    };
    palm(omega, config, PalmModel::FNuclear, gamma, 1.0, params)
}

/// Default nuclear-norm weight for singular value thresholding.
pub fn default_svt_gamma(omega: &ObservationSet) -> f64 {
    1e-2 * omega.spectral_norm_sq().sqrt()
}

/// Proximal gradient with unit step on `½‖P_Ω(M_e − X)‖² + γ‖X‖_*`.
pub fn solve_svt_nuclear(omega: &ObservationSet, config: &SolverConfig) -> Result<RecoveryResult> {
    check_input(omega, config)?;
    let (m, n) = omega.shape();
    let gamma = config.gamma.unwrap_or_else(|| default_svt_gamma(omega));
    let data_norm = omega.norm_sq().sqrt();
    let mut x = Array2::<f64>::zeros((m, n));
    let mut objective_trace = Vec::new();
    let mut rel_change_trace = Vec::new();
    let mut rank_trace = Vec::new();
    let mut converged = false;
    let mut last = None;

    for it in 0..config.max_iters {
        let mut y = x.clone();
        for (i, j, v) in omega.iter() {
            y[[i, j]] = v;
        }
        let svd = thin_svd(&DenseMatrix::from_array_unchecked(y))?;
        let s: Vec<f64> = svd.s.iter().map(|&v| (v - gamma).max(0.0)).collect();
        let k = s.iter().take_while(|&&v| v > 0.0).count();
        let u = svd.u.as_array().slice(ndarray::s![.., ..k]).to_owned();
        let vt = svd.vt.as_array().slice(ndarray::s![..k, ..]).to_owned();
        let us = &u * &ndarray::Array1::from(s[..k].to_vec());
        let x_new = us.dot(&vt);

        let diff = (&x_new - &x).iter().map(|v| v * v).sum::<f64>().sqrt();
        let prev = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel_change = if prev > 0.0 {
            diff / prev
        } else if diff == 0.0 {
            0.0
        } else {
            1.0
        };
        x = x_new;
        let fit: f64 = omega.iter().map(|(i, j, v)| (v - x[[i, j]]).powi(2)).sum();
        let objective = 0.5 * fit + gamma * s.iter().sum::<f64>();
        objective_trace.push(objective);
        rel_change_trace.push(rel_change);
        rank_trace.push(k);
        if !objective.is_finite() || fit.sqrt() > DIVERGENCE_LIMIT * data_norm.max(1.0) {
            return Err(diverged(it + 1, "objective", objective, &objective_trace));
        }
        last = Some((u, s[..k].to_vec(), vt));
        if rel_change < config.rel_tol {
            converged = true;
            break;
        }
    }

    let (u, s, vt) = last.expect("at least one iteration");
    let width = config.d.max(s.len());
    let mut a = Array2::zeros((m, width));
    let mut b = Array2::zeros((width, n));
    for (j, sv) in s.iter().enumerate() {
        let root = sv.sqrt();
        a.column_mut(j).assign(&(&u.column(j) * root));
        b.row_mut(j).assign(&(&vt.row(j) * root));
    }
    let active: Vec<bool> = (0..width).map(|j| j < s.len()).collect();
    let revealed_rank = numerical_rank(&s);
    Ok(RecoveryResult {
        x_hat: DenseMatrix::from_array_unchecked(x),
        factors: FactorPair {
            a: DenseMatrix::from_array_unchecked(a),
            b: DenseMatrix::from_array_unchecked(b),
            active_columns: active,
        },
        revealed_rank,
        iterations: objective_trace.len(),
        objective_trace,
        rel_change_trace,
        rank_trace,
        converged,
        params: ResolvedParams {
            gamma: Some(gamma),
            ..Default::default()
        },
    })
}
