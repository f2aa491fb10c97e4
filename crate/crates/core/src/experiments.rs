//! Synthetic instances, error metrics, the method registry and sweep drivers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FgsrError, Result};
use crate::lrmc::{
    solve_f_nuclear, solve_generalized, solve_noiseless_admm, solve_svt_nuclear, RecoveryResult,
    SolverConfig,
};
use crate::matrix::{frobenius_norm, random_low_rank, seeded_rng, DenseMatrix};
use crate::observations::{project_omega, ObservationSet};
use crate::regularizers::{BPenalty, QExponent};
use crate::rpca::{solve_rpca, solve_rpca_f_nuclear, RpcaResult};

const NOISE_STREAM: u64 = 1;
const MASK_STREAM: u64 = 2;
const SUPPORT_STREAM: u64 = 3;
const CORRUPTION_STREAM: u64 = 4;
const HOLDOUT_STREAM: u64 = 5;

/// Seed offset of the instance used to tune `gamma` in sweeps; evaluation
/// seeds never reach it in practice.
pub const TUNING_SEED_OFFSET: u64 = 1_000_000;
/// Fraction of observed entries held out when tuning `gamma`.
pub const HOLDOUT_FRACTION: f64 = 0.1;
/// Candidate `gamma` values, as multiples of the RMS of the observations.
pub const GAMMA_GRID: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6];

#[derive(Clone, Debug)]
pub struct LrmcInstance {
    pub m_true: DenseMatrix,
    /// Observations of `m_true + noise`.
    pub omega: ObservationSet,
    pub noise: DenseMatrix,
    pub missing_rate: f64,
    /// `‖M‖_F / ‖E‖_F`; infinite for noiseless instances.
    pub snr: f64,
    pub seed: u64,
}

impl LrmcInstance {
    pub fn is_noisy(&self) -> bool {
        self.snr.is_finite()
    }
}

/// Random rank-`r` matrix, Gaussian noise at the given SNR, and entries
/// observed independently with probability `1 − missing_rate`.
pub fn gen_lrmc_instance(
    m: usize,
    n: usize,
    r: usize,
    missing_rate: f64,
    snr: f64,
    seed: u64,
) -> Result<LrmcInstance> {
    if !(0.0..1.0).contains(&missing_rate) {
        return Err(FgsrError::invalid(
            "missing_rate",
            format!("{missing_rate} is outside [0, 1)"),
        ));
    }
    if !(snr > 0.0) {
        return Err(FgsrError::invalid("snr", format!("{snr} is not positive")));
    }
    let m_true = random_low_rank(m, n, r, seed)?;
    let noise = if snr.is_infinite() {
        DenseMatrix::zeros(m, n)
    } else {
        let mut rng = seeded_rng(seed, NOISE_STREAM);
        let raw = crate::matrix::standard_normal_array(m, n, &mut rng);
        let raw_norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let target = frobenius_norm(&m_true) / snr;
        let scale = if raw_norm > 0.0 {
            target / raw_norm
        } else {
            0.0
        };
        DenseMatrix::from_array(raw * scale)?
    };
    let observed = m_true.add(&noise)?;
    let mut rng = seeded_rng(seed, MASK_STREAM);
    let keep = 1.0 - missing_rate;
    let mut entries = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.random::<f64>() < keep {
                entries.push((i, j, observed.get(i, j)));
            }
        }
    }
    Ok(LrmcInstance {
        m_true,
        omega: ObservationSet::new(m, n, entries)?,
        noise,
        missing_rate,
        snr,
        seed,
    })
}

/// Low-rank matrix and sparse corruption with support density `density` and
/// entries `N(0, ε²)`, `ε = σ / snr_c`, where σ is the standard deviation of
/// the low-rank entries.
pub fn gen_rpca_instance(
    m: usize,
    n: usize,
    r: usize,
    density: f64,
    snr_c: f64,
    seed: u64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(0.0..=1.0).contains(&density) {
        return Err(FgsrError::invalid(
            "density",
            format!("{density} is outside [0, 1]"),
        ));
    }
    if !(snr_c > 0.0 && snr_c.is_finite()) {
        return Err(FgsrError::invalid(
            "snr_c",
            format!("{snr_c} is not positive"),
        ));
    }
    let m_true = random_low_rank(m, n, r, seed)?;
    let epsilon = entry_std(&m_true) / snr_c;
    let mut support = seeded_rng(seed, SUPPORT_STREAM);
    let mut values = seeded_rng(seed, CORRUPTION_STREAM);
    let corruption: Vec<f64> = (0..m * n)
        .map(|_| {
            let hit = support.random::<f64>() < density;
            let v: f64 = StandardNormal.sample(&mut values);
            if hit {
                v * epsilon
            } else {
                0.0
            }
        })
        .collect();
    Ok((m_true, DenseMatrix::new(m, n, corruption)?))
}

/// Population standard deviation of the entries.
pub fn entry_std(x: &DenseMatrix) -> f64 {
    let v = x.values();
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// `‖M − M̂‖_F / ‖M‖_F`.
pub fn relative_error(m_true: &DenseMatrix, m_hat: &DenseMatrix) -> Result<f64> {
    let denom = frobenius_norm(m_true);
    if denom == 0.0 {
        return Err(FgsrError::invalid(
            "m_true",
            "relative error of a zero matrix is undefined",
        ));
    }
    Ok(frobenius_norm(&m_true.sub(m_hat)?) / denom)
}

fn check_pair(pred: &ObservationSet, truth: &ObservationSet, lo: f64, hi: f64) -> Result<()> {
    if !pred.same_indices(truth) {
        return Err(FgsrError::Dimension(
            "prediction and truth index sets differ".into(),
        ));
    }
    if !(hi > lo) {
        return Err(FgsrError::invalid("rating_max", "must exceed rating_min"));
    }
    if truth.is_empty() {
        return Err(FgsrError::EmptyObservations);
    }
    Ok(())
}

/// Mean absolute error over the evaluation set divided by the rating range.
pub fn nmae(
    pred: &ObservationSet,
    truth: &ObservationSet,
    rating_min: f64,
    rating_max: f64,
) -> Result<f64> {
    check_pair(pred, truth, rating_min, rating_max)?;
    let mae = pred
        .values()
        .iter()
        .zip(truth.values())
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mae / (rating_max - rating_min))
}

/// Root mean squared error over the evaluation set divided by the rating range.
pub fn rmse(
    pred: &ObservationSet,
    truth: &ObservationSet,
    rating_min: f64,
    rating_max: f64,
) -> Result<f64> {
    check_pair(pred, truth, rating_min, rating_max)?;
    let mse = pred
        .values()
        .iter()
        .zip(truth.values())
        .map(|(p, t)| (p - t).powi(2))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt() / (rating_max - rating_min))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub relative_error: f64,
    pub nmae: f64,
    pub rmse: f64,
    pub wall_time: f64,
    pub revealed_rank: usize,
}

/// Metrics of a synthetic recovery. NMAE and RMSE are taken over every entry
/// and normalized by the value range of `m_true`.
pub fn synthetic_metrics(
    m_true: &DenseMatrix,
    m_hat: &DenseMatrix,
    revealed_rank: usize,
    wall_time: f64,
) -> Result<MetricsReport> {
    let full = ObservationSet::full(m_true);
    let pred = project_omega(m_hat, &full)?;
    let (lo, hi) = value_range(m_true.values());
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo, lo + 1.0) };
    Ok(MetricsReport {
        relative_error: relative_error(m_true, m_hat)?,
        nmae: nmae(&pred, &full, lo, hi)?,
        rmse: rmse(&pred, &full, lo, hi)?,
        wall_time,
        revealed_rank,
    })
}

pub(crate) fn value_range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Registered solver families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Column-group penalty on `A`, squared Frobenius penalty on `B`.
    Fgsr23,
    /// Column-group penalty on `A`, row-group penalty on `B`.
    Fgsr12,
    /// Factored nuclear norm.
    FNuclear,
    /// Nuclear norm by singular value thresholding.
    Svt,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Fgsr23,
        Method::Fgsr12,
        Method::FNuclear,
        Method::Svt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Fgsr23 => "fgsr23",
            Method::Fgsr12 => "fgsr12",
            Method::FNuclear => "f_nuclear",
            Method::Svt => "svt",
        }
    }

    pub fn registered() -> Vec<&'static str> {
        Self::ALL.iter().map(|m| m.name()).collect()
    }

    /// Penalty on `B` used by the FGSR variants.
    pub fn b_penalty(self) -> BPenalty {
        match self {
            Method::Fgsr12 => BPenalty::GroupL2,
            _ => BPenalty::HalfFrobeniusSq,
        }
    }

    /// Whether `gamma` is chosen by validation when unset on noisy data.
    pub fn tunes_gamma(self) -> bool {
        !matches!(self, Method::Svt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = FgsrError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| FgsrError::UnknownMethod {
                name: s.to_string(),
                registered: Self::registered(),
            })
    }
}

/// Weight of the F-nuclear baseline on noiseless data, relative to the RMS of
/// the observations.
pub const NOISELESS_F_NUCLEAR_GAMMA: f64 = 2e-3;

/// Runs a completion method. Noiseless FGSR problems use the constrained ADMM
/// solver, noisy ones the reweighted PALM solver.
pub fn run_completion(
    method: Method,
    omega: &ObservationSet,
    config: &SolverConfig,
    noisy: bool,
) -> Result<RecoveryResult> {
    let mut cfg = config.clone();
    match method {
        Method::Fgsr23 | Method::Fgsr12 => {
            cfg.b_penalty = method.b_penalty();
            if noisy {
                solve_generalized(omega, &cfg)
            } else {
                solve_noiseless_admm(omega, &cfg)
            }
        }
        Method::FNuclear => {
            if !noisy && cfg.gamma.is_none() {
                cfg.gamma = Some(NOISELESS_F_NUCLEAR_GAMMA * omega.rms());
            }
            solve_f_nuclear(omega, &cfg)
        }
        Method::Svt => solve_svt_nuclear(omega, &cfg),
    }
}

/// Runs a robust PCA method; only `fgsr23`, `fgsr12` and `f_nuclear` apply.
pub fn run_rpca(method: Method, m_e: &DenseMatrix, config: &SolverConfig) -> Result<RpcaResult> {
    let mut cfg = config.clone();
    match method {
        Method::Fgsr23 | Method::Fgsr12 => {
            cfg.b_penalty = method.b_penalty();
            solve_rpca(m_e, &cfg)
        }
        Method::FNuclear => solve_rpca_f_nuclear(m_e, &cfg),
        Method::Svt => Err(FgsrError::invalid(
            "method",
            "svt is not available for robust PCA",
        )),
    }
}

/// Chooses `gamma` from `grid` (multiples of the observation RMS) by fitting
/// on 90% of the observations and scoring squared error on the rest.
/// Returns the selected multiple.
pub fn select_gamma(
    method: Method,
    omega: &ObservationSet,
    config: &SolverConfig,
    grid: &[f64],
) -> Result<f64> {
    if grid.is_empty() {
        return Err(FgsrError::invalid("grid", "no candidate values"));
    }
    let mut rng = seeded_rng(config.seed, HOLDOUT_STREAM);
    let (holdout, train) = omega.partition(|_| rng.random::<f64>() < HOLDOUT_FRACTION);
    if holdout.is_empty() || train.is_empty() {
        return Ok(grid[0]);
    }
    let rms = omega.rms();
    let mut best = (f64::INFINITY, grid[0]);
    for &c in grid {
        let cfg = SolverConfig {
            gamma: Some(c * rms),
            ..config.clone()
        };
        let fit = run_completion(method, &train, &cfg, true)?;
        let err: f64 = holdout
            .iter()
            .map(|(i, j, v)| (fit.x_hat.get(i, j) - v).powi(2))
            .sum();
        if err < best.0 {
            best = (err, c);
        }
    }
    Ok(best.1)
}

/// `config` with the method's `B` penalty set.
pub fn method_config(method: Method, config: &SolverConfig) -> SolverConfig {
    match method {
        Method::Fgsr23 | Method::Fgsr12 => SolverConfig {
            b_penalty: method.b_penalty(),
            ..config.clone()
        },
        _ => config.clone(),
    }
}

/// `config` with `gamma` chosen by [`select_gamma`] over [`GAMMA_GRID`] when
/// the data are noisy, the method tunes it and it is unset.
pub fn with_tuned_gamma(
    method: Method,
    omega: &ObservationSet,
    config: &SolverConfig,
    noisy: bool,
) -> Result<SolverConfig> {
    let mut cfg = config.clone();
    if noisy && cfg.gamma.is_none() && method.tunes_gamma() {
        let c = select_gamma(method, omega, &cfg, &GAMMA_GRID)?;
        cfg.gamma = Some(c * omega.rms());
    }
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    MissingRate,
    InitialRank,
    Snr,
    Q,
    NoiseDensity,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::MissingRate => "missing_rate",
            SweepAxis::InitialRank => "initial_rank",
            SweepAxis::Snr => "snr",
            SweepAxis::Q => "q",
            SweepAxis::NoiseDensity => "noise_density",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = FgsrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "missing_rate" | "missing" => Ok(SweepAxis::MissingRate),
            "initial_rank" | "d" => Ok(SweepAxis::InitialRank),
            "snr" => Ok(SweepAxis::Snr),
            "q" | "p" => Ok(SweepAxis::Q),
            "noise_density" | "density" => Ok(SweepAxis::NoiseDensity),
            other => Err(FgsrError::invalid(
                "axis",
                format!("unknown sweep axis `{other}`"),
            )),
        }
    }
}

/// A grid of runs over one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<String>,
    pub seeds: Vec<u64>,
    /// Missing rate used when it is not the swept axis.
    pub missing_rate: f64,
    /// Dense-noise SNR (infinite for noiseless) used when it is not the swept axis.
    pub snr: f64,
    /// Corruption density for robust PCA sweeps.
    pub density: f64,
    pub snr_c: f64,
    /// Base solver settings; `d` is overridden on the `initial_rank` axis and
    /// `q` on the `q` axis.
    pub config: SolverConfig,
    /// Tune `gamma` on a separate instance when the data are noisy and `gamma` is unset.
    pub tune_gamma: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            m: 200,
            n: 200,
            r: 20,
            axis: SweepAxis::MissingRate,
            values: vec![0.5],
            methods: vec!["fgsr23".into()],
            seeds: (0..10).collect(),
            missing_rate: 0.5,
            snr: f64::INFINITY,
            density: 0.2,
            snr_c: 1.0,
            config: SolverConfig {
                d: 30,
                ..SolverConfig::default()
            },
            tune_gamma: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub axis: String,
    pub axis_value: f64,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub missing_rate: f64,
    pub snr: f64,
    pub density: f64,
    pub d: usize,
    pub q: f64,
    pub relative_error: f64,
    pub nmae: f64,
    pub rmse: f64,
    pub wall_time: f64,
    pub revealed_rank: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Full solver configuration with resolved parameters, as JSON.
    pub config: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub method: String,
    pub axis_value: f64,
    pub runs: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

struct Point {
    missing_rate: f64,
    snr: f64,
    density: f64,
    config: SolverConfig,
}

fn point(spec: &SweepSpec, value: f64) -> Result<Point> {
    let mut p = Point {
        missing_rate: spec.missing_rate,
        snr: spec.snr,
        density: spec.density,
        config: spec.config.clone(),
    };
    match spec.axis {
        SweepAxis::MissingRate => p.missing_rate = value,
        SweepAxis::InitialRank => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(FgsrError::invalid(
                    "d",
                    format!("{value} is not a positive integer"),
                ));
            }
            p.config.d = value as usize;
        }
        SweepAxis::Snr => p.snr = value,
        SweepAxis::Q => p.config.q = QExponent::from_value(value)?,
        SweepAxis::NoiseDensity => p.density = value,
    }
    Ok(p)
}

/// Runs every (method, axis value, seed) combination.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let methods: Vec<Method> = spec
        .methods
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for method in &methods {
        for &value in &spec.values {
            let p = point(spec, value)?;
            if spec.axis == SweepAxis::NoiseDensity {
                for &seed in &spec.seeds {
                    rows.push(rpca_row(spec, *method, value, &p, seed)?);
                }
                continue;
            }
            let noisy = p.snr.is_finite();
            let gamma_multiple = if noisy
                && spec.tune_gamma
                && p.config.gamma.is_none()
                && method.tunes_gamma()
            {
                let tuning_seed = TUNING_SEED_OFFSET + spec.seeds.first().copied().unwrap_or(0);
                let inst =
                    gen_lrmc_instance(spec.m, spec.n, spec.r, p.missing_rate, p.snr, tuning_seed)?;
                let cfg = SolverConfig {
                    seed: tuning_seed,
                    ..p.config.clone()
                };
                Some(select_gamma(*method, &inst.omega, &cfg, &GAMMA_GRID)?)
            } else {
                None
            };
            for &seed in &spec.seeds {
                let inst = gen_lrmc_instance(spec.m, spec.n, spec.r, p.missing_rate, p.snr, seed)?;
                let mut cfg = method_config(
                    *method,
                    &SolverConfig {
                        seed,
                        ..p.config.clone()
                    },
                );
                if let Some(c) = gamma_multiple {
                    cfg.gamma = Some(c * inst.omega.rms());
                }
                let start = Instant::now();
                let res = run_completion(*method, &inst.omega, &cfg, noisy)?;
                let elapsed = start.elapsed().as_secs_f64();
                let metrics =
                    synthetic_metrics(&inst.m_true, &res.x_hat, res.revealed_rank, elapsed)?;
                let resolved = resolved_config(&cfg, &res.params);
                rows.push(make_row(
                    spec,
                    *method,
                    value,
                    seed,
                    &p,
                    &resolved,
                    metrics,
                    res.iterations,
                    res.converged,
                )?);
            }
        }
    }
    let summary = summarize(&rows);
    Ok(SweepResult { rows, summary })
}

fn rpca_row(
    spec: &SweepSpec,
    method: Method,
    value: f64,
    p: &Point,
    seed: u64,
) -> Result<SweepRow> {
    let (m_true, e) = gen_rpca_instance(spec.m, spec.n, spec.r, p.density, spec.snr_c, seed)?;
    let m_e = m_true.add(&e)?;
    let cfg = method_config(
        method,
        &SolverConfig {
            seed,
            ..p.config.clone()
        },
    );
    let start = Instant::now();
    let res = run_rpca(method, &m_e, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let metrics = synthetic_metrics(&m_true, &res.low_rank, res.revealed_rank, elapsed)?;
    let resolved = resolved_config(&cfg, &res.params);
    make_row(
        spec,
        method,
        value,
        seed,
        p,
        &resolved,
        metrics,
        res.iterations,
        res.converged,
    )
}

/// The configuration with every defaulted parameter replaced by the value used.
pub fn resolved_config(
    config: &SolverConfig,
    params: &crate::lrmc::ResolvedParams,
) -> SolverConfig {
    SolverConfig {
        alpha: params.alpha.or(config.alpha),
        gamma: params.gamma.or(config.gamma),
        mu: params.mu.or(config.mu),
        lambda: params.lambda.or(config.lambda),
        ..config.clone()
    }
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    spec: &SweepSpec,
    method: Method,
    value: f64,
    seed: u64,
    p: &Point,
    config: &SolverConfig,
    metrics: MetricsReport,
    iterations: usize,
    converged: bool,
) -> Result<SweepRow> {
    Ok(SweepRow {
        method: method.name().to_string(),
        axis: spec.axis.name().to_string(),
        axis_value: value,
        seed,
        m: spec.m,
        n: spec.n,
        r: spec.r,
        missing_rate: if spec.axis == SweepAxis::NoiseDensity {
            0.0
        } else {
            p.missing_rate
        },
        snr: if spec.axis == SweepAxis::NoiseDensity {
            spec.snr_c
        } else {
            p.snr
        },
        density: if spec.axis == SweepAxis::NoiseDensity {
            p.density
        } else {
            0.0
        },
        d: config.d,
        q: config.q.value(),
        relative_error: metrics.relative_error,
        nmae: metrics.nmae,
        rmse: metrics.rmse,
        wall_time: metrics.wall_time,
        revealed_rank: metrics.revealed_rank,
        iterations,
        converged,
        config: serde_json::to_string(config)?,
    })
}

/// Mean and sample standard deviation of the relative error per (method, axis value).
pub fn summarize(rows: &[SweepRow]) -> Vec<SweepSummary> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !keys
            .iter()
            .any(|(m, v)| *m == r.method && *v == r.axis_value)
        {
            keys.push((r.method.clone(), r.axis_value));
        }
    }
    keys.into_iter()
        .map(|(method, axis_value)| {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method && r.axis_value == axis_value)
                .map(|r| r.relative_error)
                .collect();
            let (mean, std) = mean_std(&errs);
            SweepSummary {
                method,
                axis_value,
                runs: errs.len(),
                mean_error: mean,
                std_error: std,
            }
        })
        .collect()
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (mean, var.sqrt())
}
