//! Command-line front end: argument parsing, configuration layering and the
//! `complete`, `rpca`, `sweep` and `verify` commands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{FgsrError, Result};
use crate::experiments::{
    gen_lrmc_instance, gen_rpca_instance, method_config, nmae, resolved_config, rmse,
    run_completion, run_rpca, run_sweep, synthetic_metrics, with_tuned_gamma, Method, SweepAxis,
    SweepSpec,
};
use crate::lrmc::{default_rank_heuristic, SolverConfig};
use crate::matrix::frobenius_norm;
use crate::observations::ObservationSet;
use crate::ratings::{ingest_ratings, DEFAULT_MIN_RATINGS_PER_ITEM};
use crate::regularizers::QExponent;
use crate::results::{
    fingerprint_bytes, fingerprint_observations, format_float, manifest_path, summary_table,
    sweep_table, write_results, write_table, Cell, ResultsTable, RunManifest,
};
use crate::verify::{run_verify, VerifyOptions};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FGSR_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "fgsr-out";
pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Parser)]
#[command(
    name = "fgsr",
    version,
    about = "Low-rank matrix completion and robust PCA with factor group-sparse regularization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a partially observed low-rank matrix.
    Complete(CompleteArgs),
    /// Split a matrix into low-rank and sparse parts.
    Rpca(RpcaArgs),
    /// Run a grid of synthetic experiments over one axis.
    Sweep(SweepArgs),
    /// Check the regularizer identities and proximal operators.
    Verify(VerifyArgs),
}

/// Synthetic instance size written `MxN:rR`, e.g. `200x200:r20`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSize {
    pub m: usize,
    pub n: usize,
    pub r: usize,
}

impl FromStr for SyntheticSize {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("`{s}` is not of the form MxN:rR (e.g. 200x200:r20)");
        let (dims, rank) = s.split_once(':').ok_or_else(bad)?;
        let (m, n) = dims.split_once(['x', 'X']).ok_or_else(bad)?;
        let r = rank.strip_prefix(['r', 'R']).ok_or_else(bad)?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let size = SyntheticSize {
            m: parse(m)?,
            n: parse(n)?,
            r: parse(r)?,
        };
        if size.m == 0 || size.n == 0 || size.r == 0 || size.r > size.m.min(size.n) {
            return Err(format!(
                "`{s}` needs positive sizes with rank at most min(M, N)"
            ));
        }
        Ok(size)
    }
}

fn parse_q(s: &str) -> std::result::Result<QExponent, String> {
    s.parse::<QExponent>().map_err(|e| e.to_string())
}

/// Solver and output options shared by the run commands.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Initial factor width. Defaults to observations/(M+N) for `complete`,
    /// MN/(M+N) for `rpca` and ceil(1.5R) for `sweep`.
    #[arg(long)]
    pub d: Option<usize>,
    /// Group-norm exponent: 1, 1/2, 1/4 or 1/8.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<QExponent>,
    /// Weight of the penalty on B (default: set from the top singular value).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Regularization weight of the noisy and baseline models (default: tuned
    /// on held-out observations for noisy data).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Weight of the l1 term in robust PCA (default: 1/sqrt(max(M, N))).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relative-change tolerance [default: 1e-5].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap [default: 1000].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// JSON file with solver settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("data").required(true).args(["synthetic", "ratings"])))]
pub struct CompleteArgs {
    /// Synthetic low-rank instance, e.g. 200x200:r20.
    #[arg(long)]
    pub synthetic: Option<SyntheticSize>,
    /// Ratings file with `user item rating [timestamp]` records.
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    /// Fraction of unobserved entries.
    #[arg(long, default_value_t = 0.5)]
    pub missing: f64,
    /// Signal-to-noise ratio ‖M‖/‖E‖; `inf` for noiseless data.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub snr: f64,
    /// Fraction of every user's ratings used for training.
    #[arg(long, default_value_t = 0.7)]
    pub sample: f64,
    /// Items with fewer ratings are removed.
    #[arg(long, default_value_t = DEFAULT_MIN_RATINGS_PER_ITEM)]
    pub min_item_ratings: usize,
    /// fgsr23, fgsr12, f_nuclear or svt.
    #[arg(long, default_value = "fgsr23")]
    pub method: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RpcaArgs {
    /// Synthetic low-rank instance, e.g. 200x200:r20.
    #[arg(long)]
    pub synthetic: SyntheticSize,
    /// Fraction of corrupted entries.
    #[arg(long, default_value_t = 0.2)]
    pub density: f64,
    /// Ratio of the low-rank entry spread to the corruption spread.
    #[arg(long, default_value_t = 1.0)]
    pub snrc: f64,
    /// fgsr23, fgsr12 or f_nuclear.
    #[arg(long, default_value = "fgsr23")]
    pub method: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "200x200:r20")]
    pub synthetic: SyntheticSize,
    /// missing_rate, initial_rank, snr, q or noise_density.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    /// Comma-separated method names (default: every applicable method).
    #[arg(long, value_delimiter = ',')]
    pub method: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub missing: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub snr: f64,
    #[arg(long, default_value_t = 0.2)]
    pub density: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snrc: f64,
    /// Use the default `gamma` instead of validation on noisy data.
    #[arg(long)]
    pub no_tune: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check a single exponent instead of 1, 1/2 and 1/4.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<QExponent>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random matrices per identity check.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    /// Negative control: perturb one singular value so identity checks fail.
    #[arg(long)]
    pub perturb: bool,
}

/// Built-in defaults, then the config file, then flags. Returns the config
/// and whether `d` was fixed by the file or a flag.
pub fn layered_config(common: &CommonArgs) -> Result<(SolverConfig, bool)> {
    let (mut cfg, mut d_set) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let d_set = value.get("d").is_some();
            (serde_json::from_value::<SolverConfig>(value)?, d_set)
        }
        None => (SolverConfig::default(), false),
    };
    if let Some(d) = common.d {
        cfg.d = d;
        d_set = true;
    }
    if let Some(q) = common.q {
        cfg.q = q;
    }
    cfg.alpha = common.alpha.or(cfg.alpha);
    cfg.gamma = common.gamma.or(cfg.gamma);
    cfg.lambda = common.lambda.or(cfg.lambda);
    if let Some(t) = common.tol {
        cfg.rel_tol = t;
    }
    if let Some(k) = common.max_iters {
        cfg.max_iters = k;
    }
    cfg.seed = common.seed;
    cfg.validate()?;
    Ok((cfg, d_set))
}

fn seed_list(common: &CommonArgs, default_count: usize) -> Result<Vec<u64>> {
    let count = common.seeds.unwrap_or(default_count);
    if count == 0 {
        return Err(FgsrError::invalid("seeds", "must be at least 1"));
    }
    Ok((0..count as u64).map(|k| common.seed + k).collect())
}

/// Files written by a command.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub report: PathBuf,
}

fn emit(
    out_dir: &Path,
    table: &ResultsTable,
    manifest: &mut RunManifest,
    report: &str,
) -> Result<Outputs> {
    fs::create_dir_all(out_dir)?;
    manifest.finish();
    let results = out_dir.join(RESULTS_FILE);
    write_results(table, manifest, &results)?;
    let report_path = out_dir.join(REPORT_FILE);
    fs::write(&report_path, report)?;
    Ok(Outputs {
        manifest: manifest_path(&results),
        results,
        report: report_path,
    })
}

/// Key-value report of every row.
fn render_report(command: &str, table: &ResultsTable) -> String {
    let mut s = format!("command: {command}\nruns: {}\n", table.rows.len());
    for row in &table.rows {
        s.push('\n');
        for (c, v) in table.columns.iter().zip(row) {
            if c != "config" {
                let _ = writeln!(s, "{c}: {v}");
            }
        }
    }
    s
}

fn combined_fingerprint(parts: &[String]) -> String {
    if parts.len() == 1 {
        return parts[0].clone();
    }
    fingerprint_bytes(parts.join("\n").as_bytes())
}

const SYNTHETIC_COMPLETE_COLUMNS: [&str; 18] = [
    "method",
    "seed",
    "m",
    "n",
    "r",
    "missing_rate",
    "snr",
    "observed",
    "d",
    "q",
    "relative_error",
    "nmae",
    "rmse",
    "revealed_rank",
    "iterations",
    "converged",
    "final_objective",
    "config",
];

const RATINGS_COMPLETE_COLUMNS: [&str; 18] = [
    "method",
    "seed",
    "users",
    "items",
    "train_ratings",
    "eval_ratings",
    "eval_set",
    "d",
    "q",
    "relative_error",
    "nmae",
    "rmse",
    "revealed_rank",
    "iterations",
    "converged",
    "final_objective",
    "gamma",
    "config",
];

const RPCA_COLUMNS: [&str; 22] = [
    "method",
    "seed",
    "m",
    "n",
    "r",
    "density",
    "snr_c",
    "d",
    "q",
    "lambda",
    "relative_error",
    "nmae",
    "rmse",
    "revealed_rank",
    "iterations",
    "converged",
    "primal_residual",
    "sparse_support",
    "sparse_fraction",
    "sparse_max_abs",
    "final_objective",
    "config",
];

fn last(trace: &[f64]) -> f64 {
    trace.last().copied().unwrap_or(f64::NAN)
}

pub fn cmd_complete(args: &CompleteArgs) -> Result<Outputs> {
    let method: Method = args.method.parse()?;
    let (base, d_set) = layered_config(&args.common)?;
    let seeds = seed_list(&args.common, 1)?;
    match (&args.synthetic, &args.ratings) {
        (Some(size), _) => complete_synthetic(method, *size, args, base, d_set, seeds),
        (None, Some(path)) => complete_ratings(method, path, args, base, d_set, seeds),
        (None, None) => Err(FgsrError::invalid("data", "pass --synthetic or --ratings")),
    }
}

fn complete_synthetic(
    method: Method,
    size: SyntheticSize,
    args: &CompleteArgs,
    base: SolverConfig,
    d_set: bool,
    seeds: Vec<u64>,
) -> Result<Outputs> {
    let mut table = ResultsTable::new(SYNTHETIC_COMPLETE_COLUMNS);
    let mut manifest = RunManifest::new("complete", base.clone(), String::new(), seeds.clone());
    let mut prints = Vec::new();
    for &seed in &seeds {
        let inst = gen_lrmc_instance(size.m, size.n, size.r, args.missing, args.snr, seed)?;
        prints.push(fingerprint_observations(&inst.omega));
        let mut cfg = method_config(
            method,
            &SolverConfig {
                seed,
                ..base.clone()
            },
        );
        if !d_set {
            cfg.d = default_rank_heuristic(&inst.omega);
        }
        let noisy = inst.is_noisy();
        let cfg = with_tuned_gamma(method, &inst.omega, &cfg, noisy)?;
        let start = Instant::now();
        let res = run_completion(method, &inst.omega, &cfg, noisy)?;
        let elapsed = start.elapsed().as_secs_f64();
        manifest.timing.wall_times.push(elapsed);
        let metrics = synthetic_metrics(&inst.m_true, &res.x_hat, res.revealed_rank, elapsed)?;
        let resolved = resolved_config(&cfg, &res.params);
        table.push(vec![
            method.name().into(),
            seed.into(),
            size.m.into(),
            size.n.into(),
            size.r.into(),
            args.missing.into(),
            args.snr.into(),
            inst.omega.len().into(),
            cfg.d.into(),
            cfg.q.value().into(),
            metrics.relative_error.into(),
            metrics.nmae.into(),
            metrics.rmse.into(),
            metrics.revealed_rank.into(),
            res.iterations.into(),
            res.converged.into(),
            last(&res.objective_trace).into(),
            serde_json::to_string(&resolved)?.into(),
        ])?;
    }
    manifest.dataset_fingerprint = combined_fingerprint(&prints);
    manifest.details.insert(
        "dataset".into(),
        json!({"kind": "synthetic", "m": size.m, "n": size.n, "r": size.r,
               "missing_rate": format_float(args.missing), "snr": format_float(args.snr)}),
    );
    let report = render_report("complete", &table);
    emit(&args.common.out, &table, &mut manifest, &report)
}

/// Predictions at the indices of `truth`, clipped to `[lo, hi]`.
fn clipped_predictions(
    x_hat: &crate::matrix::DenseMatrix,
    truth: &ObservationSet,
    lo: f64,
    hi: f64,
) -> Result<ObservationSet> {
    truth.with_values(
        truth
            .indices()
            .map(|(i, j)| x_hat.get(i, j).clamp(lo, hi))
            .collect(),
    )
}

fn complete_ratings(
    method: Method,
    path: &Path,
    args: &CompleteArgs,
    base: SolverConfig,
    d_set: bool,
    seeds: Vec<u64>,
) -> Result<Outputs> {
    let bytes = fs::read(path)?;
    let mut table = ResultsTable::new(RATINGS_COMPLETE_COLUMNS);
    let mut manifest = RunManifest::new(
        "complete",
        base.clone(),
        fingerprint_bytes(&bytes),
        seeds.clone(),
    );
    let mut index = None;
    for &seed in &seeds {
        let ratings = ingest_ratings(path, args.min_item_ratings, args.sample, seed)?;
        let train = ratings.train();
        let test = ratings.test();
        let (eval, eval_set) = if test.is_empty() {
            (&train, "train")
        } else {
            (&test, "test")
        };
        let (lo, hi) = ratings.rating_range();
        let hi = if hi > lo { hi } else { lo + 1.0 };
        let mut cfg = method_config(
            method,
            &SolverConfig {
                seed,
                ..base.clone()
            },
        );
        if !d_set {
            cfg.d = default_rank_heuristic(&train);
        }
        let cfg = with_tuned_gamma(method, &train, &cfg, true)?;
        let start = Instant::now();
        let res = run_completion(method, &train, &cfg, true)?;
        manifest
            .timing
            .wall_times
            .push(start.elapsed().as_secs_f64());
        let pred = clipped_predictions(&res.x_hat, eval, lo, hi)?;
        let diff: f64 = pred
            .values()
            .iter()
            .zip(eval.values())
            .map(|(p, t)| (p - t).powi(2))
            .sum::<f64>()
            .sqrt();
        let resolved = resolved_config(&cfg, &res.params);
        table.push(vec![
            method.name().into(),
            seed.into(),
            ratings.n_users().into(),
            ratings.n_items().into(),
            train.len().into(),
            eval.len().into(),
            eval_set.into(),
            cfg.d.into(),
            cfg.q.value().into(),
            (diff / eval.norm_sq().sqrt()).into(),
            nmae(&pred, eval, lo, hi)?.into(),
            rmse(&pred, eval, lo, hi)?.into(),
            res.revealed_rank.into(),
            res.iterations.into(),
            res.converged.into(),
            last(&res.objective_trace).into(),
            resolved
                .gamma
                .map(Cell::Float)
                .unwrap_or(Cell::Text(String::new())),
            serde_json::to_string(&resolved)?.into(),
        ])?;
        index.get_or_insert_with(|| {
            json!({"user_ids": ratings.user_ids, "item_ids": ratings.item_ids,
                   "rating_min": lo, "rating_max": hi})
        });
    }
    manifest.details.insert(
        "dataset".into(),
        json!({"kind": "ratings", "path": path.display().to_string(),
               "sample": format_float(args.sample), "min_item_ratings": args.min_item_ratings}),
    );
    if let Some(ix) = index {
        manifest.details.insert("reindex".into(), ix);
    }
    let report = render_report("complete", &table);
    emit(&args.common.out, &table, &mut manifest, &report)
}

pub fn cmd_rpca(args: &RpcaArgs) -> Result<Outputs> {
    let method: Method = args.method.parse()?;
    let (base, d_set) = layered_config(&args.common)?;
    let seeds = seed_list(&args.common, 1)?;
    let size = args.synthetic;
    let mut table = ResultsTable::new(RPCA_COLUMNS);
    let mut manifest = RunManifest::new("rpca", base.clone(), String::new(), seeds.clone());
    let mut prints = Vec::new();
    for &seed in &seeds {
        let (m_true, e) = gen_rpca_instance(size.m, size.n, size.r, args.density, args.snrc, seed)?;
        let m_e = m_true.add(&e)?;
        let full = ObservationSet::full(&m_e);
        prints.push(fingerprint_observations(&full));
        let mut cfg = method_config(
            method,
            &SolverConfig {
                seed,
                ..base.clone()
            },
        );
        if !d_set {
            cfg.d = default_rank_heuristic(&full);
        }
        let start = Instant::now();
        let res = run_rpca(method, &m_e, &cfg)?;
        let elapsed = start.elapsed().as_secs_f64();
        manifest.timing.wall_times.push(elapsed);
        let metrics = synthetic_metrics(&m_true, &res.low_rank, res.revealed_rank, elapsed)?;
        let summary = res.summary();
        let resolved = resolved_config(&cfg, &res.params);
        let max_abs = res
            .sparse
            .values()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        table.push(vec![
            method.name().into(),
            seed.into(),
            size.m.into(),
            size.n.into(),
            size.r.into(),
            args.density.into(),
            args.snrc.into(),
            cfg.d.into(),
            cfg.q.value().into(),
            resolved.lambda.unwrap_or(f64::NAN).into(),
            metrics.relative_error.into(),
            metrics.nmae.into(),
            metrics.rmse.into(),
            metrics.revealed_rank.into(),
            summary.iterations.into(),
            summary.converged.into(),
            (summary.primal_residual / frobenius_norm(&m_e).max(f64::MIN_POSITIVE)).into(),
            summary.sparse_support.into(),
            (summary.sparse_support as f64 / (size.m * size.n) as f64).into(),
            max_abs.into(),
            last(&res.objective_trace).into(),
            serde_json::to_string(&resolved)?.into(),
        ])?;
    }
    manifest.dataset_fingerprint = combined_fingerprint(&prints);
    manifest.details.insert(
        "dataset".into(),
        json!({"kind": "synthetic_rpca", "m": size.m, "n": size.n, "r": size.r,
               "density": format_float(args.density), "snr_c": format_float(args.snrc)}),
    );
    let report = render_report("rpca", &table);
    emit(&args.common.out, &table, &mut manifest, &report)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Outputs> {
    let axis: SweepAxis = args.axis.parse()?;
    let (mut base, d_set) = layered_config(&args.common)?;
    let size = args.synthetic;
    if !d_set {
        base.d = (3 * size.r).div_ceil(2);
    }
    let methods = if args.method.is_empty() {
        let all = Method::registered();
        match axis {
            SweepAxis::NoiseDensity => all
                .into_iter()
                .filter(|m| *m != "svt")
                .map(String::from)
                .collect(),
            _ => all.into_iter().map(String::from).collect(),
        }
    } else {
        args.method.clone()
    };
    for m in &methods {
        m.parse::<Method>()?;
    }
    let spec = SweepSpec {
        m: size.m,
        n: size.n,
        r: size.r,
        axis,
        values: args.values.clone(),
        methods,
        seeds: seed_list(&args.common, 10)?,
        missing_rate: args.missing,
        snr: args.snr,
        density: args.density,
        snr_c: args.snrc,
        config: base.clone(),
        tune_gamma: !args.no_tune,
    };
    let result = run_sweep(&spec)?;
    let table = sweep_table(&result.rows);
    let spec_json = serde_json::to_value(&spec)?;
    let mut manifest = RunManifest::new(
        "sweep",
        base,
        fingerprint_bytes(spec_json.to_string().as_bytes()),
        spec.seeds.clone(),
    );
    manifest.timing.wall_times = result.rows.iter().map(|r| r.wall_time).collect();
    manifest.details.insert("sweep".into(), spec_json);
    let summary = summary_table(&result.summary);
    let mut report = format!(
        "command: sweep\nruns: {}\n\n{}\n",
        table.rows.len(),
        summary.columns.join(" ")
    );
    for row in &summary.rows {
        let _ = writeln!(report, "{}", row.join(" "));
    }
    let outputs = emit(&args.common.out, &table, &mut manifest, &report)?;
    write_table(&summary, &args.common.out.join(SUMMARY_FILE))?;
    Ok(outputs)
}

/// Runs the checks, prints one line per check and fails unless all pass.
pub fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let mut opts = VerifyOptions {
        seed: args.seed,
        instances: args.instances.max(1),
        perturb: args.perturb,
        ..VerifyOptions::default()
    };
    if let Some(q) = args.q {
        opts.qs = vec![q];
    }
    let outcomes = run_verify(&opts)?;
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    for c in &outcomes {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if failed > 0 {
        return Err(FgsrError::VerificationFailed {
            failed,
            total: outcomes.len(),
        });
    }
    println!("all {} checks passed", outcomes.len());
    Ok(())
}

fn print_outputs(o: &Outputs) -> Result<()> {
    print!("{}", fs::read_to_string(&o.report)?);
    println!(
        "\nresults: {}\nmanifest: {}",
        o.results.display(),
        o.manifest.display()
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Complete(a) => print_outputs(&cmd_complete(&a)?),
        Command::Rpca(a) => print_outputs(&cmd_rpca(&a)?),
        Command::Sweep(a) => print_outputs(&cmd_sweep(&a)?),
        Command::Verify(a) => cmd_verify(&a),
    }
}
