//! Self-checks of the regularizer identities and proximal operators, run by
//! the `verify` command.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::matrix::{
    numerical_rank, random_low_rank, seeded_rng, standard_normal_array, thin_svd, DenseMatrix,
};
use crate::prox::{prox_group_l2, prox_l1};
use crate::regularizers::{
    factored_objective, fgsr_value, optimal_factors, BPenalty, FactorPair, FgsrKind, FgsrSpec,
    QExponent,
};

pub const IDENTITY_TOL: f64 = 1e-9;
pub const MINIMALITY_TOL: f64 = 1e-8;
pub const PROX_TOL: f64 = 1e-6;
pub const STATIONARITY_TOL: f64 = 1e-8;
const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
const INVARIANCE_ALPHAS: [f64; 3] = [0.1, 1.0, 10.0];
/// Relative change applied to the top singular value by the negative control.
const PERTURBATION: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub qs: Vec<QExponent>,
    pub seed: u64,
    /// Random matrices per identity check.
    pub instances: usize,
    /// Random factorizations per matrix in the minimality check.
    pub factorizations: usize,
    /// Random inputs per prox check.
    pub prox_inputs: usize,
    /// Perturb the top singular value on the closed-form side.
    pub perturb: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            qs: vec![QExponent::One, QExponent::Half, QExponent::Quarter],
            seed: 0,
            instances: 50,
            factorizations: 100,
            prox_inputs: 100,
            perturb: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: String, worst: f64, tol: f64) -> Self {
        CheckOutcome {
            name,
            passed: worst <= tol,
            detail: format!("worst {worst:.3e} (tolerance {tol:.0e})"),
        }
    }
}

fn mode_name(b: BPenalty) -> &'static str {
    match b {
        BPenalty::GroupL2 => "group_l2",
        BPenalty::HalfFrobeniusSq => "half_frobenius",
    }
}

/// Random matrices of size up to 20×15 and rank 1 to 5.
fn instances(opts: &VerifyOptions) -> Vec<DenseMatrix> {
    let mut rng = seeded_rng(opts.seed, 21);
    (0..opts.instances)
        .map(|k| {
            let m = rng.random_range(5..=20);
            let n = rng.random_range(5..=15);
            let r = rng.random_range(1..=5);
            let scale = 10f64.powf(rng.random_range(-1.0..1.0));
            random_low_rank(m, n, r, opts.seed.wrapping_add(k as u64))
                .expect("valid sizes")
                .scaled(scale)
        })
        .collect()
}

fn singular_values(x: &DenseMatrix, perturb: bool) -> Result<Vec<f64>> {
    let s = thin_svd(x)?.s;
    let rank = numerical_rank(&s);
    let mut s = s[..rank].to_vec();
    if perturb && rank > 0 {
        s[0] *= 1.0 + PERTURBATION;
    }
    Ok(s)
}

/// `coef · α^{a_exp} · Σσ^p` written out independently of the library.
fn expected(s: &[f64], q: f64, mode: BPenalty, alpha: f64) -> f64 {
    let (coef, a_exp, p) = match mode {
        BPenalty::GroupL2 => (1.0 + 1.0 / q, q / (q + 1.0), q / (q + 1.0)),
        BPenalty::HalfFrobeniusSq => (0.5 + 1.0 / q, q / (q + 2.0), 2.0 * q / (q + 2.0)),
    };
    coef * alpha.powf(a_exp) * s.iter().map(|v| v.powf(p)).sum::<f64>()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn attained(x: &DenseMatrix, q: QExponent, mode: BPenalty, alpha: f64) -> Result<f64> {
    let spec = FgsrSpec::new(q, alpha, mode)?;
    let f = optimal_factors(x, &spec, x.rows().min(x.cols()))?;
    Ok(factored_objective(&f, &spec))
}

fn identity_checks(
    opts: &VerifyOptions,
    mats: &[DenseMatrix],
    out: &mut Vec<CheckOutcome>,
) -> Result<()> {
    let spectra: Vec<Vec<f64>> = mats
        .iter()
        .map(|x| singular_values(x, opts.perturb))
        .collect::<Result<_>>()?;

    let mut worst = 0.0_f64;
    for (x, s) in mats.iter().zip(&spectra) {
        let rhs = 2.0 * s.iter().map(|v| v.sqrt()).sum::<f64>();
        worst = worst.max(rel(
            attained(x, QExponent::One, BPenalty::GroupL2, 1.0)?,
            rhs,
        ));
    }
    out.push(CheckOutcome::new(
        "identity square_root (q=1, group_l2, alpha=1)".into(),
        worst,
        IDENTITY_TOL,
    ));

    let mut worst = 0.0_f64;
    for (x, s) in mats.iter().zip(&spectra) {
        for alpha in ALPHAS {
            let rhs = 1.5 * alpha.cbrt() * s.iter().map(|v| v.powf(2.0 / 3.0)).sum::<f64>();
            worst = worst.max(rel(
                attained(x, QExponent::One, BPenalty::HalfFrobeniusSq, alpha)?,
                rhs,
            ));
        }
    }
    out.push(CheckOutcome::new(
        "identity two_thirds (q=1, half_frobenius)".into(),
        worst,
        IDENTITY_TOL,
    ));

    for &q in &opts.qs {
        for mode in [BPenalty::GroupL2, BPenalty::HalfFrobeniusSq] {
            let mut worst = 0.0_f64;
            for (x, s) in mats.iter().zip(&spectra) {
                for alpha in ALPHAS {
                    let rhs = expected(s, q.value(), mode, alpha);
                    worst = worst.max(rel(attained(x, q, mode, alpha)?, rhs));
                }
            }
            out.push(CheckOutcome::new(
                format!("identity closed_form (q={q}, {})", mode_name(mode)),
                worst,
                IDENTITY_TOL,
            ));
        }
    }

    if opts.qs.contains(&QExponent::Quarter) {
        let mut worst = 0.0_f64;
        for (x, s) in mats.iter().zip(&spectra) {
            for alpha in ALPHAS {
                let rhs =
                    4.5 * alpha.powf(1.0 / 9.0) * s.iter().map(|v| v.powf(2.0 / 9.0)).sum::<f64>();
                worst = worst.max(rel(
                    attained(x, QExponent::Quarter, BPenalty::HalfFrobeniusSq, alpha)?,
                    rhs,
                ));
            }
        }
        out.push(CheckOutcome::new(
            "identity worked_case (q=1/4, half_frobenius)".into(),
            worst,
            IDENTITY_TOL,
        ));
    }
    Ok(())
}

fn to_na(x: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.rows(), x.cols(), x.values())
}

fn from_na(x: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::new(x.nrows(), x.ncols(), x.transpose().as_slice().to_vec())
        .expect("finite entries")
}

/// A random factorization of the same product: optionally split one column
/// pair in two, pad with zero columns, then mix with an invertible matrix.
fn random_factorization(opt: &FactorPair, rng: &mut ChaCha8Rng) -> Option<FactorPair> {
    let mut a = to_na(&opt.a);
    let mut b = to_na(&opt.b);
    if rng.random_bool(0.5) {
        let j = rng.random_range(0..a.ncols());
        let t: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let (c, s) = (t.cos(), t.sin());
        let (aj, bj) = (a.column(j).clone_owned(), b.row(j).clone_owned());
        a.set_column(j, &(&aj * c));
        b.set_row(j, &(&bj * c));
        let w = a.ncols();
        a = a.insert_column(w, 0.0);
        let last = a.ncols() - 1;
        a.set_column(last, &(&aj * s));
        let h = b.nrows();
        b = b.insert_row(h, 0.0);
        let last = b.nrows() - 1;
        b.set_row(last, &(&bj * s));
    }
    let pad = rng.random_range(0..=2);
    let (w, h) = (a.ncols(), b.nrows());
    a = a.resize_horizontally(w + pad, 0.0);
    b = b.resize_vertically(h + pad, 0.0);
    let d = a.ncols();
    if rng.random_bool(0.8) {
        let noise = standard_normal_array(d, d, rng);
        let spread = rng.random_range(0.01..1.0);
        let g =
            DMatrix::<f64>::identity(d, d) + DMatrix::from_fn(d, d, |i, j| spread * noise[[i, j]]);
        let g_inv = g.clone().try_inverse()?;
        a = &a * g;
        b = g_inv * &b;
    }
    Some(FactorPair {
        a: from_na(&a),
        b: from_na(&b),
        active_columns: vec![true; d],
    })
}

fn minimality_checks(
    opts: &VerifyOptions,
    mats: &[DenseMatrix],
    out: &mut Vec<CheckOutcome>,
) -> Result<()> {
    let mut rng = seeded_rng(opts.seed, 22);
    for &q in &opts.qs {
        for mode in [BPenalty::GroupL2, BPenalty::HalfFrobeniusSq] {
            let mut violation = 0.0_f64;
            let mut tried = 0usize;
            for x in mats {
                let alpha = ALPHAS[rng.random_range(0..ALPHAS.len())];
                let spec = FgsrSpec::new(q, alpha, mode)?;
                let s = singular_values(x, false)?;
                let floor = expected(&s, q.value(), mode, alpha);
                let opt = optimal_factors(x, &spec, s.len())?;
                for _ in 0..opts.factorizations {
                    if let Some(f) = random_factorization(&opt, &mut rng) {
                        tried += 1;
                        let gap = floor - factored_objective(&f, &spec);
                        violation = violation.max(gap / floor.max(1.0));
                    }
                }
            }
            let mut c = CheckOutcome::new(
                format!("minimality (q={q}, {})", mode_name(mode)),
                violation,
                MINIMALITY_TOL,
            );
            c.detail = format!("{tried} factorizations, largest shortfall {violation:.3e}");
            out.push(c);
        }
    }
    Ok(())
}

fn invariance_check(mats: &[DenseMatrix], out: &mut Vec<CheckOutcome>) -> Result<()> {
    let mut worst = 0.0_f64;
    for x in mats.iter().take(20) {
        let base = fgsr_value(x, FgsrKind::TwoThirds, INVARIANCE_ALPHAS[0])?;
        for alpha in &INVARIANCE_ALPHAS[1..] {
            worst = worst.max(rel(fgsr_value(x, FgsrKind::TwoThirds, *alpha)?, base));
        }
    }
    out.push(CheckOutcome::new(
        "alpha_invariance (two_thirds)".into(),
        worst,
        IDENTITY_TOL,
    ));
    Ok(())
}

/// Minimizer of `λ‖u‖ + ½‖u − x‖²` by damped Newton on a smoothed norm.
pub fn group_prox_oracle(x: &[f64], lambda: f64) -> Vec<f64> {
    let k = x.len();
    let xv = nalgebra::DVector::from_column_slice(x);
    let eta = 1e-10 * (1.0 + xv.norm());
    let f = |u: &nalgebra::DVector<f64>| {
        lambda * (u.norm_squared() + eta * eta).sqrt() + 0.5 * (u - &xv).norm_squared()
    };
    let mut u = xv.clone();
    for _ in 0..500 {
        let s = (u.norm_squared() + eta * eta).sqrt();
        let grad = &u * (lambda / s) + &u - &xv;
        if grad.norm() <= 1e-14 * (1.0 + xv.norm()) {
            break;
        }
        let h = DMatrix::<f64>::identity(k, k) * (1.0 + lambda / s)
            - (&u * u.transpose()) * (lambda / (s * s * s));
        let Some(step) = h.cholesky().map(|c| c.solve(&grad)) else {
            break;
        };
        let f0 = f(&u);
        let mut t = 1.0;
        let mut next = &u - &step * t;
        while f(&next) > f0 - 1e-4 * t * grad.dot(&step) && t > 1e-20 {
            t *= 0.5;
            next = &u - &step * t;
        }
        if t <= 1e-20 {
            break;
        }
        u = next;
    }
    u.as_slice().to_vec()
}

/// Minimizer of `λ|u| + ½(u − x)²` by bisection on its subdifferential.
pub fn l1_prox_oracle(x: f64, lambda: f64) -> f64 {
    let left = |u: f64| u - x + if u > 0.0 { lambda } else { -lambda };
    let right = |u: f64| u - x + if u >= 0.0 { lambda } else { -lambda };
    let (mut lo, mut hi) = (-x.abs() - lambda - 1.0, x.abs() + lambda + 1.0);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if left(mid) > 0.0 {
            hi = mid;
        } else if right(mid) < 0.0 {
            lo = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

fn prox_checks(opts: &VerifyOptions, out: &mut Vec<CheckOutcome>) {
    let mut rng = seeded_rng(opts.seed, 23);
    let mut worst_group = 0.0_f64;
    let mut worst_station = 0.0_f64;
    let mut worst_l1 = 0.0_f64;
    for _ in 0..opts.prox_inputs {
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=4);
        let x =
            DenseMatrix::from_array(standard_normal_array(rows, cols, &mut rng)).expect("finite");
        let top = x.column_norms().into_iter().fold(0.0, f64::max);
        let lambda = rng.random_range(0.0..1.5) * top;
        let p = prox_group_l2(&x, lambda);
        for j in 0..cols {
            let xj: Vec<f64> = (0..rows).map(|i| x.get(i, j)).collect();
            let pj: Vec<f64> = (0..rows).map(|i| p.get(i, j)).collect();
            let oracle = group_prox_oracle(&xj, lambda);
            for (a, b) in pj.iter().zip(&oracle) {
                worst_group = worst_group.max((a - b).abs());
            }
            let norm = pj.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                let resid = (0..rows)
                    .map(|i| (lambda * pj[i] / norm + pj[i] - xj[i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst_station = worst_station.max(resid);
            }
        }
        let lambda_l1 = rng.random_range(0.0..2.0);
        let l1 = prox_l1(&x, lambda_l1);
        for (&a, &v) in l1.values().iter().zip(x.values()) {
            worst_l1 = worst_l1.max((a - l1_prox_oracle(v, lambda_l1)).abs());
        }
    }
    out.push(CheckOutcome::new(
        "prox_group_l2 matches numerical minimizer".into(),
        worst_group,
        PROX_TOL,
    ));
    out.push(CheckOutcome::new(
        "prox_group_l2 stationarity".into(),
        worst_station,
        STATIONARITY_TOL,
    ));
    out.push(CheckOutcome::new(
        "prox_l1 matches numerical minimizer".into(),
        worst_l1,
        PROX_TOL,
    ));
}

/// Runs every check and returns one outcome per property.
pub fn run_verify(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let mats = instances(opts);
    let mut out = Vec::new();
    identity_checks(opts, &mats, &mut out)?;
    minimality_checks(opts, &mats[..mats.len().min(10)], &mut out)?;
    invariance_check(&mats, &mut out)?;
    prox_checks(opts, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            instances: 8,
            factorizations: 20,
            prox_inputs: 20,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn default_suite_passes() {
        let out = run_verify(&quick()).unwrap();
        for c in &out {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(out.iter().any(|c| c.name.contains("worked_case")));
    }

    #[test]
    fn perturbation_is_detected() {
        let out = run_verify(&VerifyOptions {
            perturb: true,
            ..quick()
        })
        .unwrap();
        let failed: Vec<_> = out.iter().filter(|c| !c.passed).collect();
        assert!(!failed.is_empty());
        assert!(failed.iter().all(|c| c.name.starts_with("identity")));
    }

    #[test]
    fn single_q_runs_only_that_exponent() {
        let out = run_verify(&VerifyOptions {
            qs: vec![QExponent::Quarter],
            ..quick()
        })
        .unwrap();
        assert!(out.iter().all(|c| c.passed));
        assert!(out
            .iter()
            .any(|c| c.name == "identity closed_form (q=1/4, half_frobenius)"));
        assert!(!out.iter().any(|c| c.name.contains("q=1/2")));
    }

    #[test]
    fn oracles_on_known_cases() {
        assert!((l1_prox_oracle(3.0, 1.0) - 2.0).abs() < 1e-9);
        assert!(l1_prox_oracle(0.5, 1.0).abs() < 1e-9);
        let u = group_prox_oracle(&[3.0, 4.0], 2.5);
        assert!((u[0] - 1.5).abs() < 1e-8 && (u[1] - 2.0).abs() < 1e-8);
        let z = group_prox_oracle(&[0.3, 0.4], 1.0);
        assert!(z.iter().all(|v| v.abs() < 1e-8));
    }
}
