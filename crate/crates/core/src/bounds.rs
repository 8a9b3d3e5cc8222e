//! Checked inequalities: each check computes both sides, an additive error
//! budget, and a pass flag `lhs <= rhs + allowance + error_budget`.
//!
//! `allowance` is zero for finite-n inequalities. The asymptotic checks
//! compare a distance at the largest scheduled `n` with a limit and carry a
//! finite-n allowance of order `n^{-1/2}`, see [`AcltConfig::allowance`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arrays::{ArrayFamily, RowSum};
use crate::dist::discretize_normal;
use crate::error::{Error, Result};
use crate::metrics::{
    discretization_gap, kolmogorov_normal, prokhorov, prokhorov_normal, total_variation_normal,
    wasserstein_normal, MetricValue, DEFAULT_NORMAL_ATOMS, DEFAULT_TOL,
};
use crate::stein::{evaluate_stein, SteinEvaluation, TestFunction};

/// Constant of the Berry–Esseen-type bound with Lindeberg truncation.
pub const OSIPOV_FELLER_C: f64 = 4.1;
pub const C_K: f64 = 1.0;
pub const C_W: f64 = 8.0;
pub const C_P: f64 = 4.0;

pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsMethod {
    Exact,
    MonteCarlo,
}

/// Both sides of a checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub lhs_method: LhsMethod,
    pub error_budget: f64,
    #[serde(default)]
    pub allowance: f64,
    pub params: BTreeMap<String, Value>,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        lhs_method: LhsMethod,
        error_budget: f64,
        params: BTreeMap<String, Value>,
    ) -> Self {
        Self::with_allowance(name, lhs, rhs, lhs_method, error_budget, 0.0, params)
    }

    pub fn with_allowance(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        lhs_method: LhsMethod,
        error_budget: f64,
        allowance: f64,
        params: BTreeMap<String, Value>,
    ) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            lhs_method,
            error_budget,
            allowance,
            params,
            pass: lhs <= rhs + allowance + error_budget,
        }
    }
}

/// How the left-hand side distance is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LhsMode {
    /// Exact convolution with the given pruning tolerance.
    Exact { prune_tol: f64 },
    /// `reps` sampled row sums; the budget is the DKW band at level `delta`.
    MonteCarlo { reps: usize, seed: u64, delta: f64 },
}

impl Default for LhsMode {
    fn default() -> Self {
        LhsMode::Exact {
            prune_tol: DEFAULT_PRUNE_TOL,
        }
    }
}

/// Half-width of the DKW band for `reps` samples at confidence `1 − delta`.
pub fn dkw_band(reps: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * reps as f64)).sqrt()
}

fn family_param(fam: &ArrayFamily) -> Value {
    json!(fam.description())
}

/// `K(ξ, Σ_k ξ_{n,k})` under the chosen mode.
fn kolmogorov_lhs(fam: &ArrayFamily, n: usize, mode: LhsMode) -> Result<(MetricValue, LhsMethod)> {
    Ok(match mode {
        LhsMode::Exact { prune_tol } => {
            let row = fam.row_sum_exact(n, prune_tol)?;
            (
                kolmogorov_normal(&row.law).with_extra_budget(row.pruned_mass),
                LhsMethod::Exact,
            )
        }
        LhsMode::MonteCarlo { reps, seed, delta } => {
            let law = fam.row_sum_sample(n, reps, seed)?;
            let k = kolmogorov_normal(&law).value;
            (
                MetricValue::new(k, crate::metrics::Method::MonteCarlo, dkw_band(reps, delta)),
                LhsMethod::MonteCarlo,
            )
        }
    })
}

/// Stein-transform bound on `|E h(ξ) − E h(Σ_k ξ_{n,k})|`:
/// `½‖f″‖ ε + osc(f′) Σ E[ξ²; |ξ| >= ε] + osc(f″) max E|ξ|`.
pub fn big_inequality_check(
    fam: &ArrayFamily,
    n: usize,
    h: &TestFunction,
    eps: f64,
) -> Result<BoundReport> {
    let row = fam.row_sum_exact(n, 0.0)?;
    let eval = evaluate_stein(h)?;
    big_inequality_check_with(fam, n, &row, h, &eval, eps)
}

/// [`big_inequality_check`] with a precomputed row sum and Stein grid.
pub fn big_inequality_check_with(
    fam: &ArrayFamily,
    n: usize,
    row: &RowSum,
    h: &TestFunction,
    eval: &SteinEvaluation,
    eps: f64,
) -> Result<BoundReport> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", format!("{eps} must be positive")));
    }
    let e_row = row.law.expect(|x| h.eval(x));
    let lhs = (eval.mean_h - e_row).abs();
    let tail = fam.row_moment(n, 2, |a| a.abs() >= eps)?;
    let max_abs = fam.max_abs_mean(n)?;
    let rhs = 0.5 * eval.sup_f2 * eps + eval.osc_f1 * tail + eval.osc_f2 * max_abs;
    // Pruned mass can move E h by at most its mass times the spread of h
    // over the support.
    let spread = match h.range_bounds() {
        Some((lo, hi)) => hi - lo,
        None => {
            row.law
                .iter()
                .map(|(x, _)| h.eval(x).abs())
                .fold(0.0, f64::max)
                * 2.0
        }
    };
    let budget = 1e-12 + row.pruned_mass * spread;
    let mut params = BTreeMap::new();
    params.insert("family".into(), family_param(fam));
    params.insert("n".into(), json!(n));
    params.insert("eps".into(), json!(eps));
    params.insert("h".into(), json!(h.name()));
    params.insert("tail_moment".into(), json!(tail));
    params.insert("max_abs_mean".into(), json!(max_abs));
    params.insert("sup_f2".into(), json!(eval.sup_f2));
    params.insert("osc_f1".into(), json!(eval.osc_f1));
    params.insert("osc_f2".into(), json!(eval.osc_f2));
    Ok(BoundReport::new(
        "thm32",
        lhs,
        rhs,
        LhsMethod::Exact,
        budget,
        params,
    ))
}

/// Runs [`big_inequality_check_with`] over a full matrix, evaluating each
/// Stein grid and each row sum once. Reports are ordered by family, `n`,
/// test function, then `ε`.
pub fn big_inequality_suite(
    families: &[ArrayFamily],
    ns: &[usize],
    hs: &[TestFunction],
    eps_grid: &[f64],
) -> Result<Vec<BoundReport>> {
    let evals = hs
        .par_iter()
        .map(evaluate_stein)
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(&ArrayFamily, usize)> = families
        .iter()
        .flat_map(|f| ns.iter().map(move |&n| (f, n)))
        .collect();
    let blocks = cells
        .par_iter()
        .map(|&(fam, n)| {
            let row = fam.row_sum_exact(n, 0.0)?;
            let mut out = Vec::with_capacity(hs.len() * eps_grid.len());
            for (h, eval) in hs.iter().zip(&evals) {
                for &eps in eps_grid {
                    out.push(big_inequality_check_with(fam, n, &row, h, eval, eps)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// `K(ξ, Σ ξ) <= C (Σ E[ξ²; |ξ| > 1] + Σ E[|ξ|³; |ξ| <= 1])`.
pub fn osipov_feller_check(fam: &ArrayFamily, n: usize, c: f64) -> Result<BoundReport> {
    osipov_feller_check_with(fam, n, c, LhsMode::default())
}

pub fn osipov_feller_check_with(
    fam: &ArrayFamily,
    n: usize,
    c: f64,
    mode: LhsMode,
) -> Result<BoundReport> {
    let (k, method) = kolmogorov_lhs(fam, n, mode)?;
    let tail = fam.row_moment(n, 2, |a| a.abs() > 1.0)?;
    let cubic = fam.row_moment(n, 3, |a| a.abs() <= 1.0)?;
    let rhs = c * (tail + cubic);
    let mut params = BTreeMap::new();
    params.insert("family".into(), family_param(fam));
    params.insert("n".into(), json!(n));
    params.insert("C".into(), json!(c));
    params.insert("tail_moment".into(), json!(tail));
    params.insert("cubic_moment".into(), json!(cubic));
    Ok(BoundReport::new(
        "thm12",
        k.value,
        rhs,
        method,
        k.error_budget,
        params,
    ))
}

/// `K(ξ, Σ ξ) <= C (L_n(ε) + ε)`.
pub fn truncated_eps_check(fam: &ArrayFamily, n: usize, eps: f64, c: f64) -> Result<BoundReport> {
    truncated_eps_check_with(fam, n, eps, c, LhsMode::default())
}

pub fn truncated_eps_check_with(
    fam: &ArrayFamily,
    n: usize,
    eps: f64,
    c: f64,
    mode: LhsMode,
) -> Result<BoundReport> {
    let lin = fam.lindeberg_sum(n, eps)?;
    let (k, method) = kolmogorov_lhs(fam, n, mode)?;
    Ok(eps_report(fam, n, eps, c, lin, k, method))
}

/// Grid version sharing one row sum across every `ε`.
pub fn truncated_eps_suite(
    fam: &ArrayFamily,
    n: usize,
    eps_grid: &[f64],
    c: f64,
    mode: LhsMode,
) -> Result<Vec<BoundReport>> {
    let (k, method) = kolmogorov_lhs(fam, n, mode)?;
    eps_grid
        .iter()
        .map(|&eps| {
            Ok(eps_report(
                fam,
                n,
                eps,
                c,
                fam.lindeberg_sum(n, eps)?,
                k,
                method,
            ))
        })
        .collect()
}

fn eps_report(
    fam: &ArrayFamily,
    n: usize,
    eps: f64,
    c: f64,
    lin: f64,
    k: MetricValue,
    method: LhsMethod,
) -> BoundReport {
    let mut params = BTreeMap::new();
    params.insert("family".into(), family_param(fam));
    params.insert("n".into(), json!(n));
    params.insert("eps".into(), json!(eps));
    params.insert("C".into(), json!(c));
    params.insert("lindeberg_sum".into(), json!(lin));
    BoundReport::new(
        "eps",
        k.value,
        c * (lin + eps),
        method,
        k.error_budget,
        params,
    )
}

/// Distance used by [`aclt_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum AcltMetric {
    K,
    W,
    P { lambda_grid: Vec<f64> },
}

impl AcltMetric {
    fn label(&self) -> &'static str {
        match self {
            AcltMetric::K => "K",
            AcltMetric::W => "W",
            AcltMetric::P { .. } => "P",
        }
    }
}

/// Settings for [`aclt_estimate_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct AcltConfig {
    pub n_schedule: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub prune_tol: f64,
    pub tol: f64,
    pub normal_atoms: usize,
    pub c_k: f64,
    pub c_w: f64,
    pub c_p: f64,
    /// Finite-n allowance. `None` uses `1/√n_max` for K and W, and
    /// `1/(λ_min √n_max)` for P, the order of the distance from a lattice
    /// law with spacing `2/√n` to the normal.
    pub allowance: Option<f64>,
}

impl Default for AcltConfig {
    fn default() -> Self {
        Self {
            n_schedule: vec![250, 500, 1000, 2000],
            eps_grid: (1..=19).map(|i| i as f64 * 0.05).collect(),
            prune_tol: DEFAULT_PRUNE_TOL,
            tol: DEFAULT_TOL,
            normal_atoms: DEFAULT_NORMAL_ATOMS,
            c_k: C_K,
            c_w: C_W,
            c_p: C_P,
            allowance: None,
        }
    }
}

/// `d(ξ, Σ ξ_{n,k})` at the largest scheduled `n` against `C_d` times the
/// Lindeberg index estimate.
pub fn aclt_estimate(
    fam: &ArrayFamily,
    metric: &AcltMetric,
    n_schedule: &[usize],
) -> Result<BoundReport> {
    let config = AcltConfig {
        n_schedule: n_schedule.to_vec(),
        ..AcltConfig::default()
    };
    aclt_estimate_with(fam, metric, &config)
}

/// Prokhorov distances at one `n` over a λ grid, on the exact route
/// (continuous normal) and on the discretized-reference route.
struct ProkhorovPoint {
    exact: Vec<MetricValue>,
    discretized: Vec<MetricValue>,
}

fn prokhorov_point(
    row: &RowSum,
    lambdas: &[f64],
    tol: f64,
    reference: &crate::DiscreteDistribution,
    gaps: &[f64],
) -> Result<ProkhorovPoint> {
    let mut exact = Vec::new();
    let mut discretized = Vec::new();
    for (&lambda, &gap) in lambdas.iter().zip(gaps) {
        exact.push(prokhorov_normal(&row.law, lambda, tol)?.with_extra_budget(row.pruned_mass));
        discretized.push(
            prokhorov(&row.law, reference, lambda, tol)?.with_extra_budget(row.pruned_mass + gap),
        );
    }
    Ok(ProkhorovPoint { exact, discretized })
}

pub fn aclt_estimate_with(
    fam: &ArrayFamily,
    metric: &AcltMetric,
    config: &AcltConfig,
) -> Result<BoundReport> {
    let profile = fam.lindeberg_profile(&config.n_schedule, &config.eps_grid)?;
    if !profile.feller_decreasing {
        return Err(Error::FellerTrend(format!(
            "max cell variance {:?} is not nonincreasing along n = {:?}",
            profile.feller, profile.n_schedule
        )));
    }
    let lin = profile.index_estimate;
    let ns = profile.n_schedule.clone();
    let mut params = BTreeMap::new();
    params.insert("family".into(), family_param(fam));
    params.insert("metric".into(), json!(metric.label()));
    params.insert("n_schedule".into(), json!(ns));
    params.insert("lindeberg_index_estimate".into(), json!(lin));
    params.insert("non_monotone_eps".into(), json!(profile.non_monotone_eps));
    params.insert("prune_tol".into(), json!(config.prune_tol));

    let (constant, lhs, budget, trace) = match metric {
        AcltMetric::K | AcltMetric::W => {
            let mut trace = Vec::new();
            for &n in &ns {
                let row = fam.row_sum_exact(n, config.prune_tol)?;
                let v = if *metric == AcltMetric::K {
                    kolmogorov_normal(&row.law).with_extra_budget(row.pruned_mass)
                } else {
                    // Pruned mass moves by at most the width of the support.
                    let width = row.law.max_atom() - row.law.min_atom() + n as f64;
                    wasserstein_normal(&row.law).with_extra_budget(row.pruned_mass * width)
                };
                trace.push(v);
            }
            let c = if *metric == AcltMetric::K {
                config.c_k
            } else {
                config.c_w
            };
            let last = *trace.last().unwrap();
            (
                c,
                last.value,
                last.error_budget,
                trace.iter().map(|v| v.value).collect::<Vec<_>>(),
            )
        }
        AcltMetric::P { lambda_grid } => {
            if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::param("lambda_grid", "must be nonempty and positive"));
            }
            let reference = discretize_normal(config.normal_atoms)?;
            let gaps = lambda_grid
                .iter()
                .map(|&l| discretization_gap(&reference, l, config.tol))
                .collect::<Result<Vec<_>>>()?;
            let mut trace = Vec::new();
            let mut last = None;
            for &n in &ns {
                let row = fam.row_sum_exact(n, config.prune_tol)?;
                let point = prokhorov_point(&row, lambda_grid, config.tol, &reference, &gaps)?;
                trace.push(point.exact.iter().map(|v| v.value).fold(0.0, f64::max));
                last = Some(point);
            }
            let point = last.expect("nonempty schedule");
            let (worst, _) = point
                .exact
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.value))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let by_lambda: Vec<Value> = lambda_grid
                .iter()
                .zip(point.exact.iter().zip(&point.discretized))
                .map(|(l, (e, d))| {
                    json!({
                        "lambda": l,
                        "exact": e.value,
                        "exact_budget": e.error_budget,
                        "discretized": d.value,
                        "discretized_budget": d.error_budget,
                    })
                })
                .collect();
            params.insert("lambda_grid".into(), json!(lambda_grid));
            params.insert("by_lambda".into(), Value::Array(by_lambda));
            params.insert("normal_atoms".into(), json!(config.normal_atoms));
            let v = point.exact[worst];
            (config.c_p, v.value, v.error_budget, trace)
        }
    };
    let root_n = (*ns.last().expect("nonempty schedule") as f64).sqrt();
    let allowance = config.allowance.unwrap_or(match metric {
        AcltMetric::P { lambda_grid } => {
            1.0 / (lambda_grid.iter().copied().fold(f64::INFINITY, f64::min) * root_n)
        }
        _ => 1.0 / root_n,
    });
    let monotone = trace.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    params.insert("C".into(), json!(constant));
    params.insert("lhs_trace".into(), json!(trace));
    params.insert("lhs_trace_nonincreasing".into(), json!(monotone));
    Ok(BoundReport::with_allowance(
        format!("aclt_{}", metric.label()),
        lhs,
        constant * lin,
        LhsMethod::Exact,
        budget,
        allowance,
        params,
    ))
}

/// The rademacher array has Lindeberg index 0 while every row sum is
/// discrete, so the total variation to ξ stays 1. The report has
/// `lhs = |min TV − 1| + max L_n(ε)` over the schedule and `ε >= n^{−1/2}`,
/// and `rhs = 0`.
pub fn tv_counterexample(n_schedule: &[usize]) -> Result<BoundReport> {
    if n_schedule.is_empty() {
        return Err(Error::param("n_schedule", "must be nonempty"));
    }
    let fam = ArrayFamily::Rademacher;
    let mut tvs = Vec::new();
    let mut ks = Vec::new();
    let mut lins = Vec::new();
    for &n in n_schedule {
        let row = fam.row_sum_exact(n, 0.0)?;
        tvs.push(total_variation_normal(&row.law).value);
        ks.push(kolmogorov_normal(&row.law).value);
        let edge = 1.0 / (n as f64).sqrt();
        let mut eps = vec![edge];
        eps.extend((1..=20).map(|i| i as f64 * 0.05).filter(|&e| e > edge));
        let worst = eps
            .iter()
            .map(|&e| fam.lindeberg_sum(n, e))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        lins.push(worst);
    }
    let min_tv = tvs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_lin = lins.iter().copied().fold(0.0, f64::max);
    let mut params = BTreeMap::new();
    params.insert("n_schedule".into(), json!(n_schedule));
    params.insert("total_variation".into(), json!(tvs));
    params.insert("kolmogorov".into(), json!(ks));
    params.insert("lindeberg_max".into(), json!(lins));
    Ok(BoundReport::new(
        "tv_counterexample",
        (min_tv - 1.0).abs() + max_lin,
        0.0,
        LhsMethod::Exact,
        0.0,
        params,
    ))
}

/// Side-by-side traces of the Prokhorov side and the test-function side of
/// the duality between parametrized Prokhorov distances and `[0, 1]`-valued
/// test functions. Nothing is asserted: the relation concerns limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityDiagnostic {
    pub family: String,
    pub n_schedule: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub test_functions: Vec<String>,
    /// `max_λ ρ_λ(Φ_N, row sum)` per `n`.
    pub prokhorov_max: Vec<f64>,
    /// `ρ_λ` per `n` (rows) and `λ` (columns).
    pub prokhorov: Vec<Vec<f64>>,
    /// `max_h |E h(ξ) − E h(row sum)|` per `n`.
    pub test_function_max: Vec<f64>,
    pub discretization_budget: f64,
}

/// `[0, 1]`-valued library members plus a few narrower steps.
pub fn duality_library() -> Vec<TestFunction> {
    let mut hs: Vec<TestFunction> = TestFunction::library()
        .into_iter()
        .filter(|h| h.range_bounds() == Some((0.0, 1.0)))
        .collect();
    for &(c, w) in &[(-1.0, 0.5), (0.0, 0.25), (1.0, 0.5), (0.5, 0.1)] {
        hs.push(TestFunction::SmoothStep {
            center: c,
            width: w,
        });
    }
    hs
}

pub fn prokhorov_duality_diagnostic(
    fam: &ArrayFamily,
    n_schedule: &[usize],
    lambda_grid: &[f64],
    h_library: &[TestFunction],
) -> Result<DualityDiagnostic> {
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::param("lambda_grid", "must be nonempty and positive"));
    }
    let reference = discretize_normal(DEFAULT_NORMAL_ATOMS)?;
    let means = h_library
        .iter()
        .map(crate::stein::gauss_expectation)
        .collect::<Result<Vec<_>>>()?;
    let mut budget = 0.0f64;
    for &l in lambda_grid {
        budget = budget.max(discretization_gap(&reference, l, DEFAULT_TOL)?);
    }
    let mut prok = Vec::new();
    let mut prok_max = Vec::new();
    let mut h_max = Vec::new();
    for &n in n_schedule {
        let row = fam.row_sum_exact(n, DEFAULT_PRUNE_TOL)?;
        let per_lambda = lambda_grid
            .iter()
            .map(|&l| {
                crate::metrics::prokhorov_symmetric(&reference, &row.law, l, DEFAULT_TOL)
                    .map(|v| v.value)
            })
            .collect::<Result<Vec<_>>>()?;
        prok_max.push(per_lambda.iter().copied().fold(0.0, f64::max));
        prok.push(per_lambda);
        let gap = h_library
            .iter()
            .zip(&means)
            .map(|(h, m)| (m - row.law.expect(|x| h.eval(x))).abs())
            .fold(0.0, f64::max);
        h_max.push(gap);
    }
    Ok(DualityDiagnostic {
        family: fam.description(),
        n_schedule: n_schedule.to_vec(),
        lambda_grid: lambda_grid.to_vec(),
        test_functions: h_library.iter().map(|h| h.name()).collect(),
        prokhorov_max: prok_max,
        prokhorov: prok,
        test_function_max: h_max,
        discretization_budget: budget,
    })
}
