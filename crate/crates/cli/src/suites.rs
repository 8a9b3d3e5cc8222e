use anyhow::Result;
use clt_lab::bounds::{
    aclt_estimate_with, big_inequality_suite, duality_library, osipov_feller_check_with,
    prokhorov_duality_diagnostic, truncated_eps_suite, tv_counterexample, AcltConfig, AcltMetric,
    DualityDiagnostic, LhsMode,
};
use clt_lab::{ArrayFamily, BoundReport, DiscreteDistribution, TestFunction};
use rayon::prelude::*;

use crate::config::{LhsModeName, RunConfig};
use crate::Suite;

pub enum SuiteOutput {
    Reports(Vec<BoundReport>),
    Diagnostic(DualityDiagnostic),
}

/// n schedule used when neither a config nor `--n` is given.
pub fn default_schedule(suite: Suite) -> Vec<usize> {
    match suite {
        Suite::Thm32 => vec![2, 10, 50, 200],
        Suite::Thm12 | Suite::Eps => vec![1, 2, 5, 10, 50, 100, 200, 1000],
        Suite::Aclt | Suite::Lemma45 => vec![250, 500, 1000, 2000],
        Suite::Tv => vec![1, 10, 100, 1000, 10_000],
    }
}

fn default_families() -> Vec<ArrayFamily> {
    vec![
        ArrayFamily::Rademacher,
        ArrayFamily::iid_scaled(DiscreteDistribution::rademacher(1.0))
            .expect("rademacher base is standardized"),
        ArrayFamily::jump(0.1).expect("valid theta"),
        ArrayFamily::jump(0.4).expect("valid theta"),
    ]
}

fn lhs_mode(cfg: &RunConfig) -> LhsMode {
    match cfg.lhs_mode {
        LhsModeName::Exact => LhsMode::Exact {
            prune_tol: cfg.prune_tol,
        },
        LhsModeName::MonteCarlo => LhsMode::MonteCarlo {
            reps: cfg.reps,
            seed: cfg.seed,
            delta: cfg.delta,
        },
    }
}

pub fn run(suite: Suite, family: Option<ArrayFamily>, cfg: &RunConfig) -> Result<SuiteOutput> {
    let families = match family {
        Some(f) => vec![f],
        None => default_families(),
    };
    let reports = match suite {
        Suite::Thm32 => {
            let hs = if cfg.test_functions.is_empty() {
                TestFunction::library()
            } else {
                cfg.test_functions
                    .iter()
                    .map(|s| TestFunction::from_name(s))
                    .collect::<clt_lab::Result<Vec<_>>>()?
            };
            big_inequality_suite(&families, &cfg.n_schedule, &hs, &cfg.eps_grid)?
        }
        Suite::Thm12 => {
            let cells: Vec<(&ArrayFamily, usize)> = cells(&families, &cfg.n_schedule);
            cells
                .par_iter()
                .map(|&(f, n)| osipov_feller_check_with(f, n, cfg.c, lhs_mode(cfg)))
                .collect::<clt_lab::Result<Vec<_>>>()?
        }
        Suite::Eps => {
            let cells = cells(&families, &cfg.n_schedule);
            let blocks = cells
                .par_iter()
                .map(|&(f, n)| truncated_eps_suite(f, n, &cfg.eps_grid, cfg.c, lhs_mode(cfg)))
                .collect::<clt_lab::Result<Vec<_>>>()?;
            blocks.into_iter().flatten().collect()
        }
        Suite::Aclt => {
            let config = AcltConfig {
                n_schedule: cfg.n_schedule.clone(),
                eps_grid: cfg.eps_grid.clone(),
                prune_tol: cfg.prune_tol,
                tol: cfg.tol,
                c_k: cfg.c_k,
                c_w: cfg.c_w,
                c_p: cfg.c_p,
                allowance: cfg.allowance,
                ..AcltConfig::default()
            };
            let metrics = [
                AcltMetric::K,
                AcltMetric::W,
                AcltMetric::P {
                    lambda_grid: cfg.lambda_grid.clone(),
                },
            ];
            let jobs: Vec<(&ArrayFamily, &AcltMetric)> = families
                .iter()
                .flat_map(|f| metrics.iter().map(move |m| (f, m)))
                .collect();
            jobs.par_iter()
                .map(|&(f, m)| aclt_estimate_with(f, m, &config))
                .collect::<clt_lab::Result<Vec<_>>>()?
        }
        Suite::Tv => vec![tv_counterexample(&cfg.n_schedule)?],
        Suite::Lemma45 => {
            let fam = families.into_iter().next().expect("nonempty family list");
            return Ok(SuiteOutput::Diagnostic(prokhorov_duality_diagnostic(
                &fam,
                &cfg.n_schedule,
                &cfg.lambda_grid,
                &duality_library(),
            )?));
        }
    };
    Ok(SuiteOutput::Reports(reports))
}

fn cells<'a>(families: &'a [ArrayFamily], ns: &[usize]) -> Vec<(&'a ArrayFamily, usize)> {
    families
        .iter()
        .flat_map(|f| ns.iter().map(move |&n| (f, n)))
        .collect()
}
