//! `clt-lab`: batch front end for the clt-lab-core checks.
//!
//! Exit codes: 0 on success, 1 when a checked bound fails, 2 on usage,
//! configuration or input errors.

mod config;
mod output;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use clt_lab::metrics::{
    kolmogorov, kolmogorov_normal, prokhorov, prokhorov_normal, total_variation,
    total_variation_normal, wasserstein, wasserstein_normal,
};
use clt_lab::stein::{evaluate_stein, lemma42_report, SteinSummary};
use clt_lab::{BoundReport, DiscreteDistribution, TestFunction};
use serde::Serialize;

use config::{load_family, load_law, parse_grid, parse_n_grid, RunConfig};

const THREADS_ENV: &str = "CLT_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "clt-lab",
    version,
    about = "Numerical checks for approximate central limit theorems"
)]
struct Cli {
    /// Worker threads (falls back to CLT_LAB_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Law of the row sum, exact or sampled.
    Simulate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        n: usize,
        /// Sample this many row sums; exact convolution when absent.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = clt_lab::bounds::DEFAULT_PRUNE_TOL)]
        prune_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between a law and another law or the standard normal.
    Distance {
        #[arg(long, value_enum)]
        metric: MetricName,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = clt_lab::metrics::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        p: PathBuf,
        /// A law file, or `normal`.
        #[arg(long)]
        q: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stein transform summary and derivative-bound margins.
    Stein {
        /// Test function name, e.g. `sigmoid` or `mollified(log_cosh_contraction,0.1)`.
        #[arg(long)]
        h: String,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Plot-ready grid of x, f, f′, f″.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Lindeberg profile over an n schedule and ε grid.
    Lindeberg {
        #[arg(long)]
        family: PathBuf,
        /// Comma list or start:stop:step.
        #[arg(long)]
        n: String,
        #[arg(long, default_value = "0.05:0.95:0.05")]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config n schedule.
        #[arg(long)]
        n: Option<String>,
        /// Overrides the config ε grid.
        #[arg(long)]
        eps: Option<String>,
        /// Overrides the config λ grid.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Render a JSON report list as CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MetricName {
    Kolmogorov,
    Wasserstein,
    Prokhorov,
    Tv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Thm32,
    Thm12,
    Eps,
    Aclt,
    Tv,
    Lemma45,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Serialize)]
struct SteinReport {
    summary: SteinSummary,
    lemma42: BoundReport,
}

/// Outcome of a successful command: whether every asserted check held.
type Checked = bool;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            Ok(Some(v.trim().parse().with_context(|| {
                format!("{THREADS_ENV}=`{v}` is not a count")
            })?))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<Checked> {
    if let Some(t) = thread_count(cli.threads)? {
        if t == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    match cli.command {
        Command::Simulate {
            family,
            n,
            reps,
            seed,
            prune_tol,
            out,
        } => {
            let fam = load_family(&family)?;
            let law = match reps {
                Some(reps) => fam.row_sum_sample(n, reps, seed)?,
                None => {
                    let row = fam.row_sum_exact(n, prune_tol)?;
                    if row.pruned_mass > 0.0 {
                        eprintln!("pruned mass {}", output::sig17(row.pruned_mass));
                    }
                    row.law
                }
            };
            output::write_json(&law, out.as_deref())?;
            Ok(true)
        }
        Command::Distance {
            metric,
            lambda,
            tol,
            p,
            q,
            out,
        } => {
            let p = load_law(&p)?;
            let q: Option<DiscreteDistribution> = if q == "normal" {
                None
            } else {
                Some(load_law(q.as_ref())?)
            };
            let value = match (metric, &q) {
                (MetricName::Kolmogorov, None) => kolmogorov_normal(&p),
                (MetricName::Kolmogorov, Some(q)) => kolmogorov(&p, q),
                (MetricName::Wasserstein, None) => wasserstein_normal(&p),
                (MetricName::Wasserstein, Some(q)) => wasserstein(&p, q),
                (MetricName::Prokhorov, None) => prokhorov_normal(&p, lambda, tol)?,
                (MetricName::Prokhorov, Some(q)) => prokhorov(&p, q, lambda, tol)?,
                (MetricName::Tv, None) => total_variation_normal(&p),
                (MetricName::Tv, Some(q)) => total_variation(&p, q),
            };
            output::write_json(&value, out.as_deref())?;
            Ok(true)
        }
        Command::Stein { h, report, csv } => {
            let h = TestFunction::from_name(&h)?;
            let eval = evaluate_stein(&h)?;
            let lemma42 = lemma42_report(&h, &eval);
            let pass = lemma42.pass;
            if let Some(path) = csv {
                let mut w = csv::Writer::from_path(&path)
                    .with_context(|| format!("cannot create {}", path.display()))?;
                w.write_record(["x", "f", "f1", "f2"])?;
                for i in 0..eval.grid.len() {
                    w.write_record(
                        [eval.grid[i], eval.f[i], eval.f1[i], eval.f2[i]].map(output::sig17),
                    )?;
                }
                w.flush()?;
            }
            output::write_json(
                &SteinReport {
                    summary: eval.summary(),
                    lemma42,
                },
                report.as_deref(),
            )?;
            Ok(pass)
        }
        Command::Lindeberg {
            family,
            n,
            eps,
            out,
        } => {
            let fam = load_family(&family)?;
            let profile = fam.lindeberg_profile(&parse_n_grid(&n)?, &parse_grid(&eps)?)?;
            output::write_json(&profile, out.as_deref())?;
            Ok(true)
        }
        Command::Verify {
            suite,
            family,
            config,
            n,
            eps,
            lambda,
            out,
            format,
        } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            if let Some(n) = n {
                cfg.n_schedule = parse_n_grid(&n)?;
            } else if config.is_none() {
                cfg.n_schedule = suites::default_schedule(suite);
            }
            if let Some(e) = eps {
                cfg.eps_grid = parse_grid(&e)?;
            }
            if let Some(l) = lambda {
                cfg.lambda_grid = parse_grid(&l)?;
            }
            cfg.validate()?;
            let family = family.as_deref().map(load_family).transpose()?;
            match suites::run(suite, family, &cfg)? {
                suites::SuiteOutput::Reports(reports) => {
                    let pass = reports.iter().all(|r| r.pass);
                    match format {
                        Format::Json => output::write_json(&reports, out.as_deref())?,
                        Format::Csv => output::write_csv(&reports, out.as_deref())?,
                    }
                    if !pass {
                        let failed = reports.iter().filter(|r| !r.pass).count();
                        eprintln!("{failed} of {} checks failed", reports.len());
                    }
                    Ok(pass)
                }
                suites::SuiteOutput::Diagnostic(d) => {
                    if format == Format::Csv {
                        bail!("suite lemma45 produces a diagnostic, not a report list; use --format json");
                    }
                    output::write_json(&d, out.as_deref())?;
                    Ok(true)
                }
            }
        }
        Command::Report { input, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let reports: Vec<BoundReport> = serde_json::from_str(&text)
                .with_context(|| format!("{} is not a report list", input.display()))?;
            output::write_csv(&reports, out.as_deref())?;
            Ok(true)
        }
    }
}
