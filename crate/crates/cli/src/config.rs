use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clt_lab::bounds::{C_K, C_P, C_W, DEFAULT_PRUNE_TOL, OSIPOV_FELLER_C};
use clt_lab::metrics::DEFAULT_TOL;
use clt_lab::{ArrayFamily, DiscreteDistribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsModeName {
    Exact,
    MonteCarlo,
}

/// Settings shared by `verify` suites. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_schedule: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub prune_tol: f64,
    pub tol: f64,
    pub lhs_mode: LhsModeName,
    /// DKW confidence parameter for Monte Carlo budgets.
    pub delta: f64,
    pub test_functions: Vec<String>,
    pub c: f64,
    pub c_k: f64,
    pub c_w: f64,
    pub c_p: f64,
    /// Finite-n allowance for `aclt`; absent means the per-metric default.
    pub allowance: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_schedule: vec![2, 10, 50, 200],
            eps_grid: vec![0.1, 0.3, 0.6, 1.0],
            lambda_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            reps: 100_000,
            seed: 7,
            prune_tol: DEFAULT_PRUNE_TOL,
            tol: DEFAULT_TOL,
            lhs_mode: LhsModeName::Exact,
            delta: 1e-3,
            test_functions: Vec::new(),
            c: OSIPOV_FELLER_C,
            c_k: C_K,
            c_w: C_W,
            c_p: C_P,
            allowance: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("malformed config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_schedule.is_empty() || self.n_schedule.contains(&0) {
            bail!("config field `n_schedule` must be nonempty and positive");
        }
        positive_grid("eps_grid", &self.eps_grid)?;
        positive_grid("lambda_grid", &self.lambda_grid)?;
        if self.reps == 0 {
            bail!("config field `reps` must be positive");
        }
        let fields = [
            ("prune_tol", self.prune_tol, true),
            ("tol", self.tol, false),
            ("c", self.c, false),
            ("c_k", self.c_k, false),
            ("c_w", self.c_w, false),
            ("c_p", self.c_p, false),
        ];
        for (name, v, zero_ok) in fields {
            if !(v.is_finite() && (v > 0.0 || (zero_ok && v == 0.0))) {
                bail!(
                    "config field `{name}` must be {}, got {v}",
                    if zero_ok { "nonnegative" } else { "positive" }
                );
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!(
                "config field `delta` must lie in (0, 1), got {}",
                self.delta
            );
        }
        if let Some(a) = self.allowance {
            if !(a >= 0.0 && a.is_finite()) {
                bail!("config field `allowance` must be nonnegative, got {a}");
            }
        }
        Ok(())
    }
}

fn positive_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        bail!("config field `{name}` must be nonempty and positive");
    }
    Ok(())
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (
                start.trim().parse()?,
                stop.trim().parse()?,
                step.trim().parse()?,
            );
            if !(step > 0.0) || stop < start {
                bail!("range `{text}` needs step > 0 and stop >= start");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number `{s}` in grid `{text}`"))
            })
            .collect::<Result<Vec<_>>>()?,
        _ => bail!("grid `{text}` is neither a comma list nor start:stop:step"),
    };
    if values.is_empty() {
        bail!("grid `{text}` is empty");
    }
    Ok(values)
}

pub fn parse_n_grid(text: &str) -> Result<Vec<usize>> {
    let values = parse_grid(text)?;
    values
        .iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                bail!("`{v}` in `{text}` is not a positive integer")
            }
        })
        .collect()
}

pub fn load_family(path: &Path) -> Result<ArrayFamily> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read family {}", path.display()))?;
    let fam: ArrayFamily = serde_json::from_str(&text)
        .with_context(|| format!("malformed family {}", path.display()))?;
    fam.validate()
        .with_context(|| format!("invalid family {}", path.display()))?;
    Ok(fam)
}

pub fn load_law(path: &Path) -> Result<DiscreteDistribution> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read law {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed law {}", path.display()))
}
