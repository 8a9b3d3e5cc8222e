//! Standard triangular arrays: row `n` holds `n` independent mean-zero
//! cells whose variances sum to one.
//!
//! Row sums are convolved in integer coordinates whenever the family has
//! a lattice structure, then mapped to real atoms once at the end. This
//! keeps atoms reached along different paths bit-identical, and Monte
//! Carlo sums that use the same coordinates land on exactly the same
//! atoms as the exact law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{convolve_pruned, make_discrete, DiscreteDistribution, GaussianSkellamMixture};
use crate::error::{Error, Result};

/// Default cap on the support size of an exact row sum.
pub const DEFAULT_ATOM_BUDGET: usize = 2_000_000;

/// Tolerance for the mean-zero and unit-variance checks on a base law.
const BASE_MOMENT_TOL: f64 = 1e-9;

/// Monte Carlo replicates drawn per independently seeded stream.
const SAMPLE_CHUNK: usize = 1 << 16;

/// A parametric standard triangular array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrayFamily {
    /// Cells `±n^{−1/2}` with mass ½ each.
    Rademacher,
    /// Cells `base/√n` for a base law with mean 0 and variance 1.
    IidScaled { base: DiscreteDistribution },
    /// Cells `±1` with mass `θ/(2n)` each and `±c_n` with mass
    /// `(1 − θ/n)/2` each, `c_n = √((1 − θ)/(n − θ))`.
    Jump { theta: f64 },
}

/// Exact row sum with the mass removed by pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSum {
    pub law: DiscreteDistribution,
    pub pruned_mass: f64,
}

/// How integer (or base-law) coordinates map to real atoms.
#[derive(Debug, Clone, Copy)]
enum Decoder {
    Scale(f64),
    /// Code `j·modulus + m` stands for `j + m·c`.
    Jump {
        modulus: f64,
        c: f64,
    },
}

impl Decoder {
    fn decode(self, code: f64) -> f64 {
        match self {
            Decoder::Scale(s) => code * s,
            Decoder::Jump { modulus, c } => {
                let j = (code / modulus).round();
                j + (code - j * modulus) * c
            }
        }
    }
}

impl ArrayFamily {
    pub fn jump(theta: f64) -> Result<Self> {
        let fam = ArrayFamily::Jump { theta };
        fam.validate()?;
        Ok(fam)
    }

    pub fn iid_scaled(base: DiscreteDistribution) -> Result<Self> {
        let fam = ArrayFamily::IidScaled { base };
        fam.validate()?;
        Ok(fam)
    }

    /// Checks parameters that deserialization cannot.
    pub fn validate(&self) -> Result<()> {
        match self {
            ArrayFamily::Rademacher => Ok(()),
            ArrayFamily::IidScaled { base } => {
                let (mean, var) = (base.mean(), base.variance());
                if mean.abs() > BASE_MOMENT_TOL || (var - 1.0).abs() > BASE_MOMENT_TOL {
                    return Err(Error::param(
                        "base",
                        format!("needs mean 0 and variance 1, got mean {mean} and variance {var}"),
                    ));
                }
                Ok(())
            }
            ArrayFamily::Jump { theta } => {
                if !(*theta >= 0.0 && *theta < 1.0) {
                    return Err(Error::param("theta", format!("{theta} is outside [0, 1)")));
                }
                Ok(())
            }
        }
    }

    pub fn description(&self) -> String {
        match self {
            ArrayFamily::Rademacher => "rademacher".into(),
            ArrayFamily::IidScaled { base } => format!("iid_scaled({} atoms)", base.len()),
            ArrayFamily::Jump { theta } => format!("jump({theta})"),
        }
    }

    /// Closed-form Lindeberg index, where the family has one.
    pub fn lindeberg_index(&self) -> f64 {
        match self {
            ArrayFamily::Jump { theta } => *theta,
            _ => 0.0,
        }
    }

    fn check_row(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::IndexOutOfRange { n, k: 0 });
        }
        Ok(())
    }

    /// Cell law in coding coordinates together with its decoder.
    fn coded_cell(&self, n: usize) -> Result<(DiscreteDistribution, Decoder)> {
        Self::check_row(n)?;
        let scale = 1.0 / (n as f64).sqrt();
        Ok(match self {
            ArrayFamily::Rademacher => {
                (DiscreteDistribution::rademacher(1.0), Decoder::Scale(scale))
            }
            ArrayFamily::IidScaled { base } => (base.clone(), Decoder::Scale(scale)),
            ArrayFamily::Jump { theta } => {
                let nf = n as f64;
                let modulus = (2 * n + 1) as f64;
                let c = ((1.0 - theta) / (nf - theta)).sqrt();
                let pj = theta / (2.0 * nf);
                let pc = 0.5 * (1.0 - theta / nf);
                let codes =
                    make_discrete(vec![-modulus, -1.0, 1.0, modulus], vec![pj, pc, pc, pj])?;
                (codes, Decoder::Jump { modulus, c })
            }
        })
    }

    /// Exact law of `ξ_{n,k}`; rows are exchangeable so `k` only gets
    /// range-checked.
    pub fn cell_distribution(&self, n: usize, k: usize) -> Result<DiscreteDistribution> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::IndexOutOfRange { n, k });
        }
        self.cell(n)
    }

    fn cell(&self, n: usize) -> Result<DiscreteDistribution> {
        let (codes, decoder) = self.coded_cell(n)?;
        let (atoms, probs): (Vec<f64>, Vec<f64>) =
            codes.iter().map(|(x, p)| (decoder.decode(x), p)).unzip();
        DiscreteDistribution::new(atoms, probs)
    }

    /// `Σ_k E[ξ²; |ξ| > ε]`, strict inequality.
    pub fn lindeberg_sum(&self, n: usize, eps: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::param("eps", format!("{eps} must be positive")));
        }
        self.row_moment(n, 2, |a| a.abs() > eps)
    }

    /// `Σ_k E[|ξ|^power; keep(ξ)]` over row `n`.
    pub fn row_moment(&self, n: usize, power: i32, keep: impl Fn(f64) -> bool) -> Result<f64> {
        let cell = self.cell(n)?;
        let m = cell
            .iter()
            .filter(|&(a, _)| keep(a))
            .fold(0.0, |acc, (a, p)| acc + p * a.abs().powi(power));
        Ok(n as f64 * m)
    }

    /// `max_k E[ξ_{n,k}²]`.
    pub fn feller_max(&self, n: usize) -> Result<f64> {
        Ok(self.cell(n)?.expect(|a| a * a))
    }

    /// `max_k E|ξ_{n,k}|`.
    pub fn max_abs_mean(&self, n: usize) -> Result<f64> {
        Ok(self.cell(n)?.expect(f64::abs))
    }

    /// Law of `Σ_k ξ_{n,k}` by `n`-fold convolution. Each step may prune
    /// up to `prune_tol/n`, so the total pruned mass stays below
    /// `prune_tol`.
    pub fn row_sum_exact(&self, n: usize, prune_tol: f64) -> Result<RowSum> {
        self.row_sum_exact_with_budget(n, prune_tol, DEFAULT_ATOM_BUDGET)
    }

    pub fn row_sum_exact_with_budget(
        &self,
        n: usize,
        prune_tol: f64,
        budget: usize,
    ) -> Result<RowSum> {
        if !(prune_tol >= 0.0) {
            return Err(Error::param(
                "prune_tol",
                format!("{prune_tol} must be nonnegative"),
            ));
        }
        let (cell, decoder) = self.coded_cell(n)?;
        let step_tol = prune_tol / n as f64;
        let mut law = cell.clone();
        let mut pruned = 0.0;
        for _ in 1..n {
            let (next, dropped) = convolve_pruned(&law, &cell, step_tol);
            if next.len() > budget {
                return Err(Error::AtomBudget {
                    size: next.len(),
                    budget,
                });
            }
            law = next;
            pruned += dropped;
        }
        Ok(RowSum {
            law: decode_law(&law, decoder)?,
            pruned_mass: pruned,
        })
    }

    /// Empirical law of `reps` independent row sums.
    ///
    /// Replicates are drawn in chunks, each from its own ChaCha8 stream
    /// keyed by `(seed, chunk)`, so the result does not depend on the
    /// number of worker threads. A row is drawn as multinomial counts over
    /// the cell atoms.
    pub fn row_sum_sample(&self, n: usize, reps: usize, seed: u64) -> Result<DiscreteDistribution> {
        if reps == 0 {
            return Err(Error::param("reps", "must be at least 1"));
        }
        let (cell, decoder) = self.coded_cell(n)?;
        let codes = cell.atoms().to_vec();
        // Conditional probabilities for sequential binomial draws.
        let mut cond = Vec::with_capacity(codes.len());
        let mut rest = 1.0;
        for &p in cell.probs() {
            cond.push(if rest > 0.0 {
                (p / rest).clamp(0.0, 1.0)
            } else {
                0.0
            });
            rest -= p;
        }
        let chunks = reps.div_ceil(SAMPLE_CHUNK);
        let per_chunk: Vec<Vec<f64>> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk as u64);
                let count = SAMPLE_CHUNK.min(reps - chunk * SAMPLE_CHUNK);
                (0..count)
                    .map(|_| {
                        let mut left = n as u64;
                        let mut sum = 0.0;
                        for (i, &code) in codes.iter().enumerate() {
                            if left == 0 {
                                break;
                            }
                            let c = if i + 1 == codes.len() || cond[i] >= 1.0 {
                                left
                            } else {
                                Binomial::new(left, cond[i])
                                    .expect("valid binomial")
                                    .sample(&mut rng)
                            };
                            sum += c as f64 * code;
                            left -= c;
                        }
                        decoder.decode(sum)
                    })
                    .collect()
            })
            .collect();
        let mut values: Vec<f64> = per_chunk.into_iter().flatten().collect();
        values.sort_by(f64::total_cmp);
        let mut atoms: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for v in values {
            if atoms.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1.0;
            } else {
                atoms.push(v);
                counts.push(1.0);
            }
        }
        let probs = counts.iter().map(|c| c / reps as f64).collect();
        DiscreteDistribution::new(atoms, probs)
    }

    /// Fills the `L_n(ε)` matrix and the Feller trace.
    pub fn lindeberg_profile(
        &self,
        n_schedule: &[usize],
        eps_grid: &[f64],
    ) -> Result<LindebergProfile> {
        if n_schedule.is_empty() || eps_grid.is_empty() {
            return Err(Error::param(
                "schedule",
                "n schedule and eps grid must be nonempty",
            ));
        }
        let mut ns = n_schedule.to_vec();
        ns.sort_unstable();
        ns.dedup();
        let mut eps = eps_grid.to_vec();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let sums = ns
            .iter()
            .map(|&n| {
                eps.iter()
                    .map(|&e| self.lindeberg_sum(n, e))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let feller = ns
            .iter()
            .map(|&n| self.feller_max(n))
            .collect::<Result<Vec<_>>>()?;
        let last = sums.last().expect("nonempty schedule");
        let index_estimate = last.iter().copied().fold(0.0, f64::max);
        // ε values whose trace over n moves up somewhere along the schedule.
        let non_monotone_eps = (0..eps.len())
            .filter(|&j| sums.windows(2).any(|w| w[1][j] > w[0][j] + 1e-12))
            .map(|j| eps[j])
            .collect();
        let feller_decreasing = feller.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        Ok(LindebergProfile {
            eps_grid: eps,
            n_schedule: ns,
            sums,
            feller,
            index_estimate,
            non_monotone_eps,
            feller_decreasing,
        })
    }
}

fn decode_law(codes: &DiscreteDistribution, decoder: Decoder) -> Result<DiscreteDistribution> {
    let (atoms, probs): (Vec<f64>, Vec<f64>) =
        codes.iter().map(|(x, p)| (decoder.decode(x), p)).unzip();
    match decoder {
        // A positive scale keeps the order.
        Decoder::Scale(_) => DiscreteDistribution::from_sorted(atoms, probs),
        Decoder::Jump { .. } => DiscreteDistribution::new(atoms, probs),
    }
}

/// Lindeberg sums over an `n × ε` grid with trend diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindebergProfile {
    pub eps_grid: Vec<f64>,
    pub n_schedule: Vec<usize>,
    /// `sums[i][j] = L_{n_i}(ε_j)`.
    pub sums: Vec<Vec<f64>>,
    pub feller: Vec<f64>,
    /// `max_ε L_n(ε)` at the largest `n`.
    pub index_estimate: f64,
    pub non_monotone_eps: Vec<f64>,
    pub feller_decreasing: bool,
}

/// Limit law of the jump family: `N(0, 1 − θ)` plus the difference of two
/// independent Poisson(θ/2) counts, each truncated once its tail drops to
/// `trunc_tol/2`.
pub fn jump_limit_law(theta: f64, trunc_tol: f64) -> Result<GaussianSkellamMixture> {
    if !(theta >= 0.0 && theta < 1.0) {
        return Err(Error::param("theta", format!("{theta} is outside [0, 1)")));
    }
    if !(trunc_tol > 0.0) {
        return Err(Error::param(
            "trunc_tol",
            format!("{trunc_tol} must be positive"),
        ));
    }
    let mu = 0.5 * theta;
    let mut pmf = vec![(-mu).exp()];
    let mut covered = pmf[0];
    while 1.0 - covered > 0.5 * trunc_tol {
        let k = pmf.len() as f64;
        let next = pmf.last().unwrap() * mu / k;
        if next == 0.0 {
            break;
        }
        pmf.push(next);
        covered += next;
    }
    let atoms: Vec<f64> = (0..pmf.len()).map(|k| k as f64).collect();
    let poisson = make_discrete(atoms, pmf)?;
    let (jumps, _) = convolve_pruned(&poisson, &poisson.reflected(), 0.0);
    GaussianSkellamMixture::new(1.0 - theta, jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Cdf;
    use crate::metrics::kolmogorov;

    fn families() -> Vec<ArrayFamily> {
        let base = make_discrete(vec![-2.0, 0.0, 2.0], vec![0.125, 0.75, 0.125]).unwrap();
        vec![
            ArrayFamily::Rademacher,
            ArrayFamily::iid_scaled(DiscreteDistribution::rademacher(1.0)).unwrap(),
            ArrayFamily::iid_scaled(base).unwrap(),
            ArrayFamily::jump(0.0).unwrap(),
            ArrayFamily::jump(0.4).unwrap(),
        ]
    }

    #[test]
    fn cell_examples() {
        let c = ArrayFamily::Rademacher.cell_distribution(4, 2).unwrap();
        assert_eq!(c.atoms(), &[-0.5, 0.5]);
        let j = ArrayFamily::jump(0.4)
            .unwrap()
            .cell_distribution(100, 1)
            .unwrap();
        let c100 = (0.6f64 / 99.6).sqrt();
        assert_eq!(j.len(), 4);
        assert!((j.atoms()[2] - c100).abs() < 1e-15);
        assert!((j.probs()[0] - 0.002).abs() < 1e-15);
        assert!((j.probs()[1] - 0.498).abs() < 1e-15);
        let iid = ArrayFamily::iid_scaled(DiscreteDistribution::rademacher(1.0)).unwrap();
        let c = iid.cell_distribution(9, 9).unwrap();
        assert!((c.atoms()[1] - 1.0 / 3.0).abs() < 1e-16);
        assert!(ArrayFamily::Rademacher.cell_distribution(3, 4).is_err());
        assert!(ArrayFamily::Rademacher.cell_distribution(3, 0).is_err());
    }

    #[test]
    fn invalid_families() {
        assert!(ArrayFamily::jump(1.0).is_err());
        assert!(ArrayFamily::jump(-0.1).is_err());
        let skewed = make_discrete(vec![-1.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(ArrayFamily::iid_scaled(skewed).is_err());
    }

    #[test]
    fn sta_axioms() {
        for fam in families() {
            for n in [1usize, 2, 3, 7, 10, 50, 200, 1000] {
                let cell = fam.cell_distribution(n, 1).unwrap();
                assert!(cell.mean().abs() < 1e-12, "{} n = {n}", fam.description());
                let row_var = n as f64 * cell.expect(|a| a * a);
                assert!(
                    (row_var - 1.0).abs() < 1e-12,
                    "{} n = {n}: {row_var}",
                    fam.description()
                );
                assert!((fam.feller_max(n).unwrap() - 1.0 / n as f64).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lindeberg_examples() {
        let r = ArrayFamily::Rademacher;
        assert_eq!(r.lindeberg_sum(100, 0.5).unwrap(), 0.0);
        let j = ArrayFamily::jump(0.4).unwrap();
        assert!((j.lindeberg_sum(100, 0.5).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(j.lindeberg_sum(100, 2.0).unwrap(), 0.0);
        assert!(r.lindeberg_sum(100, 0.0).is_err());
    }

    #[test]
    fn lindeberg_boundary_is_strict() {
        // Atoms sit exactly at ±0.5 for n = 4.
        let r = ArrayFamily::Rademacher;
        assert_eq!(r.lindeberg_sum(4, 0.5).unwrap(), 0.0);
        assert!((r.lindeberg_sum(4, 0.499_999).unwrap() - 1.0).abs() < 1e-15);
        // The ±1 jump atoms at ε = 1.
        let j = ArrayFamily::jump(0.4).unwrap();
        assert_eq!(j.lindeberg_sum(100, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn lindeberg_sums_monotone_and_bounded() {
        let eps: Vec<f64> = (1..=60).map(|i| i as f64 * 0.02).collect();
        for fam in families() {
            for n in [1usize, 5, 40, 300] {
                let v: Vec<f64> = eps
                    .iter()
                    .map(|&e| fam.lindeberg_sum(n, e).unwrap())
                    .collect();
                assert!(v.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
                assert!(v.windows(2).all(|w| w[1] <= w[0]));
            }
        }
    }

    #[test]
    fn lindeberg_vanishes_for_small_atoms() {
        let base = make_discrete(vec![-2.0, 0.0, 2.0], vec![0.125, 0.75, 0.125]).unwrap();
        let fam = ArrayFamily::iid_scaled(base).unwrap();
        for &eps in &[0.1f64, 0.3] {
            // max |atom| = 2, so L_n(ε) = 0 once n > (2/ε)².
            let n = (4.0 / (eps * eps)).floor() as usize + 1;
            assert_eq!(fam.lindeberg_sum(n, eps).unwrap(), 0.0);
            assert!(fam.lindeberg_sum(n - 2, eps).unwrap() > 0.0);
        }
    }

    #[test]
    fn profile_examples() {
        let eps: Vec<f64> = (1..=99).map(|i| i as f64 * 0.01).collect();
        let j = ArrayFamily::jump(0.4).unwrap();
        let p = j.lindeberg_profile(&[100, 1000, 10_000], &eps).unwrap();
        assert!((p.index_estimate - 0.4).abs() < 1e-12);
        assert!(p.feller_decreasing);
        assert_eq!(p.sums.len(), 3);
        let r = ArrayFamily::Rademacher
            .lindeberg_profile(&[100, 10_000], &[0.02, 0.5])
            .unwrap();
        assert_eq!(r.index_estimate, 0.0);
        assert!(ArrayFamily::Rademacher
            .lindeberg_profile(&[], &[0.1])
            .is_err());
    }

    #[test]
    fn row_sum_examples() {
        let r = ArrayFamily::Rademacher.row_sum_exact(2, 0.0).unwrap();
        let s = 2f64.sqrt();
        assert_eq!(r.law.len(), 3);
        assert!((r.law.atoms()[0] + s).abs() < 1e-15 && (r.law.atoms()[2] - s).abs() < 1e-15);
        assert_eq!(r.law.probs(), &[0.25, 0.5, 0.25]);

        let r = ArrayFamily::Rademacher.row_sum_exact(100, 0.0).unwrap();
        let mut central = 1.0;
        for k in 1..=50 {
            central *= (50 + k) as f64 / k as f64 / 4.0;
        }
        let zero = r.law.atoms().iter().position(|&a| a == 0.0).unwrap();
        assert!((r.law.probs()[zero] - central).abs() < 1e-15);
        assert!((central - 0.079_589_237_387_178_77).abs() < 1e-15);
    }

    #[test]
    fn jump_row_sum_support() {
        let theta = 0.4;
        let n = 50;
        let r = ArrayFamily::jump(theta)
            .unwrap()
            .row_sum_exact(n, 0.0)
            .unwrap();
        let c = ((1.0f64 - theta) / (n as f64 - theta)).sqrt();
        let total: f64 = r.law.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.law.mean().abs() < 1e-12);
        assert!((r.law.variance() - 1.0).abs() < 1e-11);
        for &a in r.law.atoms() {
            let ok = (-(n as i64)..=n as i64).any(|j| {
                let m = ((a - j as f64) / c).round();
                (a - j as f64 - m * c).abs() < 1e-9 && j.unsigned_abs() as f64 + m.abs() <= n as f64
            });
            assert!(ok, "atom {a}");
        }
    }

    /// Mixture form of the jump row sum: condition on the number `J` of
    /// jump cells, then the jumps form a ±1 walk of `J` steps and the rest a
    /// ±c walk of `n − J` steps.
    fn jump_row_sum_by_mixture(theta: f64, n: usize) -> DiscreteDistribution {
        let nf = n as f64;
        let c = ((1.0 - theta) / (nf - theta)).sqrt();
        let q = theta / nf;
        let binom = |m: usize, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
        };
        let (mut atoms, mut probs) = (Vec::new(), Vec::new());
        for jn in 0..=n {
            let pj = binom(n, jn) * q.powi(jn as i32) * (1.0 - q).powi((n - jn) as i32);
            if pj < 1e-300 {
                continue;
            }
            for u in 0..=jn {
                let pu = binom(jn, u) * 0.5f64.powi(jn as i32);
                for v in 0..=(n - jn) {
                    let pv = binom(n - jn, v) * 0.5f64.powi((n - jn) as i32);
                    atoms.push((2 * u) as f64 - jn as f64 + ((2 * v) as f64 - (n - jn) as f64) * c);
                    probs.push(pj * pu * pv);
                }
            }
        }
        make_discrete(atoms, probs).unwrap()
    }

    #[test]
    fn jump_row_sum_matches_mixture_form() {
        for &(theta, n) in &[(0.4, 12usize), (0.1, 30), (0.9, 20)] {
            let exact = ArrayFamily::jump(theta)
                .unwrap()
                .row_sum_exact(n, 0.0)
                .unwrap()
                .law;
            let oracle = jump_row_sum_by_mixture(theta, n);
            assert!(kolmogorov(&exact, &oracle).value < 1e-13);
            assert!(crate::metrics::total_variation(&exact, &oracle).value < 1e-12);
        }
    }

    #[test]
    fn pruning_is_accounted() {
        let j = ArrayFamily::jump(0.4).unwrap();
        let exact = j.row_sum_exact(60, 0.0).unwrap();
        let pruned = j.row_sum_exact(60, 1e-10).unwrap();
        assert_eq!(exact.pruned_mass, 0.0);
        assert!(pruned.pruned_mass <= 1e-10);
        assert!(pruned.law.len() < exact.law.len());
        assert!(kolmogorov(&exact.law, &pruned.law).value <= 1e-10 + 1e-15);
    }

    #[test]
    fn atom_budget_enforced() {
        let j = ArrayFamily::jump(0.4).unwrap();
        assert!(matches!(
            j.row_sum_exact_with_budget(100, 0.0, 500),
            Err(Error::AtomBudget { .. })
        ));
    }

    #[test]
    fn samples_are_replayable() {
        let j = ArrayFamily::jump(0.4).unwrap();
        let a = j.row_sum_sample(50, 1000, 7).unwrap();
        let b = j.row_sum_sample(50, 1000, 7).unwrap();
        let c = j.row_sum_sample(50, 1000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(
            ArrayFamily::Rademacher
                .row_sum_sample(10, 1, 1)
                .unwrap()
                .len(),
            1
        );
        assert!(ArrayFamily::Rademacher.row_sum_sample(10, 0, 1).is_err());
    }

    #[test]
    fn samples_land_on_exact_atoms() {
        let j = ArrayFamily::jump(0.4).unwrap();
        let exact = j.row_sum_exact(40, 0.0).unwrap().law;
        let sample = j.row_sum_sample(40, 5000, 11).unwrap();
        for a in sample.atoms() {
            assert!(exact.atoms().binary_search_by(|x| x.total_cmp(a)).is_ok());
        }
    }

    #[test]
    fn samples_within_dkw_band() {
        let reps = 200_000;
        let band = ((2.0f64 / 1e-3).ln() / (2.0 * reps as f64)).sqrt();
        for fam in families() {
            let exact = fam.row_sum_exact(100, 1e-12).unwrap().law;
            let sample = fam.row_sum_sample(100, reps, 5).unwrap();
            let k = kolmogorov(&sample, &exact).value;
            assert!(k <= band, "{}: {k} > {band}", fam.description());
        }
    }

    #[test]
    fn limit_law_examples() {
        let m = jump_limit_law(0.0, 1e-12).unwrap();
        assert_eq!(m.jumps().len(), 1);
        assert_eq!(m.gaussian_variance(), 1.0);
        let m = jump_limit_law(0.4, 1e-12).unwrap();
        assert!(m.jumps().mean().abs() < 1e-12);
        assert!((m.jumps().variance() - 0.4).abs() < 1e-10);
        for x in [0.3, 1.0, 2.5] {
            assert!((m.cdf(x) + m.cdf(-x) - 1.0).abs() < 1e-12);
        }
        assert!(jump_limit_law(0.4, 0.0).is_err());
    }

    #[test]
    fn jump_row_sum_approaches_limit() {
        let m = jump_limit_law(0.4, 1e-12).unwrap();
        let j = ArrayFamily::jump(0.4).unwrap();
        let k: Vec<f64> = [100usize, 400]
            .iter()
            .map(|&n| {
                crate::metrics::kolmogorov_continuous(&j.row_sum_exact(n, 1e-12).unwrap().law, &m)
                    .value
            })
            .collect();
        assert!(k[1] < k[0], "{k:?}");
    }

    #[test]
    fn family_json() {
        let j: ArrayFamily = serde_json::from_str(r#"{"kind": "jump", "theta": 0.4}"#).unwrap();
        assert_eq!(j, ArrayFamily::Jump { theta: 0.4 });
        let i: ArrayFamily = serde_json::from_str(
            r#"{"kind": "iid_scaled", "base": {"atoms": [-1, 1], "probs": [0.5, 0.5]}}"#,
        )
        .unwrap();
        assert!(i.validate().is_ok());
        let r: ArrayFamily = serde_json::from_str(r#"{"kind": "rademacher"}"#).unwrap();
        assert_eq!(r, ArrayFamily::Rademacher);
    }
}
