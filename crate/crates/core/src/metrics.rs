//! Kolmogorov, Wasserstein, parametrized Prokhorov and total variation
//! distances between a finitely supported law and either another finitely
//! supported law or the standard normal.
//!
//! Two discrete laws are compared over the union of their supports, with
//! atoms closer than [`TIE_TOL`] treated as one point. This keeps empirical
//! laws built from sums of sampled atoms comparable with exactly convolved
//! laws whose atoms carry different rounding.

use serde::{Deserialize, Serialize};

use crate::dist::{
    discretize_normal, normal_cdf, normal_pdf, normal_quantile, normal_sf, Cdf,
    DiscreteDistribution,
};
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;

/// Atoms of two laws closer than this are the same point.
pub const TIE_TOL: f64 = 1e-9;

/// Default binary-search tolerance for the Prokhorov distance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Default size of the discretized normal reference.
pub const DEFAULT_NORMAL_ATOMS: usize = 10_000;

/// Absolute accuracy of the normal CDF evaluation.
const NORMAL_CDF_ERR: f64 = 1e-14;

const WASSERSTEIN_ORACLE_LIMIT: usize = 64;
/// Largest support of `p` accepted by the Prokhorov oracle (2^16 subsets).
const PROKHOROV_ORACLE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    BinarySearch,
    MonteCarlo,
}

/// A computed distance with the method used and an additive error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub method: Method,
    pub error_budget: f64,
}

impl MetricValue {
    pub fn exact(value: f64) -> Self {
        Self::new(value, Method::Exact, 0.0)
    }

    pub fn new(value: f64, method: Method, error_budget: f64) -> Self {
        Self {
            value: value.max(0.0),
            method,
            error_budget: error_budget.max(0.0),
        }
    }

    /// Widens the error budget by `extra`.
    pub fn with_extra_budget(mut self, extra: f64) -> Self {
        self.error_budget += extra.max(0.0);
        self
    }
}

/// Walks the union of two supports in increasing order, yielding
/// `(x, p_mass, q_mass)` with tied atoms combined.
fn union_walk(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    mut visit: impl FnMut(f64, f64, f64),
) {
    let (pa, pp) = (p.atoms(), p.probs());
    let (qa, qp) = (q.atoms(), q.probs());
    let (mut i, mut j) = (0, 0);
    while i < pa.len() || j < qa.len() {
        let take_p = j == qa.len() || (i < pa.len() && pa[i] <= qa[j] + TIE_TOL);
        let take_q = i == pa.len() || (j < qa.len() && qa[j] <= pa[i] + TIE_TOL);
        let x = match (take_p, take_q) {
            (true, true) => pa[i].min(qa[j]),
            (true, false) => pa[i],
            _ => qa[j],
        };
        let mp = if take_p { pp[i] } else { 0.0 };
        let mq = if take_q { qp[j] } else { 0.0 };
        i += take_p as usize;
        j += take_q as usize;
        visit(x, mp, mq);
    }
}

/// `sup_x |F_p(x) − F_q(x)|` between two discrete laws.
pub fn kolmogorov(p: &DiscreteDistribution, q: &DiscreteDistribution) -> MetricValue {
    let (mut fp, mut fq, mut sup) = (0.0f64, 0.0f64, 0.0f64);
    union_walk(p, q, |_, mp, mq| {
        fp += mp;
        fq += mq;
        sup = sup.max((fp - fq).abs());
    });
    MetricValue::exact(sup.min(1.0))
}

/// `sup_x |F_p(x) − G(x)|` for an atomless law `G`.
///
/// Between atoms `F_p` is flat and `G` monotone, so the supremum is one of
/// the one-sided limits at an atom.
pub fn kolmogorov_continuous(p: &DiscreteDistribution, q: &impl Cdf) -> MetricValue {
    let mut below = 0.0f64;
    let mut sup = 0.0f64;
    for ((&a, _), &c) in p.atoms().iter().zip(p.probs()).zip(p.cumulative()) {
        let g = q.cdf(a);
        sup = sup.max((below - g).abs()).max((c.min(1.0) - g).abs());
        below = c.min(1.0);
    }
    MetricValue::new(sup.min(1.0), Method::Exact, NORMAL_CDF_ERR)
}

pub fn kolmogorov_normal(p: &DiscreteDistribution) -> MetricValue {
    kolmogorov_continuous(p, &crate::dist::StandardNormal)
}

/// `∫ |F_p − F_q| dx` between two discrete laws.
pub fn wasserstein(p: &DiscreteDistribution, q: &DiscreteDistribution) -> MetricValue {
    let (mut fp, mut fq) = (0.0f64, 0.0f64);
    let mut prev: Option<f64> = None;
    let mut area = 0.0;
    union_walk(p, q, |x, mp, mq| {
        if let Some(l) = prev {
            area += (fp - fq).abs() * (x - l);
        }
        fp += mp;
        fq += mq;
        prev = Some(x);
    });
    MetricValue::exact(area)
}

/// `∫_{-∞}^x Φ`.
fn lower_area(x: f64) -> f64 {
    normal_pdf(x) + x * normal_cdf(x)
}

/// `∫_x^∞ (1 − Φ)`.
fn upper_area(x: f64) -> f64 {
    normal_pdf(x) - x * normal_sf(x)
}

/// `∫_l^r (Φ − c)`, using the lower-tail form left of zero and the
/// upper-tail form right of it.
fn area_above(l: f64, r: f64, c: f64) -> f64 {
    if r <= 0.0 {
        (lower_area(r) - lower_area(l)) - c * (r - l)
    } else if l >= 0.0 {
        (1.0 - c) * (r - l) - (upper_area(l) - upper_area(r))
    } else {
        area_above(l, 0.0, c) + area_above(0.0, r, c)
    }
}

/// `∫_l^r |Φ − c|` for `0 < c < 1`.
fn abs_area(l: f64, r: f64, c: f64) -> f64 {
    let z = normal_quantile(c).expect("c lies in (0, 1)");
    if z <= l {
        area_above(l, r, c).max(0.0)
    } else if z >= r {
        (-area_above(l, r, c)).max(0.0)
    } else {
        (-area_above(l, z, c)).max(0.0) + area_above(z, r, c).max(0.0)
    }
}

/// `∫ |F_p − Φ| dx` in closed form; both tails are integrated exactly.
pub fn wasserstein_normal(p: &DiscreteDistribution) -> MetricValue {
    let atoms = p.atoms();
    let cum = p.cumulative();
    let last = atoms.len() - 1;
    let mut area = lower_area(atoms[0]) + upper_area(atoms[last]);
    for i in 0..last {
        let c = cum[i];
        if c > 0.0 && c < 1.0 {
            area += abs_area(atoms[i], atoms[i + 1], c);
        } else if c >= 1.0 {
            area += upper_area(atoms[i]) - upper_area(atoms[i + 1]);
        }
    }
    MetricValue::new(area, Method::Exact, 1e-12)
}

/// Wasserstein distance as an explicit transport problem, solved by
/// minimum-cost flow over the complete bipartite atom graph.
pub fn wasserstein_oracle(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<MetricValue> {
    for d in [p, q] {
        if d.len() > WASSERSTEIN_ORACLE_LIMIT {
            return Err(Error::SupportTooLarge {
                size: d.len(),
                limit: WASSERSTEIN_ORACLE_LIMIT,
            });
        }
    }
    let (m, k) = (p.len(), q.len());
    let (source, sink) = (m + k, m + k + 1);
    let mut g = FlowNetwork::new(m + k + 2);
    for (i, (x, w)) in p.iter().enumerate() {
        g.add_edge(source, i, w, 0.0);
        for (j, y) in q.atoms().iter().enumerate() {
            g.add_edge(i, m + j, f64::INFINITY, (x - y).abs());
        }
    }
    for (j, w) in q.probs().iter().enumerate() {
        g.add_edge(m + j, sink, *w, 0.0);
    }
    let demand = p.probs().iter().sum::<f64>().min(q.probs().iter().sum());
    let (_, cost) = g.min_cost_flow(source, sink, demand);
    Ok(MetricValue::exact(cost))
}

/// Largest mass a coupling of `p` and `q` can put on pairs `|x − y| <= r`.
///
/// Neighbourhood windows `[x − r, x + r]` move right with `x`, so filling
/// each atom of `p` from the leftmost unused mass of `q` is optimal.
pub fn max_coupled_mass(p: &DiscreteDistribution, q: &DiscreteDistribution, r: f64) -> f64 {
    let qa = q.atoms();
    let mut rest: Vec<f64> = q.probs().to_vec();
    let mut j = 0;
    let mut matched = 0.0;
    for (x, mut m) in p.iter() {
        while j < qa.len() && (qa[j] < x - r - TIE_TOL || rest[j] <= 0.0) {
            j += 1;
        }
        let mut k = j;
        while m > 0.0 && k < qa.len() && qa[k] <= x + r + TIE_TOL {
            let t = m.min(rest[k]);
            rest[k] -= t;
            m -= t;
            matched += t;
            if rest[k] <= 0.0 {
                k += 1;
            }
        }
    }
    matched.min(1.0)
}

/// [`max_coupled_mass`] as a maximum flow on the bipartite atom graph.
pub fn max_coupled_mass_flow(p: &DiscreteDistribution, q: &DiscreteDistribution, r: f64) -> f64 {
    let (m, k) = (p.len(), q.len());
    let (source, sink) = (m + k, m + k + 1);
    let mut g = FlowNetwork::new(m + k + 2);
    for (i, (x, w)) in p.iter().enumerate() {
        g.add_edge(source, i, w, 0.0);
        for (j, &y) in q.atoms().iter().enumerate() {
            if (x - y).abs() <= r + TIE_TOL {
                g.add_edge(i, m + j, f64::INFINITY, 0.0);
            }
        }
    }
    for (j, &w) in q.probs().iter().enumerate() {
        g.add_edge(m + j, sink, w, 0.0);
    }
    g.max_flow(source, sink)
}

/// [`max_coupled_mass`] against the standard normal, sweeping the CDF
/// level already consumed.
pub fn max_coupled_mass_normal(p: &DiscreteDistribution, r: f64) -> f64 {
    let mut used = 0.0f64;
    let mut matched = 0.0;
    for (x, m) in p.iter() {
        used = used.max(normal_cdf(x - r));
        let t = m.min(normal_cdf(x + r) - used).max(0.0);
        used += t;
        matched += t;
    }
    matched.min(1.0)
}

fn check_lambda_tol(lambda: f64, tol: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", format!("{tol} must be positive")));
    }
    Ok(())
}

/// Smallest α in [0, 1] (within `tol`) with `coupled(λα) >= 1 − α`.
fn prokhorov_search(lambda: f64, tol: f64, coupled: impl Fn(f64) -> f64) -> f64 {
    let feasible = |alpha: f64| 1.0 - coupled(lambda * alpha) <= alpha + 1e-12;
    if feasible(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Parametrized Prokhorov distance
/// `ρ_λ(p, q) = inf{α > 0 : p[A] <= q[A^(λα)] + α for all A}`.
///
/// Feasibility of α is decided through the equivalent coupling condition:
/// some coupling puts mass at least `1 − α` on pairs within `λα`.
pub fn prokhorov(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    lambda: f64,
    tol: f64,
) -> Result<MetricValue> {
    check_lambda_tol(lambda, tol)?;
    let v = prokhorov_search(lambda, tol, |r| max_coupled_mass(p, q, r));
    Ok(MetricValue::new(v, Method::BinarySearch, tol))
}

/// `max(ρ_λ(p, q), ρ_λ(q, p))`.
pub fn prokhorov_symmetric(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    lambda: f64,
    tol: f64,
) -> Result<MetricValue> {
    let a = prokhorov(p, q, lambda, tol)?;
    let b = prokhorov(q, p, lambda, tol)?;
    Ok(if a.value >= b.value { a } else { b })
}

/// `ρ_λ(p, Φ)` against the continuous normal.
pub fn prokhorov_normal(p: &DiscreteDistribution, lambda: f64, tol: f64) -> Result<MetricValue> {
    check_lambda_tol(lambda, tol)?;
    let v = prokhorov_search(lambda, tol, |r| max_coupled_mass_normal(p, r));
    Ok(MetricValue::new(v, Method::BinarySearch, tol))
}

/// `ρ_λ(p, Φ_N)` against `discretize_normal(n_atoms)`.
///
/// The budget adds `ρ_λ(Φ_N, Φ)`, which bounds the change from replacing
/// Φ by its discretization (triangle inequality).
pub fn prokhorov_discretized_normal(
    p: &DiscreteDistribution,
    lambda: f64,
    tol: f64,
    n_atoms: usize,
) -> Result<MetricValue> {
    let reference = discretize_normal(n_atoms)?;
    let v = prokhorov(p, &reference, lambda, tol)?;
    let gap = discretization_gap(&reference, lambda, tol)?;
    Ok(v.with_extra_budget(gap))
}

/// `ρ_λ(Φ_N, Φ)` rounded up by the search tolerance.
pub fn discretization_gap(reference: &DiscreteDistribution, lambda: f64, tol: f64) -> Result<f64> {
    Ok(prokhorov_normal(reference, lambda, tol)?.value + tol)
}

/// `ρ_λ(p, q)` by enumerating every subset `A` of the support of `p`.
///
/// For a fixed `A`, `q[A^(λα)]` is a step function of α, so the critical α
/// is the smallest of `max(d_k/λ, p[A] − covered_k)` over the distances
/// `d_k` from `A` to the atoms of `q`, taken in increasing order.
pub fn prokhorov_oracle(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    lambda: f64,
) -> Result<MetricValue> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    let size = p.len();
    if size > PROKHOROV_ORACLE_LIMIT {
        return Err(Error::SupportTooLarge {
            size,
            limit: PROKHOROV_ORACLE_LIMIT,
        });
    }
    let k = p.len();
    let mut worst = 0.0f64;
    let mut dist: Vec<(f64, f64)> = Vec::with_capacity(q.len());
    for mask in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let mass: f64 = members.iter().map(|&i| p.probs()[i]).sum();
        dist.clear();
        for (y, w) in q.iter() {
            let d = members
                .iter()
                .map(|&i| (p.atoms()[i] - y).abs())
                .fold(f64::INFINITY, f64::min);
            dist.push(((d - TIE_TOL).max(0.0), w));
        }
        dist.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = mass.min(1.0);
        let mut covered = 0.0;
        for &(d, w) in &dist {
            covered += w;
            best = best.min((d / lambda).max(mass - covered));
        }
        worst = worst.max(best.clamp(0.0, 1.0));
    }
    Ok(MetricValue::exact(worst))
}

/// Total variation between two discrete laws: half the ℓ¹ distance.
pub fn total_variation(p: &DiscreteDistribution, q: &DiscreteDistribution) -> MetricValue {
    let mut l1 = 0.0;
    union_walk(p, q, |_, mp, mq| l1 += (mp - mq).abs());
    MetricValue::exact((0.5 * l1).min(1.0))
}

/// Total variation against the normal: an atomic and an atomless law are
/// mutually singular, so the distance is exactly 1.
pub fn total_variation_normal(_p: &DiscreteDistribution) -> MetricValue {
    MetricValue::exact(1.0)
}
