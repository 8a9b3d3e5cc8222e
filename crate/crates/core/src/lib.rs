//! Numerical laboratory for approximate central limit theorems.
//!
//! The crate bundles four families of tools:
//!
//! * [`dist`]: exact finitely supported laws, the standard normal and the
//!   Gaussian plus Skellam mixture, with CDFs, quantiles and convolution.
//! * [`metrics`]: Kolmogorov, Wasserstein, parametrized Prokhorov and total
//!   variation distances, each with an independent brute-force oracle.
//! * [`stein`]: Stein transforms of smooth test functions, certified grid
//!   suprema of their derivatives, and mollification of contractions.
//! * [`arrays`] and [`bounds`]: standard triangular arrays, Lindeberg and
//!   Feller diagnostics, exact and Monte Carlo row sums, and the harness
//!   that checks finite-n inequalities and asymptotic bounds.

pub mod arrays;
pub mod bounds;
pub mod dist;
mod error;
pub mod flow;
pub mod metrics;
pub mod quad;
pub mod stein;

pub use arrays::{ArrayFamily, LindebergProfile, RowSum};
pub use bounds::{BoundReport, LhsMethod};
pub use dist::{Cdf, DiscreteDistribution, GaussianSkellamMixture, StandardNormal};
pub use error::{Error, Result};
pub use metrics::{Method, MetricValue};
pub use stein::{SteinEvaluation, TestFunction};
