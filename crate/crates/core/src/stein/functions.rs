use std::f64::consts::{FRAC_1_PI, LN_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Number of nodes in the discretized mollifier.
const KERNEL_NODES: usize = 64;

/// Smooth test functions `h` with exact first derivatives.
///
/// `Mollified` is `h ⋆ ψ_ε` with the bump `ψ(u) ∝ exp(−1/(1 − u²))` scaled
/// to `[−ε, ε]`. The convolution is taken against a fixed Gauss–Legendre
/// discretization of the bump whose weights are positive, symmetric and sum
/// to one. A positive symmetric average keeps affine maps fixed, never
/// increases `‖h′‖_∞`, and moves `h` by at most `ε·‖h′‖_∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Sigmoid,
    ScaledArctan,
    SmoothStep {
        center: f64,
        width: f64,
    },
    LogCoshContraction,
    Identity,
    Mollified {
        base: Box<TestFunction>,
        epsilon: f64,
    },
}

impl TestFunction {
    pub fn smooth_step(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::param(
                "width",
                format!("need finite center and width > 0, got {center}, {width}"),
            ));
        }
        Ok(TestFunction::SmoothStep { center, width })
    }

    /// The five built-in functions.
    pub fn library() -> Vec<TestFunction> {
        vec![
            TestFunction::Sigmoid,
            TestFunction::ScaledArctan,
            TestFunction::SmoothStep {
                center: 0.0,
                width: 1.0,
            },
            TestFunction::LogCoshContraction,
            TestFunction::Identity,
        ]
    }

    /// Library members with `‖h′‖_∞ <= 1`.
    pub fn contractions() -> Vec<TestFunction> {
        Self::library()
            .into_iter()
            .filter(|h| h.is_contraction())
            .collect()
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Sigmoid => "sigmoid".into(),
            TestFunction::ScaledArctan => "scaled_arctan".into(),
            TestFunction::SmoothStep { center, width } => format!("smooth_step({center},{width})"),
            TestFunction::LogCoshContraction => "log_cosh_contraction".into(),
            TestFunction::Identity => "identity".into(),
            TestFunction::Mollified { base, epsilon } => {
                format!("mollified({},{epsilon})", base.name())
            }
        }
    }

    /// Parses a library name such as `sigmoid` or `smooth_step(0,1)`.
    pub fn from_name(s: &str) -> Result<Self> {
        let s = s.trim();
        let args = |s: &str, prefix: &str| -> Option<Vec<String>> {
            let inner = s
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            Some(inner.split(',').map(|a| a.trim().to_string()).collect())
        };
        let num = |a: &str| -> Result<f64> {
            a.parse::<f64>()
                .map_err(|_| Error::param("h", format!("`{a}` is not a number")))
        };
        match s {
            "sigmoid" => return Ok(TestFunction::Sigmoid),
            "scaled_arctan" => return Ok(TestFunction::ScaledArctan),
            "log_cosh_contraction" | "log_cosh" => return Ok(TestFunction::LogCoshContraction),
            "identity" => return Ok(TestFunction::Identity),
            "smooth_step" => {
                return Ok(TestFunction::SmoothStep {
                    center: 0.0,
                    width: 1.0,
                })
            }
            _ => {}
        }
        if let Some(a) = args(s, "smooth_step") {
            if a.len() == 2 {
                return Self::smooth_step(num(&a[0])?, num(&a[1])?);
            }
        }
        if let Some(inner) = s
            .strip_prefix("mollified(")
            .and_then(|r| r.strip_suffix(')'))
        {
            if let Some(pos) = inner.rfind(',') {
                let base = Self::from_name(&inner[..pos])?;
                return mollify(&base, num(inner[pos + 1..].trim())?);
            }
        }
        Err(Error::param("h", format!("unknown test function `{s}`")))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Sigmoid => sigmoid(x),
            TestFunction::ScaledArctan => 0.5 + x.atan() * FRAC_1_PI,
            TestFunction::SmoothStep { center, width } => step_value((x - center) / width + 0.5),
            TestFunction::LogCoshContraction => {
                let a = x.abs();
                a + (-2.0 * a).exp().ln_1p() - LN_2
            }
            TestFunction::Identity => x,
            TestFunction::Mollified { base, epsilon } => {
                let (nodes, weights) = kernel();
                nodes
                    .iter()
                    .zip(weights)
                    .map(|(y, w)| w * base.eval(x - epsilon * y))
                    .sum()
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            TestFunction::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            TestFunction::ScaledArctan => FRAC_1_PI / (1.0 + x * x),
            TestFunction::SmoothStep { center, width } => {
                step_slope((x - center) / width + 0.5) / width
            }
            TestFunction::LogCoshContraction => x.tanh(),
            TestFunction::Identity => 1.0,
            TestFunction::Mollified { base, epsilon } => {
                let (nodes, weights) = kernel();
                nodes
                    .iter()
                    .zip(weights)
                    .map(|(y, w)| w * base.deriv(x - epsilon * y))
                    .sum()
            }
        }
    }

    /// `[lo, hi]` containing the range, when bounded.
    pub fn range_bounds(&self) -> Option<(f64, f64)> {
        match self {
            TestFunction::Sigmoid
            | TestFunction::ScaledArctan
            | TestFunction::SmoothStep { .. } => Some((0.0, 1.0)),
            TestFunction::LogCoshContraction | TestFunction::Identity => None,
            TestFunction::Mollified { base, .. } => base.range_bounds(),
        }
    }

    /// Certified `‖h′‖_∞`.
    pub fn deriv_bound(&self) -> f64 {
        match self {
            TestFunction::Sigmoid => 0.25,
            TestFunction::ScaledArctan => FRAC_1_PI,
            // s′ peaks at the midpoint, where s(1 − s) = ¼ and the chain
            // factor is 1/u² + 1/(1 − u)² = 8.
            TestFunction::SmoothStep { width, .. } => 2.0 / width,
            TestFunction::LogCoshContraction | TestFunction::Identity => 1.0,
            TestFunction::Mollified { base, .. } => base.deriv_bound(),
        }
    }

    pub fn is_contraction(&self) -> bool {
        self.deriv_bound() <= 1.0
    }
}

/// `h_ε = h ⋆ ψ_ε` for a contraction `h`.
pub fn mollify(h: &TestFunction, epsilon: f64) -> Result<TestFunction> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::param(
            "epsilon",
            format!("{epsilon} must be positive"),
        ));
    }
    if !h.is_contraction() {
        return Err(Error::param(
            "h",
            format!("{} has derivative bound {} > 1", h.name(), h.deriv_bound()),
        ));
    }
    Ok(TestFunction::Mollified {
        base: Box::new(h.clone()),
        epsilon,
    })
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// C^∞ step from 0 at u = 0 to 1 at u = 1.
fn step_value(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        sigmoid(1.0 / (1.0 - u) - 1.0 / u)
    }
}

fn step_slope(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let s = step_value(u);
    s * (1.0 - s) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)))
}

/// Nodes in (−1, 1) and normalized weights of the discretized bump.
fn kernel() -> &'static (Vec<f64>, Vec<f64>) {
    static KERNEL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    KERNEL.get_or_init(|| {
        let (nodes, gl) = gauss_legendre(KERNEL_NODES);
        let raw: Vec<f64> = nodes
            .iter()
            .zip(&gl)
            .map(|(u, w)| w * (-1.0 / (1.0 - u * u)).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        // Mirror exactly so the kernel stays symmetric after rounding.
        let n = weights.len();
        for i in 0..n / 2 {
            weights[n - 1 - i] = weights[i];
        }
        (nodes, weights)
    })
}
