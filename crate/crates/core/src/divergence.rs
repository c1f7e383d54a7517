//! The φ-divergence algebra.
//!
//! A divergence is generated by a convex, lower semi-continuous φ: ℝ₊ → ℝ ∪ {∞}
//! with φ(1) = 0 (and φ = ∞ on the negative axis). Downstream solvers need four
//! things from it: φ itself, the convex conjugate φ*(s) = sup_{x≥0} {s·x − φ(x)},
//! the inverse derivative (φ')⁻¹ for the bisection solver, and a handful of
//! constants (strong-convexity modulus κ, K = lim_{s→0+} φ'(s), φ''(1)).
//!
//! | kind       | φ(x)               | φ*(s)                          |
//! |------------|--------------------|--------------------------------|
//! | KL         | x log x − x + 1    | eˢ − 1                         |
//! | Quadratic  | ½(x² − 1)          | ½ max(s, 0)² + ½               |
//! | Indicator  | 0 on [0, 1/α]      | max(s, 0) / α                  |
//! | Absolute   | \|x − 1\|          | max(s, −1) for s ≤ 1, else ∞   |
//! | Hinge      | (x − 1)₊           | max(s, 0) for s ≤ 1, else ∞    |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ratio range used to give KL an effective strong-convexity modulus.
pub const DEFAULT_RATIO_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DivergenceKind {
    Kl,
    Quadratic,
    Indicator { alpha: f64 },
    Absolute,
    Hinge,
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceKind::Kl => write!(f, "kl"),
            DivergenceKind::Quadratic => write!(f, "quadratic"),
            DivergenceKind::Indicator { alpha } => write!(f, "indicator:{alpha}"),
            DivergenceKind::Absolute => write!(f, "absolute"),
            DivergenceKind::Hinge => write!(f, "hinge"),
        }
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    /// Accepts `kl`, `quadratic`, `absolute`, `hinge`, and `indicator:<alpha>`
    /// (also `indicator:alpha=<alpha>` and `indicator alpha=<alpha>`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "kl" => return Ok(DivergenceKind::Kl),
            "quadratic" => return Ok(DivergenceKind::Quadratic),
            "absolute" => return Ok(DivergenceKind::Absolute),
            "hinge" => return Ok(DivergenceKind::Hinge),
            _ => {}
        }
        let rest = s
            .strip_prefix("indicator")
            .ok_or_else(|| Error::param("divergence", format!("unknown divergence `{s}`")))?;
        let rest = rest.trim_start_matches([':', ' ']);
        let rest = rest.strip_prefix("alpha=").unwrap_or(rest);
        let alpha: f64 = rest
            .trim()
            .parse()
            .map_err(|_| Error::param("alpha", format!("cannot parse `{rest}` as a number")))?;
        Ok(DivergenceKind::Indicator { alpha })
    }
}

/// A φ-divergence together with the constants the solvers need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSpec {
    pub kind: DivergenceKind,
    /// Global strong-convexity modulus on ℝ₊ (0 when none exists).
    pub kappa: f64,
    /// K = lim_{s→0+} φ'(s); `-inf` for KL.
    pub k_limit: f64,
    /// φ''(1); `inf` where φ has a kink at 1.
    pub phi_second_at_one: f64,
    /// Bounded ratio range [r_min, r_max] over which KL's effective κ is taken.
    pub ratio_range: (f64, f64),
}

impl DivergenceSpec {
    pub fn new(kind: DivergenceKind) -> Result<Self> {
        let (kappa, k_limit, phi_second_at_one) = match kind {
            DivergenceKind::Kl => (0.0, f64::NEG_INFINITY, 1.0),
            DivergenceKind::Quadratic => (1.0, 0.0, 1.0),
            DivergenceKind::Indicator { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::param("alpha", format!("{alpha} is outside (0, 1]")));
                }
                // flat at 1 when 1 < 1/α; a kink when α = 1
                let second = if alpha < 1.0 { 0.0 } else { f64::INFINITY };
                (0.0, 0.0, second)
            }
            DivergenceKind::Absolute => (0.0, -1.0, f64::INFINITY),
            DivergenceKind::Hinge => (0.0, 0.0, f64::INFINITY),
        };
        Ok(Self {
            kind,
            kappa,
            k_limit,
            phi_second_at_one,
            ratio_range: DEFAULT_RATIO_RANGE,
        })
    }

    pub fn kl() -> Self {
        Self::new(DivergenceKind::Kl).expect("kl is always valid")
    }

    pub fn quadratic() -> Self {
        Self::new(DivergenceKind::Quadratic).expect("quadratic is always valid")
    }

    pub fn indicator(alpha: f64) -> Result<Self> {
        Self::new(DivergenceKind::Indicator { alpha })
    }

    pub fn absolute() -> Self {
        Self::new(DivergenceKind::Absolute).expect("absolute is always valid")
    }

    pub fn hinge() -> Self {
        Self::new(DivergenceKind::Hinge).expect("hinge is always valid")
    }

    /// Replaces the ratio range used for KL's effective modulus.
    pub fn with_ratio_range(mut self, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::param(
                "ratio_range",
                format!("need 0 < r_min < r_max < inf, got [{r_min}, {r_max}]"),
            ));
        }
        self.ratio_range = (r_min, r_max);
        Ok(self)
    }

    /// Whether φ is strongly convex on all of ℝ₊.
    pub fn globally_strongly_convex(&self) -> bool {
        self.kappa > 0.0
    }

    /// Strong-convexity modulus used by the bisection bounds. For KL this is
    /// the modulus over the ratio range, 1 / r_max.
    pub fn kappa_eff(&self) -> f64 {
        match self.kind {
            DivergenceKind::Kl => 1.0 / self.ratio_range.1,
            _ => self.kappa,
        }
    }

    /// Differentiable kinds with an invertible derivative (bisection applies).
    pub fn supports_bisection(&self) -> bool {
        self.kappa_eff() > 0.0
    }

    pub fn phi(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::INFINITY;
        }
        match self.kind {
            DivergenceKind::Kl => {
                if x == 0.0 {
                    1.0
                } else {
                    x * x.ln() - x + 1.0
                }
            }
            DivergenceKind::Quadratic => 0.5 * (x * x - 1.0),
            DivergenceKind::Indicator { alpha } => {
                if x <= 1.0 / alpha {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            DivergenceKind::Absolute => (x - 1.0).abs(),
            DivergenceKind::Hinge => (x - 1.0).max(0.0),
        }
    }

    /// φ'(x) for x > 0 (right derivative at kinks).
    pub fn phi_prime(&self, x: f64) -> f64 {
        match self.kind {
            DivergenceKind::Kl => x.ln(),
            DivergenceKind::Quadratic => x,
            DivergenceKind::Indicator { alpha } => {
                if x < 1.0 / alpha {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            DivergenceKind::Absolute => {
                if x < 1.0 {
                    -1.0
                } else {
                    1.0
                }
            }
            DivergenceKind::Hinge => {
                if x < 1.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// φ*(s) = sup_{x ≥ 0} { s·x − φ(x) }.
    pub fn conjugate(&self, s: f64) -> f64 {
        match self.kind {
            DivergenceKind::Kl => s.exp_m1(),
            DivergenceKind::Quadratic => {
                let p = s.max(0.0);
                0.5 * p * p + 0.5
            }
            DivergenceKind::Indicator { alpha } => s.max(0.0) / alpha,
            DivergenceKind::Absolute => {
                if s > 1.0 {
                    f64::INFINITY
                } else {
                    s.max(-1.0)
                }
            }
            DivergenceKind::Hinge => {
                if s > 1.0 {
                    f64::INFINITY
                } else {
                    s.max(0.0)
                }
            }
        }
    }

    /// (ηφ)*(t) = η·φ*(t/η).
    pub fn scaled_conjugate(&self, eta: f64, t: f64) -> f64 {
        eta * self.conjugate(t / eta)
    }

    /// (φ')⁻¹(s) on ℝ₊; only for the bisection-capable kinds.
    pub fn inv_phi_prime(&self, s: f64) -> Result<f64> {
        match self.kind {
            DivergenceKind::Kl => Ok(s.exp()),
            DivergenceKind::Quadratic => Ok(s.max(0.0)),
            _ => Err(Error::UnsupportedDivergence(format!(
                "{} has no invertible derivative",
                self.kind
            ))),
        }
    }

    /// φ'(1): the value of (f − μ)/η that puts weight 1/m on every point.
    pub(crate) fn phi_prime_at_one(&self) -> f64 {
        match self.kind {
            DivergenceKind::Quadratic => 1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}
