//! Uniform sampling from ℓ₂ and ℓ∞ balls.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L2,
    Linf,
}

impl Norm {
    pub fn of(&self, v: &[f64]) -> f64 {
        match self {
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }

    /// The dual norm (ℓ₂ ↔ ℓ₂, ℓ∞ ↔ ℓ₁).
    pub fn dual_of(&self, v: &[f64]) -> f64 {
        match self {
            Norm::L2 => Norm::L2.of(v),
            Norm::Linf => v.iter().map(|x| x.abs()).sum(),
        }
    }

    /// Euclidean-nearest point of the ball of `radius` around `center`.
    pub fn project(&self, center: &[f64], radius: f64, point: &mut [f64]) {
        match self {
            Norm::L2 => {
                let dist = point
                    .iter()
                    .zip(center)
                    .map(|(p, c)| (p - c) * (p - c))
                    .sum::<f64>()
                    .sqrt();
                if dist > radius {
                    let scale = radius / dist;
                    for (p, c) in point.iter_mut().zip(center) {
                        *p = c + (*p - c) * scale;
                    }
                }
            }
            Norm::Linf => {
                for (p, c) in point.iter_mut().zip(center) {
                    *p = p.clamp(c - radius, c + radius);
                }
            }
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::L2 => write!(f, "l2"),
            Norm::Linf => write!(f, "linf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" | "2" => Ok(Norm::L2),
            "linf" | "inf" | "l_inf" => Ok(Norm::Linf),
            other => Err(Error::param("norm", format!("unknown norm `{other}`"))),
        }
    }
}

/// Uniform distribution on the closed ball of radius `rho` in `dim` dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSampler {
    pub norm: Norm,
    pub rho: f64,
    pub dim: usize,
}

impl BallSampler {
    pub fn new(norm: Norm, rho: f64, dim: usize) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::param("rho", format!("must be positive and finite, got {rho}")));
        }
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(Self { norm, rho, dim })
    }

    /// An offset drawn uniformly from the ball centred at the origin.
    ///
    /// ℓ₂: Gaussian direction scaled by ρ·U^{1/d}; ℓ∞: independent uniforms.
    pub fn offset(&self, rng: &mut SeededRng) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.offset_into(rng, &mut out);
        out
    }

    pub fn offset_into(&self, rng: &mut SeededRng, out: &mut [f64]) {
        match self.norm {
            Norm::Linf => {
                for x in out.iter_mut() {
                    *x = rng.uniform_range(-self.rho, self.rho);
                }
            }
            Norm::L2 => {
                let mut norm2 = 0.0;
                while norm2 == 0.0 {
                    norm2 = 0.0;
                    for x in out.iter_mut() {
                        *x = rng.normal();
                        norm2 += *x * *x;
                    }
                }
                let radius = self.rho * rng.uniform().powf(1.0 / self.dim as f64);
                let scale = radius / norm2.sqrt();
                out.iter_mut().for_each(|x| *x *= scale);
            }
        }
    }

    /// A point drawn uniformly from the ball around `center`.
    pub fn sample_around(&self, center: &[f64], rng: &mut SeededRng) -> Vec<f64> {
        let mut p = self.offset(rng);
        for (x, c) in p.iter_mut().zip(center) {
            *x += c;
        }
        p
    }

    pub fn contains(&self, center: &[f64], point: &[f64]) -> bool {
        let diff: Vec<f64> = point.iter().zip(center).map(|(p, c)| p - c).collect();
        self.norm.of(&diff) <= self.rho * (1.0 + 1e-12)
    }
}
