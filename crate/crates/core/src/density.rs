//! Worst-case densities on a discretized one-dimensional perturbation ball,
//! and the seeded toy loss landscape used to visualize them.
//!
//! The reference measure ν_z (uniform on [z − ρ, z + ρ]) is replaced by equal
//! weights on the cell midpoints of a [`Grid1D`]. Solving the finite-support
//! inner problem on those points gives weights γ_j; the per-unit-length
//! density is γ_j / h where h is the cell width, so it integrates to one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceKind, DivergenceSpec};
use crate::error::{Error, Result};
use crate::inner::{self, InnerProblem};
use crate::rng::SeededRng;

/// Default grid size for density plots.
pub const DEFAULT_GRID: usize = 10_000;
/// Tolerance handed to the bisection solver for quadratic densities.
const DENSITY_EPS: f64 = 1e-12;

/// Cell midpoints of n equal cells on [lo, hi].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub points: Vec<f64>,
    pub weight: f64,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("grid", format!("need at least 2 points, got {n}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::param("grid", format!("need lo < hi, got [{lo}, {hi}]")));
        }
        let weight = (hi - lo) / n as f64;
        let points = (0..n).map(|j| lo + (j as f64 + 0.5) * weight).collect();
        Ok(Self {
            lo,
            hi,
            n,
            points,
            weight,
        })
    }

    /// Grid over the ball [center − rho, center + rho].
    pub fn ball(center: f64, rho: f64, n: usize) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::param("rho", format!("must be positive, got {rho}")));
        }
        Self::new(center - rho, center + rho, n)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// The feed-forward toy loss f(z) = g(z)² with
/// g(z) = W4 · sigmoid(W3 · softplus(W2 · softplus(W1 · φ(z)))) and the
/// basis expansion φ(z) = (z, √|z|, z², sin z, cos z).
#[derive(Clone, Debug)]
pub struct ToyLandscape {
    pub seed: u64,
    w1: Vec<f64>, // 512 × 5
    w2: Vec<f64>, // 512 × 512
    w3: Vec<f64>, // 10 × 512
    w4: Vec<f64>, // 10
}

const HIDDEN: usize = 512;
const BASIS: usize = 5;
const HEAD: usize = 10;

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl ToyLandscape {
    /// Weights are drawn row-major in the order W1, W2, W3, W4 from one
    /// ChaCha8 stream: W1 entries N(0, 0.25) (standard deviation 0.5), the
    /// others N(0, 1).
    pub fn new(seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let mut draw = |n: usize, std: f64| -> Vec<f64> { (0..n).map(|_| std * rng.normal()).collect() };
        let w1 = draw(HIDDEN * BASIS, 0.5);
        let w2 = draw(HIDDEN * HIDDEN, 1.0);
        let w3 = draw(HEAD * HIDDEN, 1.0);
        let w4 = draw(HEAD, 1.0);
        Self { seed, w1, w2, w3, w4 }
    }

    pub fn basis(z: f64) -> [f64; BASIS] {
        [z, z.abs().sqrt(), z * z, z.sin(), z.cos()]
    }

    pub fn network(&self, z: f64) -> f64 {
        let x = Self::basis(z);
        let h1: Vec<f64> = self
            .w1
            .chunks_exact(BASIS)
            .map(|row| softplus(row.iter().zip(&x).map(|(w, v)| w * v).sum()))
            .collect();
        let h2: Vec<f64> = self
            .w2
            .chunks_exact(HIDDEN)
            .map(|row| softplus(row.iter().zip(&h1).map(|(w, v)| w * v).sum()))
            .collect();
        self.w3
            .chunks_exact(HIDDEN)
            .zip(&self.w4)
            .map(|(row, w4)| w4 * sigmoid(row.iter().zip(&h2).map(|(w, v)| w * v).sum()))
            .sum()
    }

    /// f(z) = g(z)².
    pub fn loss(&self, z: f64) -> f64 {
        let g = self.network(z);
        g * g
    }

    pub fn values_on(&self, grid: &Grid1D) -> Vec<f64> {
        grid.points.par_iter().map(|&z| self.loss(z)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseDensity {
    pub grid: Grid1D,
    pub density: Vec<f64>,
    pub divergence: DivergenceSpec,
    /// η (or α for the indicator divergence, where η plays no role).
    pub parameter: f64,
    /// Dual multiplier of the inner problem (V@R for the indicator).
    pub mu: f64,
    /// Regularized worst-case value over the ball.
    pub value: f64,
}

impl WorstCaseDensity {
    /// Σ density_j · h.
    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.weight
    }
}

/// Worst-case density of a loss on the grid `grid`, which must span the ball
/// [center − rho, center + rho].
pub fn worst_case_density<F>(
    loss: F,
    center: f64,
    rho: f64,
    divergence: DivergenceSpec,
    eta: f64,
    grid: &Grid1D,
) -> Result<WorstCaseDensity>
where
    F: Fn(f64) -> f64 + Sync,
{
    let tol = 1e-9 * rho.max(1.0);
    if (grid.lo - (center - rho)).abs() > tol || (grid.hi - (center + rho)).abs() > tol {
        return Err(Error::param(
            "grid",
            format!(
                "grid [{}, {}] does not span the ball [{}, {}]",
                grid.lo,
                grid.hi,
                center - rho,
                center + rho
            ),
        ));
    }
    let values: Vec<f64> = grid.points.par_iter().map(|&z| loss(z)).collect();
    density_from_values(&values, grid, divergence, eta)
}

/// Same as [`worst_case_density`] for loss values already evaluated on `grid`.
pub fn density_from_values(
    values: &[f64],
    grid: &Grid1D,
    divergence: DivergenceSpec,
    eta: f64,
) -> Result<WorstCaseDensity> {
    if values.len() != grid.n {
        return Err(Error::Dimension {
            expected: grid.n,
            got: values.len(),
        });
    }
    let parameter = match divergence.kind {
        DivergenceKind::Indicator { alpha } => {
            if alpha * (grid.n as f64) < 1.0 {
                return Err(Error::Resolution(format!(
                    "alpha·n = {} < 1 cannot resolve the V@R boundary",
                    alpha * grid.n as f64
                )));
            }
            alpha
        }
        _ => eta,
    };
    // the indicator divergence ignores η; any positive value will do
    let eta_used = if matches!(divergence.kind, DivergenceKind::Indicator { .. }) && !(eta > 0.0) {
        1.0
    } else {
        eta
    };
    let problem = InnerProblem::new(values.to_vec(), eta_used, divergence)?;
    let solution = inner::solve(&problem, DENSITY_EPS)?;
    let density = solution.gamma.iter().map(|g| g / grid.weight).collect();
    Ok(WorstCaseDensity {
        grid: grid.clone(),
        density,
        divergence,
        parameter,
        mu: solution.mu,
        value: solution.value,
    })
}

/// Density of a mixture of atoms: each atom's ball is discretized by the
/// points of `grid` inside it and the per-atom densities are averaged with
/// the atom weights.
pub fn mixture_density(
    values: &[f64],
    grid: &Grid1D,
    atoms: &[(f64, f64)],
    rho: f64,
    divergence: DivergenceSpec,
    eta: f64,
) -> Result<Vec<f64>> {
    if atoms.is_empty() {
        return Err(Error::EmptyData);
    }
    let total_weight: f64 = atoms.iter().map(|a| a.1).sum();
    if !(total_weight > 0.0) {
        return Err(Error::param("atoms", "weights must sum to a positive value"));
    }
    let mut density = vec![0.0; grid.n];
    for &(center, weight) in atoms {
        let idx: Vec<usize> = (0..grid.n)
            .filter(|&j| (grid.points[j] - center).abs() <= rho)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Resolution(format!("atom {center} covers fewer than 2 grid points")));
        }
        let local: Vec<f64> = idx.iter().map(|&j| values[j]).collect();
        if let DivergenceKind::Indicator { alpha } = divergence.kind {
            if alpha * (idx.len() as f64) < 1.0 {
                return Err(Error::Resolution("alpha·n < 1 inside an atom's ball".into()));
            }
        }
        let problem = InnerProblem::new(local, eta, divergence)?;
        let solution = inner::solve(&problem, DENSITY_EPS)?;
        for (&j, g) in idx.iter().zip(&solution.gamma) {
            density[j] += weight / total_weight * g / grid.weight;
        }
    }
    Ok(density)
}

/// Mass within `neighborhood` of the grid argmax of the loss.
pub fn density_concentration(density: &WorstCaseDensity, values: &[f64], neighborhood: f64) -> f64 {
    let grid = &density.grid;
    let best = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    let center = grid.points[best];
    grid.points
        .iter()
        .zip(&density.density)
        .filter(|(z, _)| (*z - center).abs() <= neighborhood)
        .map(|(_, d)| d)
        .sum::<f64>()
        * grid.weight
}
