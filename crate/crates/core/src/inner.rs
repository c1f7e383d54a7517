//! Finite-support penalized φ-divergence DRO.
//!
//! Given loss values f₁..f_m and a regularization level η > 0, solve
//!
//! ```text
//! max_{γ ∈ Δ^m}  Σ γ_i f_i − (η/m) Σ φ(m γ_i)
//! ```
//!
//! whose dual is `inf_μ { μ + (1/m) Σ (ηφ)*(f_i − μ) }`. KL and quadratic
//! divergences are solved by bisection on the multiplier μ; KL, indicator
//! (AV@R), absolute-value and hinge divergences also have closed forms.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceKind, DivergenceSpec};
use crate::error::{Error, Result};

/// Early exit threshold on |h(μ)|.
const RESIDUAL_TOL: f64 = 1e-12;
/// Bracket widenings before giving up.
const MAX_WIDENINGS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct InnerProblem {
    values: Vec<f64>,
    eta: f64,
    divergence: DivergenceSpec,
}

impl InnerProblem {
    pub fn new(values: Vec<f64>, eta: f64, divergence: DivergenceSpec) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("values", "at least one loss value is required"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite loss value {v}")));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::param("eta", format!("must be positive and finite, got {eta}")));
        }
        Ok(Self {
            values,
            eta,
            divergence,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn divergence(&self) -> &DivergenceSpec {
        &self.divergence
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Σ γ_i f_i − (η/m) Σ φ(m γ_i).
    pub fn primal_objective(&self, gamma: &[f64]) -> f64 {
        let m = self.len() as f64;
        let mut linear = 0.0;
        let mut reg = 0.0;
        for (&g, &f) in gamma.iter().zip(&self.values) {
            linear += g * f;
            reg += self.divergence.phi(m * g);
        }
        linear - self.eta / m * reg
    }

    /// μ + (1/m) Σ (ηφ)*(f_i − μ); convex in μ, possibly +∞.
    pub fn dual_objective(&self, mu: f64) -> f64 {
        let m = self.len() as f64;
        let sum: f64 = self
            .values
            .iter()
            .map(|&f| self.divergence.scaled_conjugate(self.eta, f - mu))
            .sum();
        mu + sum / m
    }

    /// h(μ) = (1/m) Σ_{i ∉ N} (φ')⁻¹((f_i − μ)/η) − 1, nonincreasing in μ.
    pub fn bisection_residual(&self, mu: f64) -> Result<f64> {
        let threshold = mu + self.eta * self.divergence.k_limit;
        let mut sum = 0.0;
        for &f in &self.values {
            if f <= threshold {
                continue;
            }
            sum += self.divergence.inv_phi_prime((f - mu) / self.eta)?;
        }
        Ok(sum / self.len() as f64 - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Bisection,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSolution {
    pub gamma: Vec<f64>,
    pub mu: f64,
    pub value: f64,
    pub iterations: usize,
    pub method: SolveMethod,
    /// Whether `gamma` attains `value` in the primal problem. Only the
    /// absolute-value and hinge closed forms can return `false`.
    pub primal_exact: bool,
}

/// Bisection iteration count ⌈½ log₂(ϱ² / (2 κ η ε))⌉.
pub fn bisection_iterations(range: f64, kappa: f64, eta: f64, epsilon: f64) -> usize {
    let arg = range * range / (2.0 * kappa * eta * epsilon);
    if arg <= 1.0 {
        0
    } else {
        (0.5 * arg.log2()).ceil() as usize
    }
}

/// Initial bisection bracket [f_min, f_max − ηK] (or f_max − η(f_min − f_max)
/// when K = −∞).
pub fn initial_bracket(problem: &InnerProblem) -> (f64, f64) {
    let (lo, hi) = problem.min_max();
    let k = problem.divergence.k_limit;
    let upper = if k.is_finite() {
        hi - problem.eta * k
    } else {
        hi - problem.eta * (lo - hi)
    };
    (lo, upper)
}

/// Bisection on the dual multiplier.
pub fn solve_bisection(problem: &InnerProblem, epsilon: f64) -> Result<InnerSolution> {
    let spec = problem.divergence;
    if !spec.supports_bisection() {
        return Err(Error::UnsupportedDivergence(format!(
            "bisection needs a strongly convex divergence, got {}",
            spec.kind
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let m = problem.len();
    let (f_lo, f_hi) = problem.min_max();
    if f_hi - f_lo == 0.0 {
        // all values equal: the uniform weights are optimal
        return Ok(InnerSolution {
            gamma: vec![1.0 / m as f64; m],
            mu: f_lo - problem.eta * spec.phi_prime_at_one(),
            value: f_lo,
            iterations: 0,
            method: SolveMethod::Bisection,
            primal_exact: true,
        });
    }

    let (mut lo, mut hi) = initial_bracket(problem);
    let mut widenings = 0;
    while problem.bisection_residual(hi)? > 0.0 {
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::param("values", "could not bracket the dual multiplier"));
        }
        warn!("bisection upper bound {hi} below the multiplier; widening");
        hi += (hi - lo).max(problem.eta);
    }
    while problem.bisection_residual(lo)? < 0.0 {
        widenings += 1;
        if widenings > MAX_WIDENINGS {
            return Err(Error::param("values", "could not bracket the dual multiplier"));
        }
        warn!("bisection lower bound {lo} above the multiplier; widening");
        lo -= (hi - lo).max(problem.eta);
    }

    let iterations = bisection_iterations(hi - lo, spec.kappa_eff(), problem.eta, epsilon);
    let mut done = 0;
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..iterations {
        mu = 0.5 * (lo + hi);
        done += 1;
        let h = problem.bisection_residual(mu)?;
        if h.abs() <= RESIDUAL_TOL {
            lo = mu;
            hi = mu;
            break;
        }
        if h <= 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
    }
    if done > 0 {
        mu = 0.5 * (lo + hi);
    }

    let threshold = mu + problem.eta * spec.k_limit;
    let mut gamma = Vec::with_capacity(m);
    for &f in problem.values() {
        let g = if f <= threshold {
            0.0
        } else {
            spec.inv_phi_prime((f - mu) / problem.eta)? / m as f64
        };
        gamma.push(g);
    }
    // γ is read off the final μ without renormalizing, which keeps the
    // entrywise error tied to |μ − μ*|; its sum is 1 up to that error
    if !(gamma.iter().sum::<f64>() > 0.0) {
        normalize_or_argmax(&mut gamma, problem.values());
    }
    let value = problem.dual_objective(mu);
    Ok(InnerSolution {
        gamma,
        mu,
        value,
        iterations: done,
        method: SolveMethod::Bisection,
        primal_exact: false,
    })
}

fn normalize_or_argmax(gamma: &mut [f64], values: &[f64]) {
    let total: f64 = gamma.iter().sum();
    if total > 0.0 && total.is_finite() {
        gamma.iter_mut().for_each(|g| *g /= total);
        return;
    }
    let best = argmax(values);
    gamma.iter_mut().for_each(|g| *g = 0.0);
    gamma[best] = 1.0;
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0
}

/// η·log((1/m) Σ exp(f_i/η)) with max subtraction, and the softmax weights.
pub fn log_mean_exp(values: &[f64], eta: f64) -> (f64, Vec<f64>) {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = values.iter().map(|&f| ((f - max) / eta).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let lme = max + eta * (total / values.len() as f64).ln();
    (lme, weights)
}

/// Closed-form solution for KL, indicator, absolute-value and hinge divergences.
pub fn solve_closed_form(problem: &InnerProblem) -> Result<InnerSolution> {
    let eta = problem.eta;
    let values = problem.values();
    let m = values.len();
    let (_, f_max) = problem.min_max();
    let solution = match problem.divergence.kind {
        DivergenceKind::Kl => {
            let (value, gamma) = log_mean_exp(values, eta);
            InnerSolution {
                gamma,
                mu: value,
                value,
                iterations: 0,
                method: SolveMethod::ClosedForm,
                primal_exact: true,
            }
        }
        DivergenceKind::Indicator { alpha } => avar(values, alpha),
        DivergenceKind::Absolute => level_set_solution(problem, f_max - 2.0 * eta, f_max - eta),
        DivergenceKind::Hinge => level_set_solution(problem, f_max - eta, f_max - eta),
        DivergenceKind::Quadratic => {
            return Err(Error::UnsupportedDivergence(
                "quadratic has no closed form; use bisection".into(),
            ))
        }
    };
    debug_assert_eq!(solution.gamma.len(), m);
    Ok(solution)
}

/// AV@R at level α: mass 1/(αm) on the top ⌊αm⌋ values and a fractional
/// boundary atom; ties keep index order.
fn avar(values: &[f64], alpha: f64) -> InnerSolution {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let budget = alpha * m as f64;
    let per_atom = 1.0 / budget;
    let mut gamma = vec![0.0; m];
    let mut remaining = 1.0;
    let mut mu = values[order[0]];
    for &i in &order {
        if remaining <= 0.0 {
            break;
        }
        let w = per_atom.min(remaining);
        gamma[i] = w;
        remaining -= w;
        mu = values[i];
        if remaining < 1e-15 {
            break;
        }
    }
    let value = gamma.iter().zip(values).map(|(g, f)| g * f).sum();
    InnerSolution {
        gamma,
        mu,
        value,
        iterations: 0,
        method: SolveMethod::ClosedForm,
        primal_exact: true,
    }
}

/// Absolute/hinge: the dual value at μ* = f_max − η, which reduces to
/// cutoff + mean(f − cutoff)₊, with γ uniform on {f_i ≥ cutoff}.
fn level_set_solution(problem: &InnerProblem, cutoff: f64, mu: f64) -> InnerSolution {
    let values = problem.values();
    let support: Vec<bool> = values.iter().map(|&f| f >= cutoff).collect();
    let count = support.iter().filter(|&&s| s).count();
    let gamma: Vec<f64> = support
        .iter()
        .map(|&s| if s { 1.0 / count as f64 } else { 0.0 })
        .collect();
    let value = cutoff + values.iter().map(|f| (f - cutoff).max(0.0)).sum::<f64>() / values.len() as f64;
    let primal = problem.primal_objective(&gamma);
    let scale = values.iter().fold(1.0f64, |a, f| a.max(f.abs()));
    InnerSolution {
        gamma,
        mu,
        value,
        iterations: 0,
        method: SolveMethod::ClosedForm,
        primal_exact: (primal - value).abs() <= 1e-12 * scale,
    }
}

/// Solves with the cheapest exact route: closed form where one exists,
/// bisection for the quadratic divergence.
pub fn solve(problem: &InnerProblem, epsilon: f64) -> Result<InnerSolution> {
    match problem.divergence.kind {
        DivergenceKind::Quadratic => solve_bisection(problem, epsilon),
        _ => solve_closed_form(problem),
    }
}
