//! Small-radius behaviour of the regularized robust loss.
//!
//! The gap ε(ρ, η) = E_z[OCE_η of f over the ρ-ball around z] − E_z f(z) is
//! compared with three first-order regularizers built from ∇f at the atoms:
//!
//! - R1 = ρ·E_z inf_μ { μ + (1/C)·E_b φ*(C(∇f(z)ᵀb − μ)) }, b uniform on the unit ball;
//! - R2 = ρ·E_z ‖∇f(z)‖_*;
//! - R3 = ρ²/(2ηφ''(1))·E_z Var_b(∇f(z)ᵀb).
//!
//! Expectations over the ball use a deterministic midpoint grid in one and two
//! dimensions and Monte Carlo samples otherwise. Both ε and R1 are evaluated
//! on the same unit-ball points, so a linear loss gives ε = R1 (C = ρ/η) up to
//! rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceKind, DivergenceSpec};
use crate::error::{Error, Result};
use crate::inner::{self, InnerProblem};
use crate::rng::SeededRng;
use crate::sampling::{BallSampler, Norm};

/// Grid points per axis used for one- and two-dimensional balls.
pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
const MIN_MC_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestLoss {
    /// aᵀz
    Linear { a: Vec<f64> },
    /// ½zᵀAz + bᵀz with A symmetric.
    Quadratic { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// log Σ_i exp(A_i z + b_i)
    LogSumExp { a: Vec<Vec<f64>>, b: Vec<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl TestLoss {
    /// The 2-D instances used by the CLI and the scaling checks.
    pub fn standard(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(TestLoss::Linear { a: vec![1.0, -0.5] }),
            "quadratic" => Ok(TestLoss::Quadratic {
                a: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
                b: vec![1.0, -0.5],
            }),
            "logsumexp" => Ok(TestLoss::LogSumExp {
                a: vec![vec![1.0, 0.0], vec![0.0, 1.5], vec![-1.0, -1.0]],
                b: vec![0.0, -0.3, 0.2],
            }),
            other => Err(Error::param("loss", format!("unknown test loss `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestLoss::Linear { a } => a.len(),
            TestLoss::Quadratic { b, .. } => b.len(),
            TestLoss::LogSumExp { a, .. } => a.first().map_or(0, Vec::len),
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        match self {
            TestLoss::Linear { a } => dot(a, z),
            TestLoss::Quadratic { a, b } => {
                0.5 * a.iter().zip(z).map(|(row, zi)| zi * dot(row, z)).sum::<f64>() + dot(b, z)
            }
            TestLoss::LogSumExp { a, b } => {
                let s: Vec<f64> = a.iter().zip(b).map(|(row, bi)| dot(row, z) + bi).collect();
                let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            }
        }
    }

    pub fn grad(&self, z: &[f64]) -> Vec<f64> {
        match self {
            TestLoss::Linear { a } => a.clone(),
            TestLoss::Quadratic { a, b } => a.iter().zip(b).map(|(row, bi)| dot(row, z) + bi).collect(),
            TestLoss::LogSumExp { a, b } => {
                let s: Vec<f64> = a.iter().zip(b).map(|(row, bi)| dot(row, z) + bi).collect();
                let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
                let total: f64 = w.iter().sum();
                let mut g = vec![0.0; z.len()];
                for (row, wi) in a.iter().zip(&w) {
                    for (gj, aj) in g.iter_mut().zip(row) {
                        *gj += wi / total * aj;
                    }
                }
                g
            }
        }
    }

    /// A constant S with ‖∇f(x) − ∇f(x')‖_* ≤ S·‖x − x'‖ in the given norm.
    pub fn smoothness(&self, norm: Norm) -> f64 {
        let row_norm = |r: &[f64]| match norm {
            Norm::L2 => Norm::L2.of(r),
            Norm::Linf => Norm::Linf.dual_of(r),
        };
        match self {
            TestLoss::Linear { .. } => 0.0,
            TestLoss::Quadratic { a, .. } => match norm {
                Norm::L2 => a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt(),
                Norm::Linf => a.iter().flatten().map(|x| x.abs()).sum(),
            },
            TestLoss::LogSumExp { a, .. } => {
                let m = a.iter().map(|r| row_norm(r)).fold(0.0, f64::max);
                match norm {
                    Norm::L2 => m * m,
                    Norm::Linf => 2.0 * m * m,
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quadrature {
    /// Midpoint grid with `n` points per axis (dimension ≤ 2).
    Grid { n: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Quadrature {
    /// Grid for dimension ≤ 2, Monte Carlo otherwise.
    pub fn auto(dim: usize, seed: u64) -> Self {
        if dim <= 2 {
            Quadrature::Grid { n: DEFAULT_GRID }
        } else {
            Quadrature::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            }
        }
    }
}

/// Points b of the unit ball with equal weights.
#[derive(Clone, Debug)]
pub struct UnitBall {
    norm: Norm,
    dim: usize,
    kind: Quadrature,
    samples: Vec<Vec<f64>>,
}

impl UnitBall {
    pub fn new(norm: Norm, dim: usize, quadrature: Quadrature) -> Result<Self> {
        match quadrature {
            Quadrature::Grid { n } => {
                if dim == 0 || dim > 2 {
                    return Err(Error::param("dim", format!("grid quadrature needs dimension 1 or 2, got {dim}")));
                }
                if n < 2 {
                    return Err(Error::param("grid", "need at least 2 points per axis"));
                }
                Ok(Self {
                    norm,
                    dim,
                    kind: quadrature,
                    samples: Vec::new(),
                })
            }
            Quadrature::MonteCarlo { samples, seed } => {
                if samples < MIN_MC_SAMPLES {
                    return Err(Error::McBudget(samples));
                }
                let sampler = BallSampler::new(norm, 1.0, dim)?;
                let mut rng = SeededRng::new(seed);
                let samples = (0..samples).map(|_| sampler.offset(&mut rng)).collect();
                Ok(Self {
                    norm,
                    dim,
                    kind: quadrature,
                    samples,
                })
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.kind, Quadrature::Grid { .. })
    }

    /// Evaluates `f` at every point, in a fixed order.
    pub fn map<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self.kind {
            Quadrature::MonteCarlo { .. } => self.samples.par_iter().map(|b| f(b)).collect(),
            Quadrature::Grid { n } => {
                let h = 2.0 / n as f64;
                let coord = |i: usize| -1.0 + h * (i as f64 + 0.5);
                if self.dim == 1 {
                    return (0..n).into_par_iter().map(|i| f(&[coord(i)])).collect();
                }
                let disc = self.norm == Norm::L2;
                let rows: Vec<Vec<f64>> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let x = coord(i);
                        let mut row = Vec::with_capacity(n);
                        for j in 0..n {
                            let y = coord(j);
                            if !disc || x * x + y * y <= 1.0 {
                                row.push(f(&[x, y]));
                            }
                        }
                        row
                    })
                    .collect();
                rows.concat()
            }
        }
    }
}

/// inf_μ { μ + mean((ηφ)*(v − μ)) } with a standard error (zero on grids).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OceValue {
    pub value: f64,
    pub mu: f64,
    pub stderr: f64,
}

pub fn oce(values: &[f64], eta: f64, divergence: &DivergenceSpec, with_stderr: bool) -> Result<OceValue> {
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = values.len() as f64;
    let (value, mu) = if divergence.kind == DivergenceKind::Kl {
        let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = values.iter().map(|v| ((v - m) / eta).exp()).sum();
        let v = m + eta * (s / n).ln();
        (v, v)
    } else {
        let p = InnerProblem::new(values.to_vec(), eta, *divergence)?;
        let sol = inner::solve(&p, 1e-12)?;
        (sol.value, sol.mu)
    };
    let stderr = if with_stderr {
        // envelope: the μ-derivative vanishes, so only the mean term is noisy
        let terms: Vec<f64> = values.iter().map(|v| divergence.scaled_conjugate(eta, v - mu)).collect();
        let mean = terms.iter().sum::<f64>() / n;
        let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(OceValue { value, mu, stderr })
}

/// Golden-section minimization of the dual over [lo, hi].
pub fn golden_section_oce(values: &[f64], eta: f64, divergence: &DivergenceSpec, lo: f64, hi: f64) -> f64 {
    let dual = |mu: f64| {
        mu + values.iter().map(|v| divergence.scaled_conjugate(eta, v - mu)).sum::<f64>() / values.len() as f64
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if dual(c) <= dual(d) {
            b = d;
        } else {
            a = c;
        }
    }
    dual(0.5 * (a + b))
}

/// A value with its Monte Carlo standard error (zero on grids).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

fn check_inputs(loss: &TestLoss, atoms: &[Vec<f64>], rho: f64) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::param("rho", format!("must be positive, got {rho}")));
    }
    for z in atoms {
        if z.len() != loss.dim() {
            return Err(Error::Dimension {
                expected: loss.dim(),
                got: z.len(),
            });
        }
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    Ok(())
}

fn average(per_atom: &[OceValue]) -> Estimate {
    let n = per_atom.len() as f64;
    Estimate {
        value: per_atom.iter().map(|o| o.value).sum::<f64>() / n,
        stderr: per_atom.iter().map(|o| o.stderr * o.stderr).sum::<f64>().sqrt() / n,
    }
}

/// ε = E_z[OCE_η f(z + ρb)] − E_z f(z).
pub fn regularizer_gap(
    loss: &TestLoss,
    atoms: &[Vec<f64>],
    rho: f64,
    eta: f64,
    divergence: &DivergenceSpec,
    ball: &UnitBall,
) -> Result<Estimate> {
    check_inputs(loss, atoms, rho)?;
    check_eta(eta)?;
    let mut per_atom = Vec::with_capacity(atoms.len());
    for z in atoms {
        let values = ball.map(|b| {
            let p: Vec<f64> = z.iter().zip(b).map(|(zi, bi)| zi + rho * bi).collect();
            loss.value(&p)
        });
        let mut o = oce(&values, eta, divergence, !ball.is_grid())?;
        o.value -= loss.value(z);
        per_atom.push(o);
    }
    Ok(average(&per_atom))
}

/// R1 = ρ·E_z OCE_{1/C}(∇f(z)ᵀb).
pub fn oce_regularizer(
    loss: &TestLoss,
    atoms: &[Vec<f64>],
    rho: f64,
    c: f64,
    divergence: &DivergenceSpec,
    ball: &UnitBall,
) -> Result<Estimate> {
    check_inputs(loss, atoms, rho)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param("C", format!("must be positive, got {c}")));
    }
    let mut per_atom = Vec::with_capacity(atoms.len());
    for z in atoms {
        let g = loss.grad(z);
        let values = ball.map(|b| dot(&g, b));
        let mut o = oce(&values, 1.0 / c, divergence, !ball.is_grid())?;
        o.value *= rho;
        o.stderr *= rho;
        per_atom.push(o);
    }
    Ok(average(&per_atom))
}

/// R2 = ρ·E_z ‖∇f(z)‖_*.
pub fn variation_regularizer(loss: &TestLoss, atoms: &[Vec<f64>], rho: f64, norm: Norm) -> Result<f64> {
    check_inputs(loss, atoms, rho)?;
    let total: f64 = atoms.iter().map(|z| norm.dual_of(&loss.grad(z))).sum();
    Ok(rho * total / atoms.len() as f64)
}

/// Var_b(aᵀb) for b uniform on the unit ball: ‖a‖²/3 (ℓ∞), ‖a‖²/(d+2) (ℓ₂).
pub fn unit_ball_projection_variance(a: &[f64], norm: Norm) -> f64 {
    let sq: f64 = a.iter().map(|x| x * x).sum();
    match norm {
        Norm::Linf => sq / 3.0,
        Norm::L2 => sq / (a.len() as f64 + 2.0),
    }
}

/// R3 = ρ²/(2ηφ''(1))·E_z Var_b(∇f(z)ᵀb).
pub fn variance_regularizer(
    loss: &TestLoss,
    atoms: &[Vec<f64>],
    rho: f64,
    eta: f64,
    divergence: &DivergenceSpec,
    norm: Norm,
) -> Result<f64> {
    check_inputs(loss, atoms, rho)?;
    check_eta(eta)?;
    let curvature = divergence.phi_second_at_one;
    if !curvature.is_finite() || curvature <= 0.0 {
        return Err(Error::UnsupportedDivergence(format!(
            "{} has φ''(1) = {curvature}; the variance regularizer needs a finite positive value",
            divergence.kind
        )));
    }
    let var: f64 = atoms
        .iter()
        .map(|z| unit_ball_projection_variance(&loss.grad(z), norm))
        .sum::<f64>()
        / atoms.len() as f64;
    Ok(rho * rho / (2.0 * eta * curvature) * var)
}

/// The linearized gap Ẽ, which equals R1 at C = ρ/η.
pub fn surrogate_gap(
    loss: &TestLoss,
    atoms: &[Vec<f64>],
    rho: f64,
    eta: f64,
    divergence: &DivergenceSpec,
    ball: &UnitBall,
) -> Result<Estimate> {
    check_eta(eta)?;
    oce_regularizer(loss, atoms, rho, rho / eta, divergence, ball)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    /// η_k = ρ_k/C, compared with R1(C).
    Interp { c: f64 },
    /// η_k = ρ_k², compared with R2.
    Variation,
    /// η_k = √ρ_k, compared with R3.
    Variance,
}

impl Regime {
    pub fn eta_for(&self, rho: f64) -> f64 {
        match self {
            Regime::Interp { c } => rho / c,
            Regime::Variation => rho * rho,
            Regime::Variance => rho.sqrt(),
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "variation" => Ok(Regime::Variation),
            "variance" => Ok(Regime::Variance),
            _ => {
                let c = s
                    .strip_prefix("interp:")
                    .ok_or_else(|| Error::param("regime", format!("unknown regime `{s}`")))?
                    .parse::<f64>()
                    .map_err(|_| Error::param("regime", format!("bad C in `{s}`")))?;
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::param("regime", format!("C must be positive, got {c}")));
                }
                Ok(Regime::Interp { c })
            }
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Interp { c } => write!(f, "interp:{c}"),
            Regime::Variation => write!(f, "variation"),
            Regime::Variance => write!(f, "variance"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: usize,
    pub rho: f64,
    pub eta: f64,
    pub gap: f64,
    pub reg: f64,
    pub rel_err: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub regime: Regime,
    pub rows: Vec<ScalingRow>,
}

impl ScalingReport {
    /// True if rel_err strictly decreases from row `from_k` on.
    pub fn decreasing_from(&self, from_k: usize) -> bool {
        let errs: Vec<f64> = self.rows.iter().filter(|r| r.k >= from_k).map(|r| r.rel_err).collect();
        errs.windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Clone, Debug)]
pub struct StudySetup {
    pub atoms: Vec<Vec<f64>>,
    pub divergence: DivergenceSpec,
    pub norm: Norm,
    pub quadrature: Quadrature,
}

/// For k = 1..=steps sets ρ_k = 2^{-k}, η_k per regime and records
/// |ε − R|/ρ_k.
pub fn run_scaling_study(loss: &TestLoss, regime: Regime, steps: usize, setup: &StudySetup) -> Result<ScalingReport> {
    let ball = UnitBall::new(setup.norm, loss.dim(), setup.quadrature)?;
    let mut rows = Vec::with_capacity(steps);
    for k in 1..=steps {
        let rho = 0.5f64.powi(k as i32);
        let eta = regime.eta_for(rho);
        let gap = regularizer_gap(loss, &setup.atoms, rho, eta, &setup.divergence, &ball)?;
        let (reg, reg_se) = match regime {
            Regime::Interp { c } => {
                let r = oce_regularizer(loss, &setup.atoms, rho, c, &setup.divergence, &ball)?;
                (r.value, r.stderr)
            }
            Regime::Variation => (variation_regularizer(loss, &setup.atoms, rho, setup.norm)?, 0.0),
            Regime::Variance => (
                variance_regularizer(loss, &setup.atoms, rho, eta, &setup.divergence, setup.norm)?,
                0.0,
            ),
        };
        rows.push(ScalingRow {
            k,
            rho,
            eta,
            gap: gap.value,
            reg,
            rel_err: (gap.value - reg).abs() / rho,
            stderr: (gap.stderr * gap.stderr + reg_se * reg_se).sqrt() / rho,
        });
    }
    Ok(ScalingReport { regime, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(norm: Norm, n: usize) -> UnitBall {
        UnitBall::new(norm, 2, Quadrature::Grid { n }).unwrap()
    }

    fn atoms() -> Vec<Vec<f64>> {
        vec![vec![0.3, -0.2]]
    }

    #[test]
    fn test_loss_gradients_match_finite_differences() {
        let mut rng = SeededRng::new(2);
        for name in ["linear", "quadratic", "logsumexp"] {
            let loss = TestLoss::standard(name).unwrap();
            for _ in 0..50 {
                let z = vec![rng.normal(), rng.normal()];
                let g = loss.grad(&z);
                for k in 0..2 {
                    let h = 1e-5;
                    let mut up = z.clone();
                    up[k] += h;
                    let mut down = z.clone();
                    down[k] -= h;
                    let fd = (loss.value(&up) - loss.value(&down)) / (2.0 * h);
                    let err = (fd - g[k]).abs() / fd.abs().max(g[k].abs()).max(1e-3);
                    assert!(err <= 1e-6, "{name}: {err}");
                }
            }
        }
    }

    #[test]
    fn smoothness_bounds_gradient_changes() {
        let mut rng = SeededRng::new(5);
        for name in ["quadratic", "logsumexp"] {
            let loss = TestLoss::standard(name).unwrap();
            for norm in [Norm::L2, Norm::Linf] {
                let s = loss.smoothness(norm);
                for _ in 0..200 {
                    let x = vec![rng.normal(), rng.normal()];
                    let y = vec![rng.normal(), rng.normal()];
                    let dg: Vec<f64> = loss.grad(&x).iter().zip(loss.grad(&y)).map(|(a, b)| a - b).collect();
                    let dx: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                    assert!(norm.dual_of(&dg) <= s * norm.of(&dx) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn constant_loss_has_zero_gap() {
        let loss = TestLoss::Linear { a: vec![0.0, 0.0] };
        let ball = grid(Norm::Linf, 64);
        for spec in [
            DivergenceSpec::kl(),
            DivergenceSpec::quadratic(),
            DivergenceSpec::indicator(0.3).unwrap(),
            DivergenceSpec::absolute(),
            DivergenceSpec::hinge(),
        ] {
            let e = regularizer_gap(&loss, &atoms(), 0.5, 0.1, &spec, &ball).unwrap();
            assert!(e.value.abs() < 1e-12, "{spec}");
            let r1 = oce_regularizer(&loss, &atoms(), 0.5, 4.0, &spec, &ball).unwrap();
            assert_eq!(r1.value, 0.0);
        }
        assert_eq!(variation_regularizer(&loss, &atoms(), 0.5, Norm::L2).unwrap(), 0.0);
        let r3 = variance_regularizer(&loss, &atoms(), 0.5, 0.1, &DivergenceSpec::kl(), Norm::L2).unwrap();
        assert_eq!(r3, 0.0);
    }

    #[test]
    fn linear_gap_approaches_support_function() {
        let loss = TestLoss::Linear { a: vec![0.6, -0.8] };
        let ball = grid(Norm::L2, 1024);
        let e = regularizer_gap(&loss, &atoms(), 1.0, 1e-4, &DivergenceSpec::kl(), &ball).unwrap();
        assert!((e.value - 1.0).abs() <= 0.01, "{}", e.value);
    }

    #[test]
    fn gap_nondecreasing_in_radius() {
        let loss = TestLoss::standard("logsumexp").unwrap();
        let ball = grid(Norm::Linf, 256);
        let mut prev = 0.0;
        for i in 1..=10 {
            let rho = 0.1 * i as f64;
            let e = regularizer_gap(&loss, &atoms(), rho, 0.3, &DivergenceSpec::kl(), &ball).unwrap();
            assert!(e.value >= prev);
            prev = e.value;
        }
    }

    #[test]
    fn gap_sandwich() {
        let loss = TestLoss::standard("quadratic").unwrap();
        let ball = grid(Norm::Linf, 256);
        let z = &atoms()[0];
        let sup = ball
            .map(|b| loss.value(&[z[0] + 0.4 * b[0], z[1] + 0.4 * b[1]]))
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        for eta in [0.01, 0.1, 1.0, 10.0] {
            for spec in [DivergenceSpec::kl(), DivergenceSpec::quadratic()] {
                let e = regularizer_gap(&loss, &atoms(), 0.4, eta, &spec, &ball).unwrap();
                assert!(e.value >= 0.0 && e.value <= sup - loss.value(z) + 1e-12);
            }
        }
    }

    #[test]
    fn r2_examples() {
        let loss = TestLoss::Linear { a: vec![1.0, -0.5] };
        assert!((variation_regularizer(&loss, &atoms(), 0.2, Norm::Linf).unwrap() - 0.2 * 1.5).abs() < 1e-15);
        let quad = TestLoss::standard("quadratic").unwrap();
        let z = atoms()[0].clone();
        // A·z + b by hand
        let g: [f64; 2] = [2.0 * 0.3 + 0.5 * -0.2 + 1.0, 0.5 * 0.3 - 0.2 - 0.5];
        let expected = 0.2 * (g[0] * g[0] + g[1] * g[1]).sqrt();
        assert!((variation_regularizer(&quad, &[z], 0.2, Norm::L2).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn r3_matches_monte_carlo_variance() {
        let a = [0.7, -1.1, 0.4];
        let s = BallSampler::new(Norm::L2, 1.0, 3).unwrap();
        let mut rng = SeededRng::new(13);
        let n = 100_000;
        let proj: Vec<f64> = (0..n).map(|_| dot(&a, &s.offset(&mut rng))).collect();
        let mean = proj.iter().sum::<f64>() / n as f64;
        let var = proj.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1) as f64;
        let fourth = proj.iter().map(|p| (p - mean).powi(4)).sum::<f64>() / n as f64;
        let se = ((fourth - var * var) / n as f64).sqrt();
        let exact = unit_ball_projection_variance(&a, Norm::L2);
        assert!((var - exact).abs() <= 3.0 * se, "{var} vs {exact}");

        let loss = TestLoss::Linear { a: a.to_vec() };
        let z = vec![vec![0.0; 3]];
        let r3 = variance_regularizer(&loss, &z, 0.3, 0.2, &DivergenceSpec::kl(), Norm::L2).unwrap();
        let sq: f64 = a.iter().map(|x| x * x).sum();
        assert!((r3 - 0.09 * sq / (2.0 * 0.2 * 5.0)).abs() < 1e-15);
        let r3q = variance_regularizer(&loss, &z, 0.3, 0.2, &DivergenceSpec::quadratic(), Norm::L2).unwrap();
        assert_eq!(r3, r3q);
        assert!(variance_regularizer(&loss, &z, 0.3, 0.2, &DivergenceSpec::hinge(), Norm::L2).is_err());
    }

    #[test]
    fn r1_interpolates_between_r2_and_r3() {
        let loss = TestLoss::standard("quadratic").unwrap();
        let rho = 0.1;
        for norm in [Norm::Linf, Norm::L2] {
            let ball = grid(norm, 2048);
            let r2 = variation_regularizer(&loss, &atoms(), rho, norm).unwrap();
            let hi = oce_regularizer(&loss, &atoms(), rho, 1e3, &DivergenceSpec::kl(), &ball).unwrap();
            assert!((hi.value - r2).abs() <= 0.02 * r2, "{norm}: {} vs {r2}", hi.value);
            let c = 1e-2;
            let r3 = variance_regularizer(&loss, &atoms(), rho, rho / c, &DivergenceSpec::kl(), norm).unwrap();
            let lo = oce_regularizer(&loss, &atoms(), rho, c, &DivergenceSpec::kl(), &ball).unwrap();
            assert!((lo.value - r3).abs() <= 0.05 * r3, "{norm}: {} vs {r3}", lo.value);
        }
    }

    #[test]
    fn linear_surrogate_is_exact() {
        let loss = TestLoss::Linear { a: vec![1.0, -0.5] };
        let ball = grid(Norm::Linf, 512);
        for spec in [DivergenceSpec::kl(), DivergenceSpec::quadratic()] {
            let e = regularizer_gap(&loss, &atoms(), 0.25, 0.1, &spec, &ball).unwrap();
            let s = surrogate_gap(&loss, &atoms(), 0.25, 0.1, &spec, &ball).unwrap();
            assert!((e.value - s.value).abs() <= 1e-9, "{spec}");
        }
    }

    #[test]
    fn quadratic_surrogate_error_is_second_order() {
        let loss = TestLoss::standard("quadratic").unwrap();
        let ball = grid(Norm::Linf, 512);
        let c = 2.0;
        let mut pts = Vec::new();
        for k in 2..=6 {
            let rho = 0.5f64.powi(k);
            let e = regularizer_gap(&loss, &atoms(), rho, rho / c, &DivergenceSpec::kl(), &ball).unwrap();
            let s = surrogate_gap(&loss, &atoms(), rho, rho / c, &DivergenceSpec::kl(), &ball).unwrap();
            pts.push((rho.ln(), (e.value - s.value).abs().ln()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 2.0).abs() <= 0.15, "slope {slope}");
    }

    #[test]
    fn golden_section_agrees_with_direct_solve() {
        let mut rng = SeededRng::new(4);
        for spec in [DivergenceSpec::kl(), DivergenceSpec::quadratic(), DivergenceSpec::indicator(0.25).unwrap()] {
            let values: Vec<f64> = (0..500).map(|_| rng.normal()).collect();
            let direct = oce(&values, 0.3, &spec, false).unwrap().value;
            let golden = golden_section_oce(&values, 0.3, &spec, -10.0, 10.0);
            assert!((direct - golden).abs() <= 1e-8, "{spec}: {direct} vs {golden}");
        }
    }

    #[test]
    fn monte_carlo_route() {
        assert!(matches!(
            UnitBall::new(Norm::L2, 3, Quadrature::MonteCarlo { samples: 50, seed: 0 }),
            Err(Error::McBudget(50))
        ));
        assert!(UnitBall::new(Norm::L2, 3, Quadrature::Grid { n: 10 }).is_err());
        let loss = TestLoss::Linear { a: vec![0.5, 0.5, -1.0] };
        let ball = UnitBall::new(Norm::L2, 3, Quadrature::auto(3, 1)).unwrap();
        let z = vec![vec![0.0; 3]];
        let e = regularizer_gap(&loss, &z, 0.2, 0.5, &DivergenceSpec::kl(), &ball).unwrap();
        let s = surrogate_gap(&loss, &z, 0.2, 0.5, &DivergenceSpec::kl(), &ball).unwrap();
        assert!(e.stderr > 0.0);
        assert!((e.value - s.value).abs() < 1e-12);
        // against the grid-free small-C expansion ρ²Var/(2η)
        let r3 = variance_regularizer(&loss, &z, 0.2, 0.5, &DivergenceSpec::kl(), Norm::L2).unwrap();
        assert!((e.value - r3).abs() <= 0.1 * r3 + 3.0 * e.stderr);
    }

    #[test]
    fn regime_names() {
        assert_eq!("interp:4".parse::<Regime>().unwrap(), Regime::Interp { c: 4.0 });
        assert_eq!("variation".parse::<Regime>().unwrap(), Regime::Variation);
        assert!("interp:-1".parse::<Regime>().is_err());
        assert_eq!(Regime::Variance.eta_for(0.25), 0.5);
    }
}
