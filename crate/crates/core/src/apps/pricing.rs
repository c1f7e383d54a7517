//! Contextual pricing with a random-feature linear decision rule.
//!
//! A covariate x ∈ ℝ¹⁰ shifts the demand coefficients
//! z = (tanh(3β₁ᵀx), exp(−2β₂ᵀx)) + N(0, I₂); the price is w = θᵀg(x) with
//! g(x) = (cos(ω_iᵀx + b_i))_{i≤100}, and the loss is the negative revenue
//! Ψ(w, z) = −w·(z₁w + z₂).
//!
//! Training data holds M covariates with m conditional draws each. Because Ψ
//! is affine in z, the inner loss at a perturbed covariate only needs the
//! per-covariate sample mean z̄. θ is kept in a Euclidean ball of radius r,
//! which bounds |w| ≤ 10r since ‖g‖₂ ≤ 10; without the bound the revenue is
//! unbounded whenever E[z₁|x] > 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::mlmc::{EstimatorConfig, Scheme};
use crate::model::{InputGradient, Model, Perturb};
use crate::rng::{derive_seed, SeededRng};
use crate::sampling::Norm;
use crate::train::{projected_sgd, TrainConfig};

pub const COVARIATE_DIM: usize = 10;
pub const FEATURES: usize = 100;

/// A covariate with the mean of its conditional samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingPoint {
    pub x: Vec<f64>,
    pub zbar: [f64; 2],
}

impl Perturb for PricingPoint {
    fn features(&self) -> &[f64] {
        &self.x
    }

    fn with_features(&self, features: Vec<f64>) -> Self {
        Self {
            x: features,
            zbar: self.zbar,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingModel {
    /// ω_i stored row-major, FEATURES × COVARIATE_DIM.
    pub omega: Vec<f64>,
    pub offset: Vec<f64>,
}

impl PricingModel {
    pub fn features(&self, x: &[f64]) -> Vec<f64> {
        self.omega
            .chunks(COVARIATE_DIM)
            .zip(&self.offset)
            .map(|(w, b)| (w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b).cos())
            .collect()
    }

    pub fn price(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.features(x).iter().zip(theta).map(|(g, t)| g * t).sum()
    }
}

/// Ψ(w, z) = −w·(z₁w + z₂).
pub fn negative_revenue(w: f64, z: [f64; 2]) -> f64 {
    -w * (z[0] * w + z[1])
}

impl Model for PricingModel {
    type Point = PricingPoint;

    fn num_params(&self) -> usize {
        FEATURES
    }

    fn loss(&self, theta: &[f64], point: &PricingPoint) -> f64 {
        negative_revenue(self.price(theta, &point.x), point.zbar)
    }

    fn loss_and_grad(&self, theta: &[f64], point: &PricingPoint, grad: &mut [f64]) -> f64 {
        let g = self.features(&point.x);
        let w: f64 = g.iter().zip(theta).map(|(a, b)| a * b).sum();
        let dw = -2.0 * point.zbar[0] * w - point.zbar[1];
        for (o, gi) in grad.iter_mut().zip(&g) {
            *o = dw * gi;
        }
        negative_revenue(w, point.zbar)
    }
}

impl InputGradient for PricingModel {
    fn input_grad(&self, theta: &[f64], point: &PricingPoint) -> Vec<f64> {
        let x = &point.x;
        let mut w = 0.0;
        let mut dw_dx = vec![0.0; COVARIATE_DIM];
        for ((om, b), t) in self.omega.chunks(COVARIATE_DIM).zip(&self.offset).zip(theta) {
            let arg = om.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b;
            w += t * arg.cos();
            let s = -t * arg.sin();
            for (d, o) in dw_dx.iter_mut().zip(om) {
                *d += s * o;
            }
        }
        let dw = -2.0 * point.zbar[0] * w - point.zbar[1];
        dw_dx.iter_mut().for_each(|d| *d *= dw);
        dw_dx
    }
}

/// One draw of the data-generating process plus a training sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingInstance {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub model: PricingModel,
    pub train: Vec<PricingPoint>,
    pub seed: u64,
}

impl PricingInstance {
    pub fn generate(seed: u64, covariates: usize, samples_per_covariate: usize) -> Result<Self> {
        if covariates == 0 || samples_per_covariate == 0 {
            return Err(Error::param("M", "M and m must be at least 1"));
        }
        let mut rng = SeededRng::new(seed);
        let beta1: Vec<f64> = (0..COVARIATE_DIM).map(|_| rng.uniform_range(-0.1, 0.1)).collect();
        let beta2: Vec<f64> = (0..COVARIATE_DIM).map(|_| rng.uniform_range(-0.1, 0.1)).collect();
        let omega: Vec<f64> = (0..FEATURES * COVARIATE_DIM).map(|_| rng.normal()).collect();
        let offset: Vec<f64> = (0..FEATURES)
            .map(|_| rng.uniform_range(0.0, 2.0 * std::f64::consts::PI))
            .collect();
        let mut inst = Self {
            beta1,
            beta2,
            model: PricingModel { omega, offset },
            train: Vec::with_capacity(covariates),
            seed,
        };
        for _ in 0..covariates {
            let x: Vec<f64> = (0..COVARIATE_DIM).map(|_| rng.normal()).collect();
            let mean = inst.conditional_mean(&x);
            let mut zbar = [0.0; 2];
            for _ in 0..samples_per_covariate {
                zbar[0] += mean[0] + rng.normal();
                zbar[1] += mean[1] + rng.normal();
            }
            let m = samples_per_covariate as f64;
            inst.train.push(PricingPoint {
                x,
                zbar: [zbar[0] / m, zbar[1] / m],
            });
        }
        Ok(inst)
    }

    /// E[z | x] = (tanh(3β₁ᵀx), exp(−2β₂ᵀx)).
    pub fn conditional_mean(&self, x: &[f64]) -> [f64; 2] {
        let d1: f64 = self.beta1.iter().zip(x).map(|(a, b)| a * b).sum();
        let d2: f64 = self.beta2.iter().zip(x).map(|(a, b)| a * b).sum();
        [(3.0 * d1).tanh(), (-2.0 * d2).exp()]
    }
}

/// min over |w| ≤ bound of −w(z₁w + z₂).
pub fn best_revenue_loss(z: [f64; 2], bound: f64) -> f64 {
    let mut best = negative_revenue(bound, z).min(negative_revenue(-bound, z));
    if z[0] < 0.0 {
        let w = (-z[1] / (2.0 * z[0])).clamp(-bound, bound);
        best = best.min(negative_revenue(w, z));
    }
    best
}

/// Ground-truth risks R(θ) for several decisions and the benchmark R*.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub risks: Vec<f64>,
    /// Standard error of R(θ) − R* for each decision.
    pub gap_stderr: Vec<f64>,
    pub optimum: f64,
}

/// Expected negative revenue under fresh covariates, using exact conditional
/// means; all decisions share the same covariate draws.
pub fn ground_truth(
    instance: &PricingInstance,
    thetas: &[&[f64]],
    price_bound: f64,
    samples: usize,
    seed: u64,
) -> Result<RiskReport> {
    if samples < 2 {
        return Err(Error::McBudget(samples));
    }
    let k = thetas.len();
    // per covariate: loss of each θ and the optimum
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::stream(seed, i as u64);
            let x: Vec<f64> = (0..COVARIATE_DIM).map(|_| rng.normal()).collect();
            let z = instance.conditional_mean(&x);
            let g = instance.model.features(&x);
            let mut row = Vec::with_capacity(k + 1);
            for t in thetas {
                let w: f64 = g.iter().zip(t.iter()).map(|(a, b)| a * b).sum();
                row.push(negative_revenue(w, z));
            }
            row.push(best_revenue_loss(z, price_bound));
            row
        })
        .collect();
    let n = samples as f64;
    let optimum = rows.iter().map(|r| r[k]).sum::<f64>() / n;
    let mut risks = vec![0.0; k];
    let mut gap_stderr = vec![0.0; k];
    for j in 0..k {
        let gaps: Vec<f64> = rows.iter().map(|r| r[j] - r[k]).collect();
        let mean = gaps.iter().sum::<f64>() / n;
        let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0);
        risks[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        gap_stderr[j] = (var / n).sqrt();
    }
    Ok(RiskReport {
        risks,
        gap_stderr,
        optimum,
    })
}

/// J(θ) = 1 − (R(θ) − R*)/(R(θ_ERM) − R*); `None` when the ERM gap is within
/// three standard errors of zero.
pub fn improvement(r_theta: f64, r_erm: f64, r_star: f64, erm_gap_stderr: f64) -> Option<f64> {
    let denom = r_erm - r_star;
    if denom.abs() <= 3.0 * erm_gap_stderr || denom == 0.0 {
        None
    } else {
        Some(1.0 - (r_theta - r_star) / denom)
    }
}

/// One-step gradient-ascent surrogate for the unregularized worst case:
/// the parameter gradient is taken at x̂ + ρ·∇ₓℓ/‖∇ₓℓ‖₂.
pub struct FgmModel<'a> {
    pub inner: &'a PricingModel,
    pub rho: f64,
}

impl FgmModel<'_> {
    fn attacked(&self, theta: &[f64], point: &PricingPoint) -> PricingPoint {
        let g = self.inner.input_grad(theta, point);
        let n = Norm::L2.of(&g);
        if n == 0.0 {
            return point.clone();
        }
        point.with_features(point.x.iter().zip(&g).map(|(x, d)| x + self.rho * d / n).collect())
    }
}

impl Model for FgmModel<'_> {
    type Point = PricingPoint;

    fn num_params(&self) -> usize {
        FEATURES
    }

    fn loss(&self, theta: &[f64], point: &PricingPoint) -> f64 {
        self.inner.loss(theta, &self.attacked(theta, point))
    }

    fn loss_and_grad(&self, theta: &[f64], point: &PricingPoint, grad: &mut [f64]) -> f64 {
        let p = self.attacked(theta, point);
        self.inner.loss_and_grad(theta, &p, grad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingConfig {
    pub rho: f64,
    pub eta: f64,
    /// Radius of the θ ball.
    pub theta_radius: f64,
    pub iterations: usize,
    pub step: f64,
    pub max_level: usize,
    pub n_outer: usize,
    pub ground_truth_samples: usize,
    pub with_fgm: bool,
}

impl Default for PricingConfig {
    fn default() -> Self {
        Self {
            rho: 0.45,
            eta: 0.9,
            theta_radius: 1.0,
            iterations: 1000,
            step: 0.02,
            max_level: 4,
            n_outer: 8,
            ground_truth_samples: 100_000,
            with_fgm: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingOutcome {
    pub seed: u64,
    pub risk_star: f64,
    pub risk_erm: f64,
    pub risk_reg: f64,
    pub risk_fgm: Option<f64>,
    pub j_reg: Option<f64>,
    pub j_fgm: Option<f64>,
    pub theta_reg: Vec<f64>,
    pub theta_erm: Vec<f64>,
}

fn train_config(cfg: &PricingConfig, seed: u64, erm: bool) -> TrainConfig {
    TrainConfig {
        iterations: cfg.iterations,
        step: cfg.step,
        projection_radius: Some(cfg.theta_radius),
        estimator: EstimatorConfig {
            max_level: cfg.max_level,
            n_outer: cfg.n_outer,
            inner_eps: 1e-8,
            scheme: Scheme::RtMlmc,
            entropic_fast_path: true,
        },
        rho: cfg.rho,
        eta: cfg.eta,
        norm: Norm::L2,
        divergence: DivergenceSpec::kl(),
        erm,
        seed,
        keep_trajectory: false,
    }
}

/// Trains the KL-regularized, ERM and (optionally) one-step-attack decisions
/// on `instance` and scores them on fresh ground truth.
pub fn solve_pricing(instance: &PricingInstance, cfg: &PricingConfig) -> Result<PricingOutcome> {
    if !(cfg.theta_radius > 0.0) {
        return Err(Error::param("theta_radius", "must be positive"));
    }
    let model = &instance.model;
    let theta0 = vec![0.0; FEATURES];
    let seed = instance.seed;
    let reg = projected_sgd(model, &instance.train, &theta0, &train_config(cfg, derive_seed(seed, 1), false))?;
    let erm = projected_sgd(model, &instance.train, &theta0, &train_config(cfg, derive_seed(seed, 2), true))?;
    let fgm = if cfg.with_fgm {
        let m = FgmModel {
            inner: model,
            rho: cfg.rho,
        };
        Some(projected_sgd(&m, &instance.train, &theta0, &train_config(cfg, derive_seed(seed, 3), true))?)
    } else {
        None
    };
    let mut thetas: Vec<&[f64]> = vec![&reg.averaged, &erm.averaged];
    if let Some(f) = &fgm {
        thetas.push(&f.averaged);
    }
    let bound = cfg.theta_radius * (FEATURES as f64).sqrt();
    let report = ground_truth(instance, &thetas, bound, cfg.ground_truth_samples, derive_seed(seed, 4))?;
    let (r_reg, r_erm) = (report.risks[0], report.risks[1]);
    let se = report.gap_stderr[1];
    let r_fgm = fgm.as_ref().map(|_| report.risks[2]);
    Ok(PricingOutcome {
        seed,
        risk_star: report.optimum,
        risk_erm: r_erm,
        risk_reg: r_reg,
        risk_fgm: r_fgm,
        j_reg: improvement(r_reg, r_erm, report.optimum, se),
        j_fgm: r_fgm.and_then(|r| improvement(r, r_erm, report.optimum, se)),
        theta_reg: reg.averaged,
        theta_erm: erm.averaged,
    })
}

/// Runs `trials` independent instances with seeds derived from `seed`.
pub fn run_pricing_trials(
    covariates: usize,
    samples_per_covariate: usize,
    trials: usize,
    seed: u64,
    cfg: &PricingConfig,
) -> Result<Vec<PricingOutcome>> {
    (0..trials)
        .map(|t| {
            let inst = PricingInstance::generate(derive_seed(seed, t as u64), covariates, samples_per_covariate)?;
            solve_pricing(&inst, cfg)
        })
        .collect()
}
