//! Projected SGD over the robust objective, adversarial attacks and
//! misclassification metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::mlmc::{self, EstimatorConfig, RobustObjective, Scheme};
use crate::model::{InputGradient, LabeledPoint, Model, Perturb, SupervisedModel};
use crate::rng::SeededRng;
use crate::sampling::{BallSampler, Norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub iterations: usize,
    pub step: f64,
    /// Radius of the Euclidean ball Θ; `None` leaves θ unconstrained.
    pub projection_radius: Option<f64>,
    pub estimator: EstimatorConfig,
    pub rho: f64,
    pub eta: f64,
    pub norm: Norm,
    pub divergence: DivergenceSpec,
    /// Plain empirical risk minimization: batches of n°_L unperturbed points.
    pub erm: bool,
    pub seed: u64,
    pub keep_trajectory: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            step: 1e-2,
            projection_radius: None,
            estimator: EstimatorConfig::default(),
            rho: 0.1,
            eta: 0.2,
            norm: Norm::L2,
            divergence: DivergenceSpec::kl(),
            erm: false,
            seed: 0,
            keep_trajectory: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::param("T", "must be at least 1"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::param("step", format!("must be positive, got {}", self.step)));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::param("rho", format!("must be positive, got {}", self.rho)));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::param("eta", format!("must be positive, got {}", self.eta)));
        }
        if let Some(r) = self.projection_radius {
            if !(r > 0.0) {
                return Err(Error::param("projection_radius", format!("must be positive, got {r}")));
            }
        }
        self.estimator.validate()
    }

    pub fn objective(&self, dim: usize) -> Result<RobustObjective> {
        RobustObjective::new(BallSampler::new(self.norm, self.rho, dim)?, self.divergence, self.eta)
    }
}

/// Hyper-parameter scalings in the target accuracy δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// n°=1, L=⌈log₂(8/δ)⌉, T=⌈δ⁻²⌉, τ=c·δ.
    SgConvex,
    /// n°=1, L=⌈log₂(8/δ)⌉, T=⌈log²(1/δ)/δ²⌉, τ=c·δ/log²(1/δ).
    RtMlmcConvex,
    /// n°=⌈δ⁻²⌉, L=⌈log₂(δ⁻²)⌉, T=⌈δ⁻²⌉, τ=c.
    Nonconvex,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "sg-convex" => Ok(Preset::SgConvex),
            "rtmlmc-convex" | "rt-mlmc-convex" => Ok(Preset::RtMlmcConvex),
            "nonconvex" => Ok(Preset::Nonconvex),
            other => Err(Error::param("preset", format!("unknown preset `{other}`"))),
        }
    }
}

impl Preset {
    /// Fills iterations, step and the estimator shape of `config`.
    pub fn apply(&self, config: &mut TrainConfig, delta: f64, base_step: f64) -> Result<()> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
        }
        let log_inv = (1.0 / delta).ln();
        let est = &mut config.estimator;
        match self {
            Preset::SgConvex => {
                est.scheme = Scheme::Sg;
                est.n_outer = 1;
                est.max_level = (8.0 / delta).log2().ceil() as usize;
                config.iterations = (1.0 / (delta * delta)).ceil() as usize;
                config.step = base_step * delta;
            }
            Preset::RtMlmcConvex => {
                est.scheme = Scheme::RtMlmc;
                est.n_outer = 1;
                est.max_level = (8.0 / delta).log2().ceil() as usize;
                config.iterations = (log_inv * log_inv / (delta * delta)).ceil() as usize;
                config.step = base_step * delta / (log_inv * log_inv).max(1.0);
            }
            Preset::Nonconvex => {
                est.scheme = Scheme::RtMlmc;
                est.n_outer = (1.0 / (delta * delta)).ceil() as usize;
                est.max_level = (1.0 / (delta * delta)).log2().ceil() as usize;
                config.iterations = (1.0 / (delta * delta)).ceil() as usize;
                config.step = base_step;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub objective_estimate: f64,
    pub grad_norm: f64,
    pub samples_cumulative: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub theta: Vec<f64>,
    /// (1/T) Σ θ_t, the convex-regime output.
    pub averaged: Vec<f64>,
    /// θ_t at a uniformly drawn t, the nonconvex-regime output.
    pub random_iterate: Vec<f64>,
    pub random_index: usize,
    pub records: Vec<IterationRecord>,
    pub trajectory: Vec<Vec<f64>>,
}

fn project_params(theta: &mut [f64], radius: Option<f64>) {
    if let Some(r) = radius {
        let zero = vec![0.0; theta.len()];
        Norm::L2.project(&zero, r, theta);
    }
}

/// Mean loss and gradient over n°_L points drawn with replacement.
fn erm_estimate<M: Model>(
    model: &M,
    theta: &[f64],
    batch: usize,
    data: &[M::Point],
    rng: &mut SeededRng,
) -> (Vec<f64>, f64) {
    let mut g = vec![0.0; model.num_params()];
    let mut scratch = vec![0.0; g.len()];
    let mut value = 0.0;
    for _ in 0..batch {
        let z = &data[rng.index(data.len())];
        value += model.loss_and_grad(theta, z, &mut scratch);
        for (a, b) in g.iter_mut().zip(&scratch) {
            *a += b;
        }
    }
    let n = batch as f64;
    g.iter_mut().for_each(|v| *v /= n);
    (g, value / n)
}

/// θ_{t+1} = Proj_Θ(θ_t − τ·V(θ_t)) for t = 1..T.
pub fn projected_sgd<M: Model>(
    model: &M,
    data: &[M::Point],
    theta0: &[f64],
    config: &TrainConfig,
) -> Result<TrainResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if theta0.len() != model.num_params() {
        return Err(Error::Dimension {
            expected: model.num_params(),
            got: theta0.len(),
        });
    }
    let dim = data[0].features().len();
    let objective = config.objective(dim)?;
    let mut rng = SeededRng::new(config.seed);
    let random_index = rng.index(config.iterations) + 1;

    let mut theta = theta0.to_vec();
    project_params(&mut theta, config.projection_radius);
    let mut averaged = vec![0.0; theta.len()];
    let mut random_iterate = theta.clone();
    let mut records = Vec::with_capacity(config.iterations);
    let mut trajectory = Vec::new();
    let mut samples = 0usize;

    for t in 1..=config.iterations {
        if config.keep_trajectory {
            trajectory.push(theta.clone());
        }
        if t == random_index {
            random_iterate.clone_from(&theta);
        }
        for (a, b) in averaged.iter_mut().zip(&theta) {
            *a += b;
        }
        let (grad, value) = if config.erm {
            samples += config.estimator.n_outer;
            erm_estimate(model, &theta, config.estimator.n_outer, data, &mut rng)
        } else {
            let est = mlmc::estimate(model, &theta, &config.estimator, &objective, data, &mut rng)?;
            samples += est.samples_drawn;
            (est.vector, est.value)
        };
        let norm = Norm::L2.of(&grad);
        if !norm.is_finite() {
            return Err(Error::NonFiniteGradient { iteration: t, norm });
        }
        records.push(IterationRecord {
            iter: t,
            objective_estimate: value,
            grad_norm: norm,
            samples_cumulative: samples,
        });
        for (p, g) in theta.iter_mut().zip(&grad) {
            *p -= config.step * g;
        }
        project_params(&mut theta, config.projection_radius);
    }
    let t = config.iterations as f64;
    averaged.iter_mut().for_each(|v| *v /= t);
    Ok(TrainResult {
        theta,
        averaged,
        random_iterate,
        random_index,
        records,
        trajectory,
    })
}

/// Deterministic estimate of the level-L robust objective: per data point,
/// `trees` independent level-L trees with streams fixed by `seed`, so two
/// parameter vectors are compared on common random numbers.
pub fn robust_objective_value<M: Model>(
    model: &M,
    theta: &[f64],
    data: &[M::Point],
    objective: &RobustObjective,
    level: usize,
    trees: usize,
    seed: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let per_point: Result<Vec<f64>> = data
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let mut rng = SeededRng::stream(seed, i as u64);
            let mut acc = 0.0;
            for _ in 0..trees {
                let tree = mlmc::sample_tree(&objective.sampler, std::slice::from_ref(z), level, &mut rng)?;
                let (_, v) = mlmc::grad_hat_r(model, theta, &tree.children, objective.eta, &objective.divergence, 1e-10, true)?;
                acc += v;
            }
            Ok(acc / trees as f64)
        })
        .collect();
    Ok(per_point?.iter().sum::<f64>() / data.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    Pgm,
    WhiteNoise,
}

impl std::str::FromStr for AttackKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pgm" | "pgd" => Ok(AttackKind::Pgm),
            "white-noise" | "noise" => Ok(AttackKind::WhiteNoise),
            other => Err(Error::param("attack", format!("unknown attack `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub norm: Norm,
    pub epsilon: f64,
    pub steps: usize,
    pub step_size: f64,
    pub kind: AttackKind,
}

impl AttackConfig {
    pub fn pgm(norm: Norm, epsilon: f64) -> Self {
        Self {
            norm,
            epsilon,
            steps: 15,
            step_size: 0.1,
            kind: AttackKind::Pgm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::param("epsilon", format!("must be nonnegative, got {}", self.epsilon)));
        }
        if self.kind == AttackKind::Pgm && self.steps == 0 {
            return Err(Error::param("steps", "PGM needs at least one step"));
        }
        Ok(())
    }
}

/// Projected gradient ascent on the input inside B_ε(z₀).
pub fn pgm_attack<M: InputGradient>(model: &M, theta: &[f64], point: &M::Point, attack: &AttackConfig) -> M::Point {
    if attack.epsilon == 0.0 {
        return point.clone();
    }
    let origin = point.features().to_vec();
    let mut current = point.clone();
    for _ in 0..attack.steps {
        let g = model.input_grad(theta, &current);
        let mut x = current.features().to_vec();
        match attack.norm {
            Norm::Linf => {
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi += attack.step_size * if *gi > 0.0 { 1.0 } else if *gi < 0.0 { -1.0 } else { 0.0 };
                }
            }
            Norm::L2 => {
                let n = Norm::L2.of(&g);
                if n > 0.0 {
                    for (xi, gi) in x.iter_mut().zip(&g) {
                        *xi += attack.step_size * gi / n;
                    }
                }
            }
        }
        attack.norm.project(&origin, attack.epsilon, &mut x);
        current = current.with_features(x);
    }
    current
}

/// Adds a uniform sample from the ε-ball.
pub fn white_noise_attack<P: Perturb>(point: &P, attack: &AttackConfig, rng: &mut SeededRng) -> P {
    if attack.epsilon == 0.0 {
        return point.clone();
    }
    let x = point.features();
    let sampler = BallSampler {
        norm: attack.norm,
        rho: attack.epsilon,
        dim: x.len(),
    };
    point.with_features(sampler.sample_around(x, rng))
}

/// Fraction of points whose (attacked) prediction disagrees with the label.
pub fn evaluate(
    model: &SupervisedModel,
    theta: &[f64],
    data: &[LabeledPoint],
    attack: Option<&AttackConfig>,
    seed: u64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if let Some(a) = attack {
        a.validate()?;
    }
    let wrong: usize = data
        .par_iter()
        .enumerate()
        .map(|(i, z)| {
            let attacked = match attack {
                None => z.clone(),
                Some(a) if a.kind == AttackKind::Pgm => pgm_attack(model, theta, z, a),
                Some(a) => white_noise_attack(z, a, &mut SeededRng::stream(seed, i as u64)),
            };
            usize::from(model.classify(theta, &attacked.x) != z.y)
        })
        .sum();
    Ok(wrong as f64 / data.len() as f64)
}
