//! Biased stochastic gradients of the level-ℓ robust objective.
//!
//! A draw picks a root point from the data, perturbs it into 2^ℓ children
//! uniformly on the ball, solves the inner problem over the children and
//! returns the γ-weighted parameter gradient. The SG scheme averages such
//! draws at the top level L. The RT-MLMC scheme samples a random level from a
//! truncated geometric law and returns the importance-weighted difference
//!
//! G^ℓ = ĝ(children) − ½ĝ(first half) − ½ĝ(second half),    G⁰ = ĝ,
//!
//! which has the same expectation as the SG draw at a cost of O(L) samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{DivergenceKind, DivergenceSpec};
use crate::error::{Error, Result};
use crate::inner::{self, InnerProblem};
use crate::model::{Model, Perturb};
use crate::rng::SeededRng;
use crate::sampling::BallSampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sg,
    RtMlmc,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sg" => Ok(Scheme::Sg),
            "rtmlmc" | "mlmc" => Ok(Scheme::RtMlmc),
            other => Err(Error::param("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Sg => "sg",
            Scheme::RtMlmc => "rtmlmc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub max_level: usize,
    pub n_outer: usize,
    pub inner_eps: f64,
    pub scheme: Scheme,
    /// Use the softmax closed form for KL instead of bisection.
    pub entropic_fast_path: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            max_level: 5,
            n_outer: 1,
            inner_eps: 1e-8,
            scheme: Scheme::RtMlmc,
            entropic_fast_path: true,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_outer == 0 {
            return Err(Error::param("n_outer", "must be at least 1"));
        }
        if !(self.inner_eps > 0.0) {
            return Err(Error::param("inner_eps", format!("must be positive, got {}", self.inner_eps)));
        }
        if self.max_level > 30 {
            return Err(Error::param("L", format!("{} is too deep (max 30)", self.max_level)));
        }
        Ok(())
    }
}

/// The regularized objective an estimator targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustObjective {
    pub sampler: BallSampler,
    pub divergence: DivergenceSpec,
    pub eta: f64,
}

impl RobustObjective {
    pub fn new(sampler: BallSampler, divergence: DivergenceSpec, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::param("eta", format!("must be positive and finite, got {eta}")));
        }
        Ok(Self {
            sampler,
            divergence,
            eta,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleTree<P> {
    pub root: P,
    pub children: Vec<P>,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    /// The matching estimate of the objective value.
    pub value: f64,
    pub samples_drawn: usize,
    pub inner_queries: usize,
    pub levels_used: Vec<usize>,
}

/// Draws a root from `data` and 2^level children uniformly around it.
pub fn sample_tree<P: Perturb>(
    sampler: &BallSampler,
    data: &[P],
    level: usize,
    rng: &mut SeededRng,
) -> Result<SampleTree<P>> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    let root = data[rng.index(data.len())].clone();
    let center = root.features();
    if center.len() != sampler.dim {
        return Err(Error::Dimension {
            expected: sampler.dim,
            got: center.len(),
        });
    }
    let children = (0..1usize << level)
        .map(|_| root.with_features(sampler.sample_around(center, rng)))
        .collect();
    Ok(SampleTree { root, children, level })
}

/// P(L̂ = ℓ) = 2^{-ℓ} / (2 − 2^{-L}) for ℓ = 0..=L.
pub fn level_probabilities(max_level: usize) -> Vec<f64> {
    let z = 2.0 - 0.5f64.powi(max_level as i32);
    (0..=max_level).map(|l| 0.5f64.powi(l as i32) / z).collect()
}

/// Σ_ℓ P(ℓ)·2^ℓ = (L+1)/(2 − 2^{-L}).
pub fn expected_samples_per_draw(max_level: usize) -> f64 {
    (max_level as f64 + 1.0) / (2.0 - 0.5f64.powi(max_level as i32))
}

pub fn sample_level(probs: &[f64], rng: &mut SeededRng) -> usize {
    let u = rng.uniform();
    let mut acc = 0.0;
    for (l, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return l;
        }
    }
    probs.len() - 1
}

/// Inner value and γ-weighted gradient Σ γ_i ∇_θ f_θ(z'_i) over `points`.
///
/// Returns `(gradient, value)`. With `fast_path` the KL case skips the
/// bisection and uses the softmax weights directly.
pub fn grad_hat_r<M: Model>(
    model: &M,
    theta: &[f64],
    points: &[M::Point],
    eta: f64,
    divergence: &DivergenceSpec,
    inner_eps: f64,
    fast_path: bool,
) -> Result<(Vec<f64>, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    let p = model.num_params();
    let mut grads = vec![0.0; p * points.len()];
    let losses: Vec<f64> = points
        .iter()
        .zip(grads.chunks_mut(p))
        .map(|(z, g)| model.loss_and_grad(theta, z, g))
        .collect();
    let (gamma, value) = if points.len() == 1 {
        (vec![1.0], losses[0])
    } else if divergence.kind == DivergenceKind::Kl && fast_path {
        let (value, gamma) = inner::log_mean_exp(&losses, eta);
        (gamma, value)
    } else {
        let problem = InnerProblem::new(losses, eta, *divergence)?;
        let sol = if divergence.kind == DivergenceKind::Kl {
            inner::solve_bisection(&problem, inner_eps)?
        } else {
            inner::solve(&problem, inner_eps)?
        };
        (sol.gamma, sol.value)
    };
    let mut out = vec![0.0; p];
    for (w, g) in gamma.iter().zip(grads.chunks(p)) {
        if *w != 0.0 {
            for (o, gi) in out.iter_mut().zip(g) {
                *o += w * gi;
            }
        }
    }
    Ok((out, value))
}

/// One level term and its value: G^ℓ for ℓ ≥ 1, ĝ for ℓ = 0.
fn level_term<M: Model>(
    model: &M,
    theta: &[f64],
    tree: &SampleTree<M::Point>,
    objective: &RobustObjective,
    config: &EstimatorConfig,
    antithetic: bool,
) -> Result<(Vec<f64>, f64, usize)> {
    let solve = |pts: &[M::Point]| {
        grad_hat_r(
            model,
            theta,
            pts,
            objective.eta,
            &objective.divergence,
            config.inner_eps,
            config.entropic_fast_path,
        )
    };
    let (mut g, mut v) = solve(&tree.children)?;
    if !antithetic || tree.level == 0 {
        return Ok((g, v, 1));
    }
    let half = tree.children.len() / 2;
    let (g1, v1) = solve(&tree.children[..half])?;
    let (g2, v2) = solve(&tree.children[half..])?;
    for ((a, b), c) in g.iter_mut().zip(&g1).zip(&g2) {
        *a -= 0.5 * (b + c);
    }
    v -= 0.5 * (v1 + v2);
    Ok((g, v, 3))
}

struct Draw {
    vector: Vec<f64>,
    value: f64,
    samples: usize,
    queries: usize,
    level: usize,
}

fn assemble<M, F>(
    model: &M,
    config: &EstimatorConfig,
    rng: &mut SeededRng,
    draw: F,
) -> Result<GradientEstimate>
where
    M: Model,
    F: Fn(&mut SeededRng) -> Result<Draw> + Sync,
{
    config.validate()?;
    let base = rng.next_u64();
    let draws: Vec<Result<Draw>> = (0..config.n_outer)
        .into_par_iter()
        .map(|i| draw(&mut SeededRng::stream(base, i as u64)))
        .collect();
    let n = config.n_outer as f64;
    let mut est = GradientEstimate {
        vector: vec![0.0; model.num_params()],
        value: 0.0,
        samples_drawn: 0,
        inner_queries: 0,
        levels_used: Vec::with_capacity(config.n_outer),
    };
    for d in draws {
        let d = d?;
        for (a, b) in est.vector.iter_mut().zip(&d.vector) {
            *a += b;
        }
        est.value += d.value;
        est.samples_drawn += d.samples;
        est.inner_queries += d.queries;
        est.levels_used.push(d.level);
    }
    est.vector.iter_mut().for_each(|v| *v /= n);
    est.value /= n;
    Ok(est)
}

/// Average of n°_L independent top-level draws.
pub fn sg_estimator<M: Model>(
    model: &M,
    theta: &[f64],
    config: &EstimatorConfig,
    objective: &RobustObjective,
    data: &[M::Point],
    rng: &mut SeededRng,
) -> Result<GradientEstimate> {
    let level = config.max_level;
    assemble(model, config, rng, |r| {
        let tree = sample_tree(&objective.sampler, data, level, r)?;
        let (vector, value, queries) = level_term(model, theta, &tree, objective, config, false)?;
        Ok(Draw {
            vector,
            value,
            samples: tree.children.len(),
            queries,
            level,
        })
    })
}

/// Average of n°_L importance-weighted random-level differences.
pub fn rt_mlmc_estimator<M: Model>(
    model: &M,
    theta: &[f64],
    config: &EstimatorConfig,
    objective: &RobustObjective,
    data: &[M::Point],
    rng: &mut SeededRng,
) -> Result<GradientEstimate> {
    let probs = level_probabilities(config.max_level);
    assemble(model, config, rng, |r| {
        let level = sample_level(&probs, r);
        let tree = sample_tree(&objective.sampler, data, level, r)?;
        let (mut vector, mut value, queries) = level_term(model, theta, &tree, objective, config, true)?;
        let w = 1.0 / probs[level];
        vector.iter_mut().for_each(|v| *v *= w);
        value *= w;
        Ok(Draw {
            vector,
            value,
            samples: tree.children.len(),
            queries,
            level,
        })
    })
}

/// Dispatches on `config.scheme`.
pub fn estimate<M: Model>(
    model: &M,
    theta: &[f64],
    config: &EstimatorConfig,
    objective: &RobustObjective,
    data: &[M::Point],
    rng: &mut SeededRng,
) -> Result<GradientEstimate> {
    match config.scheme {
        Scheme::Sg => sg_estimator(model, theta, config, objective, data, rng),
        Scheme::RtMlmc => rt_mlmc_estimator(model, theta, config, objective, data, rng),
    }
}

/// ∇U over a window: softmax(f/η)-weighted gradients.
fn entropic_window<M: Model>(model: &M, theta: &[f64], points: &[M::Point], eta: f64) -> Vec<f64> {
    let p = model.num_params();
    let mut grads = vec![0.0; p * points.len()];
    let losses: Vec<f64> = points
        .iter()
        .zip(grads.chunks_mut(p))
        .map(|(z, g)| model.loss_and_grad(theta, z, g))
        .collect();
    let (_, w) = inner::log_mean_exp(&losses, eta);
    let mut out = vec![0.0; p];
    for (wi, g) in w.iter().zip(grads.chunks(p)) {
        for (o, gi) in out.iter_mut().zip(g) {
            *o += wi * gi;
        }
    }
    out
}

/// The KL level term ∇U_{1:2^ℓ} − ½∇U_{1:2^{ℓ−1}} − ½∇U_{2^{ℓ−1}+1:2^ℓ}.
pub fn entropic_level_term<M: Model>(
    model: &M,
    theta: &[f64],
    tree: &SampleTree<M::Point>,
    eta: f64,
) -> Vec<f64> {
    let mut g = entropic_window(model, theta, &tree.children, eta);
    if tree.level == 0 {
        return g;
    }
    let half = tree.children.len() / 2;
    let a = entropic_window(model, theta, &tree.children[..half], eta);
    let b = entropic_window(model, theta, &tree.children[half..], eta);
    for ((gi, ai), bi) in g.iter_mut().zip(&a).zip(&b) {
        *gi -= 0.5 * (ai + bi);
    }
    g
}

/// Moments of single-draw estimates, accumulated over independent streams.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawStatistics {
    pub draws: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// E‖V‖².
    pub second_moment: f64,
    pub samples_per_draw: f64,
    pub inner_queries_per_draw: f64,
    /// Draw count per level (a single entry at L for SG).
    pub level_counts: Vec<usize>,
}

/// Runs `draws` single-draw estimators (n° = 1), draw i on stream (seed, i).
pub fn draw_statistics<M: Model>(
    model: &M,
    theta: &[f64],
    config: &EstimatorConfig,
    objective: &RobustObjective,
    data: &[M::Point],
    draws: usize,
    seed: u64,
) -> Result<DrawStatistics> {
    if draws < 2 {
        return Err(Error::McBudget(draws));
    }
    let single = EstimatorConfig { n_outer: 1, ..*config };
    let all: Vec<GradientEstimate> = (0..draws)
        .into_par_iter()
        .map(|i| estimate(model, theta, &single, objective, data, &mut SeededRng::stream(seed, i as u64)))
        .collect::<Result<_>>()?;
    let p = model.num_params();
    let n = draws as f64;
    let mut mean = vec![0.0; p];
    let mut second_moment = 0.0;
    let mut level_counts = vec![0; config.max_level + 1];
    let (mut samples, mut queries) = (0usize, 0usize);
    for e in &all {
        for (m, v) in mean.iter_mut().zip(&e.vector) {
            *m += v;
        }
        second_moment += e.vector.iter().map(|v| v * v).sum::<f64>();
        samples += e.samples_drawn;
        queries += e.inner_queries;
        level_counts[e.levels_used[0]] += 1;
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; p];
    for e in &all {
        for ((s, v), m) in var.iter_mut().zip(&e.vector).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let stderr = var.iter().map(|s| (s / (n - 1.0) / n).sqrt()).collect();
    Ok(DrawStatistics {
        draws,
        mean,
        stderr,
        second_moment: second_moment / n,
        samples_per_draw: samples as f64 / n,
        inner_queries_per_draw: queries as f64 / n,
        level_counts,
    })
}

/// Monte Carlo estimates of E[G^ℓ] and E‖G^ℓ‖² at a fixed level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMoments {
    pub level: usize,
    pub mean: Vec<f64>,
    pub second_moment: f64,
    pub second_moment_stderr: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn level_moments<M: Model>(
    model: &M,
    theta: &[f64],
    config: &EstimatorConfig,
    objective: &RobustObjective,
    data: &[M::Point],
    level: usize,
    draws: usize,
    seed: u64,
) -> Result<LevelMoments> {
    if draws < 2 {
        return Err(Error::McBudget(draws));
    }
    let terms: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::stream(seed, i as u64);
            let tree = sample_tree(&objective.sampler, data, level, &mut rng)?;
            level_term(model, theta, &tree, objective, config, true).map(|t| t.0)
        })
        .collect::<Result<_>>()?;
    let n = draws as f64;
    let mut mean = vec![0.0; model.num_params()];
    let sq: Vec<f64> = terms
        .iter()
        .map(|g| {
            for (m, v) in mean.iter_mut().zip(g) {
                *m += v / n;
            }
            g.iter().map(|v| v * v).sum()
        })
        .collect();
    let m2 = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|s| (s - m2) * (s - m2)).sum::<f64>() / (n - 1.0);
    Ok(LevelMoments {
        level,
        mean,
        second_moment: m2,
        second_moment_stderr: (var / n).sqrt(),
    })
}

/// The 2-parameter diagnostic problem: 1-D linear regression on four
/// points, perturbed in an interval of radius 0.5 under KL with η = 0.2.
pub fn diagnostic_problem() -> (crate::model::SupervisedModel, Vec<crate::model::LabeledPoint>, Vec<f64>, RobustObjective) {
    use crate::model::{LabeledPoint, ModelKind, SupervisedModel};
    let model = SupervisedModel::new(ModelKind::Linear, 1).expect("valid model");
    let data = vec![
        LabeledPoint::new(vec![-1.0], 0.5),
        LabeledPoint::new(vec![-0.3], -0.2),
        LabeledPoint::new(vec![0.4], 1.0),
        LabeledPoint::new(vec![1.2], 0.3),
    ];
    let sampler = BallSampler::new(crate::sampling::Norm::Linf, 0.5, 1).expect("valid sampler");
    let objective = RobustObjective::new(sampler, DivergenceSpec::kl(), 0.2).expect("valid objective");
    (model, data, vec![1.0, 0.5], objective)
}
