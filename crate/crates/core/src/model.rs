//! Differentiable losses f_θ(z).
//!
//! A [`Model`] evaluates a scalar loss and its parameter gradient at a data
//! point. Points expose the coordinates an adversary may move through
//! [`Perturb`]; labels and any other payload stay fixed. Supervised models also
//! provide the input gradient ∇_z f_θ needed by gradient attacks.
//!
//! Gradients are hand-written reverse passes, checked against central finite
//! differences in the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Data points with a perturbable feature vector.
pub trait Perturb: Clone + Send + Sync {
    fn features(&self) -> &[f64];
    fn with_features(&self, features: Vec<f64>) -> Self;
}

pub trait Model: Sync {
    type Point: Perturb;

    fn num_params(&self) -> usize;

    fn loss(&self, theta: &[f64], point: &Self::Point) -> f64;

    /// Returns the loss and writes ∇_θ f_θ(point) into `grad`.
    fn loss_and_grad(&self, theta: &[f64], point: &Self::Point, grad: &mut [f64]) -> f64;
}

/// Models that can differentiate with respect to the perturbable features.
pub trait InputGradient: Model {
    fn input_grad(&self, theta: &[f64], point: &Self::Point) -> Vec<f64>;
}

/// A feature vector with a scalar target (±1 for classification).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl LabeledPoint {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }
}

impl Perturb for LabeledPoint {
    fn features(&self) -> &[f64] {
        &self.x
    }

    fn with_features(&self, features: Vec<f64>) -> Self {
        Self {
            x: features,
            y: self.y,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind {
    /// Affine predictor with squared loss ½(wᵀx + b − y)².
    Linear,
    /// Affine score with logistic loss log(1 + exp(−y·s)), y ∈ {−1, +1}.
    Logistic,
    /// One hidden ELU layer, scalar score, logistic loss.
    Mlp1 { hidden: usize },
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "linear" => Ok(ModelKind::Linear),
            "logistic" => Ok(ModelKind::Logistic),
            _ => {
                let hidden = s
                    .strip_prefix("mlp")
                    .map(|r| r.trim_start_matches(['1', ':']))
                    .ok_or_else(|| Error::param("model", format!("unknown model `{s}`")))?;
                let hidden = if hidden.is_empty() {
                    16
                } else {
                    hidden
                        .parse()
                        .map_err(|_| Error::param("model", format!("bad hidden width in `{s}`")))?
                };
                Ok(ModelKind::Mlp1 { hidden })
            }
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Linear => write!(f, "linear"),
            ModelKind::Logistic => write!(f, "logistic"),
            ModelKind::Mlp1 { hidden } => write!(f, "mlp1:{hidden}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupervisedModel {
    pub kind: ModelKind,
    pub input_dim: usize,
}

fn elu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn elu_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// log(1 + eᵘ) without overflow.
pub(crate) fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl SupervisedModel {
    pub fn new(kind: ModelKind, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::param("input_dim", "must be at least 1"));
        }
        if let ModelKind::Mlp1 { hidden: 0 } = kind {
            return Err(Error::param("hidden", "must be at least 1"));
        }
        Ok(Self { kind, input_dim })
    }

    pub fn num_params(&self) -> usize {
        let d = self.input_dim;
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => d + 1,
            ModelKind::Mlp1 { hidden } => hidden * d + hidden + hidden + 1,
        }
    }

    /// Small random initial parameters (zero for the affine models).
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => vec![0.0; self.num_params()],
            ModelKind::Mlp1 { .. } => {
                let mut rng = SeededRng::new(seed);
                let scale = 1.0 / (self.input_dim as f64).sqrt();
                (0..self.num_params()).map(|_| scale * rng.normal()).collect()
            }
        }
    }

    /// Raw score (prediction for Linear, logit for the classifiers).
    pub fn score(&self, theta: &[f64], x: &[f64]) -> f64 {
        let d = self.input_dim;
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => {
                theta[..d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + theta[d]
            }
            ModelKind::Mlp1 { hidden } => {
                let (w1, rest) = theta.split_at(hidden * d);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(hidden);
                let mut s = b2[0];
                for j in 0..hidden {
                    let pre: f64 = w1[j * d..(j + 1) * d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j];
                    s += w2[j] * elu(pre);
                }
                s
            }
        }
    }

    /// Predicted class in {−1, +1} (classifiers only).
    pub fn classify(&self, theta: &[f64], x: &[f64]) -> f64 {
        if self.score(theta, x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    fn loss_of_score(&self, s: f64, y: f64) -> (f64, f64) {
        match self.kind {
            ModelKind::Linear => {
                let r = s - y;
                (0.5 * r * r, r)
            }
            ModelKind::Logistic | ModelKind::Mlp1 { .. } => {
                let u = -y * s;
                (softplus(u), -y * sigmoid(u))
            }
        }
    }

    /// Loss, ∇_θ (optional) and ∇_x (optional) in one reverse pass.
    fn forward_backward(
        &self,
        theta: &[f64],
        point: &LabeledPoint,
        grad_theta: Option<&mut [f64]>,
        grad_x: Option<&mut [f64]>,
    ) -> f64 {
        let d = self.input_dim;
        let x = &point.x;
        match self.kind {
            ModelKind::Linear | ModelKind::Logistic => {
                let s = self.score(theta, x);
                let (loss, ds) = self.loss_of_score(s, point.y);
                if let Some(g) = grad_theta {
                    for (gi, xi) in g[..d].iter_mut().zip(x) {
                        *gi = ds * xi;
                    }
                    g[d] = ds;
                }
                if let Some(gx) = grad_x {
                    for (gi, w) in gx.iter_mut().zip(&theta[..d]) {
                        *gi = ds * w;
                    }
                }
                loss
            }
            ModelKind::Mlp1 { hidden } => {
                let (w1, rest) = theta.split_at(hidden * d);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(hidden);
                let mut pre = vec![0.0; hidden];
                let mut s = b2[0];
                for j in 0..hidden {
                    pre[j] = w1[j * d..(j + 1) * d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j];
                    s += w2[j] * elu(pre[j]);
                }
                let (loss, ds) = self.loss_of_score(s, point.y);
                let mut gx_acc = grad_x;
                if let Some(gx) = gx_acc.as_deref_mut() {
                    gx.iter_mut().for_each(|v| *v = 0.0);
                }
                let mut gt = grad_theta;
                for j in 0..hidden {
                    let dpre = ds * w2[j] * elu_prime(pre[j]);
                    if let Some(g) = gt.as_deref_mut() {
                        for k in 0..d {
                            g[j * d + k] = dpre * x[k];
                        }
                        g[hidden * d + j] = dpre;
                        g[hidden * d + hidden + j] = ds * elu(pre[j]);
                    }
                    if let Some(gx) = gx_acc.as_deref_mut() {
                        for k in 0..d {
                            gx[k] += dpre * w1[j * d + k];
                        }
                    }
                }
                if let Some(g) = gt {
                    g[hidden * d + 2 * hidden] = ds;
                }
                loss
            }
        }
    }
}

impl Model for SupervisedModel {
    type Point = LabeledPoint;

    fn num_params(&self) -> usize {
        SupervisedModel::num_params(self)
    }

    fn loss(&self, theta: &[f64], point: &LabeledPoint) -> f64 {
        let s = self.score(theta, &point.x);
        self.loss_of_score(s, point.y).0
    }

    fn loss_and_grad(&self, theta: &[f64], point: &LabeledPoint, grad: &mut [f64]) -> f64 {
        self.forward_backward(theta, point, Some(grad), None)
    }
}

impl InputGradient for SupervisedModel {
    fn input_grad(&self, theta: &[f64], point: &LabeledPoint) -> Vec<f64> {
        let mut gx = vec![0.0; self.input_dim];
        self.forward_backward(theta, point, None, Some(&mut gx));
        gx
    }
}

/// Two Gaussian blobs with labels −1 / +1 centred at ∓`center`.
pub fn gaussian_blobs(n: usize, center: &[f64], std: f64, seed: u64) -> Vec<LabeledPoint> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|i| {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            let x = center.iter().map(|c| y * c + std * rng.normal()).collect();
            LabeledPoint::new(x, y)
        })
        .collect()
}

/// The two-moons dataset with Gaussian jitter.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> Vec<LabeledPoint> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|i| {
            let t = std::f64::consts::PI * rng.uniform();
            let (x, y) = if i % 2 == 0 {
                ((t.cos(), t.sin()), 1.0)
            } else {
                ((1.0 - t.cos(), 0.5 - t.sin()), -1.0)
            };
            LabeledPoint::new(vec![x.0 + noise * rng.normal(), x.1 + noise * rng.normal()], y)
        })
        .collect()
}

/// Parses a CSV dataset: one row per sample, label in the last column. A
/// header row is skipped when its first field is not numeric.
pub fn parse_csv_dataset(text: &str) -> Result<Vec<LabeledPoint>> {
    let mut out = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(r) => r,
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(Error::param("data", format!("line {}: non-numeric field", lineno + 1)))
            }
        };
        if row.len() < 2 {
            return Err(Error::param("data", format!("line {}: need features and a label", lineno + 1)));
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Dimension {
                    expected: w,
                    got: row.len(),
                })
            }
            _ => {}
        }
        let (x, y) = row.split_at(row.len() - 1);
        out.push(LabeledPoint::new(x.to_vec(), y[0]));
    }
    if out.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(out)
}
