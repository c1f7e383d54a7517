//! φ-divergence regularized adversarial training.
//!
//! The robust objective replaces the worst-case loss over a perturbation ball
//! B_ρ(z) by a penalized φ-divergence DRO over the uniform distribution on that
//! ball. This crate provides the pieces needed to work with it:
//!
//! - [`divergence`]: the five built-in φ functions and their conjugates,
//! - [`inner`]: the finite-support inner problem (bisection and closed forms),
//! - [`density`]: worst-case densities on a 1-D grid and the toy landscape,
//! - [`mlmc`]: SG and RT-MLMC gradient estimators,
//! - [`train`]: projected SGD, models, attacks and evaluation,
//! - [`regfx`]: numerical checks of the small-ρ regularization effects,
//! - [`apps`]: robust tabular Q-learning and contextual pricing.

pub mod apps;
pub mod density;
pub mod divergence;
pub mod error;
pub mod inner;
pub mod mlmc;
pub mod model;
pub mod regfx;
pub mod rng;
pub mod sampling;
pub mod train;

pub use divergence::{DivergenceKind, DivergenceSpec};
pub use error::{Error, Result};
pub use inner::{InnerProblem, InnerSolution, SolveMethod};
