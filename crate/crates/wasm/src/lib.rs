//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Everything here is plain data in and out so the same functions run in
//! native tests.

use phidro::density::{self, Grid1D, ToyLandscape};
use phidro::inner::{self, InnerProblem};
use phidro::mlmc;
use phidro::rng::SeededRng;
use phidro::{DivergenceKind, DivergenceSpec};
use wasm_bindgen::prelude::*;

fn spec(name: &str) -> Result<DivergenceSpec, String> {
    let kind: DivergenceKind = name.parse().map_err(|e: phidro::Error| e.to_string())?;
    DivergenceSpec::new(kind).map_err(|e| e.to_string())
}

/// Worst-case density of the seeded toy landscape on [−ρ, ρ].
#[wasm_bindgen]
#[derive(Debug)]
pub struct DensityView {
    omega: Vec<f64>,
    loss: Vec<f64>,
    density: Vec<f64>,
    mu: f64,
    value: f64,
    concentration: f64,
}

#[wasm_bindgen]
impl DensityView {
    #[wasm_bindgen(getter)]
    pub fn omega(&self) -> Vec<f64> {
        self.omega.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn loss(&self) -> Vec<f64> {
        self.loss.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[wasm_bindgen(getter)]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Mass within 0.5 of the loss maximizer.
    #[wasm_bindgen(getter)]
    pub fn concentration(&self) -> f64 {
        self.concentration
    }
}

#[wasm_bindgen]
pub fn worst_case_density(divergence: &str, eta: f64, rho: f64, grid: usize, seed: u32) -> Result<DensityView, String> {
    let spec = spec(divergence)?;
    let land = ToyLandscape::new(seed as u64);
    let g = Grid1D::ball(0.0, rho, grid).map_err(|e| e.to_string())?;
    let values = land.values_on(&g);
    let d = density::density_from_values(&values, &g, spec, eta).map_err(|e| e.to_string())?;
    let concentration = density::density_concentration(&d, &values, 0.5);
    Ok(DensityView {
        omega: g.points,
        loss: values,
        density: d.density,
        mu: d.mu,
        value: d.value,
        concentration,
    })
}

#[wasm_bindgen]
#[derive(Debug)]
pub struct InnerView {
    gamma: Vec<f64>,
    mu: f64,
    value: f64,
    iterations: usize,
    method: String,
}

#[wasm_bindgen]
impl InnerView {
    #[wasm_bindgen(getter)]
    pub fn gamma(&self) -> Vec<f64> {
        self.gamma.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[wasm_bindgen(getter)]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    #[wasm_bindgen(getter)]
    pub fn method(&self) -> String {
        self.method.clone()
    }
}

/// Solves the finite-support inner problem, by closed form when one exists.
#[wasm_bindgen]
pub fn inner_solve(values: Vec<f64>, eta: f64, divergence: &str, eps: f64) -> Result<InnerView, String> {
    let p = InnerProblem::new(values, eta, spec(divergence)?).map_err(|e| e.to_string())?;
    let s = inner::solve(&p, eps).map_err(|e| e.to_string())?;
    Ok(InnerView {
        gamma: s.gamma,
        mu: s.mu,
        value: s.value,
        iterations: s.iterations,
        method: format!("{:?}", s.method),
    })
}

/// P(ℓ) for ℓ = 0..=L.
#[wasm_bindgen]
pub fn level_probabilities(max_level: usize) -> Vec<f64> {
    mlmc::level_probabilities(max_level)
}

#[wasm_bindgen]
pub fn expected_samples_per_draw(max_level: usize) -> f64 {
    mlmc::expected_samples_per_draw(max_level)
}

/// Empirical level frequencies from `draws` seeded draws.
#[wasm_bindgen]
pub fn sample_level_frequencies(max_level: usize, draws: u32, seed: u32) -> Vec<f64> {
    let probs = mlmc::level_probabilities(max_level);
    let mut rng = SeededRng::new(seed as u64);
    let mut counts = vec![0.0; max_level + 1];
    for _ in 0..draws {
        counts[mlmc::sample_level(&probs, &mut rng)] += 1.0;
    }
    if draws > 0 {
        counts.iter_mut().for_each(|c| *c /= draws as f64);
    }
    counts
}
