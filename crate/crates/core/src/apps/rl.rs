//! Tabular Q-learning on a gridworld, with an entropic state-perturbation
//! variant.
//!
//! The robust update replaces max_a Q(s', a) in the bootstrap target by
//!
//!   max_a −η log mean_{ŝ ∈ N_ρ(s')} exp(−Q(ŝ, a)/η),
//!
//! a soft minimum of Q(·, a) over the Chebyshev neighbourhood of s'. With
//! ρ = 0 the neighbourhood is {s'} and the update is the standard one.
//!
//! Goal and lava cells are absorbing with known values ±1/(1 − γ); entering
//! one ends the episode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

pub const ACTIONS: usize = 4;
const MOVES: [(i64, i64); ACTIONS] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Free,
    Goal,
    Lava,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMDP {
    pub width: usize,
    pub height: usize,
    pub discount: f64,
    pub start: usize,
    pub cells: Vec<Cell>,
    /// Reward collected on entering each cell.
    pub enter_reward: Vec<f64>,
    /// P(·|s, a) as sparse (s', p) lists, indexed by s·A + a.
    pub kernel: Vec<Vec<(usize, f64)>>,
}

fn add_mass(dist: &mut Vec<(usize, f64)>, s: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    match dist.iter_mut().find(|(t, _)| *t == s) {
        Some(e) => e.1 += p,
        None => dist.push((s, p)),
    }
}

/// Dynamics knobs for building perturbed copies of a layout.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Dynamics {
    /// Probability of moving in one of the other three directions instead.
    pub slip: f64,
    /// Probability of an extra push south after a move into a windy column.
    pub wind_south: f64,
    /// Windy columns `[first, last]`.
    pub wind_columns: (usize, usize),
}

impl GridMDP {
    /// Builds a grid from rows of `S` (start), `G` (goal), `L` (lava) and `.`.
    pub fn from_layout(rows: &[&str], discount: f64, dynamics: Dynamics) -> Result<Self> {
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::param("discount", format!("must lie in (0, 1), got {discount}")));
        }
        for (name, p) in [("slip", dynamics.slip), ("wind_south", dynamics.wind_south)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("must be a probability, got {p}")));
            }
        }
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if height == 0 || width == 0 || rows.iter().any(|r| r.chars().count() != width) {
            return Err(Error::param("layout", "rows must be nonempty and of equal length"));
        }
        let mut cells = Vec::with_capacity(width * height);
        let mut start = None;
        for row in rows {
            for ch in row.chars() {
                cells.push(match ch {
                    '.' => Cell::Free,
                    'S' => {
                        start = Some(cells.len());
                        Cell::Free
                    }
                    'G' => Cell::Goal,
                    'L' => Cell::Lava,
                    other => return Err(Error::param("layout", format!("unknown cell `{other}`"))),
                });
            }
        }
        let start = start.ok_or_else(|| Error::param("layout", "no start cell `S`"))?;
        let mut mdp = Self {
            width,
            height,
            discount,
            start,
            cells,
            enter_reward: vec![0.0; width * height],
            kernel: Vec::new(),
        };
        mdp.build_kernel(dynamics);
        Ok(mdp)
    }

    /// The 5×5 benchmark: start and goal on the middle row with a lava cell
    /// between them.
    pub fn benchmark() -> Self {
        Self::from_layout(BENCHMARK_LAYOUT, 0.9, Dynamics::default()).expect("valid layout")
    }

    fn step_to(&self, s: usize, (dr, dc): (i64, i64)) -> usize {
        let (r, c) = ((s / self.width) as i64, (s % self.width) as i64);
        let nr = (r + dr).clamp(0, self.height as i64 - 1);
        let nc = (c + dc).clamp(0, self.width as i64 - 1);
        nr as usize * self.width + nc as usize
    }

    fn build_kernel(&mut self, dyn_: Dynamics) {
        let n = self.cells.len();
        self.kernel = vec![Vec::new(); n * ACTIONS];
        for s in 0..n {
            for a in 0..ACTIONS {
                let mut dist = Vec::new();
                if self.is_terminal(s) {
                    add_mass(&mut dist, s, 1.0);
                } else {
                    for (b, mv) in MOVES.iter().enumerate() {
                        let p = if b == a { 1.0 - dyn_.slip } else { dyn_.slip / 3.0 };
                        if p == 0.0 {
                            continue;
                        }
                        let t = self.step_to(s, *mv);
                        let col = t % self.width;
                        let windy = !self.is_terminal(t)
                            && dyn_.wind_south > 0.0
                            && col >= dyn_.wind_columns.0
                            && col <= dyn_.wind_columns.1;
                        if windy {
                            add_mass(&mut dist, t, p * (1.0 - dyn_.wind_south));
                            add_mass(&mut dist, self.step_to(t, (1, 0)), p * dyn_.wind_south);
                        } else {
                            add_mass(&mut dist, t, p);
                        }
                    }
                }
                self.kernel[s * ACTIONS + a] = dist;
            }
        }
    }

    pub fn num_states(&self) -> usize {
        self.cells.len()
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.cells[s] != Cell::Free
    }

    /// ±1/(1 − γ) for goal/lava cells.
    pub fn terminal_value(&self, s: usize) -> f64 {
        let v = 1.0 / (1.0 - self.discount);
        match self.cells[s] {
            Cell::Goal => v,
            Cell::Lava => -v,
            Cell::Free => 0.0,
        }
    }

    /// Cells within Chebyshev distance ⌈ρ⌉ of `s`, including `s`.
    pub fn neighborhood(&self, s: usize, rho: f64) -> Vec<usize> {
        let k = rho.max(0.0).ceil() as i64;
        let (r, c) = ((s / self.width) as i64, (s % self.width) as i64);
        let mut out = Vec::new();
        for nr in (r - k).max(0)..=(r + k).min(self.height as i64 - 1) {
            for nc in (c - k).max(0)..=(c + k).min(self.width as i64 - 1) {
                out.push(nr as usize * self.width + nc as usize);
            }
        }
        out
    }

    /// Expected immediate reward r(s, a).
    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.kernel[s * ACTIONS + a]
            .iter()
            .map(|&(t, p)| p * self.enter_reward[t])
            .sum()
    }

    /// Samples s' ~ P(·|s, a).
    pub fn sample_next(&self, s: usize, a: usize, rng: &mut SeededRng) -> usize {
        let dist = &self.kernel[s * ACTIONS + a];
        let u = rng.uniform();
        let mut acc = 0.0;
        for &(t, p) in dist {
            acc += p;
            if u < acc {
                return t;
            }
        }
        dist.last().expect("nonempty kernel row").0
    }

    /// Free cells Chebyshev-adjacent to lava.
    pub fn corridor(&self) -> Vec<usize> {
        (0..self.num_states())
            .filter(|&s| !self.is_terminal(s))
            .filter(|&s| self.neighborhood(s, 1.0).iter().any(|&t| self.cells[t] == Cell::Lava))
            .collect()
    }
}

pub const BENCHMARK_LAYOUT: &[&str] = &[".....", ".....", "S.L.G", ".....", "....."];

/// The three perturbed evaluation environments of the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Slip probability 0.2.
    Slip,
    /// Entering a lava-adjacent cell costs 10% of the goal value.
    Corridor,
    /// Columns 1–3 push south with probability 0.3.
    Wind,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Slip, Variant::Corridor, Variant::Wind];

    pub fn build(&self) -> GridMDP {
        let gamma = 0.9;
        match self {
            Variant::Slip => GridMDP::from_layout(
                BENCHMARK_LAYOUT,
                gamma,
                Dynamics {
                    slip: 0.2,
                    ..Default::default()
                },
            )
            .expect("valid layout"),
            Variant::Corridor => {
                let mut m = GridMDP::benchmark();
                let penalty = -0.1 / (1.0 - gamma);
                for s in m.corridor() {
                    m.enter_reward[s] = penalty;
                }
                m
            }
            Variant::Wind => GridMDP::from_layout(
                BENCHMARK_LAYOUT,
                gamma,
                Dynamics {
                    wind_south: 0.3,
                    wind_columns: (1, 3),
                    ..Default::default()
                },
            )
            .expect("valid layout"),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Slip => "slip",
            Variant::Corridor => "corridor",
            Variant::Wind => "wind",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub q: Vec<f64>,
    pub visits: Vec<u64>,
}

impl QTable {
    /// Zero for free cells, the absorbing value for terminal cells.
    pub fn new(mdp: &GridMDP) -> Self {
        let mut q = vec![0.0; mdp.num_states() * ACTIONS];
        for s in 0..mdp.num_states() {
            if mdp.is_terminal(s) {
                q[s * ACTIONS..(s + 1) * ACTIONS].fill(mdp.terminal_value(s));
            }
        }
        Self {
            q,
            visits: vec![0; mdp.num_states() * ACTIONS],
        }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * ACTIONS + a]
    }

    /// Greedy action; ties go to the lowest index.
    pub fn greedy(&self, s: usize) -> usize {
        let row = &self.q[s * ACTIONS..(s + 1) * ACTIONS];
        let mut best = 0;
        for a in 1..ACTIONS {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn max_value(&self, s: usize) -> f64 {
        self.q[s * ACTIONS..(s + 1) * ACTIONS]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// −η log mean_i exp(−q_i/η), computed around the minimum.
pub fn soft_min(values: &[f64], eta: f64) -> f64 {
    let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let s: f64 = values.iter().map(|q| (-(q - m) / eta).exp()).sum();
    m - eta * (s / values.len() as f64).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Robustness {
    pub eta: f64,
    pub rho: f64,
}

/// The bootstrap value of s': max_a Q(s', a), or its perturbed soft version.
pub fn bootstrap_value(q: &QTable, mdp: &GridMDP, next: usize, robust: Option<Robustness>) -> f64 {
    if mdp.is_terminal(next) {
        return mdp.terminal_value(next);
    }
    match robust {
        None => q.max_value(next),
        Some(Robustness { eta, rho }) => {
            let hood = mdp.neighborhood(next, rho);
            let mut vals = vec![0.0; hood.len()];
            let mut best = f64::NEG_INFINITY;
            for a in 0..ACTIONS {
                for (v, &t) in vals.iter_mut().zip(&hood) {
                    *v = q.get(t, a);
                }
                best = best.max(soft_min(&vals, eta));
            }
            best
        }
    }
}

/// One tabular update with α = 1/(1 + visits(s, a)).
pub fn robust_q_update(
    q: &mut QTable,
    mdp: &GridMDP,
    (s, a, r, next): (usize, usize, f64, usize),
    robust: Option<Robustness>,
) {
    let idx = s * ACTIONS + a;
    let alpha = 1.0 / (1.0 + q.visits[idx] as f64);
    q.visits[idx] += 1;
    let target = r + mdp.discount * bootstrap_value(q, mdp, next, robust);
    q.q[idx] = (1.0 - alpha) * q.q[idx] + alpha * target;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    /// Stop after this many episodes...
    pub episodes: Option<usize>,
    /// ...or after this many environment steps, whichever comes first.
    pub steps: Option<usize>,
    pub max_episode_len: usize,
    /// Start each episode from a uniformly drawn free cell.
    pub exploring_starts: bool,
    pub robust: Option<Robustness>,
    pub seed: u64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            episodes: Some(2000),
            steps: None,
            max_episode_len: 100,
            exploring_starts: true,
            robust: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QLearningResult {
    pub q: QTable,
    /// Discounted return of each training episode.
    pub returns: Vec<f64>,
    pub steps: usize,
}

/// ε-greedy Q-learning with ε decaying linearly from 1 to 0.05 over the first
/// half of the budget.
pub fn run_q_learning(mdp: &GridMDP, config: &QLearningConfig) -> Result<QLearningResult> {
    if config.episodes.is_none() && config.steps.is_none() {
        return Err(Error::param("episodes", "set an episode or step budget"));
    }
    if let Some(Robustness { eta, rho }) = config.robust {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::param("eta", format!("must be positive, got {eta}")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::param("rho", format!("must be nonnegative, got {rho}")));
        }
    }
    let free: Vec<usize> = (0..mdp.num_states()).filter(|&s| !mdp.is_terminal(s)).collect();
    let mut rng = SeededRng::new(config.seed);
    let mut q = QTable::new(mdp);
    let mut returns = Vec::new();
    let mut steps = 0usize;
    let progress = |episodes: usize, steps: usize| {
        let by_ep = config.episodes.map_or(0.0, |n| episodes as f64 / n as f64);
        let by_step = config.steps.map_or(0.0, |n| steps as f64 / n as f64);
        by_ep.max(by_step)
    };
    loop {
        if progress(returns.len(), steps) >= 1.0 {
            break;
        }
        let epsilon = 1.0 - 0.95 * (2.0 * progress(returns.len(), steps)).min(1.0);
        let mut s = if config.exploring_starts {
            free[rng.index(free.len())]
        } else {
            mdp.start
        };
        let mut ret = 0.0;
        let mut discount = 1.0;
        for _ in 0..config.max_episode_len {
            let a = if rng.uniform() < epsilon {
                rng.index(ACTIONS)
            } else {
                q.greedy(s)
            };
            let next = mdp.sample_next(s, a, &mut rng);
            let r = mdp.enter_reward[next];
            robust_q_update(&mut q, mdp, (s, a, r, next), config.robust);
            steps += 1;
            ret += discount * r;
            discount *= mdp.discount;
            if mdp.is_terminal(next) {
                ret += discount * mdp.terminal_value(next);
                break;
            }
            s = next;
            if config.steps.is_some_and(|n| steps >= n) {
                break;
            }
        }
        returns.push(ret);
    }
    Ok(QLearningResult { q, returns, steps })
}

/// Optimal Q by value iteration, optionally with the perturbed bootstrap.
pub fn value_iteration(mdp: &GridMDP, robust: Option<Robustness>, tol: f64) -> QTable {
    let mut q = QTable::new(mdp);
    loop {
        let mut next = q.clone();
        let mut delta: f64 = 0.0;
        for s in (0..mdp.num_states()).filter(|&s| !mdp.is_terminal(s)) {
            for a in 0..ACTIONS {
                let v: f64 = mdp.kernel[s * ACTIONS + a]
                    .iter()
                    .map(|&(t, p)| p * (mdp.enter_reward[t] + mdp.discount * bootstrap_value(&q, mdp, t, robust)))
                    .sum();
                delta = delta.max((v - q.get(s, a)).abs());
                next.q[s * ACTIONS + a] = v;
            }
        }
        q = next;
        if delta <= tol {
            return q;
        }
    }
}

/// Largest |Q₁ − Q₂| over free cells.
pub fn sup_distance(mdp: &GridMDP, a: &QTable, b: &QTable) -> f64 {
    (0..mdp.num_states())
        .filter(|&s| !mdp.is_terminal(s))
        .flat_map(|s| (0..ACTIONS).map(move |k| s * ACTIONS + k))
        .map(|i| (a.q[i] - b.q[i]).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyReturn {
    pub mean: f64,
    pub stderr: f64,
}

/// Greedy policy from `q` run from the start cell of `mdp`; discounted
/// returns over `episodes` seeded episodes of at most `horizon` steps.
pub fn evaluate_policy(q: &QTable, mdp: &GridMDP, episodes: usize, horizon: usize, seed: u64) -> Result<PolicyReturn> {
    evaluate_with(mdp, episodes, horizon, seed, |s, _| q.greedy(s))
}

/// Uniformly random actions, for comparison.
pub fn evaluate_random(mdp: &GridMDP, episodes: usize, horizon: usize, seed: u64) -> Result<PolicyReturn> {
    evaluate_with(mdp, episodes, horizon, seed, |_, rng| rng.index(ACTIONS))
}

fn evaluate_with<F>(mdp: &GridMDP, episodes: usize, horizon: usize, seed: u64, policy: F) -> Result<PolicyReturn>
where
    F: Fn(usize, &mut SeededRng) -> usize + Sync,
{
    if episodes == 0 {
        return Err(Error::param("episodes", "must be at least 1"));
    }
    let returns: Vec<f64> = (0..episodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = SeededRng::stream(seed, e as u64);
            let mut s = mdp.start;
            let mut ret = 0.0;
            let mut discount = 1.0;
            for _ in 0..horizon {
                let a = policy(s, &mut rng);
                let next = mdp.sample_next(s, a, &mut rng);
                ret += discount * mdp.enter_reward[next];
                discount *= mdp.discount;
                if mdp.is_terminal(next) {
                    ret += discount * mdp.terminal_value(next);
                    break;
                }
                s = next;
            }
            ret
        })
        .collect();
    let n = episodes as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(PolicyReturn {
        mean,
        stderr: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_rows_are_distributions() {
        let mut mdps = vec![GridMDP::benchmark()];
        mdps.extend(Variant::ALL.iter().map(Variant::build));
        for m in &mdps {
            for row in &m.kernel {
                let total: f64 = row.iter().map(|e| e.1).sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(row.iter().all(|e| e.1 >= 0.0));
            }
            for s in 0..m.num_states() {
                assert!(m.neighborhood(s, 1.0).contains(&s));
                assert_eq!(m.neighborhood(s, 0.0), vec![s]);
            }
        }
    }

    #[test]
    fn soft_min_bounds_and_monotonicity() {
        let mut rng = SeededRng::new(3);
        for _ in 0..500 {
            let v: Vec<f64> = (0..9).map(|_| 5.0 * rng.normal()).collect();
            let eta = 0.05 + 2.0 * rng.uniform();
            let s = soft_min(&v, eta);
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            assert!(lo - 1e-12 <= s && s <= mean + 1e-12);
            let mut up = v.clone();
            up[rng.index(9)] += rng.uniform();
            assert!(soft_min(&up, eta) >= s - 1e-12);
        }
        assert_eq!(soft_min(&[2.5, 2.5, 2.5], 0.3), 2.5);
        assert_eq!(soft_min(&[-1.75], 0.3), -1.75);
    }

    #[test]
    fn degenerate_neighborhoods_give_standard_update() {
        let mdp = GridMDP::benchmark();
        let mut rng = SeededRng::new(8);
        let mut q = QTable::new(&mdp);
        for v in q.q.iter_mut().take(40) {
            *v = rng.normal();
        }
        for s in 0..mdp.num_states() {
            let a = bootstrap_value(&q, &mdp, s, None);
            let b = bootstrap_value(&q, &mdp, s, Some(Robustness { eta: 0.37, rho: 0.0 }));
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // constant Q over every neighbourhood
        let mut flat = QTable::new(&GridMDP::from_layout(&["S...", "...G"], 0.9, Dynamics::default()).unwrap());
        let m2 = GridMDP::from_layout(&["S...", "...."], 0.9, Dynamics::default()).unwrap();
        flat.q.iter_mut().enumerate().for_each(|(i, v)| *v = (i % ACTIONS) as f64);
        for s in 0..m2.num_states() {
            let a = bootstrap_value(&flat, &m2, s, None);
            let b = bootstrap_value(&flat, &m2, s, Some(Robustness { eta: 2.0, rho: 1.0 }));
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn small_eta_is_pessimistic_over_neighbourhood() {
        let mdp = GridMDP::from_layout(&["S..", "...", "..."], 0.9, Dynamics::default()).unwrap();
        let mut rng = SeededRng::new(2);
        let mut q = QTable::new(&mdp);
        q.q.iter_mut().for_each(|v| *v = rng.normal());
        for s in 0..mdp.num_states() {
            // max over actions of min over the neighbourhood, by brute force
            let hood = mdp.neighborhood(s, 1.0);
            let oracle = (0..ACTIONS)
                .map(|a| hood.iter().map(|&t| q.get(t, a)).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            let v = bootstrap_value(&q, &mdp, s, Some(Robustness { eta: 1e-4, rho: 1.0 }));
            assert!((v - oracle).abs() <= 1e-4 * (hood.len() as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn robust_with_zero_radius_is_bit_identical() {
        let mdp = GridMDP::benchmark();
        let cfg = QLearningConfig {
            episodes: Some(300),
            seed: 5,
            ..Default::default()
        };
        let plain = run_q_learning(&mdp, &cfg).unwrap();
        let robust = run_q_learning(
            &mdp,
            &QLearningConfig {
                robust: Some(Robustness { eta: 0.5, rho: 0.0 }),
                ..cfg
            },
        )
        .unwrap();
        assert_eq!(plain, robust);
    }

    #[test]
    fn single_state_return_is_geometric() {
        let mut mdp = GridMDP::from_layout(&["S"], 0.8, Dynamics::default()).unwrap();
        mdp.enter_reward[0] = 2.0;
        let q = QTable::new(&mdp);
        let r = evaluate_policy(&q, &mdp, 3, 400, 0).unwrap();
        assert!((r.mean - 2.0 / 0.2).abs() < 1e-9);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn evaluation_is_deterministic_and_greedy_beats_random() {
        let mdp = GridMDP::benchmark();
        let vi = value_iteration(&mdp, None, 1e-12);
        let slip = Variant::Slip.build();
        let a = evaluate_policy(&vi, &slip, 200, 100, 4).unwrap();
        let b = evaluate_policy(&vi, &slip, 200, 100, 4).unwrap();
        assert_eq!(a, b);
        let r = evaluate_random(&slip, 200, 100, 4).unwrap();
        assert!(a.mean > r.mean + 3.0 * (a.stderr + r.stderr));
    }

    #[test]
    fn value_iteration_on_benchmark() {
        let mdp = GridMDP::benchmark();
        let q = value_iteration(&mdp, None, 1e-13);
        // six moves around the lava, then the absorbing goal value
        assert!((q.max_value(mdp.start) - 0.9f64.powi(6) * 10.0).abs() < 1e-9);
    }
}
