//! Command-line surface. Every parameter is optional on the command line so
//! it can also come from `--config`; defaults are applied in `commands`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::FloatList;
use crate::emit::Format;

#[derive(Debug, Parser)]
#[command(name = "phidro", version, about = "Divergence-regularized adversarial robustness toolkit")]
pub struct Cli {
    /// Worker threads for parallel sections [default: all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Master RNG seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Flat `key = value` file; command-line flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format, csv or json [default: json for inner-solve, csv otherwise]
    #[arg(long, global = true)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one discrete inner maximization over a list of loss values
    InnerSolve(InnerSolveArgs),
    /// Worst-case density on the 1-D toy landscape
    Density(DensityArgs),
    /// Moments, level frequencies and cost of the gradient estimators
    EstimatorStats(EstimatorStatsArgs),
    /// Robust training with projected SGD
    Train(TrainArgs),
    /// Misclassification under attack for a trained parameter file
    AttackEval(AttackEvalArgs),
    /// Regularizer-gap scaling study on a 2-D test loss
    Regfx(RegfxArgs),
    /// Tabular Q-learning on the gridworld benchmark
    Rl(RlArgs),
    /// Contextual pricing trials
    Pricing(PricingArgs),
}

#[derive(Debug, Args)]
pub struct InnerSolveArgs {
    /// Loss values f_1,...,f_m (comma-separated) [required]
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<FloatList>,
    /// Regularization strength η > 0 [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// kl | quadratic | indicator:ALPHA | absolute | hinge [default: kl]
    #[arg(long)]
    pub divergence: Option<String>,
    /// Level α ∈ (0, 1] for the indicator divergence
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Bisection tolerance on the objective [default: 1e-8]
    #[arg(long)]
    pub eps: Option<f64>,
    /// auto | bisection | closed-form [default: auto]
    #[arg(long)]
    pub method: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// kl | quadratic | indicator:ALPHA | absolute | hinge [default: kl]
    #[arg(long)]
    pub divergence: Option<String>,
    /// Level α ∈ (0, 1] for the indicator divergence
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Regularization strength η > 0 [default: 0.1]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Ball radius ρ around each atom [default: 5]
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Grid points across the perturbation range [default: 10000]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Atom locations of the empirical distribution (comma-separated) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub atoms: Option<FloatList>,
    /// Half-width of the window used for the reported concentration [default: 0.5]
    #[arg(long)]
    pub window: Option<f64>,
    /// Density file, columns omega,f,density [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the loss curve, columns z,f
    #[arg(long)]
    pub landscape_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimatorStatsArgs {
    /// sg | rtmlmc [default: rtmlmc]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Maximum level L [default: 5]
    #[arg(long = "L")]
    pub max_level: Option<usize>,
    /// Single-draw estimates to average [default: 100000]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Draws per level for the level-difference moments [default: 20000]
    #[arg(long)]
    pub level_draws: Option<usize>,
    /// Output file, columns quantity,value,stderr [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// linear | logistic | mlp1:HIDDEN [default: logistic]
    #[arg(long)]
    pub model: Option<String>,
    /// Input dimension of synthetic blobs [default: 2]
    #[arg(long)]
    pub dims: Option<usize>,
    /// blobs | moons | path to a CSV file with the label in the last column [default: blobs]
    #[arg(long)]
    pub data: Option<String>,
    /// Synthetic sample count [default: 200]
    #[arg(long)]
    pub n: Option<usize>,
    /// Blob standard deviation or moon jitter [default: 0.5]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Seed of the synthetic data [default: --seed]
    #[arg(long)]
    pub data_seed: Option<u64>,
    /// kl | quadratic | indicator:ALPHA | absolute | hinge [default: kl]
    #[arg(long)]
    pub divergence: Option<String>,
    /// Level α ∈ (0, 1] for the indicator divergence
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Regularization strength η > 0 [default: 0.2]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Perturbation radius ρ > 0 in input units [default: 0.1]
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Perturbation ball norm, l2 | linf [default: l2]
    #[arg(long)]
    pub norm: Option<String>,
    /// sg | rtmlmc [default: rtmlmc]
    #[arg(long)]
    pub scheme: Option<String>,
    /// Maximum level L [default: 5]
    #[arg(long = "L")]
    pub max_level: Option<usize>,
    /// Outer batch size n° [default: 1]
    #[arg(long)]
    pub n_outer: Option<usize>,
    /// Iterations T [default: 1000]
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    /// Step size τ [default: 0.01]
    #[arg(long)]
    pub step: Option<f64>,
    /// Radius of the Euclidean parameter ball [default: unconstrained]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Plain empirical risk minimization (no perturbation)
    #[arg(long)]
    pub erm: bool,
    /// sg-convex | rtmlmc-convex | nonconvex; overrides scheme, L, n_outer, T and step
    #[arg(long)]
    pub preset: Option<String>,
    /// Target accuracy δ ∈ (0, 1) for presets [default: 0.1]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output directory for metrics and theta.json [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackEvalArgs {
    /// theta.json written by `train` [required]
    #[arg(long)]
    pub theta: Option<PathBuf>,
    /// Parameter vector to use: averaged | last | random [default: averaged]
    #[arg(long)]
    pub iterate: Option<String>,
    /// Evaluation data, as for `train` [default: the training data]
    #[arg(long)]
    pub data: Option<String>,
    /// pgm | white-noise [default: pgm]
    #[arg(long)]
    pub attack: Option<String>,
    /// Attack ball norm, l2 | linf [default: linf]
    #[arg(long)]
    pub norm: Option<String>,
    /// Attack radii ε (comma-separated) [default: 0,0.1,0.2,0.3]
    #[arg(long)]
    pub epsilons: Option<FloatList>,
    /// PGM iterations [default: 15]
    #[arg(long)]
    pub steps: Option<usize>,
    /// PGM step length [default: 0.1]
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Output file, columns epsilon,misclassification [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegfxArgs {
    /// linear | quadratic | logsumexp [default: quadratic]
    #[arg(long)]
    pub loss: Option<String>,
    /// interp:C | variation | variance [default: variation]
    #[arg(long)]
    pub regime: Option<String>,
    /// Halvings k = 1..steps of ρ_k = 2^-k [default: 8]
    #[arg(long)]
    pub steps: Option<usize>,
    /// kl | quadratic | indicator:ALPHA | absolute | hinge [default: kl]
    #[arg(long)]
    pub divergence: Option<String>,
    /// Level α ∈ (0, 1] for the indicator divergence
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Perturbation ball norm, l2 | linf [default: linf]
    #[arg(long)]
    pub norm: Option<String>,
    /// Atoms as flattened 2-D coordinates [default: 0.3,-0.2]
    #[arg(long, allow_hyphen_values = true)]
    pub atoms: Option<FloatList>,
    /// Midpoint grid per axis; 0 switches to Monte Carlo [default: 4096]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Monte Carlo samples when grid = 0 [default: 100000]
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Output file, columns k,rho,eta,gap,reg,rel_err,stderr [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RlArgs {
    /// Use the perturbed (soft-min over the neighbourhood) bootstrap
    #[arg(long)]
    pub robust: bool,
    /// Soft-min temperature η > 0 [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Neighbourhood radius ρ ≥ 0 in cells (Chebyshev, rounded up) [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Training episodes [default: 2000]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Environment step budget; training stops at whichever budget ends first
    #[arg(long)]
    pub steps: Option<usize>,
    /// Episodes per evaluation MDP [default: 1000]
    #[arg(long)]
    pub eval_episodes: Option<usize>,
    /// Per-episode returns, columns episode,return [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Greedy-policy returns on the nominal and perturbed MDPs, columns mdp,mean,stderr
    #[arg(long)]
    pub eval_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PricingArgs {
    /// Covariates per training set M [default: 100]
    #[arg(long = "M")]
    pub covariates: Option<usize>,
    /// Conditional samples per covariate m [default: 50]
    #[arg(long = "m")]
    pub samples: Option<usize>,
    /// Covariate perturbation radius ρ > 0 [default: 0.45]
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// KL regularization strength η > 0 [default: 0.9]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Independent instances [default: 50]
    #[arg(long)]
    pub trials: Option<usize>,
    /// SGD iterations per model [default: 1000]
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    /// SGD step size [default: 0.02]
    #[arg(long)]
    pub step: Option<f64>,
    /// Maximum MLMC level [default: 4]
    #[arg(long = "L")]
    pub max_level: Option<usize>,
    /// Outer batch size [default: 8]
    #[arg(long)]
    pub n_outer: Option<usize>,
    /// Radius of the θ ball [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Fresh covariates for the ground-truth risks [default: 100000]
    #[arg(long)]
    pub gt_samples: Option<usize>,
    /// Skip the one-step attack baseline
    #[arg(long)]
    pub no_fgm: bool,
    /// Output file, one row per trial [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}
