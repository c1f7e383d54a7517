//! Subcommand handlers: resolve parameters, call the library, emit results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use phidro::apps::pricing::{self, PricingConfig};
use phidro::apps::rl::{self, GridMDP, QLearningConfig, Robustness, Variant};
use phidro::density::{self, Grid1D, ToyLandscape};
use phidro::inner::{self, InnerProblem};
use phidro::mlmc::{self, EstimatorConfig, Scheme};
use phidro::model::{self, LabeledPoint, ModelKind, SupervisedModel};
use phidro::regfx::{self, Quadrature, Regime, StudySetup, TestLoss};
use phidro::sampling::Norm;
use phidro::train::{self, AttackConfig, AttackKind, Preset, TrainConfig};
use phidro::{DivergenceKind, DivergenceSpec};

use crate::args::*;
use crate::config::{FloatList, Resolver};
use crate::emit::{self, Cell, Format, Json, Table};
use crate::CliError;

/// Settings shared by every subcommand.
pub struct Common {
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse<T>(key: &str, text: &str) -> Result<T, CliError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e| usage(format!("`{key}`: {e}")))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("`{key}` must be positive, got {v}")))
    }
}

fn divergence(r: &mut Resolver, name: Option<String>, alpha: Option<f64>) -> Result<DivergenceSpec, CliError> {
    let name = r.get("divergence", name, "kl".to_string())?;
    let alpha = r.optional("alpha", alpha)?;
    let kind = if name.trim().eq_ignore_ascii_case("indicator") {
        let alpha = alpha.ok_or_else(|| usage("the indicator divergence needs `alpha`"))?;
        DivergenceKind::Indicator { alpha }
    } else {
        let kind: DivergenceKind = name.parse()?;
        match (kind, alpha) {
            (DivergenceKind::Indicator { .. }, Some(a)) => DivergenceKind::Indicator { alpha: a },
            (_, Some(_)) => return Err(usage("`alpha` only applies to the indicator divergence")),
            (k, None) => k,
        }
    };
    Ok(DivergenceSpec::new(kind)?)
}

fn format(r: &mut Resolver, common: &Common, default: Format) -> Result<Format, CliError> {
    r.get("format", common.format, default)
}

fn output(r: &mut Resolver, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    Ok(r.optional::<String>(key, flag.map(|p| p.display().to_string()))?.map(PathBuf::from))
}

pub fn inner_solve(a: InnerSolveArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let values = r.require("values", a.values)?.0;
    let eta = r.get("eta", a.eta, 1.0)?;
    let spec = divergence(&mut r, a.divergence, a.alpha)?;
    let eps = positive("eps", r.get("eps", a.eps, 1e-8)?)?;
    let method = r.get("method", a.method, "auto".to_string())?;
    let fmt = format(&mut r, common, Format::Json)?;
    let out = output(&mut r, "out", a.out)?;
    let config = r.finish()?;

    let problem = InnerProblem::new(values.clone(), eta, spec)?;
    let sol = match method.as_str() {
        "auto" => inner::solve(&problem, eps)?,
        "bisection" => inner::solve_bisection(&problem, eps)?,
        "closed-form" | "closed_form" => inner::solve_closed_form(&problem)?,
        other => return Err(usage(format!("`method`: unknown method `{other}`"))),
    };
    let method_name = match sol.method {
        inner::SolveMethod::Bisection => "bisection",
        inner::SolveMethod::ClosedForm => "closed_form",
    };
    let text = match fmt {
        Format::Json => emit::json_document(
            "inner-solve",
            &config,
            vec![
                ("gamma".into(), Json::from(&sol.gamma[..])),
                ("mu".into(), sol.mu.into()),
                ("value".into(), sol.value.into()),
                ("iterations".into(), sol.iterations.into()),
                ("method".into(), method_name.into()),
                ("primal_exact".into(), sol.primal_exact.into()),
            ],
        ),
        Format::Csv => {
            let mut t = Table::new(&["index", "f", "gamma", "mu", "value"]);
            for (i, (f, g)) in values.iter().zip(&sol.gamma).enumerate() {
                t.push(vec![i.into(), (*f).into(), (*g).into(), sol.mu.into(), sol.value.into()]);
            }
            t.to_csv("inner-solve", &config)
        }
    };
    emit::write_output(out.as_deref(), &text)
}

pub fn density(a: DensityArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let spec = divergence(&mut r, a.divergence, a.alpha)?;
    let eta = positive("eta", r.get("eta", a.eta, 0.1)?)?;
    let rho = positive("rho", r.get("rho", a.rho, 5.0)?)?;
    let n = r.get("grid", a.grid, 10_000)?;
    let atoms = r.get("atoms", a.atoms, FloatList(vec![0.0]))?.0;
    let window = r.get("window", a.window, 0.5)?;
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let landscape_out = output(&mut r, "landscape_out", a.landscape_out)?;
    let config = r.finish()?;
    if atoms.is_empty() {
        return Err(usage("`atoms` is empty"));
    }

    let land = ToyLandscape::new(seed);
    let lo = atoms.iter().cloned().fold(f64::INFINITY, f64::min) - rho;
    let hi = atoms.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + rho;
    let grid = Grid1D::new(lo, hi, n)?;
    let values = land.values_on(&grid);
    let (dens, mu, value) = if atoms.len() == 1 {
        let d = density::density_from_values(&values, &grid, spec, eta)?;
        (d.density, Some(d.mu), Some(d.value))
    } else {
        let weighted: Vec<(f64, f64)> = atoms.iter().map(|&c| (c, 1.0)).collect();
        (density::mixture_density(&values, &grid, &weighted, rho, spec, eta)?, None, None)
    };
    let wc = density::WorstCaseDensity {
        grid: grid.clone(),
        density: dens,
        divergence: spec,
        parameter: eta,
        mu: mu.unwrap_or(f64::NAN),
        value: value.unwrap_or(f64::NAN),
    };
    let concentration = density::density_concentration(&wc, &values, window);
    eprintln!("mass within {window} of the loss maximizer: {concentration:.6}");

    let mut t = Table::new(&["omega", "f", "density"]);
    for ((z, f), d) in grid.points.iter().zip(&values).zip(&wc.density) {
        t.push(vec![(*z).into(), (*f).into(), (*d).into()]);
    }
    let text = match fmt {
        Format::Csv => t.to_csv("density", &config),
        Format::Json => emit::json_document(
            "density",
            &config,
            vec![
                ("mu".into(), mu.into()),
                ("value".into(), value.into()),
                ("concentration".into(), concentration.into()),
                ("total_mass".into(), wc.total_mass().into()),
                ("table".into(), t.to_json()),
            ],
        ),
    };
    emit::write_output(out.as_deref(), &text)?;
    if let Some(path) = landscape_out {
        let mut l = Table::new(&["z", "f"]);
        for (z, f) in grid.points.iter().zip(&values) {
            l.push(vec![(*z).into(), (*f).into()]);
        }
        emit::emit_table(&l, fmt, "density", &config, Some(&path))?;
    }
    Ok(())
}

pub fn estimator_stats(a: EstimatorStatsArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let scheme: Scheme = parse("scheme", &r.get("scheme", a.scheme, "rtmlmc".to_string())?)?;
    let max_level = r.get("L", a.max_level, 5)?;
    let draws = r.get("draws", a.draws, 100_000)?;
    let level_draws = r.get("level_draws", a.level_draws, 20_000)?;
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let config = r.finish()?;

    let (model, data, theta, objective) = mlmc::diagnostic_problem();
    let cfg = EstimatorConfig {
        max_level,
        scheme,
        ..Default::default()
    };
    cfg.validate()?;
    let stats = mlmc::draw_statistics(&model, &theta, &cfg, &objective, &data, draws, seed)?;
    let mut t = Table::new(&["quantity", "value", "stderr"]);
    let mut row = |name: String, v: f64, se: Option<f64>| t.push(vec![name.into(), v.into(), se.into()]);
    for (k, (m, se)) in stats.mean.iter().zip(&stats.stderr).enumerate() {
        row(format!("mean_grad_{k}"), *m, Some(*se));
    }
    row("second_moment".into(), stats.second_moment, None);
    row("samples_per_draw".into(), stats.samples_per_draw, None);
    let expected = match scheme {
        Scheme::Sg => (1u64 << max_level) as f64,
        Scheme::RtMlmc => mlmc::expected_samples_per_draw(max_level),
    };
    row("expected_samples_per_draw".into(), expected, None);
    row("inner_queries_per_draw".into(), stats.inner_queries_per_draw, None);
    if scheme == Scheme::RtMlmc {
        let probs = mlmc::level_probabilities(max_level);
        for (l, (&c, p)) in stats.level_counts.iter().zip(&probs).enumerate() {
            let f = c as f64 / draws as f64;
            row(format!("level_freq_{l}"), f, Some((p * (1.0 - p) / draws as f64).sqrt()));
            row(format!("level_prob_{l}"), *p, None);
        }
    }
    for l in 0..=max_level + 1 {
        let m = mlmc::level_moments(
            &model,
            &theta,
            &cfg,
            &objective,
            &data,
            l,
            level_draws,
            phidro::rng::derive_seed(seed, 1000 + l as u64),
        )?;
        let name = if l == max_level + 1 { "bias_next_level".to_string() } else { format!("level_mean_norm_{l}") };
        row(name, Norm::L2.of(&m.mean), None);
        row(format!("level_second_moment_{l}"), m.second_moment, Some(m.second_moment_stderr));
    }
    emit::emit_table(&t, fmt, "estimator-stats", &config, out.as_deref())
}

/// Loads `blobs`, `moons` or a CSV path.
pub fn dataset(data: &str, n: usize, noise: f64, dims: usize, seed: u64) -> Result<Vec<LabeledPoint>, CliError> {
    match data {
        "blobs" => {
            if dims == 0 {
                return Err(usage("`dims` must be at least 1"));
            }
            Ok(model::gaussian_blobs(n, &vec![1.0; dims], noise, seed))
        }
        "moons" => {
            if dims != 2 {
                return Err(usage("`moons` is two-dimensional; set dims = 2"));
            }
            Ok(model::two_moons(n, noise, seed))
        }
        path => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read data {path}: {e}")))?;
            Ok(model::parse_csv_dataset(&text)?)
        }
    }
}

fn dataset_from_config(c: &BTreeMap<String, String>, data: Option<&str>) -> Result<Vec<LabeledPoint>, CliError> {
    let get = |k: &str| c.get(k).ok_or_else(|| usage(format!("parameter file lacks `{k}`")));
    dataset(
        data.unwrap_or(get("data")?),
        parse("n", get("n")?)?,
        parse("noise", get("noise")?)?,
        parse("dims", get("dims")?)?,
        parse("data_seed", get("data_seed")?)?,
    )
}

pub fn train(a: TrainArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let kind: ModelKind = parse("model", &r.get("model", a.model, "logistic".to_string())?)?;
    let dims = r.get("dims", a.dims, 2)?;
    let data_name = r.get("data", a.data, "blobs".to_string())?;
    let n = r.get("n", a.n, 200)?;
    let noise = r.get("noise", a.noise, 0.5)?;
    let seed = r.get("seed", common.seed, 0)?;
    let data_seed = r.get("data_seed", a.data_seed, seed)?;
    let spec = divergence(&mut r, a.divergence, a.alpha)?;
    let eta = r.get("eta", a.eta, 0.2)?;
    let rho = r.get("rho", a.rho, 0.1)?;
    let norm: Norm = parse("norm", &r.get("norm", a.norm, "l2".to_string())?)?;
    let scheme: Scheme = parse("scheme", &r.get("scheme", a.scheme, "rtmlmc".to_string())?)?;
    let max_level = r.get("L", a.max_level, 5)?;
    let n_outer = r.get("n_outer", a.n_outer, 1)?;
    let iterations = r.get("T", a.iterations, 1000)?;
    let step = r.get("step", a.step, 0.01)?;
    let radius = r.optional("radius", a.radius)?;
    let erm = r.switch("erm", a.erm)?;
    let preset = r.optional("preset", a.preset)?;
    let delta = r.get("delta", a.delta, 0.1)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out_dir = PathBuf::from(r.get("out_dir", a.out_dir.map(|p| p.display().to_string()), ".".to_string())?);

    let mut cfg = TrainConfig {
        iterations,
        step,
        projection_radius: radius,
        estimator: EstimatorConfig {
            max_level,
            n_outer,
            scheme,
            ..Default::default()
        },
        rho,
        eta,
        norm,
        divergence: spec,
        erm,
        seed,
        keep_trajectory: false,
    };
    if let Some(p) = &preset {
        let p: Preset = parse("preset", p)?;
        p.apply(&mut cfg, delta, step)?;
        r.record("T", cfg.iterations);
        r.record("step", cfg.step);
        r.record("scheme", cfg.estimator.scheme);
        r.record("L", cfg.estimator.max_level);
        r.record("n_outer", cfg.estimator.n_outer);
    }
    let config = r.finish()?;
    cfg.validate()?;

    let data = dataset(&data_name, n, noise, dims, data_seed)?;
    let input_dim = data.first().map(|p| p.x.len()).ok_or_else(|| usage("dataset is empty"))?;
    let model = SupervisedModel::new(kind, input_dim)?;
    let theta0 = model.init_params(seed);
    let result = train::projected_sgd(&model, &data, &theta0, &cfg)?;
    let clean = train::evaluate(&model, &result.averaged, &data, None, seed)?;
    eprintln!("trained {} iterations; clean misclassification {clean:.4}", cfg.iterations);

    let mut t = Table::new(&["iter", "objective_estimate", "grad_norm", "samples_cumulative"]);
    for rec in &result.records {
        t.push(vec![
            rec.iter.into(),
            rec.objective_estimate.into(),
            rec.grad_norm.into(),
            rec.samples_cumulative.into(),
        ]);
    }
    let metrics = out_dir.join(match fmt {
        Format::Csv => "metrics.csv",
        Format::Json => "metrics.json",
    });
    emit::emit_table(&t, fmt, "train", &config, Some(&metrics))?;
    let doc = emit::json_document(
        "train",
        &config,
        vec![
            ("model".into(), kind.to_string().into()),
            ("input_dim".into(), input_dim.into()),
            ("theta".into(), Json::from(&result.theta[..])),
            ("averaged".into(), Json::from(&result.averaged[..])),
            ("random_iterate".into(), Json::from(&result.random_iterate[..])),
            ("random_index".into(), result.random_index.into()),
            ("clean_misclassification".into(), clean.into()),
        ],
    );
    emit::write_output(Some(&out_dir.join("theta.json")), &doc)
}

pub fn attack_eval(a: AttackEvalArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let theta_path = PathBuf::from(r.require::<String>("theta", a.theta.map(|p| p.display().to_string()))?);
    let which = r.get("iterate", a.iterate, "averaged".to_string())?;
    let data_override = r.optional("data", a.data)?;
    let kind: AttackKind = parse("attack", &r.get("attack", a.attack, "pgm".to_string())?)?;
    let norm: Norm = parse("norm", &r.get("norm", a.norm, "linf".to_string())?)?;
    let epsilons = r.get("epsilons", a.epsilons, FloatList(vec![0.0, 0.1, 0.2, 0.3]))?.0;
    let steps = r.get("steps", a.steps, 15)?;
    let step_size = r.get("step_size", a.step_size, 0.1)?;
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let config = r.finish()?;

    let (model, theta, train_config) = load_theta(&theta_path, &which)?;
    let data = dataset_from_config(&train_config, data_override.as_deref())?;
    let mut t = Table::new(&["epsilon", "attack", "norm", "misclassification"]);
    for eps in epsilons {
        let attack = AttackConfig {
            norm,
            epsilon: eps,
            steps,
            step_size,
            kind,
        };
        let rate = train::evaluate(&model, &theta, &data, Some(&attack), seed)?;
        t.push(vec![eps.into(), format!("{kind:?}").to_lowercase().into(), norm.to_string().into(), rate.into()]);
    }
    emit::emit_table(&t, fmt, "attack-eval", &config, out.as_deref())
}

fn load_theta(path: &Path, which: &str) -> Result<(SupervisedModel, Vec<f64>, BTreeMap<String, String>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("{} is not a parameter file: {e}", path.display())))?;
    let field = match which {
        "averaged" => "averaged",
        "last" => "theta",
        "random" => "random_iterate",
        other => return Err(usage(format!("`iterate`: unknown iterate `{other}`"))),
    };
    let theta: Vec<f64> = doc[field]
        .as_array()
        .ok_or_else(|| usage(format!("parameter file lacks `{field}`")))?
        .iter()
        .map(|v| v.as_f64().ok_or_else(|| usage(format!("non-numeric entry in `{field}`"))))
        .collect::<Result<_, _>>()?;
    let kind: ModelKind = parse("model", doc["model"].as_str().unwrap_or_default())?;
    let dim = doc["input_dim"].as_u64().ok_or_else(|| usage("parameter file lacks `input_dim`"))? as usize;
    let config = doc["config"]
        .as_object()
        .ok_or_else(|| usage("parameter file lacks `config`"))?
        .iter()
        .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
        .collect();
    let model = SupervisedModel::new(kind, dim)?;
    if theta.len() != model.num_params() {
        return Err(CliError::from(phidro::Error::Dimension {
            expected: model.num_params(),
            got: theta.len(),
        }));
    }
    Ok((model, theta, config))
}

pub fn regfx(a: RegfxArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let loss_name = r.get("loss", a.loss, "quadratic".to_string())?;
    let regime: Regime = parse("regime", &r.get("regime", a.regime, "variation".to_string())?)?;
    let steps = r.get("steps", a.steps, 8)?;
    let spec = divergence(&mut r, a.divergence, a.alpha)?;
    let norm: Norm = parse("norm", &r.get("norm", a.norm, "linf".to_string())?)?;
    let atoms = r.get("atoms", a.atoms, FloatList(vec![0.3, -0.2]))?.0;
    let grid = r.get("grid", a.grid, regfx::DEFAULT_GRID)?;
    let mc = r.get("mc_samples", a.mc_samples, regfx::DEFAULT_MC_SAMPLES)?;
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let config = r.finish()?;

    let loss = TestLoss::standard(&loss_name)?;
    let d = loss.dim();
    if atoms.is_empty() || atoms.len() % d != 0 {
        return Err(usage(format!("`atoms` must hold a multiple of {d} coordinates")));
    }
    let setup = StudySetup {
        atoms: atoms.chunks(d).map(<[f64]>::to_vec).collect(),
        divergence: spec,
        norm,
        quadrature: if grid > 0 {
            Quadrature::Grid { n: grid }
        } else {
            Quadrature::MonteCarlo { samples: mc, seed }
        },
    };
    let report = regfx::run_scaling_study(&loss, regime, steps, &setup)?;
    let mut t = Table::new(&["k", "rho", "eta", "gap", "reg", "rel_err", "stderr"]);
    for row in &report.rows {
        t.push(vec![
            row.k.into(),
            row.rho.into(),
            row.eta.into(),
            row.gap.into(),
            row.reg.into(),
            row.rel_err.into(),
            row.stderr.into(),
        ]);
    }
    emit::emit_table(&t, fmt, "regfx", &config, out.as_deref())
}

pub fn rl(a: RlArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let robust = r.switch("robust", a.robust)?;
    let eta = r.get("eta", a.eta, 0.5)?;
    let rho = r.get("rho", a.rho, 1.0)?;
    let episodes = r.get("episodes", a.episodes, 2000)?;
    let steps = r.optional("steps", a.steps)?;
    let eval_episodes = r.get("eval_episodes", a.eval_episodes, 1000)?;
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let eval_out = output(&mut r, "eval_out", a.eval_out)?;
    let config = r.finish()?;
    positive("eta", eta)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(usage(format!("`rho` must be nonnegative, got {rho}")));
    }

    let mdp = GridMDP::benchmark();
    let cfg = QLearningConfig {
        episodes: Some(episodes),
        steps,
        robust: robust.then_some(Robustness { eta, rho }),
        seed,
        ..Default::default()
    };
    let result = rl::run_q_learning(&mdp, &cfg)?;
    let mut t = Table::new(&["episode", "return"]);
    for (i, ret) in result.returns.iter().enumerate() {
        t.push(vec![i.into(), (*ret).into()]);
    }
    emit::emit_table(&t, fmt, "rl", &config, out.as_deref())?;

    let mut e = Table::new(&["mdp", "mean", "stderr"]);
    let eval_seed = phidro::rng::derive_seed(seed, 1);
    let nominal = rl::evaluate_policy(&result.q, &mdp, eval_episodes, cfg.max_episode_len, eval_seed)?;
    e.push(vec!["nominal".into(), nominal.mean.into(), nominal.stderr.into()]);
    for v in Variant::ALL {
        let p = rl::evaluate_policy(&result.q, &v.build(), eval_episodes, cfg.max_episode_len, eval_seed)?;
        e.push(vec![v.to_string().into(), p.mean.into(), p.stderr.into()]);
    }
    for row in &e.rows {
        if let [Cell::Text(name), Cell::Float(m), Cell::Float(s)] = &row[..] {
            eprintln!("{name:>9}: {m:.4} ± {s:.4}");
        }
    }
    if let Some(path) = eval_out {
        emit::emit_table(&e, fmt, "rl", &config, Some(&path))?;
    }
    Ok(())
}

pub fn pricing(a: PricingArgs, common: &Common, mut r: Resolver) -> Result<(), CliError> {
    let defaults = PricingConfig::default();
    let covariates = r.get("M", a.covariates, 100)?;
    let samples = r.get("m", a.samples, 50)?;
    let rho = positive("rho", r.get("rho", a.rho, defaults.rho)?)?;
    let eta = positive("eta", r.get("eta", a.eta, defaults.eta)?)?;
    let trials = r.get("trials", a.trials, 50)?;
    let cfg = PricingConfig {
        rho,
        eta,
        iterations: r.get("T", a.iterations, defaults.iterations)?,
        step: r.get("step", a.step, defaults.step)?,
        max_level: r.get("L", a.max_level, defaults.max_level)?,
        n_outer: r.get("n_outer", a.n_outer, defaults.n_outer)?,
        theta_radius: r.get("radius", a.radius, defaults.theta_radius)?,
        ground_truth_samples: r.get("gt_samples", a.gt_samples, defaults.ground_truth_samples)?,
        with_fgm: r.get("fgm", a.no_fgm.then_some(false), true)?,
    };
    let seed = r.get("seed", common.seed, 0)?;
    let fmt = format(&mut r, common, Format::Csv)?;
    let out = output(&mut r, "out", a.out)?;
    let config = r.finish()?;

    let outcomes = pricing::run_pricing_trials(covariates, samples, trials, seed, &cfg)?;
    let mut t = Table::new(&["trial", "seed", "risk_star", "risk_erm", "risk_reg", "risk_fgm", "j_reg", "j_fgm"]);
    for (i, o) in outcomes.iter().enumerate() {
        t.push(vec![
            i.into(),
            o.seed.into(),
            o.risk_star.into(),
            o.risk_erm.into(),
            o.risk_reg.into(),
            o.risk_fgm.into(),
            o.j_reg.into(),
            o.j_fgm.into(),
        ]);
    }
    let defined: Vec<f64> = outcomes.iter().filter_map(|o| o.j_reg).collect();
    if !defined.is_empty() {
        eprintln!(
            "mean J(reg) over {} trials: {:.6}",
            defined.len(),
            defined.iter().sum::<f64>() / defined.len() as f64
        );
    }
    emit::emit_table(&t, fmt, "pricing", &config, out.as_deref())
}
