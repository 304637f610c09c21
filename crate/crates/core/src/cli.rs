//! The `pathdensity` command-line tool.
//!
//! Every flag can also be given in a JSON file passed with `--config`, using
//! the flag's long name as key; flags on the command line win. The worker
//! count comes from `--threads`, then the config key `threads`, then the
//! `PATHDENSITY_THREADS` environment variable.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 bad input data,
//! 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::geometry::Vec2;
use crate::io;
use crate::kernels::KernelSpec;
use crate::levelset::{level_set, quantile, GridSpec};
use crate::model::{pentagon_example_with, FilamentModel, PENTAGON_POINTS};
use crate::oracle::{
    convergence_experiment, maxima_and_saddles, model_critical_points, rate_probe_points, ConvergenceConfig, OracleConfig, PathBank, ProbeSet,
};
use crate::path_density::{default_bandwidths, BandwidthPlan, PathDensityRun, PathMethod, DEFAULT_C_H, DEFAULT_C_NU};
use crate::svg::{four_panel_figure, view_box, FigureInput};

pub const THREADS_ENV: &str = "PATHDENSITY_THREADS";

/// Names accepted by `--model` besides a path to a model JSON file.
pub const BUILTIN_MODELS: [&str; 4] = ["pentagon", "pentagon-bg", "two-gaussian", "triangle"];

#[derive(Debug, Parser)]
#[command(name = "pathdensity", version, about = "Filament detection with ascent-path densities")]
struct Cli {
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a point cloud from a builtin or JSON model.
    Simulate(SimulateArgs),
    /// Trace ascent paths and estimate the path density of a point cloud.
    Estimate(EstimateArgs),
    /// Monte-Carlo path density of a known model over a grid.
    Oracle(OracleArgs),
    /// Sup-norm error of the estimator against the oracle for growing n.
    Converge(ConvergeArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct SimulateArgs {
    /// Builtin model name or model JSON file.
    #[arg(long)]
    model: Option<String>,
    /// Points on the structure (default 500).
    #[arg(long)]
    n: Option<usize>,
    /// Uniform background points for pentagon-bg (default 500).
    #[arg(long)]
    background: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct EstimateArgs {
    /// Point cloud CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// KDE bandwidth (overrides the schedule).
    #[arg(long)]
    h: Option<f64>,
    /// Path bandwidth (overrides the schedule).
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    c_h: Option<f64>,
    #[arg(long)]
    c_nu: Option<f64>,
    /// Grid nodes per side (default 200).
    #[arg(long)]
    grid: Option<usize>,
    /// Level as a quantile of the estimate at the data points (default 0.9).
    #[arg(long)]
    quantile: Option<f64>,
    /// Absolute level; overrides --quantile.
    #[arg(long)]
    lambda: Option<f64>,
    /// Leading vertices hidden in the trimmed-paths panel, or `auto`.
    #[arg(long)]
    trim: Option<String>,
    /// `flow` or `mean-shift`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct OracleArgs {
    /// Model JSON file or builtin model name.
    #[arg(long)]
    model: Option<String>,
    /// Monte-Carlo paths (default 100000).
    #[arg(long)]
    n_mc: Option<usize>,
    /// Inner extrapolation radius (default sigma/20).
    #[arg(long)]
    r1: Option<f64>,
    /// Grid nodes per side over the model bounds (default 100).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Point cloud whose oracle values set the level of `oracle_levelset.csv`.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Quantile for the oracle level set (default 0.9).
    #[arg(long)]
    quantile: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct ConvergeArgs {
    #[arg(long)]
    model: Option<String>,
    /// Comma-separated sample sizes (default 200,800,3200).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Replicates per sample size (default 10).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo paths for the oracle (default 100000).
    #[arg(long)]
    n_mc: Option<usize>,
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    c_h: Option<f64>,
    #[arg(long)]
    c_nu: Option<f64>,
    /// Probe grid nodes per side (default 20).
    #[arg(long)]
    probe_grid: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// A failed command: message and process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::Model(_) => 2,
            Error::Data { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Numerical { .. } | Error::StartTooFar { .. } | Error::NondifferentiableBoundary { .. } => 4,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<serde_json::Map<String, Value>> {
    let Some(path) = path else { return Ok(Default::default()) };
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::usage(format!("config {} must hold a JSON object", path.display()))),
        Err(e) => Err(CliError::usage(format!("config {}: {e}", path.display()))),
    }
}

/// Overlays the explicitly given flags on the config file values.
fn merge<T: Serialize + DeserializeOwned>(flags: &T, mut config: serde_json::Map<String, Value>) -> CliResult<T> {
    config.remove("threads");
    if let Value::Object(given) = serde_json::to_value(flags).expect("flags serialise") {
        for (k, v) in given {
            if !v.is_null() {
                config.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(config)).map_err(|e| CliError::usage(format!("invalid configuration: {e}")))
}

fn thread_count(flag: Option<usize>, config: &serde_json::Map<String, Value>) -> CliResult<Option<usize>> {
    if let Some(t) = flag {
        return Ok(Some(t));
    }
    if let Some(v) = config.get("threads") {
        return v.as_u64().map(|t| Some(t as usize)).ok_or_else(|| CliError::usage("config key `threads` must be a positive integer"));
    }
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => {
            s.trim().parse().map(Some).map_err(|_| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))
        }
        _ => Ok(None),
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let config_path = match &cli.command {
        Command::Simulate(a) => a.config.clone(),
        Command::Estimate(a) => a.config.clone(),
        Command::Oracle(a) => a.config.clone(),
        Command::Converge(a) => a.config.clone(),
    };
    let config = load_config(config_path.as_deref())?;
    let threads = thread_count(cli.threads, &config)?;
    if threads == Some(0) {
        return Err(CliError::usage("thread count must be at least 1"));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(merge(&a, config)?),
        Command::Estimate(a) => estimate(merge(&a, config)?),
        Command::Oracle(a) => oracle(merge(&a, config)?),
        Command::Converge(a) => converge(merge(&a, config)?),
    })
}

fn out_dir(out: &Option<PathBuf>) -> CliResult<PathBuf> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError { code: 3, message: format!("cannot create {}: {e}", dir.display()) })?;
    Ok(dir)
}

fn parse_method(m: &Option<String>) -> CliResult<PathMethod> {
    match m.as_deref() {
        None | Some("flow") => Ok(PathMethod::Flow),
        Some("mean-shift") => Ok(PathMethod::MeanShift),
        Some(other) => Err(CliError::usage(format!("unknown method {other:?}; expected `flow` or `mean-shift`"))),
    }
}

/// A builtin model, or a JSON model file. Pentagon models are drawn with `rng`.
fn resolve_model(name: Option<&str>, seed: u64, what: &str) -> CliResult<FilamentModel> {
    let name = name.ok_or_else(|| CliError::usage(format!("{what} needs --model (a model JSON file or one of {})", BUILTIN_MODELS.join(", "))))?;
    match name {
        "two-gaussian" => Ok(FilamentModel::two_gaussian()),
        "triangle" => Ok(FilamentModel::triangle_clusters()),
        "pentagon" | "pentagon-bg" => {
            let background = if name == "pentagon" { 0 } else { PENTAGON_POINTS };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(pentagon_example_with(&mut rng, PENTAGON_POINTS, background)?.0)
        }
        path => {
            let p = Path::new(path);
            if !p.is_file() {
                return Err(CliError::usage(format!("unknown model {path:?}: not a builtin ({}) and not a file", BUILTIN_MODELS.join(", "))));
            }
            let text = fs::read_to_string(p).map_err(Error::from)?;
            FilamentModel::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
        }
    }
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    let seed = a.seed.ok_or_else(|| CliError::usage("simulate needs --seed"))?;
    let name = a.model.as_deref().ok_or_else(|| CliError::usage("simulate needs --model"))?;
    let n = a.n.unwrap_or(PENTAGON_POINTS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (model, cloud) = match name {
        "pentagon" => pentagon_example_with(&mut rng, n, a.background.unwrap_or(0))?,
        "pentagon-bg" => pentagon_example_with(&mut rng, n, a.background.unwrap_or(PENTAGON_POINTS))?,
        other => {
            let model = resolve_model(Some(other), seed, "simulate")?;
            let cloud = model.sample(n, &mut rng)?;
            (model, cloud)
        }
    };
    let dir = out_dir(&a.out)?;
    io::write_points_csv(&dir.join("points.csv"), cloud.points())?;
    fs::write(dir.join("model.json"), model.to_json()? + "\n").map_err(Error::from)?;
    Ok(())
}

fn estimate(a: EstimateArgs) -> CliResult<()> {
    let input = a.input.as_ref().ok_or_else(|| CliError::usage("estimate needs --input"))?;
    let cloud = io::read_points_csv(input)?;
    if cloud.len() < 2 {
        return Err(CliError { code: 3, message: format!("{}: need at least 2 points", input.display()) });
    }
    let method = parse_method(&a.method)?;
    let schedule = default_bandwidths(cloud.len(), cloud.spread(), a.c_h.unwrap_or(DEFAULT_C_H), a.c_nu.unwrap_or(DEFAULT_C_NU))?;
    let plan = match (a.h, a.nu) {
        (None, None) => schedule,
        (h, nu) => BandwidthPlan::user(h.unwrap_or(schedule.h), nu.unwrap_or(schedule.nu))?,
    };
    let run = PathDensityRun::new(&cloud, KernelSpec::gaussian(), plan, method)?;

    let grid = GridSpec::square(view_box(cloud.points()), a.grid.unwrap_or(200))?;
    let field = run.estimator.field(&grid);
    let at_data = run.estimator.estimate_many(cloud.points());
    let q = a.quantile.unwrap_or(0.9);
    let lambda = match a.lambda {
        Some(l) => l,
        None => quantile(&at_data, q)?,
    };
    let mask = level_set(&field, lambda);

    let paths = run.ensemble.paths();
    let trims: Vec<usize> = match a.trim.as_deref() {
        None | Some("auto") => paths.iter().map(|p| p.trim_hint).collect(),
        Some(s) => {
            let t: usize = s.parse().map_err(|_| CliError::usage(format!("--trim must be a count or `auto`, got {s:?}")))?;
            vec![t; paths.len()]
        }
    };

    let dir = out_dir(&a.out)?;
    io::write_paths_csv(&dir.join("paths.csv"), paths)?;
    io::write_field_csv(&dir.join("field.csv"), &field)?;
    io::write_field_grid(&dir.join("field.txt"), &field)?;
    io::write_mask_csv(&dir.join("levelset.csv"), &grid, &mask)?;
    let svg = four_panel_figure(&FigureInput { points: cloud.points(), paths, trims: &trims, grid: &grid, mask: &mask });
    fs::write(dir.join("figure.svg"), svg).map_err(Error::from)?;
    let summary = json!({
        "n": cloud.len(),
        "bandwidths": plan,
        "method": method,
        "grid": grid,
        "quantile": if a.lambda.is_some() { Value::Null } else { json!(q) },
        "lambda": lambda,
        "levelset_cells": mask.count(),
        "levelset_fraction": mask.fraction(),
        "converged_paths": paths.iter().filter(|p| p.converged).count(),
        "trim": a.trim.clone().unwrap_or_else(|| "auto".into()),
    });
    io::write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

fn oracle(a: OracleArgs) -> CliResult<()> {
    let seed = a.seed.unwrap_or(0);
    let model = resolve_model(a.model.as_deref(), seed, "oracle")?;
    let r1 = a.r1.unwrap_or(model.max_sigma() / 20.0);
    let cfg = OracleConfig::with_radius(&model, a.n_mc.unwrap_or(100_000), r1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bank = PathBank::sample(&model, &model, &cfg, &mut rng)?;
    let grid = GridSpec::square(model.bounds(), a.grid.unwrap_or(100))?;
    let field = bank.field(&grid, r1);
    let critical = model_critical_points(&model)?;

    let dir = out_dir(&a.out)?;
    io::write_oracle_field_csv(&dir.join("oracle_field.csv"), &field)?;
    io::write_field_grid(&dir.join("oracle_field.txt"), &field.field)?;
    io::write_critical_points_csv(&dir.join("critical_points.csv"), &critical)?;
    let mut summary = json!({
        "n_mc": cfg.n_mc,
        "r1": r1,
        "r2": 2.0 * r1,
        "seed": seed,
        "grid": grid,
        "saturated_nodes": field.field.saturated().map_or(0, |s| s.iter().filter(|b| **b).count()),
        "critical_points": critical.len(),
    });
    if let Some(points) = &a.points {
        let cloud = io::read_points_csv(points)?;
        let values: Vec<f64> = bank.path_density_many(cloud.points(), r1).iter().map(|e| e.value).collect();
        let q = a.quantile.unwrap_or(0.9);
        let lambda = quantile(&values, q)?;
        let mask = level_set(&field.field, lambda);
        io::write_mask_csv(&dir.join("oracle_levelset.csv"), &grid, &mask)?;
        summary["quantile"] = json!(q);
        summary["lambda"] = json!(lambda);
        summary["levelset_cells"] = json!(mask.count());
    }
    io::write_json(&dir.join("oracle_summary.json"), &summary)?;
    Ok(())
}

fn converge(a: ConvergeArgs) -> CliResult<()> {
    let seed = a.seed.unwrap_or(0);
    let model = resolve_model(a.model.as_deref(), seed, "converge")?;
    let cfg = ConvergenceConfig {
        n_list: a.n.clone().unwrap_or_else(|| vec![200, 800, 3200]),
        replicates: a.reps.unwrap_or(10),
        c_h: a.c_h.unwrap_or(DEFAULT_C_H),
        c_nu: a.c_nu.unwrap_or(DEFAULT_C_NU),
        method: parse_method(&a.method)?,
    };
    if cfg.n_list.iter().any(|&n| n < 2) {
        return Err(CliError::usage("every sample size must be at least 2"));
    }
    let r1 = a.r1.unwrap_or(model.max_sigma() / 20.0);
    let oracle_cfg = OracleConfig::with_radius(&model, a.n_mc.unwrap_or(100_000), r1);
    let (points, exclusion) = rate_probe_points(&model, &cfg, a.probe_grid.unwrap_or(20))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bank = PathBank::sample(&model, &model, &oracle_cfg, &mut rng)?;
    let probes = ProbeSet::from_bank(&bank, points, r1);
    let table = convergence_experiment(&model, &cfg, &probes, &mut rng)?;
    let (maxima, saddles) = maxima_and_saddles(&model_critical_points(&model)?);

    let dir = out_dir(&a.out)?;
    io::write_rate_table_csv(&dir.join("rate_table.csv"), &table)?;
    let medians: Vec<Value> = table.medians().iter().map(|(n, m)| json!({ "n": n, "median_sup_error": m })).collect();
    let summary = json!({
        "slope": table.fit.slope,
        "intercept": table.fit.intercept,
        "slope_std_error": table.fit.std_error,
        "ci_low": table.fit.ci_low,
        "ci_high": table.fit.ci_high,
        "medians": medians,
        "config": cfg,
        "seed": seed,
        "n_mc": oracle_cfg.n_mc,
        "r1": r1,
        "probes": probes.points.len(),
        "exclusion_radius": exclusion,
        "excluded_maxima": maxima.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
        "excluded_saddles": saddles.iter().map(|p: &Vec2| [p.x, p.y]).collect::<Vec<_>>(),
    });
    io::write_json(&dir.join("rate_summary.json"), &summary)?;
    Ok(())
}
