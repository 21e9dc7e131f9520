//! Command-line runner for the adaptive-collocation PDE solver.
//!
//! Subcommands: `train`, `evaluate`, `run-experiment`, `dump-points`,
//! `demo-table1`, `slice`. Every config key has a matching override flag.
//! On failure a single machine-readable JSON line goes to stderr and the
//! exit code is nonzero.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use adcol::checkpoint;
use adcol::config::RunConfig;
use adcol::experiment::{
    demo_surface, demo_table1, run_experiment, slice_grid, write_points_csv, write_slice_csv,
    ExperimentArm, ExperimentSpec, SliceAxis,
};
use adcol::metrics::{error_pair, TestSet};
use adcol::points::Region;
use adcol::samplers::{self, DomainInterior, PointSource, ResidualDensity, SampleBatch};
use adcol::stencil::{Scheme, StencilConfig};
use adcol::trainer::{train, SamplerKind, TrainingConfig};

#[derive(Parser)]
#[command(
    name = "adcol",
    version,
    about = "deep least-squares PDE solver with adaptive collocation sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a solution network and write history, timing and a checkpoint.
    Train(TrainArgs),
    /// Score a checkpoint on the fixed test set; prints `rel_l2,max_mod`.
    Evaluate(EvaluateArgs),
    /// Run a multi-arm paired-seed comparison from a spec file.
    RunExperiment(RunExperimentArgs),
    /// Write a sampled point batch as CSV.
    DumpPoints(DumpPointsArgs),
    /// Ellipse point-count demonstration; writes the three point clouds.
    DemoTable1(DemoArgs),
    /// Emit a 2D slice grid of phi and |u - phi|.
    Slice(SliceArgs),
}

/// Flag overrides applied on top of the config file; one flag per key.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// Config file (TOML). Defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sampler: Option<String>,
    /// Residual exponent p.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    annuli: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    adaptive_boundary: Option<bool>,
    /// Stencil step (config key `stencil.h`).
    #[arg(long)]
    stencil_h: Option<f64>,
    /// Config key `rar.base_count`.
    #[arg(long)]
    rar_base_count: Option<usize>,
    /// Config key `rar.top_k`.
    #[arg(long)]
    rar_top_k: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Weight init: fan_bias|xavier.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// "schedule" or a constant rate.
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    test_points: Option<usize>,
    #[arg(long)]
    test_seed: Option<u64>,
}

impl Overrides {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg: RunConfig = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.problem {
            cfg.problem = v.clone();
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = &self.sampler {
            cfg.sampler = v.clone();
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = self.annuli {
            cfg.annuli = v;
        }
        if let Some(v) = self.pool_size {
            cfg.pool_size = Some(v);
        }
        if let Some(v) = self.adaptive_boundary {
            cfg.adaptive_boundary = v;
        }
        if let Some(v) = self.stencil_h {
            cfg.stencil.h = v;
        }
        if let Some(v) = self.rar_base_count {
            cfg.rar.base_count = v;
        }
        if let Some(v) = self.rar_top_k {
            cfg.rar.top_k = v;
        }
        if let Some(v) = self.depth {
            cfg.network.depth = v;
        }
        if let Some(v) = self.width {
            cfg.network.width = v;
        }
        if let Some(v) = &self.init {
            cfg.network.init = v.clone();
        }
        if let Some(v) = self.epochs {
            cfg.training.epochs = v;
        }
        if let Some(v) = self.n1 {
            cfg.training.n1 = v;
        }
        if let Some(v) = self.n2 {
            cfg.training.n2 = Some(v);
        }
        if let Some(v) = self.lambda {
            cfg.training.lambda = v;
        }
        if let Some(v) = self.seed {
            cfg.training.seed = v;
        }
        if let Some(v) = self.eval_every {
            cfg.training.eval_every = v;
        }
        if let Some(v) = self.checkpoint_every {
            cfg.training.checkpoint_every = v;
        }
        if let Some(v) = &self.lr {
            cfg.training.lr = match v.parse::<f64>() {
                Ok(rate) => adcol::config::LrSetting::Constant(rate),
                Err(_) => adcol::config::LrSetting::Named(v.clone()),
            };
        }
        if let Some(v) = self.test_points {
            cfg.training.test_points = v;
        }
        if let Some(v) = self.test_seed {
            cfg.training.test_seed = Some(v);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory for history.csv, timing.csv and model.ckpt.
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Checkpoint to score.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Print the `rel_l2,max_mod` header line first.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct RunExperimentArgs {
    /// Experiment spec file (TOML).
    spec: PathBuf,
    /// Override the spec's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the spec's worker count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct DumpPointsArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// How many points to draw.
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Density source for the adaptive samplers: a checkpoint path, or
    /// "demo" for the synthetic demonstration surface.
    #[arg(long)]
    density: Option<String>,
    /// Draw boundary points instead of interior ones.
    #[arg(long)]
    boundary: bool,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    /// Output directory for the point clouds and counts.
    #[arg(long, default_value = "table1")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SliceArgs {
    #[command(flatten)]
    overrides: Overrides,
    /// Checkpoint to slice.
    #[arg(long)]
    checkpoint: PathBuf,
    /// First axis: "t" or "x<k>".
    #[arg(long)]
    ax1: Option<String>,
    /// Second axis: "t" or "x<k>".
    #[arg(long)]
    ax2: Option<String>,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 101)]
    resolution: usize,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// On-disk schema of an experiment spec: the run-config keys plus trials,
/// seeds, output directory and an `[[arm]]` table per sampler under test.
#[derive(Debug, Deserialize)]
struct ExperimentFile {
    name: Option<String>,
    #[serde(flatten)]
    run: RunConfig,
    trials: usize,
    base_seed: Option<u64>,
    seeds: Option<Vec<u64>>,
    out_dir: PathBuf,
    #[serde(default = "default_workers")]
    workers: usize,
    arm: Vec<ArmFile>,
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArmFile {
    name: String,
    sampler: String,
    p: Option<f64>,
    burn_in: Option<usize>,
    annuli: Option<usize>,
    pool_size: Option<usize>,
    adaptive_boundary: Option<bool>,
    rar_base_count: Option<usize>,
    rar_top_k: Option<usize>,
}

fn load_experiment(
    path: &Path,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> anyhow::Result<ExperimentSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    let file: ExperimentFile =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let problem = file.run.problem()?;
    let base = file.run.training_config()?;
    let seeds = match (&file.seeds, file.base_seed) {
        (Some(seeds), _) => seeds.clone(),
        (None, Some(base_seed)) => (0..file.trials as u64).map(|k| base_seed + k).collect(),
        (None, None) => (0..file.trials as u64).collect(),
    };
    if seeds.len() != file.trials {
        bail!("spec lists {} seeds for {} trials", seeds.len(), file.trials);
    }
    let mut arms = Vec::new();
    for arm in &file.arm {
        let mut settings = file.run.sampler_settings()?;
        settings.kind = arm.sampler.parse::<SamplerKind>()?;
        if let Some(v) = arm.p {
            settings.exponent = v;
        }
        if let Some(v) = arm.burn_in {
            settings.burn_in = v;
        }
        if let Some(v) = arm.annuli {
            settings.annuli = v;
        }
        if let Some(v) = arm.pool_size {
            settings.pool_size = Some(v);
        }
        if let Some(v) = arm.adaptive_boundary {
            settings.adaptive_boundary = v;
        }
        if let Some(v) = arm.rar_base_count {
            settings.rar_base = v;
        }
        if let Some(v) = arm.rar_top_k {
            settings.rar_top_k = v;
        }
        arms.push(ExperimentArm { name: arm.name.clone(), sampler: settings });
    }
    Ok(ExperimentSpec {
        name: file.name.unwrap_or_else(|| "experiment".into()),
        problem,
        base,
        arms,
        seeds,
        out_dir: out.unwrap_or(file.out_dir),
        workers: workers.unwrap_or(file.workers),
    })
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let cfg = args.overrides.resolve()?;
    let problem = cfg.problem()?;
    let mut training: TrainingConfig = cfg.training_config()?;
    if training.checkpoint_every > 0 {
        training.checkpoint_dir = Some(args.out.join("checkpoints"));
    }
    std::fs::create_dir_all(&args.out)?;
    let outcome = train::<f64>(&problem, &training)?;
    let mut hist = Vec::new();
    outcome.history.write_history_csv(&mut hist)?;
    std::fs::write(args.out.join("history.csv"), hist)?;
    let mut timing = Vec::new();
    outcome.history.write_timing_csv(&mut timing)?;
    std::fs::write(args.out.join("timing.csv"), timing)?;
    checkpoint::save_network(args.out.join("model.ckpt"), &outcome.network)?;
    if let Some(info) = &outcome.diverged {
        bail!("run diverged at epoch {}: {}", info.epoch, info.detail);
    }
    if let Some(last) = outcome.history.last() {
        println!(
            "trained {} epochs: loss {:.6e}, rel_l2 {:.6e}, max_mod {:.6e}",
            training.epochs, last.loss, last.rel_l2, last.max_mod
        );
    }
    Ok(())
}

fn cmd_evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let cfg = args.overrides.resolve()?;
    let problem = cfg.problem()?;
    let training = cfg.training_config()?;
    let net = checkpoint::load_network::<f64>(&args.checkpoint)?;
    if net.input_dim() != problem.input_dim() {
        bail!(
            "checkpoint input dim {} does not match problem input dim {}",
            net.input_dim(),
            problem.input_dim()
        );
    }
    let seed = training.test_seed.unwrap_or_else(|| adcol::metrics::default_test_seed(&problem));
    let test = TestSet::<f64>::generate(&problem, seed, training.test_points)?;
    let (rel_l2, max_mod) = error_pair(&net, &test)?;
    if args.header {
        println!("rel_l2,max_mod");
    }
    println!("{rel_l2},{max_mod}");
    Ok(())
}

fn cmd_run_experiment(args: &RunExperimentArgs) -> anyhow::Result<()> {
    let spec = load_experiment(&args.spec, args.out.clone(), args.workers)?;
    let report = run_experiment(&spec)?;
    println!("arm,metric,trials,failed,mean,std,min,cv");
    for s in &report.summaries {
        println!(
            "{},{},{},{},{},{},{},{}",
            s.arm, s.metric, s.trials, s.failed, s.mean, s.std, s.min, s.cv
        );
    }
    for r in &report.reductions {
        println!("# reduction {} {} ({}): {:.2}%", r.arm, r.metric, r.basis, r.reduction_pct);
    }
    Ok(())
}

fn cmd_dump_points(args: &DumpPointsArgs) -> anyhow::Result<()> {
    let cfg = args.overrides.resolve()?;
    let problem = cfg.problem()?;
    let settings = cfg.sampler_settings()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.training.seed);
    let stencil = StencilConfig::new(cfg.stencil.h, Scheme::CentralSecond)?;

    let batch: SampleBatch<f64> = if args.boundary {
        samplers::sample_boundary(args.count, &problem, &mut rng)?
    } else {
        let proposal = DomainInterior::new(problem.domain(), settings.annuli)?;
        match settings.kind {
            SamplerKind::Annular => SampleBatch::interior(
                proposal.draw_batch(args.count, &mut rng)?,
                samplers::SamplerTag::UniformAnnular,
            ),
            kind => {
                let net;
                let density: ResidualDensity<'_, f64> = match args.density.as_deref() {
                    Some("demo") => {
                        if problem.input_dim() != 2 {
                            bail!("the demo surface is two-dimensional; pick a 2d problem");
                        }
                        ResidualDensity::new(
                            |x: &[f64]| demo_surface(x),
                            settings.exponent,
                            Region::Interior,
                        )
                    }
                    Some(path) => {
                        net = checkpoint::load_network::<f64>(path)?;
                        if net.input_dim() != problem.input_dim() {
                            bail!("checkpoint input dim does not match the problem");
                        }
                        let p = problem.clone();
                        let net_ref = &net;
                        let stencil_copy = stencil;
                        ResidualDensity::new(
                            move |x: &[f64]| {
                                p.interior_residual(|y| net_ref.forward(y), x, &stencil_copy).abs()
                            },
                            settings.exponent,
                            Region::Interior,
                        )
                    }
                    None => bail!("adaptive samplers need --density <checkpoint path|demo>"),
                };
                match kind {
                    SamplerKind::MetropolisHastings => samplers::metropolis_sample_vectorized(
                        &density,
                        args.count,
                        settings.burn_in,
                        &proposal,
                        &mut rng,
                    )?,
                    SamplerKind::SelfNormalized => samplers::self_normalized_sample(
                        &density,
                        args.count,
                        &mut rng,
                        settings.pool_size.unwrap_or(args.count),
                        &proposal,
                    )?,
                    SamplerKind::Rar => samplers::rar_sample(
                        &density,
                        settings.rar_base,
                        settings.rar_top_k,
                        &DomainInterior::uniform(problem.domain()),
                        &mut rng,
                    )?,
                    SamplerKind::Annular => unreachable!(),
                }
            }
        }
    };
    let mut out: Vec<u8> = Vec::new();
    write_points_csv(&mut out, &batch, problem.time_dependent())?;
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{}", String::from_utf8_lossy(&out)),
    }
    Ok(())
}

fn cmd_demo(args: &DemoArgs) -> anyhow::Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let demo = demo_table1(&mut rng)?;
    let (a, m, s) = demo.counts();
    for (name, points) in [
        ("annular", &demo.annular),
        ("metropolis", &demo.metropolis),
        ("self_normalized", &demo.self_normalized),
    ] {
        let batch = SampleBatch::interior(points.clone(), samplers::SamplerTag::UniformAnnular);
        let mut out = Vec::new();
        write_points_csv(&mut out, &batch, false)?;
        std::fs::write(args.out.join(format!("{name}.csv")), out)?;
    }
    std::fs::write(
        args.out.join("counts.csv"),
        format!("sampler,inside_count\nannular,{a}\nmetropolis,{m}\nself_normalized,{s}\n"),
    )?;
    println!("sampler,inside_count");
    println!("annular,{a}");
    println!("metropolis,{m}");
    println!("self_normalized,{s}");
    Ok(())
}

fn cmd_slice(args: &SliceArgs) -> anyhow::Result<()> {
    let cfg = args.overrides.resolve()?;
    let problem = cfg.problem()?;
    let net = checkpoint::load_network::<f64>(&args.checkpoint)?;
    let default_ax1 = if problem.time_dependent() { "t" } else { "x0" };
    let default_ax2 = "x0";
    let default_ax2 = if problem.time_dependent() { default_ax2 } else { "x1" };
    let ax1_name = args.ax1.clone().unwrap_or_else(|| default_ax1.into());
    let ax2_name = args.ax2.clone().unwrap_or_else(|| default_ax2.into());
    let ax1: SliceAxis = ax1_name.parse()?;
    let ax2: SliceAxis = ax2_name.parse()?;
    let rows = slice_grid(&net, &problem, ax1, ax2, args.resolution)?;
    let mut out: Vec<u8> = Vec::new();
    write_slice_csv(&mut out, &rows, &ax1_name, &ax2_name)?;
    match &args.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{}", String::from_utf8_lossy(&out)),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::RunExperiment(args) => cmd_run_experiment(args),
        Command::DumpPoints(args) => cmd_dump_points(args),
        Command::DemoTable1(args) => cmd_demo(args),
        Command::Slice(args) => cmd_slice(args),
    };
    if let Err(err) = result {
        let line = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{line}");
        std::process::exit(1);
    }
}
