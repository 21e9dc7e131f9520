//! Experiment runner: paired-seed sampler comparisons, the ellipse point
//! count demonstration, and plot-data emission.
//!
//! A comparison runs several arms (sampler configurations) over a shared
//! seed list: trial `k` of every arm uses the same seed, so paired arms
//! start from identical network parameters and their error difference is
//! attributable to the sampling strategy alone. Per-run history files, a
//! summary table (mean, standard deviation, minimum, coefficient of
//! variation per arm) and error-reduction rows against the first arm are
//! written under the output directory. Diverged runs are recorded as failed
//! and excluded from the aggregates.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand_chacha::ChaCha8Rng;

use crate::metrics::error_reduction;
use crate::nn::SolutionNetwork;
use crate::points::{PointSet, Region};
use crate::problems::PdeProblem;
use crate::samplers::{self, AnnularBall, ResidualDensity, SampleBatch};
use crate::trainer::{train, SamplerSettings, TrainingConfig};
use crate::{Error, Result};

/// One sampler configuration under comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentArm {
    pub name: String,
    pub sampler: SamplerSettings,
}

/// A full comparison: problem, shared training setup, arms, paired seeds.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: PdeProblem,
    /// Shared training configuration; each arm overrides the sampler block
    /// and the per-trial seed.
    pub base: TrainingConfig,
    pub arms: Vec<ExperimentArm>,
    /// Seeds, one per trial; arms are paired index-by-index.
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Trials running concurrently (each trial still parallelizes
    /// internally over points).
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::Config("experiment needs at least one arm".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("experiment needs at least one trial seed".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("worker count must be >= 1".into()));
        }
        let mut names: Vec<&str> = self.arms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.arms.len() {
            return Err(Error::Config("arm names must be unique".into()));
        }
        for arm in &self.arms {
            let cfg = TrainingConfig { sampler: arm.sampler.clone(), ..self.base.clone() };
            cfg.validate(&self.problem)?;
        }
        Ok(())
    }
}

/// Outcome of one arm/trial cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub arm: String,
    pub trial: usize,
    pub seed: u64,
    pub rel_l2: f64,
    pub max_mod: f64,
    pub diverged: bool,
    pub train_seconds: f64,
}

/// Aggregate row for one arm and one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: String,
    pub metric: &'static str,
    pub trials: usize,
    pub failed: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    /// Coefficient of variation, std/mean.
    pub cv: f64,
}

/// Error reduction of an arm against the baseline (first) arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRow {
    pub arm: String,
    pub metric: &'static str,
    /// Which statistic the reduction is computed from.
    pub basis: &'static str,
    pub reduction_pct: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<ArmSummary>,
    pub reductions: Vec<ReductionRow>,
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample standard deviation (n - 1 denominator); zero for a single value.
fn std_of(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn summarize(arm: &str, metric: &'static str, values: &[f64], failed: usize) -> ArmSummary {
    if values.is_empty() {
        return ArmSummary {
            arm: arm.into(),
            metric,
            trials: 0,
            failed,
            mean: f64::NAN,
            std: f64::NAN,
            min: f64::NAN,
            cv: f64::NAN,
        };
    }
    let mean = mean_of(values);
    let std = std_of(values, mean);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    ArmSummary { arm: arm.into(), metric, trials: values.len(), failed, mean, std, min, cv: std / mean }
}

/// Executes every arm x trial cell and writes per-run and summary CSVs.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out_dir)?;
    let jobs: Vec<(usize, usize)> = (0..spec.arms.len())
        .flat_map(|a| (0..spec.seeds.len()).map(move |t| (a, t)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, RunRecord)>> = Mutex::new(Vec::with_capacity(jobs.len()));
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..spec.workers.min(jobs.len()) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= jobs.len() || failure.lock().unwrap().is_some() {
                    return;
                }
                let (a, t) = jobs[j];
                match run_cell(spec, a, t) {
                    Ok(record) => results.lock().unwrap().push((j, record)),
                    Err(e) => {
                        let mut slot = failure.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut indexed = results.into_inner().unwrap();
    indexed.sort_by_key(|(j, _)| *j);
    let runs: Vec<RunRecord> = indexed.into_iter().map(|(_, r)| r).collect();

    let mut summaries = Vec::new();
    let mut reductions = Vec::new();
    let baseline = &spec.arms[0].name;
    let collect = |arm: &str, pick: fn(&RunRecord) -> f64| -> (Vec<f64>, usize) {
        let ok: Vec<f64> =
            runs.iter().filter(|r| r.arm == arm && !r.diverged).map(pick).collect();
        let failed = runs.iter().filter(|r| r.arm == arm && r.diverged).count();
        (ok, failed)
    };
    for arm in &spec.arms {
        let (l2, failed) = collect(&arm.name, |r| r.rel_l2);
        summaries.push(summarize(&arm.name, "rel_l2", &l2, failed));
        let (mm, failed) = collect(&arm.name, |r| r.max_mod);
        summaries.push(summarize(&arm.name, "max_mod", &mm, failed));
    }
    let (base_l2, _) = collect(baseline, |r| r.rel_l2);
    let (base_mm, _) = collect(baseline, |r| r.max_mod);
    for arm in spec.arms.iter().skip(1) {
        let (l2, _) = collect(&arm.name, |r| r.rel_l2);
        let (mm, _) = collect(&arm.name, |r| r.max_mod);
        if !l2.is_empty() && !base_l2.is_empty() {
            reductions.push(ReductionRow {
                arm: arm.name.clone(),
                metric: "rel_l2",
                basis: "mean",
                reduction_pct: error_reduction(mean_of(&l2), mean_of(&base_l2))?,
            });
            reductions.push(ReductionRow {
                arm: arm.name.clone(),
                metric: "rel_l2",
                basis: "median",
                reduction_pct: error_reduction(median_of(&l2), median_of(&base_l2))?,
            });
        }
        if !mm.is_empty() && !base_mm.is_empty() {
            reductions.push(ReductionRow {
                arm: arm.name.clone(),
                metric: "max_mod",
                basis: "mean",
                reduction_pct: error_reduction(mean_of(&mm), mean_of(&base_mm))?,
            });
            reductions.push(ReductionRow {
                arm: arm.name.clone(),
                metric: "max_mod",
                basis: "median",
                reduction_pct: error_reduction(median_of(&mm), median_of(&base_mm))?,
            });
        }
    }

    write_runs_csv(&spec.out_dir.join("runs.csv"), &runs)?;
    write_runs_timing_csv(&spec.out_dir.join("runs_timing.csv"), &runs)?;
    write_summary_csv(&spec.out_dir.join("summary.csv"), &summaries)?;
    write_reductions_csv(&spec.out_dir.join("reductions.csv"), &reductions)?;
    Ok(ExperimentReport { runs, summaries, reductions })
}

fn run_cell(spec: &ExperimentSpec, arm_idx: usize, trial: usize) -> Result<RunRecord> {
    let arm = &spec.arms[arm_idx];
    let seed = spec.seeds[trial];
    let config = TrainingConfig {
        sampler: arm.sampler.clone(),
        seed,
        ..spec.base.clone()
    };
    let outcome = train::<f64>(&spec.problem, &config)?;
    let dir = spec.out_dir.join(&arm.name).join(format!("trial_{trial:03}"));
    std::fs::create_dir_all(&dir)?;
    let mut hist = Vec::new();
    outcome.history.write_history_csv(&mut hist)?;
    std::fs::write(dir.join("history.csv"), hist)?;
    let mut timing = Vec::new();
    outcome.history.write_timing_csv(&mut timing)?;
    std::fs::write(dir.join("timing.csv"), timing)?;
    crate::checkpoint::save_network(dir.join("model.ckpt"), &outcome.network)?;
    let last = outcome.history.last();
    Ok(RunRecord {
        arm: arm.name.clone(),
        trial,
        seed,
        rel_l2: last.map_or(f64::NAN, |r| r.rel_l2),
        max_mod: last.map_or(f64::NAN, |r| r.max_mod),
        diverged: outcome.diverged.is_some(),
        train_seconds: last.map_or(0.0, |r| r.time_s),
    })
}

fn write_runs_csv(path: &Path, runs: &[RunRecord]) -> Result<()> {
    let mut out = String::from("arm,trial,seed,rel_l2,max_mod,diverged\n");
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.arm, r.trial, r.seed, r.rel_l2, r.max_mod, r.diverged
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_runs_timing_csv(path: &Path, runs: &[RunRecord]) -> Result<()> {
    let mut out = String::from("arm,trial,train_seconds\n");
    for r in runs {
        out.push_str(&format!("{},{},{}\n", r.arm, r.trial, r.train_seconds));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_summary_csv(path: &Path, rows: &[ArmSummary]) -> Result<()> {
    let mut out = String::from("arm,metric,trials,failed,mean,std,min,cv\n");
    for s in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            s.arm, s.metric, s.trials, s.failed, s.mean, s.std, s.min, s.cv
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_reductions_csv(path: &Path, rows: &[ReductionRow]) -> Result<()> {
    let mut out = String::from("arm,metric,basis,reduction_pct\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.arm, r.metric, r.basis, r.reduction_pct));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Synthetic squared-residual surface for the sampler demonstration:
/// a Gaussian bump filling the ellipse `x^2/0.18^2 + y^2/0.16^2 = 1` plus a
/// small plateau that keeps the chain live outside it.
pub fn demo_surface(x: &[f64]) -> f64 {
    let a = x[0] / 0.18;
    let b = x[1] / 0.16;
    (-(a * a + b * b)).exp() + 0.01
}

fn inside_demo_ellipse(x: &[f64]) -> bool {
    let a = x[0] / 0.18;
    let b = x[1] / 0.16;
    a * a + b * b < 1.0
}

/// Point clouds and ellipse counts of the sampler demonstration.
#[derive(Debug, Clone)]
pub struct Table1Demo {
    pub annular: PointSet<f64>,
    pub metropolis: PointSet<f64>,
    pub self_normalized: PointSet<f64>,
}

impl Table1Demo {
    pub fn count_inside(points: &PointSet<f64>) -> usize {
        points.iter().filter(|p| inside_demo_ellipse(p)).count()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (
            Self::count_inside(&self.annular),
            Self::count_inside(&self.metropolis),
            Self::count_inside(&self.self_normalized),
        )
    }
}

/// Demonstration settings: 500 points per sampler on the 2D unit disk,
/// annular proposal with 10 shells, `p = 1`, 3500 Metropolis burn-ins.
pub const DEMO_POINTS: usize = 500;
pub const DEMO_ANNULI: usize = 10;
pub const DEMO_BURN_IN: usize = 3500;

/// Draws the three demonstration point clouds over the synthetic surface.
pub fn demo_table1(rng: &mut ChaCha8Rng) -> Result<Table1Demo> {
    let proposal = AnnularBall::new(2, DEMO_ANNULI)?;
    let annular: SampleBatch<f64> =
        samplers::sample_uniform_annular(DEMO_POINTS, DEMO_ANNULI, 2, rng)?;
    let density = ResidualDensity::new(demo_surface, 1.0, Region::Interior);
    let metropolis =
        samplers::metropolis_sample_vectorized(&density, DEMO_POINTS, DEMO_BURN_IN, &proposal, rng)?;
    let self_normalized =
        samplers::self_normalized_sample(&density, DEMO_POINTS, rng, DEMO_POINTS, &proposal)?;
    Ok(Table1Demo {
        annular: annular.points,
        metropolis: metropolis.points,
        self_normalized: self_normalized.points,
    })
}

/// Axis selector for 2D slice grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    Spatial(usize),
    Time,
}

impl std::str::FromStr for SliceAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "t" {
            return Ok(SliceAxis::Time);
        }
        let idx = s
            .strip_prefix('x')
            .and_then(|rest| rest.parse::<usize>().ok())
            .ok_or_else(|| Error::Config(format!("bad axis '{s}' (expected t or x<k>)")))?;
        Ok(SliceAxis::Spatial(idx))
    }
}

/// One cell of a slice grid. `exact`/`abs_err` are absent outside the domain
/// closure (the network still extends there).
#[derive(Debug, Clone, Copy)]
pub struct SliceRow {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
    pub exact: Option<f64>,
    pub abs_err: Option<f64>,
}

fn axis_range(problem: &PdeProblem, axis: SliceAxis) -> Result<(f64, f64)> {
    match axis {
        SliceAxis::Time => {
            if !problem.time_dependent() {
                return Err(Error::Config("problem has no time axis".into()));
            }
            Ok((0.0, 1.0))
        }
        SliceAxis::Spatial(i) => {
            if i >= problem.spatial_dim() {
                return Err(Error::Config(format!(
                    "axis x{i} out of range for spatial dimension {}",
                    problem.spatial_dim()
                )));
            }
            match problem.domain() {
                crate::problems::DomainDescriptor::UnitSquare => Ok((0.0, 1.0)),
                _ => Ok((-1.0, 1.0)),
            }
        }
    }
}

fn axis_slot(problem: &PdeProblem, axis: SliceAxis) -> usize {
    match axis {
        SliceAxis::Time => problem.spatial_dim(),
        SliceAxis::Spatial(i) => i,
    }
}

/// Evaluates `phi` and `|u - phi|` over a `resolution x resolution` grid in
/// the plane of two axes, all other spatial coordinates fixed at 0 and the
/// time coordinate (when not an axis) fixed at 1/2.
pub fn slice_grid(
    net: &SolutionNetwork<f64>,
    problem: &PdeProblem,
    ax1: SliceAxis,
    ax2: SliceAxis,
    resolution: usize,
) -> Result<Vec<SliceRow>> {
    if resolution < 2 {
        return Err(Error::Config("slice resolution must be at least 2".into()));
    }
    if ax1 == ax2 {
        return Err(Error::Config("slice axes must differ".into()));
    }
    if net.input_dim() != problem.input_dim() {
        return Err(Error::Dimension(format!(
            "checkpoint has input dim {}, problem expects {}",
            net.input_dim(),
            problem.input_dim()
        )));
    }
    let (lo1, hi1) = axis_range(problem, ax1)?;
    let (lo2, hi2) = axis_range(problem, ax2)?;
    let (s1, s2) = (axis_slot(problem, ax1), axis_slot(problem, ax2));
    let mut base = vec![0.0f64; problem.input_dim()];
    if problem.time_dependent() && ax1 != SliceAxis::Time && ax2 != SliceAxis::Time {
        base[problem.spatial_dim()] = 0.5;
    }
    let mut rows = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let a = lo1 + (hi1 - lo1) * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let b = lo2 + (hi2 - lo2) * j as f64 / (resolution - 1) as f64;
            let mut x = base.clone();
            x[s1] = a;
            x[s2] = b;
            let phi = net.forward(&x);
            let in_closure = match problem.domain() {
                crate::problems::DomainDescriptor::UnitSquare => {
                    x.iter().all(|v| (0.0..=1.0).contains(v))
                }
                _ => {
                    let r: f64 = x[..problem.spatial_dim()].iter().map(|v| v * v).sum::<f64>().sqrt();
                    r <= 1.0
                }
            };
            let exact = in_closure.then(|| problem.exact_solution(&x));
            rows.push(SliceRow { a, b, phi, exact, abs_err: exact.map(|u| (phi - u).abs()) });
        }
    }
    Ok(rows)
}

/// Writes a point batch as CSV, one point per row. Columns are `x0..x{d-1}`
/// with the final coordinate labelled `t` for time-dependent points, plus a
/// `piece` column for boundary batches.
pub fn write_points_csv<W: std::io::Write>(
    mut w: W,
    batch: &SampleBatch<f64>,
    time_last: bool,
) -> std::io::Result<()> {
    let dim = batch.points.dim();
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    if time_last {
        header[dim - 1] = "t".into();
    }
    if !batch.pieces.is_empty() {
        header.push("piece".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, p) in batch.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        if !batch.pieces.is_empty() {
            row.push(batch.pieces[i].to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes a slice grid as CSV with the axis names in the header.
pub fn write_slice_csv<W: std::io::Write>(
    mut w: W,
    rows: &[SliceRow],
    ax1_name: &str,
    ax2_name: &str,
) -> std::io::Result<()> {
    writeln!(w, "{ax1_name},{ax2_name},phi,exact,abs_err")?;
    for r in rows {
        let exact = r.exact.map_or(String::new(), |v| format!("{v}"));
        let err = r.abs_err.map_or(String::new(), |v| format!("{v}"));
        writeln!(w, "{},{},{},{},{}", r.a, r.b, r.phi, exact, err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::SamplerKind;
    use rand::SeedableRng;

    fn disk_spec(dir: &Path) -> ExperimentSpec {
        let base = TrainingConfig {
            epochs: 3,
            n1: 32,
            n2: Some(16),
            width: 6,
            depth: 2,
            eval_every: 1,
            test_points: 100,
            sampler: SamplerSettings { annuli: 2, ..SamplerSettings::default() },
            ..TrainingConfig::default()
        };
        ExperimentSpec {
            name: "smoke".into(),
            problem: PdeProblem::poisson2d(),
            base,
            arms: vec![
                ExperimentArm {
                    name: "basic".into(),
                    sampler: SamplerSettings { kind: SamplerKind::Annular, annuli: 2, ..SamplerSettings::default() },
                },
                ExperimentArm {
                    name: "adaptive".into(),
                    sampler: SamplerSettings { kind: SamplerKind::SelfNormalized, annuli: 2, ..SamplerSettings::default() },
                },
            ],
            seeds: vec![11, 12],
            out_dir: dir.to_path_buf(),
            workers: 2,
        }
    }

    #[test]
    fn identical_arms_produce_identical_summaries() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = disk_spec(dir.path());
        spec.arms[1] = ExperimentArm {
            name: "basic_copy".into(),
            sampler: spec.arms[0].sampler.clone(),
        };
        let report = run_experiment(&spec).unwrap();
        let by = |arm: &str, metric: &str| {
            report
                .summaries
                .iter()
                .find(|s| s.arm == arm && s.metric == metric)
                .unwrap()
                .clone()
        };
        for metric in ["rel_l2", "max_mod"] {
            let a = by("basic", metric);
            let b = by("basic_copy", metric);
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.std.to_bits(), b.std.to_bits());
            assert_eq!(a.min.to_bits(), b.min.to_bits());
        }
        // identical errors give exactly zero reduction
        for r in &report.reductions {
            assert!(r.reduction_pct.abs() < 1e-9);
        }
    }

    #[test]
    fn summary_coefficient_of_variation_matches_reported_ratio() {
        let s = summarize("x", "rel_l2", &[0.0269, 0.0397], 0);
        assert!((s.mean - 0.0333).abs() < 1e-12);
        // cv printed as a ratio: 0.0064/0.0333 = 19.2%
        let s2 = ArmSummary { std: 0.0064, mean: 0.0333, ..s };
        assert!((s2.std / s2.mean - 0.192192).abs() < 1e-4);
    }

    #[test]
    fn empty_trial_list_is_a_configuration_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = disk_spec(dir.path());
        spec.seeds.clear();
        assert!(matches!(run_experiment(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn rerunning_a_spec_reproduces_deterministic_csv_bytes() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut spec = disk_spec(dir_a.path());
        run_experiment(&spec).unwrap();
        spec.out_dir = dir_b.path().to_path_buf();
        run_experiment(&spec).unwrap();
        for file in ["runs.csv", "summary.csv", "reductions.csv"] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between reruns");
        }
        for arm in ["basic", "adaptive"] {
            for trial in 0..2 {
                let rel = format!("{arm}/trial_{trial:03}/history.csv");
                let a = std::fs::read(dir_a.path().join(&rel)).unwrap();
                let b = std::fs::read(dir_b.path().join(&rel)).unwrap();
                assert_eq!(a, b, "{rel} differs between reruns");
            }
        }
    }

    #[test]
    fn summary_statistics_recompute_from_the_runs_csv() {
        let dir = tempfile::tempdir().unwrap();
        let spec = disk_spec(dir.path());
        let report = run_experiment(&spec).unwrap();
        let text = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        for arm in ["basic", "adaptive"] {
            let vals: Vec<f64> = text
                .lines()
                .skip(1)
                .filter(|l| l.starts_with(&format!("{arm},")))
                .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
                .collect();
            let mean = mean_of(&vals);
            let s = report
                .summaries
                .iter()
                .find(|s| s.arm == arm && s.metric == "rel_l2")
                .unwrap();
            assert!((mean - s.mean).abs() < 1e-12);
            assert!((std_of(&vals, mean) - s.std).abs() < 1e-12);
        }
    }

    #[test]
    fn demo_counts_strongly_favor_the_adaptive_samplers() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let demo = demo_table1(&mut rng).unwrap();
        assert_eq!(demo.annular.len(), DEMO_POINTS);
        assert_eq!(demo.metropolis.len(), DEMO_POINTS);
        assert_eq!(demo.self_normalized.len(), DEMO_POINTS);
        let (a, m, s) = demo.counts();
        assert!(a > 0 && a < DEMO_POINTS);
        assert!(m > 2 * a, "metropolis {m} vs annular {a}");
        assert!(s > 2 * a, "self-normalized {s} vs annular {a}");
    }

    #[test]
    fn slice_grid_covers_the_square_exactly() {
        let problem = PdeProblem::poisson2d();
        let net = SolutionNetwork::<f64>::init(2, 4, 1, 3);
        let rows =
            slice_grid(&net, &problem, SliceAxis::Spatial(0), SliceAxis::Spatial(1), 11).unwrap();
        assert_eq!(rows.len(), 121);
        assert!(rows.iter().all(|r| r.exact.is_some()));
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        assert_eq!((first.a, first.b), (0.0, 0.0));
        assert_eq!((last.a, last.b), (1.0, 1.0));
    }

    #[test]
    fn slice_grid_masks_points_outside_the_ball() {
        let problem = PdeProblem::elliptic(3).unwrap();
        let net = SolutionNetwork::<f64>::init(3, 4, 1, 3);
        let rows =
            slice_grid(&net, &problem, SliceAxis::Spatial(0), SliceAxis::Spatial(1), 21).unwrap();
        let corner = rows.iter().find(|r| r.a == -1.0 && r.b == -1.0).unwrap();
        assert!(corner.exact.is_none());
        let center = rows.iter().find(|r| r.a == 0.0 && r.b == 0.0).unwrap();
        assert!((center.exact.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_axis_slices_need_a_time_dependent_problem() {
        let problem = PdeProblem::poisson2d();
        let net = SolutionNetwork::<f64>::init(2, 4, 1, 3);
        assert!(slice_grid(&net, &problem, SliceAxis::Time, SliceAxis::Spatial(0), 5).is_err());
        let axis: SliceAxis = "t".parse().unwrap();
        assert_eq!(axis, SliceAxis::Time);
        let axis: SliceAxis = "x3".parse().unwrap();
        assert_eq!(axis, SliceAxis::Spatial(3));
        assert!("y2".parse::<SliceAxis>().is_err());
    }
}
