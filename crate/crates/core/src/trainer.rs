//! The training loop: per-epoch sampling, empirical loss assembly, gradient
//! step, and history recording.
//!
//! Each epoch draws a fresh interior batch with the configured sampler (the
//! adaptive samplers evaluate the residual density of the network snapshot
//! from the end of the previous epoch), draws a boundary batch, assembles the
//! empirical least-squares loss
//!
//! ```text
//! J = 1/N1 sum |D phi(x_i) - f(x_i)|^2  +  lambda/N2 sum |B phi(x_j) - g(x_j)|^2
//! ```
//!
//! and applies one Adam step at the scheduled learning rate. The gradient is
//! exact for the *discretized* loss: each residual's cotangent `2 r / N` is
//! distributed over its stencil probe points with the stencil's linear
//! coefficients and then backpropagated through the network, so training
//! optimizes precisely the objective it evaluates.
//!
//! Within an epoch, residual and gradient evaluation parallelize over points
//! in fixed-size chunks whose partial sums are reduced in chunk order, making
//! results independent of the thread count. Everything is driven by a single
//! seeded ChaCha8 stream, so a repeated run is bit-identical.

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::metrics::{error_pair, TestSet};
use crate::nn::{learning_rate, AdamState, SolutionNetwork};
use crate::points::{BoundaryPiece, PointSet, Region};
use crate::problems::PdeProblem;
use crate::samplers::{
    self, DomainBoundary, DomainInterior, PointSource, ResidualDensity, SampleBatch, SamplerTag,
};
use crate::scalar::{cast, Scalar};
use crate::stencil::{
    probe_block, probe_count, push_back_cotangents, quantities_from_values, Scheme, StencilConfig,
};
use crate::{Error, Result};

/// Points per parallel work unit. Fixed so that the floating-point reduction
/// tree does not depend on the thread count.
const CHUNK: usize = 64;

/// Interior sampler selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Annular,
    MetropolisHastings,
    SelfNormalized,
    Rar,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annular" => Ok(SamplerKind::Annular),
            "mh" => Ok(SamplerKind::MetropolisHastings),
            "self_normalized" => Ok(SamplerKind::SelfNormalized),
            "rar" => Ok(SamplerKind::Rar),
            other => Err(Error::Config(format!(
                "unknown sampler '{other}' (expected annular|mh|self_normalized|rar)"
            ))),
        }
    }
}

impl SamplerKind {
    pub fn is_adaptive(&self) -> bool {
        !matches!(self, SamplerKind::Annular)
    }
}

/// Sampler parameters shared by the adaptive generators.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSettings {
    pub kind: SamplerKind,
    /// Residual exponent `p`.
    pub exponent: f64,
    /// Burn-in for the Metropolis chain.
    pub burn_in: usize,
    /// Shell count of the annular proposal.
    pub annuli: usize,
    /// Self-normalized pool size; `None` means the interior batch size.
    pub pool_size: Option<usize>,
    /// Refinement base pool and duplicate count (`base + top_k` must equal
    /// the interior batch size).
    pub rar_base: usize,
    pub rar_top_k: usize,
    /// Apply the adaptive sampler to the boundary batch as well.
    pub adaptive_boundary: bool,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            kind: SamplerKind::SelfNormalized,
            exponent: 1.0,
            burn_in: 0,
            annuli: 8,
            pool_size: None,
            rar_base: 10_000,
            rar_top_k: 2_000,
            adaptive_boundary: true,
        }
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Fan-based uniform weights with zero biases. Collapses under the
    /// cubic activation (outputs around 1e-10..1e-17 at practical widths),
    /// so training spends thousands of epochs regrowing the weights; kept
    /// for experiments.
    Xavier,
    /// Fan-in uniform weights and biases (framework-default style); the
    /// nonzero biases keep a floor under the cubed signal. Default.
    FanBias,
}

impl std::str::FromStr for InitScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xavier" => Ok(InitScheme::Xavier),
            "fan_bias" => Ok(InitScheme::FanBias),
            other => Err(Error::Config(format!(
                "unknown init scheme '{other}' (expected fan_bias|xavier)"
            ))),
        }
    }
}

/// Learning-rate policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrPolicy {
    /// The staircase schedule from 1e-3 down to 1e-6.
    Staircase,
    /// Fixed rate (for timed comparisons).
    Constant(f64),
}

impl LrPolicy {
    fn rate(&self, epoch: usize, total: usize) -> f64 {
        match self {
            LrPolicy::Staircase => learning_rate(epoch, total),
            LrPolicy::Constant(r) => *r,
        }
    }
}

/// Full training configuration. Defaults follow the reference experiment
/// setup: depth 3, width 100, 20000 epochs, 12000 interior points, boundary
/// weight 10, self-normalized sampling with `p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub n1: usize,
    /// Boundary batch size; `None` resolves to the problem default
    /// (`n1`, plus `n1/d` for time-dependent problems).
    pub n2: Option<usize>,
    pub lambda: f64,
    pub width: usize,
    pub depth: usize,
    pub sampler: SamplerSettings,
    pub stencil_h: f64,
    pub seed: u64,
    /// Epoch stride for error evaluation (also records the final epoch).
    pub eval_every: usize,
    /// Checkpoint stride; 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
    /// Where periodic checkpoints go; required when `checkpoint_every > 0`.
    pub checkpoint_dir: Option<PathBuf>,
    pub lr: LrPolicy,
    pub test_points: usize,
    /// Test-set seed override; `None` uses the per-problem documented seed.
    pub test_seed: Option<u64>,
    pub init: InitScheme,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 20_000,
            n1: 12_000,
            n2: None,
            lambda: 10.0,
            width: 100,
            depth: 3,
            sampler: SamplerSettings::default(),
            stencil_h: 1e-4,
            seed: 0,
            eval_every: 100,
            checkpoint_every: 0,
            checkpoint_dir: None,
            lr: LrPolicy::Staircase,
            test_points: crate::metrics::TEST_SET_SIZE,
            test_seed: None,
            init: InitScheme::FanBias,
        }
    }
}

impl TrainingConfig {
    pub fn resolved_n2(&self, problem: &PdeProblem) -> usize {
        self.n2.unwrap_or_else(|| problem.default_boundary_count(self.n1))
    }

    pub fn validate(&self, problem: &PdeProblem) -> Result<()> {
        if self.epochs == 0 || self.n1 == 0 || self.resolved_n2(problem) == 0 {
            return Err(Error::Config("epochs, n1 and n2 must all be >= 1".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Config("boundary weight lambda must be nonnegative".into()));
        }
        if self.width == 0 || self.depth == 0 {
            return Err(Error::Config("network width and depth must be >= 1".into()));
        }
        if self.sampler.annuli == 0 {
            return Err(Error::Config("annulus count must be >= 1".into()));
        }
        let needs_stratified = !matches!(self.sampler.kind, SamplerKind::Rar);
        let on_ball = !matches!(problem.domain(), crate::problems::DomainDescriptor::UnitSquare);
        if needs_stratified && on_ball {
            let pool = match self.sampler.kind {
                SamplerKind::SelfNormalized => self.sampler.pool_size.unwrap_or(self.n1),
                _ => self.n1,
            };
            let stratified = match self.sampler.kind {
                SamplerKind::Annular => self.n1 % self.sampler.annuli != 0,
                SamplerKind::SelfNormalized => pool % self.sampler.annuli != 0,
                _ => false,
            };
            if stratified {
                return Err(Error::Config(format!(
                    "annulus count {} must divide the stratified batch size",
                    self.sampler.annuli
                )));
            }
        }
        if matches!(self.sampler.kind, SamplerKind::Rar)
            && self.sampler.rar_base + self.sampler.rar_top_k != self.n1
        {
            return Err(Error::Config(format!(
                "refinement sampler produces base + top_k = {} points; set n1 to match",
                self.sampler.rar_base + self.sampler.rar_top_k
            )));
        }
        if self.sampler.exponent < 0.0 {
            return Err(Error::Config("residual exponent p must be nonnegative".into()));
        }
        if self.checkpoint_every > 0 && self.checkpoint_dir.is_none() {
            return Err(Error::Config("checkpoint_every > 0 needs a checkpoint directory".into()));
        }
        StencilConfig::<f64>::new(self.stencil_h, Scheme::CentralSecond)?;
        if let LrPolicy::Constant(r) = self.lr {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config("constant learning rate must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One recorded history row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub epoch: usize,
    /// Cumulative training-only wall-clock seconds (metric evaluation and
    /// file output excluded).
    pub time_s: f64,
    pub loss: f64,
    pub rel_l2: f64,
    pub max_mod: f64,
}

/// Per-run history at the evaluation stride.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    rows: Vec<HistoryRow>,
}

impl TrainingHistory {
    pub fn push(&mut self, row: HistoryRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.epoch > last.epoch, "history epochs must strictly increase");
            assert!(row.time_s >= last.time_s, "wall clock must be non-decreasing");
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[HistoryRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&HistoryRow> {
        self.rows.last()
    }

    /// Deterministic history CSV: `epoch,loss,rel_l2,max_mod`. Wall-clock
    /// goes to the separate timing CSV so that seed-fixed reruns reproduce
    /// this file byte for byte.
    pub fn write_history_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "epoch,loss,rel_l2,max_mod")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.epoch, r.loss, r.rel_l2, r.max_mod)?;
        }
        Ok(())
    }

    /// Wall-clock CSV: `epoch,time_s`.
    pub fn write_timing_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "epoch,time_s")?;
        for r in &self.rows {
            writeln!(w, "{},{}", r.epoch, r.time_s)?;
        }
        Ok(())
    }
}

/// Instrumentation counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainStats {
    /// Residual-density evaluations made by the adaptive samplers. Zero for
    /// the basic (annular) model by construction.
    pub density_evaluations: u64,
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceInfo {
    pub epoch: usize,
    pub detail: String,
}

/// A finished (or diverged) training run. On divergence the network holds
/// the last parameters that produced a finite loss.
#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    pub network: SolutionNetwork<F>,
    pub history: TrainingHistory,
    pub stats: TrainStats,
    pub diverged: Option<DivergenceInfo>,
}

/// Empirical loss from precomputed signed residual vectors.
pub fn loss_from_residuals<F: Scalar>(interior: &[F], boundary: &[F], lambda: f64) -> F {
    let mut j = F::zero();
    if !interior.is_empty() {
        let s: F = interior.iter().map(|r| *r * *r).sum();
        j = j + s / cast(interior.len() as f64);
    }
    if !boundary.is_empty() {
        let s: F = boundary.iter().map(|r| *r * *r).sum();
        j = j + cast::<F>(lambda) * s / cast(boundary.len() as f64);
    }
    j
}

fn check_finite<F: Scalar>(region: Region, points: &PointSet<F>, residuals: &[F]) -> Result<()> {
    if let Some(i) = residuals.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFinite {
            context: "residual",
            detail: format!("{region} point {:?} gave {:?}", points.point(i), residuals[i]),
        });
    }
    Ok(())
}

/// Loss `J` plus the signed per-point residual vectors (interior first).
pub fn compute_loss<F: Scalar>(
    net: &SolutionNetwork<F>,
    interior: &SampleBatch<F>,
    boundary: &SampleBatch<F>,
    lambda: f64,
    problem: &PdeProblem,
    cfg: &StencilConfig<F>,
) -> Result<(F, Vec<F>, Vec<F>)> {
    if interior.is_empty() || boundary.is_empty() {
        return Err(Error::Config("loss needs non-empty interior and boundary batches".into()));
    }
    let r_int: Vec<F> = (0..interior.len())
        .into_par_iter()
        .map(|i| problem.interior_residual(|x| net.forward(x), interior.points.point(i), cfg))
        .collect();
    let r_bnd: Vec<F> = (0..boundary.len())
        .into_par_iter()
        .map(|j| {
            problem.boundary_residual(
                |x| net.forward(x),
                boundary.points.point(j),
                boundary.pieces[j],
                cfg,
            )
        })
        .collect();
    check_finite(Region::Interior, &interior.points, &r_int)?;
    check_finite(Region::Boundary, &boundary.points, &r_bnd)?;
    Ok((loss_from_residuals(&r_int, &r_bnd, lambda), r_int, r_bnd))
}

struct ChunkOutput<F> {
    grad: Vec<F>,
    sq_sum: F,
    residuals: Vec<F>,
}

/// Loss, gradient and residuals in one fused pass.
///
/// The gradient is the exact derivative of the discretized loss: residual
/// cotangents flow through the operator's quantity partials onto the probe
/// points and from there through reverse mode over the network parameters.
pub fn loss_and_gradient<F: Scalar>(
    net: &SolutionNetwork<F>,
    interior: &SampleBatch<F>,
    boundary: &SampleBatch<F>,
    lambda: f64,
    problem: &PdeProblem,
    cfg: &StencilConfig<F>,
) -> Result<(F, Vec<F>, Vec<F>, Vec<F>)> {
    if interior.is_empty() || boundary.is_empty() {
        return Err(Error::Config("loss needs non-empty interior and boundary batches".into()));
    }
    let dim = problem.input_dim();
    let n_probes = probe_count(dim);
    let n1 = interior.len();
    let n2 = boundary.len();
    let h = cfg.h();
    let int_scale = cast::<F>(2.0 / n1 as f64);
    let bnd_scale = cast::<F>(2.0 * lambda / n2 as f64);

    let interior_chunks: Vec<ChunkOutput<F>> = (0..n1.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n1);
            let mut out = ChunkOutput {
                grad: vec![F::zero(); net.param_count()],
                sq_sum: F::zero(),
                residuals: Vec::with_capacity(hi - lo),
            };
            let mut traces: Vec<_> = (0..n_probes).map(|_| net.new_trace()).collect();
            let mut values = vec![F::zero(); n_probes];
            let mut probe_ct = vec![F::zero(); n_probes];
            for i in lo..hi {
                let x = interior.points.point(i);
                let mut probes = PointSet::with_capacity(dim, n_probes);
                probe_block(x, h, &mut probes);
                for (k, trace) in traces.iter_mut().enumerate() {
                    values[k] = net.forward_traced(probes.point(k), trace);
                }
                let q = quantities_from_values(&values, dim, h);
                let r = problem.interior_operator(x, &q) - problem.forcing(x);
                out.residuals.push(r);
                if !r.is_finite() {
                    continue; // caller reports via check_finite
                }
                out.sq_sum = out.sq_sum + r * r;
                let c = int_scale * r;
                let mut ct = problem.interior_operator_partials(x, &q);
                ct.d_value = ct.d_value * c;
                for v in ct.d_grad.iter_mut() {
                    *v = *v * c;
                }
                for v in ct.d_second.iter_mut() {
                    *v = *v * c;
                }
                probe_ct.iter_mut().for_each(|v| *v = F::zero());
                push_back_cotangents(&ct, dim, h, &mut probe_ct);
                for (k, trace) in traces.iter_mut().enumerate() {
                    net.backward_traced(trace, probe_ct[k], &mut out.grad);
                }
            }
            out
        })
        .collect();

    let boundary_chunks: Vec<ChunkOutput<F>> = (0..n2.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n2);
            let mut out = ChunkOutput {
                grad: vec![F::zero(); net.param_count()],
                sq_sum: F::zero(),
                residuals: Vec::with_capacity(hi - lo),
            };
            let mut trace_a = net.new_trace();
            let mut trace_b = net.new_trace();
            for j in lo..hi {
                let x = boundary.points.point(j);
                let piece = boundary.pieces[j];
                match piece {
                    BoundaryPiece::Lateral | BoundaryPiece::InitialValue => {
                        let v = net.forward_traced(x, &mut trace_a);
                        let r = v - problem.boundary_data(x, piece);
                        out.residuals.push(r);
                        if !r.is_finite() {
                            continue;
                        }
                        out.sq_sum = out.sq_sum + r * r;
                        net.backward_traced(&mut trace_a, bnd_scale * r, &mut out.grad);
                    }
                    BoundaryPiece::InitialRate => {
                        let mut shifted = x.to_vec();
                        let t_axis = problem.spatial_dim();
                        shifted[t_axis] = shifted[t_axis] + h;
                        let v0 = net.forward_traced(x, &mut trace_a);
                        let v1 = net.forward_traced(&shifted, &mut trace_b);
                        let r = (v1 - v0) / h - problem.boundary_data(x, piece);
                        out.residuals.push(r);
                        if !r.is_finite() {
                            continue;
                        }
                        out.sq_sum = out.sq_sum + r * r;
                        let c = bnd_scale * r;
                        net.backward_traced(&mut trace_a, -c / h, &mut out.grad);
                        net.backward_traced(&mut trace_b, c / h, &mut out.grad);
                    }
                }
            }
            out
        })
        .collect();

    let mut grad = vec![F::zero(); net.param_count()];
    let mut int_sq = F::zero();
    let mut r_int = Vec::with_capacity(n1);
    for chunk in &interior_chunks {
        for (g, cg) in grad.iter_mut().zip(&chunk.grad) {
            *g += cg;
        }
        int_sq = int_sq + chunk.sq_sum;
        r_int.extend_from_slice(&chunk.residuals);
    }
    let mut bnd_sq = F::zero();
    let mut r_bnd = Vec::with_capacity(n2);
    for chunk in &boundary_chunks {
        for (g, cg) in grad.iter_mut().zip(&chunk.grad) {
            *g += cg;
        }
        bnd_sq = bnd_sq + chunk.sq_sum;
        r_bnd.extend_from_slice(&chunk.residuals);
    }
    check_finite(Region::Interior, &interior.points, &r_int)?;
    check_finite(Region::Boundary, &boundary.points, &r_bnd)?;
    let loss = int_sq / cast(n1 as f64) + cast::<F>(lambda) * bnd_sq / cast(n2 as f64);
    Ok((loss, grad, r_int, r_bnd))
}

fn draw_interior<F: Scalar>(
    net: &SolutionNetwork<F>,
    problem: &PdeProblem,
    config: &TrainingConfig,
    cfg: &StencilConfig<F>,
    rng: &mut ChaCha8Rng,
    counter: &AtomicU64,
) -> Result<SampleBatch<F>> {
    let settings = &config.sampler;
    let annular = DomainInterior::new(problem.domain(), settings.annuli)?;
    match settings.kind {
        SamplerKind::Annular => {
            let points = annular.draw_batch(config.n1, rng)?;
            Ok(SampleBatch::interior(points, SamplerTag::UniformAnnular))
        }
        SamplerKind::MetropolisHastings => {
            let density = ResidualDensity::new(
                |x: &[F]| problem.interior_residual(|y| net.forward(y), x, cfg).abs(),
                settings.exponent,
                Region::Interior,
            )
            .with_counter(counter);
            samplers::metropolis_sample_vectorized(
                &density,
                config.n1,
                settings.burn_in,
                &annular,
                rng,
            )
        }
        SamplerKind::SelfNormalized => {
            let density = ResidualDensity::new(
                |x: &[F]| problem.interior_residual(|y| net.forward(y), x, cfg).abs(),
                settings.exponent,
                Region::Interior,
            )
            .with_counter(counter);
            let pool = settings.pool_size.unwrap_or(config.n1);
            samplers::self_normalized_sample(&density, config.n1, rng, pool, &annular)
        }
        SamplerKind::Rar => {
            let density = ResidualDensity::new(
                |x: &[F]| problem.interior_residual(|y| net.forward(y), x, cfg).abs(),
                settings.exponent,
                Region::Interior,
            )
            .with_counter(counter);
            let uniform = DomainInterior::uniform(problem.domain());
            samplers::rar_sample(&density, settings.rar_base, settings.rar_top_k, &uniform, rng)
        }
    }
}

fn draw_boundary<F: Scalar>(
    net: &SolutionNetwork<F>,
    problem: &PdeProblem,
    config: &TrainingConfig,
    cfg: &StencilConfig<F>,
    rng: &mut ChaCha8Rng,
    counter: &AtomicU64,
) -> Result<SampleBatch<F>> {
    let settings = &config.sampler;
    let n2 = config.resolved_n2(problem);
    let adaptive = settings.adaptive_boundary
        && matches!(settings.kind, SamplerKind::MetropolisHastings | SamplerKind::SelfNormalized);
    if !adaptive {
        return samplers::sample_boundary(n2, problem, rng);
    }
    // Per-piece adaptive resampling: each constraint piece gets its own
    // proposal and its own residual density |B phi - g|^p.
    let mut points = PointSet::with_capacity(problem.input_dim(), n2);
    let mut pieces = Vec::with_capacity(n2);
    for (piece, count) in problem.boundary_split().allocate(n2) {
        let source = DomainBoundary::for_piece(problem.domain(), piece)?;
        let density = ResidualDensity::new(
            move |x: &[F]| problem.boundary_residual(|y| net.forward(y), x, piece, cfg).abs(),
            settings.exponent,
            Region::Boundary,
        )
        .with_counter(counter);
        let batch = match settings.kind {
            SamplerKind::MetropolisHastings => samplers::metropolis_sample_vectorized(
                &density,
                count,
                settings.burn_in,
                &source,
                rng,
            )?,
            _ => samplers::self_normalized_sample(&density, count, rng, count, &source)?,
        };
        points.extend(&batch.points);
        pieces.extend(std::iter::repeat(piece).take(count));
    }
    Ok(SampleBatch::boundary(points, pieces, SamplerTag::UniformBoundary))
}

/// Trains a fresh network on `problem` under `config`.
///
/// Divergence (a non-finite residual, loss, or gradient) stops the run and
/// returns the last parameters that produced a finite loss together with the
/// history so far; hard configuration errors fail up front.
pub fn train<F: Scalar>(problem: &PdeProblem, config: &TrainingConfig) -> Result<TrainOutcome<F>> {
    config.validate(problem)?;
    let cfg = StencilConfig::<F>::new(cast(config.stencil_h), Scheme::CentralSecond)?;
    let test_seed = config.test_seed.unwrap_or_else(|| crate::metrics::default_test_seed(problem));
    let test = TestSet::<F>::generate(problem, test_seed, config.test_points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = match config.init {
        InitScheme::Xavier => {
            SolutionNetwork::<F>::init(problem.input_dim(), config.width, config.depth, config.seed)
        }
        InitScheme::FanBias => {
            SolutionNetwork::<F>::init_fan_bias(problem.input_dim(), config.width, config.depth, config.seed)
        }
    };
    let mut adam = AdamState::<F>::new(net.param_count());
    let counter = AtomicU64::new(0);
    let mut history = TrainingHistory::default();
    let mut trained_secs = 0.0f64;
    let n2 = config.resolved_n2(problem);

    for epoch in 0..config.epochs {
        let step_started = Instant::now();
        let sampled = (|| -> Result<(SampleBatch<F>, SampleBatch<F>)> {
            let interior = draw_interior(&net, problem, config, &cfg, &mut rng, &counter)?
                .stamp(epoch as u64, config.seed);
            let boundary = draw_boundary(&net, problem, config, &cfg, &mut rng, &counter)?
                .stamp(epoch as u64, config.seed);
            Ok((interior, boundary))
        })();
        let (interior, boundary) = match sampled {
            Ok(batches) => batches,
            Err(Error::DegenerateDensity(detail)) => {
                return Ok(TrainOutcome {
                    network: net,
                    history,
                    stats: TrainStats { density_evaluations: counter.load(Ordering::Relaxed) },
                    diverged: Some(DivergenceInfo { epoch, detail }),
                });
            }
            Err(e) => return Err(e),
        };
        debug_assert_eq!(boundary.len(), n2);

        let step = loss_and_gradient(&net, &interior, &boundary, config.lambda, problem, &cfg)
            .and_then(|(loss, grad, r_int, r_bnd)| {
                let tau = config.lr.rate(epoch, config.epochs);
                adam.step(net.params_mut(), &grad, cast(tau))?;
                Ok((loss, r_int, r_bnd))
            });
        let loss = match step {
            Ok((loss, _, _)) => loss,
            Err(Error::NonFinite { context, detail }) => {
                return Ok(TrainOutcome {
                    network: net,
                    history,
                    stats: TrainStats { density_evaluations: counter.load(Ordering::Relaxed) },
                    diverged: Some(DivergenceInfo {
                        epoch,
                        detail: format!("non-finite {context}: {detail}"),
                    }),
                });
            }
            Err(e) => return Err(e),
        };
        trained_secs += step_started.elapsed().as_secs_f64();

        // metrics and checkpoints are excluded from the training clock
        if epoch % config.eval_every == 0 || epoch + 1 == config.epochs {
            let (rel_l2, max_mod) = error_pair(&net, &test)?;
            history.push(HistoryRow {
                epoch,
                time_s: trained_secs,
                loss: loss.to_f64().unwrap_or(f64::NAN),
                rel_l2: rel_l2.to_f64().unwrap_or(f64::NAN),
                max_mod: max_mod.to_f64().unwrap_or(f64::NAN),
            });
        }
        if config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0 {
            let dir = config.checkpoint_dir.as_ref().expect("validated");
            std::fs::create_dir_all(dir)?;
            crate::checkpoint::save_network(dir.join(format!("epoch_{epoch:06}.ckpt")), &net)?;
        }
    }

    Ok(TrainOutcome {
        network: net,
        history,
        stats: TrainStats { density_evaluations: counter.load(Ordering::Relaxed) },
        diverged: None,
    })
}
