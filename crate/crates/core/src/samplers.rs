//! Collocation-point generators.
//!
//! The baseline is the uniform annular distribution: the unit ball is split
//! into `N_a` radial shells `{ k/N_a < |x| < (k+1)/N_a }` and each shell
//! receives the same number of points, which oversamples small radii relative
//! to volume. On top of that proposal this module implements the
//! residual-driven samplers:
//!
//! * [`metropolis_sample`] — an independence-proposal Metropolis chain whose
//!   acceptance ratio is the ratio of residual densities between candidate
//!   and current point; the first `b` states are discarded as burn-in.
//! * [`metropolis_sample_vectorized`] — the same accept/reject sweep run over
//!   pre-generated proposal and uniform arrays, so the (parallelizable)
//!   density evaluation happens in one batch. On rejection both the point and
//!   its cached density value are copied forward.
//! * [`self_normalized_sample`] — draws a proposal pool, normalizes the
//!   residual weights by their sum, and resamples with replacement from the
//!   resulting discrete distribution; no normalizing constant is ever needed.
//! * [`rar_sample`] — draws a uniform base set and duplicates the `top_k`
//!   largest-density points into it.
//!
//! The chain step of the Metropolis samplers is inherently sequential (each
//! state depends on the previous one); only density evaluation over the
//! pre-generated array parallelizes.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rayon::prelude::*;

use crate::points::{BoundaryPiece, PointSet, Region};
use crate::problems::{DomainDescriptor, PdeProblem};
use crate::scalar::{cast, Scalar};
use crate::{Error, Result};

/// Which generator produced a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerTag {
    UniformAnnular,
    UniformBoundary,
    MetropolisHastings,
    SelfNormalized,
    Rar,
}

impl std::fmt::Display for SamplerTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SamplerTag::UniformAnnular => "annular",
            SamplerTag::UniformBoundary => "uniform_boundary",
            SamplerTag::MetropolisHastings => "mh",
            SamplerTag::SelfNormalized => "self_normalized",
            SamplerTag::Rar => "rar",
        };
        write!(f, "{s}")
    }
}

/// An ordered collection of collocation points with provenance.
#[derive(Debug, Clone)]
pub struct SampleBatch<F> {
    pub points: PointSet<F>,
    pub region: Region,
    /// One constraint tag per point for boundary batches; empty for interior.
    pub pieces: Vec<BoundaryPiece>,
    pub sampler: SamplerTag,
    pub epoch: u64,
    pub seed: u64,
}

impl<F: Scalar> SampleBatch<F> {
    pub fn interior(points: PointSet<F>, sampler: SamplerTag) -> Self {
        Self { points, region: Region::Interior, pieces: Vec::new(), sampler, epoch: 0, seed: 0 }
    }

    pub fn boundary(points: PointSet<F>, pieces: Vec<BoundaryPiece>, sampler: SamplerTag) -> Self {
        assert_eq!(points.len(), pieces.len());
        Self { points, region: Region::Boundary, pieces, sampler, epoch: 0, seed: 0 }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn stamp(mut self, epoch: u64, seed: u64) -> Self {
        self.epoch = epoch;
        self.seed = seed;
        self
    }
}

/// Unnormalized sampling density `x -> R_abs(x)^p`.
///
/// The normalizing constant is never computed: both the Metropolis ratio and
/// the self-normalized weights only use density ratios. `p = 0` makes the
/// density constant, recovering the proposal distribution.
pub struct ResidualDensity<'a, F: Scalar> {
    source: Box<dyn Fn(&[F]) -> F + Sync + 'a>,
    exponent: f64,
    region: Region,
    eval_counter: Option<&'a AtomicU64>,
}

impl<'a, F: Scalar> ResidualDensity<'a, F> {
    /// Wraps a nonnegative residual map `R_abs` with exponent `p >= 0`.
    pub fn new(source: impl Fn(&[F]) -> F + Sync + 'a, exponent: f64, region: Region) -> Self {
        assert!(exponent >= 0.0, "residual exponent must be nonnegative");
        Self { source: Box::new(source), exponent, region, eval_counter: None }
    }

    /// Counts every density evaluation into `counter`; used to verify the
    /// non-adaptive training path never touches the adaptive machinery.
    pub fn with_counter(mut self, counter: &'a AtomicU64) -> Self {
        self.eval_counter = Some(counter);
        self
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn value(&self, x: &[F]) -> F {
        if let Some(c) = self.eval_counter {
            c.fetch_add(1, Ordering::Relaxed);
        }
        let r = (self.source)(x);
        if self.exponent == 0.0 {
            F::one()
        } else if self.exponent == 1.0 {
            r
        } else {
            r.powf(cast(self.exponent))
        }
    }

    /// Density at every row; evaluation order-independent, output ordered.
    pub fn values_batch(&self, points: &PointSet<F>) -> Vec<F> {
        (0..points.len())
            .into_par_iter()
            .map(|i| self.value(points.point(i)))
            .collect()
    }
}

/// A proposal distribution over some region of a domain.
pub trait PointSource<F: Scalar> {
    fn dim(&self) -> usize;

    /// One independent draw.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F>;

    /// A batch of `n` draws. Stratified sources may override this with exact
    /// per-stratum counts.
    fn draw_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PointSet<F>> {
        let mut set = PointSet::with_capacity(self.dim(), n);
        for _ in 0..n {
            set.push(&self.draw(rng));
        }
        Ok(set)
    }
}

/// Direction uniform on the unit sphere via normalized Gaussians.
fn unit_vector<F: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<F> {
    loop {
        let v: Vec<F> = (0..dim).map(|_| F::std_normal(rng)).collect();
        let norm = v.iter().map(|x| *x * *x).sum::<F>().sqrt();
        if norm > cast(1e-12) {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform annular distribution on the unit ball: shell index equiprobable,
/// point uniform with respect to volume inside its shell.
#[derive(Debug, Clone, Copy)]
pub struct AnnularBall {
    pub dim: usize,
    pub annuli: usize,
}

impl AnnularBall {
    pub fn new(dim: usize, annuli: usize) -> Result<Self> {
        if dim == 0 || annuli == 0 {
            return Err(Error::Config("annular source needs dim >= 1 and annuli >= 1".into()));
        }
        Ok(Self { dim, annuli })
    }

    /// Uniform ball (one shell).
    pub fn uniform(dim: usize) -> Self {
        Self { dim, annuli: 1 }
    }

    /// Radius by inverse CDF within shell `k`: `r^d` uniform between the
    /// shell endpoints' `d`-th powers.
    fn shell_radius<F: Scalar, R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> F {
        let d = self.dim as f64;
        let r_in = (k as f64 / self.annuli as f64).powf(d);
        let r_out = ((k + 1) as f64 / self.annuli as f64).powf(d);
        let u = F::uniform01(rng);
        (cast::<F>(r_in) + u * cast::<F>(r_out - r_in)).powf(F::one() / cast(d))
    }

    fn draw_in_shell<F: Scalar, R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Vec<F> {
        let r: F = self.shell_radius(k, rng);
        unit_vector::<F, R>(self.dim, rng).into_iter().map(|v| v * r).collect()
    }
}

impl<F: Scalar> PointSource<F> for AnnularBall {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F> {
        let k = rng.gen_range(0..self.annuli);
        self.draw_in_shell(k, rng)
    }

    fn draw_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PointSet<F>> {
        if n % self.annuli != 0 {
            return Err(Error::Config(format!(
                "annulus count {} must divide the batch size {n}",
                self.annuli
            )));
        }
        let per_shell = n / self.annuli;
        let mut set = PointSet::with_capacity(self.dim, n);
        for k in 0..self.annuli {
            for _ in 0..per_shell {
                set.push(&self.draw_in_shell::<F, R>(k, rng));
            }
        }
        Ok(set)
    }
}

/// Interior proposal for any benchmark domain: annular on balls, annular
/// cross uniform time on cylinders, plain uniform on the square.
#[derive(Debug, Clone, Copy)]
pub enum DomainInterior {
    Ball(AnnularBall),
    Cylinder(AnnularBall),
    Square,
}

impl DomainInterior {
    pub fn new(domain: DomainDescriptor, annuli: usize) -> Result<Self> {
        Ok(match domain {
            DomainDescriptor::UnitBall { spatial_dim } => {
                DomainInterior::Ball(AnnularBall::new(spatial_dim, annuli)?)
            }
            DomainDescriptor::BallCylinder { spatial_dim } => {
                DomainInterior::Cylinder(AnnularBall::new(spatial_dim, annuli)?)
            }
            DomainDescriptor::UnitSquare => DomainInterior::Square,
        })
    }

    /// Plain uniform proposal (annuli = 1) on the same domain.
    pub fn uniform(domain: DomainDescriptor) -> Self {
        Self::new(domain, 1).expect("annuli = 1 is always valid")
    }
}

impl<F: Scalar> PointSource<F> for DomainInterior {
    fn dim(&self) -> usize {
        match self {
            DomainInterior::Ball(b) => b.dim,
            DomainInterior::Cylinder(b) => b.dim + 1,
            DomainInterior::Square => 2,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F> {
        match self {
            DomainInterior::Ball(b) => b.draw(rng),
            DomainInterior::Cylinder(b) => {
                let mut x: Vec<F> = b.draw(rng);
                x.push(F::uniform01(rng));
                x
            }
            DomainInterior::Square => vec![F::uniform01(rng), F::uniform01(rng)],
        }
    }

    fn draw_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PointSet<F>> {
        match self {
            DomainInterior::Ball(b) => b.draw_batch(n, rng),
            DomainInterior::Cylinder(b) => {
                if n % b.annuli != 0 {
                    return Err(Error::Config(format!(
                        "annulus count {} must divide the batch size {n}",
                        b.annuli
                    )));
                }
                let per_shell = n / b.annuli;
                let mut set = PointSet::with_capacity(b.dim + 1, n);
                for k in 0..b.annuli {
                    for _ in 0..per_shell {
                        let mut x: Vec<F> = b.draw_in_shell(k, rng);
                        x.push(F::uniform01(rng));
                        set.push(&x);
                    }
                }
                Ok(set)
            }
            DomainInterior::Square => {
                let mut set = PointSet::with_capacity(2, n);
                for _ in 0..n {
                    set.push(&[F::uniform01(rng), F::uniform01(rng)]);
                }
                Ok(set)
            }
        }
    }
}

/// Proposal over one boundary piece of a benchmark domain.
#[derive(Debug, Clone, Copy)]
pub enum DomainBoundary {
    /// `|x| = 1`, optionally crossed with `t ~ Unif(0, 1)`.
    Sphere { spatial_dim: usize, with_time: bool },
    /// Uniform in the spatial ball at `t = 0`.
    InitialSlice { spatial_dim: usize },
    /// Uniform on the perimeter of the unit square.
    SquareEdge,
}

impl DomainBoundary {
    pub fn for_piece(domain: DomainDescriptor, piece: BoundaryPiece) -> Result<Self> {
        match (domain, piece) {
            (DomainDescriptor::UnitBall { spatial_dim }, BoundaryPiece::Lateral) => {
                Ok(DomainBoundary::Sphere { spatial_dim, with_time: false })
            }
            (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::Lateral) => {
                Ok(DomainBoundary::Sphere { spatial_dim, with_time: true })
            }
            (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::InitialValue)
            | (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::InitialRate) => {
                Ok(DomainBoundary::InitialSlice { spatial_dim })
            }
            (DomainDescriptor::UnitSquare, BoundaryPiece::Lateral) => Ok(DomainBoundary::SquareEdge),
            (domain, piece) => Err(Error::Config(format!(
                "boundary piece {piece} does not exist on {domain:?}"
            ))),
        }
    }
}

impl<F: Scalar> PointSource<F> for DomainBoundary {
    fn dim(&self) -> usize {
        match self {
            DomainBoundary::Sphere { spatial_dim, with_time } => {
                spatial_dim + usize::from(*with_time)
            }
            DomainBoundary::InitialSlice { spatial_dim } => spatial_dim + 1,
            DomainBoundary::SquareEdge => 2,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<F> {
        match self {
            DomainBoundary::Sphere { spatial_dim, with_time } => {
                let mut x = unit_vector::<F, R>(*spatial_dim, rng);
                if *with_time {
                    x.push(F::uniform01(rng));
                }
                x
            }
            DomainBoundary::InitialSlice { spatial_dim } => {
                let ball = AnnularBall::uniform(*spatial_dim);
                let mut x: Vec<F> = ball.draw(rng);
                x.push(F::zero());
                x
            }
            DomainBoundary::SquareEdge => {
                let edge = rng.gen_range(0..4u8);
                let s = F::uniform01(rng);
                match edge {
                    0 => vec![F::zero(), s],
                    1 => vec![F::one(), s],
                    2 => vec![s, F::zero()],
                    _ => vec![s, F::one()],
                }
            }
        }
    }
}

/// Stratified annular batch on the `dim`-dimensional unit ball: exactly
/// `n1 / annuli` points per shell. `annuli` must divide `n1`.
pub fn sample_uniform_annular<F: Scalar, R: Rng + ?Sized>(
    n1: usize,
    annuli: usize,
    dim: usize,
    rng: &mut R,
) -> Result<SampleBatch<F>> {
    let source = AnnularBall::new(dim, annuli)?;
    let points = source.draw_batch(n1, rng)?;
    Ok(SampleBatch::interior(points, SamplerTag::UniformAnnular))
}

/// Uniform boundary batch for a problem, allocated across its constraint
/// pieces by the problem's boundary split.
pub fn sample_boundary<F: Scalar, R: Rng + ?Sized>(
    n2: usize,
    problem: &PdeProblem,
    rng: &mut R,
) -> Result<SampleBatch<F>> {
    if n2 == 0 {
        return Err(Error::Config("boundary batch size must be >= 1".into()));
    }
    let mut points = PointSet::with_capacity(problem.input_dim(), n2);
    let mut pieces = Vec::with_capacity(n2);
    for (piece, count) in problem.boundary_split().allocate(n2) {
        let source = DomainBoundary::for_piece(problem.domain(), piece)?;
        let drawn: PointSet<F> = source.draw_batch(count, rng)?;
        points.extend(&drawn);
        pieces.extend(std::iter::repeat(piece).take(count));
    }
    Ok(SampleBatch::boundary(points, pieces, SamplerTag::UniformBoundary))
}

/// How much of the chain may stay at zero density before the sampler gives
/// up. One sweep evaluates the density `evals` times, so the nominal bound of
/// `10 (n + b)` consecutive zero proposals is clamped to that: a chain that
/// never leaves dead territory errors out.
fn degenerate_threshold(chain_len: usize, evals: usize) -> usize {
    (10 * chain_len).min(evals)
}

/// Independence-proposal Metropolis chain, one step at a time.
///
/// Runs `n + burn_in` accept/reject steps from a proposal-drawn start, then
/// returns the last `n` states. Each step draws a candidate and a uniform;
/// the candidate is accepted when `u < R^p(cand) / R^p(prev)`, and otherwise
/// the previous point repeats. A zero-density previous point accepts
/// unconditionally (the ratio's limit), which keeps the chain live on dead
/// plateaus.
pub fn metropolis_sample<F: Scalar, S: PointSource<F>, R: Rng + ?Sized>(
    density: &ResidualDensity<'_, F>,
    n: usize,
    burn_in: usize,
    proposal: &S,
    rng: &mut R,
) -> Result<SampleBatch<F>> {
    if n == 0 {
        return Err(Error::Config("metropolis sample size must be >= 1".into()));
    }
    let steps = n + burn_in;
    let threshold = degenerate_threshold(steps, steps + 1);
    let mut chain = PointSet::with_capacity(proposal.dim(), steps + 1);
    let mut current = proposal.draw(rng);
    let mut current_density = density.value(&current);
    let mut zero_run = usize::from(current_density == F::zero());
    chain.push(&current);
    for _ in 0..steps {
        let candidate = proposal.draw(rng);
        let u = F::uniform01(rng);
        let candidate_density = density.value(&candidate);
        if candidate_density == F::zero() {
            zero_run += 1;
            if zero_run >= threshold {
                return Err(Error::DegenerateDensity(format!(
                    "{zero_run} consecutive zero-density proposals"
                )));
            }
        } else {
            zero_run = 0;
        }
        let accept = if current_density == F::zero() {
            true
        } else {
            u < candidate_density / current_density
        };
        if accept {
            current = candidate;
            current_density = candidate_density;
        }
        chain.push(&current);
    }
    chain.truncate_front(n);
    Ok(SampleBatch { points: chain, region: density.region(), pieces: Vec::new(), sampler: SamplerTag::MetropolisHastings, epoch: 0, seed: 0 })
}

/// The accept/reject sweep of the vectorized Metropolis sampler, in place.
///
/// For each adjacent pair, a candidate with density at least the current
/// state's is kept without consulting the uniform; otherwise it survives only
/// if `u[i+1] <= ratio`. On rejection both the point and its cached density
/// are copied forward so later ratios use the retained state.
pub(crate) fn acceptance_sweep<F: Scalar>(points: &mut PointSet<F>, densities: &mut [F], uniforms: &[F]) {
    debug_assert_eq!(points.len(), densities.len());
    debug_assert_eq!(points.len(), uniforms.len());
    for i in 0..points.len().saturating_sub(1) {
        if densities[i + 1] < densities[i] {
            let rate = densities[i + 1] / densities[i];
            if rate < uniforms[i + 1] {
                points.copy_row(i, i + 1);
                densities[i + 1] = densities[i];
            }
        }
    }
}

/// Vectorized Metropolis sampler: pre-generates `n + burn_in` proposals and
/// uniforms, evaluates the density over the whole array (in parallel), then
/// runs the sequential accept/reject sweep and returns the last `n` points.
pub fn metropolis_sample_vectorized<F: Scalar, S: PointSource<F>, R: Rng + ?Sized>(
    density: &ResidualDensity<'_, F>,
    n: usize,
    burn_in: usize,
    proposal: &S,
    rng: &mut R,
) -> Result<SampleBatch<F>> {
    if n == 0 {
        return Err(Error::Config("metropolis sample size must be >= 1".into()));
    }
    let total = n + burn_in;
    let mut points = PointSet::with_capacity(proposal.dim(), total);
    for _ in 0..total {
        points.push(&proposal.draw(rng));
    }
    let mut densities = density.values_batch(&points);
    let uniforms: Vec<F> = (0..total).map(|_| F::uniform01(rng)).collect();
    let threshold = degenerate_threshold(total, total);
    let mut zero_run = 0usize;
    let mut worst = 0usize;
    for d in &densities {
        if *d == F::zero() {
            zero_run += 1;
            worst = worst.max(zero_run);
        } else {
            zero_run = 0;
        }
    }
    if worst >= threshold {
        return Err(Error::DegenerateDensity(format!(
            "{worst} consecutive zero-density proposals"
        )));
    }
    acceptance_sweep(&mut points, &mut densities, &uniforms);
    points.truncate_front(n);
    Ok(SampleBatch { points, region: density.region(), pieces: Vec::new(), sampler: SamplerTag::MetropolisHastings, epoch: 0, seed: 0 })
}

/// Self-normalized resampling: draw a pool, weight it by the residual
/// density, normalize by the weight sum, and resample `n` points with
/// replacement from the resulting discrete distribution.
///
/// The pool should be at least as large as `n` for training use (that is the
/// default the trainer applies), but any positive pool size is accepted: the
/// discrete distribution is well defined either way and the pool only bounds
/// how many distinct points can appear.
///
/// An all-zero weight vector means the residual carries no signal; the
/// sampler then falls back to the (uniform) pool itself with a warning.
pub fn self_normalized_sample<F: Scalar, S: PointSource<F>, R: Rng + ?Sized>(
    density: &ResidualDensity<'_, F>,
    n: usize,
    rng: &mut R,
    pool_size: usize,
    proposal: &S,
) -> Result<SampleBatch<F>> {
    if n == 0 {
        return Err(Error::Config("self-normalized sample size must be >= 1".into()));
    }
    if pool_size == 0 {
        return Err(Error::Config("self-normalized pool size must be >= 1".into()));
    }
    let pool = proposal.draw_batch(pool_size, rng)?;
    let weights = density.values_batch(&pool);
    let total: F = weights.iter().copied().sum();
    if !total.is_finite() {
        return Err(Error::NonFinite {
            context: "self-normalized weights",
            detail: format!("weight sum is {total:?}"),
        });
    }
    if total == F::zero() {
        log::warn!("residual density is zero over the whole pool; returning the uniform pool");
        let mut points = PointSet::with_capacity(pool.dim(), n);
        for i in 0..n {
            points.push(pool.point(i % pool_size));
        }
        return Ok(SampleBatch { points, region: density.region(), pieces: Vec::new(), sampler: SamplerTag::SelfNormalized, epoch: 0, seed: 0 });
    }
    let index = rand::distributions::WeightedIndex::new(&weights).map_err(|e| {
        Error::DegenerateDensity(format!("invalid resampling weights: {e}"))
    })?;
    let mut points = PointSet::with_capacity(pool.dim(), n);
    for _ in 0..n {
        let i = rng.sample(&index);
        points.push(pool.point(i));
    }
    Ok(SampleBatch { points, region: density.region(), pieces: Vec::new(), sampler: SamplerTag::SelfNormalized, epoch: 0, seed: 0 })
}

/// Residual-based refinement: draw `base_count` proposal points, then append
/// copies of the `top_k` largest-density ones. Ties break by index, so a
/// constant density duplicates the first `top_k` points.
pub fn rar_sample<F: Scalar, S: PointSource<F>, R: Rng + ?Sized>(
    density: &ResidualDensity<'_, F>,
    base_count: usize,
    top_k: usize,
    proposal: &S,
    rng: &mut R,
) -> Result<SampleBatch<F>> {
    if base_count == 0 || top_k > base_count {
        return Err(Error::Config(format!(
            "refinement needs 1 <= top_k <= base_count, got base {base_count}, top {top_k}"
        )));
    }
    let mut points = proposal.draw_batch(base_count, rng)?;
    let weights = density.values_batch(&points);
    let mut order: Vec<usize> = (0..base_count).collect();
    order.sort_unstable_by(|&a, &b| {
        weights[b].partial_cmp(&weights[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().take(top_k) {
        let row = points.point(i).to_vec();
        points.push(&row);
    }
    Ok(SampleBatch { points, region: density.region(), pieces: Vec::new(), sampler: SamplerTag::Rar, epoch: 0, seed: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::cell::Cell;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Proposal that replays a fixed list of points, ignoring the rng.
    struct ListSource {
        dim: usize,
        rows: Vec<Vec<f64>>,
        next: Cell<usize>,
    }

    impl ListSource {
        fn new(dim: usize, rows: Vec<Vec<f64>>) -> Self {
            Self { dim, rows, next: Cell::new(0) }
        }

        fn reset(&self) {
            self.next.set(0);
        }
    }

    impl PointSource<f64> for ListSource {
        fn dim(&self) -> usize {
            self.dim
        }

        fn draw<R: Rng + ?Sized>(&self, _rng: &mut R) -> Vec<f64> {
            let i = self.next.get();
            self.next.set(i + 1);
            self.rows[i % self.rows.len()].clone()
        }
    }

    /// Interval (0,1) proposal for 1D density tests.
    struct Interval;

    impl PointSource<f64> for Interval {
        fn dim(&self) -> usize {
            1
        }

        fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
            vec![rng.gen::<f64>()]
        }
    }

    fn constant_u_rng(u: f64) -> StepRng {
        // gen::<f64>() uses the top 53 bits of next_u64
        StepRng::new(((u * (1u64 << 53) as f64) as u64) << 11, 0)
    }

    #[test]
    fn annular_points_stay_in_the_ball() {
        let mut r = rng(1);
        let batch = sample_uniform_annular::<f64, _>(800, 8, 4, &mut r).unwrap();
        for p in batch.points.iter() {
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1.0);
        }
    }

    #[test]
    fn annular_shell_counts_are_exact() {
        let mut r = rng(2);
        let annuli = 5;
        let batch = sample_uniform_annular::<f64, _>(1000, annuli, 3, &mut r).unwrap();
        let mut counts = vec![0usize; annuli];
        for p in batch.points.iter() {
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            counts[((norm * annuli as f64) as usize).min(annuli - 1)] += 1;
        }
        assert_eq!(counts, vec![200; annuli]);
    }

    #[test]
    fn single_shell_radius_power_is_uniform() {
        // For the uniform ball, |x|^d ~ Unif(0,1), so its mean is 1/2.
        let mut r = rng(3);
        let d = 3;
        let batch = sample_uniform_annular::<f64, _>(100_000, 1, d, &mut r).unwrap();
        let mean: f64 = batch
            .points
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt().powi(d as i32))
            .sum::<f64>()
            / batch.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean r^d = {mean}");
    }

    #[test]
    fn annular_rejects_non_dividing_shell_count() {
        let mut r = rng(4);
        assert!(sample_uniform_annular::<f64, _>(1001, 8, 3, &mut r).is_err());
    }

    #[test]
    fn sphere_boundary_points_have_unit_norm_and_centered_coordinates() {
        let mut r = rng(5);
        let problem = PdeProblem::elliptic(3).unwrap();
        let batch = sample_boundary::<f64, _>(100_000, &problem, &mut r).unwrap();
        let mut sums = [0.0f64; 3];
        for p in batch.points.iter() {
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for i in 0..3 {
                sums[i] += p[i];
            }
        }
        for s in sums {
            assert!((s / batch.len() as f64).abs() < 0.02);
        }
    }

    #[test]
    fn parabolic_boundary_split_counts() {
        let mut r = rng(6);
        let problem = PdeProblem::parabolic(10).unwrap();
        let n2 = 12000 + 12000 / 10;
        let batch = sample_boundary::<f64, _>(n2, &problem, &mut r).unwrap();
        let lateral = batch.pieces.iter().filter(|p| **p == BoundaryPiece::Lateral).count();
        let initial = batch.pieces.iter().filter(|p| **p == BoundaryPiece::InitialValue).count();
        assert_eq!(lateral, 12000);
        assert_eq!(initial, 1200);
        for (p, piece) in batch.points.iter().zip(&batch.pieces) {
            assert!(problem.domain().on_boundary(p, *piece), "{p:?} not on {piece}");
        }
    }

    #[test]
    fn metropolis_with_flat_density_returns_the_proposal_stream() {
        let density = ResidualDensity::new(|x: &[f64]| x[0].abs(), 0.0, Region::Interior);
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 12.0]).collect();
        let source = ListSource::new(1, rows.clone());
        let mut r = rng(7);
        let batch = metropolis_sample(&density, 8, 3, &source, &mut r).unwrap();
        // p = 0 accepts everything: output is the last 8 proposals
        // (initial point plus 11 candidates were drawn)
        for (i, p) in batch.points.iter().enumerate() {
            assert_eq!(p[0], rows[i + 4][0]);
        }
    }

    #[test]
    fn vectorized_with_flat_density_returns_last_proposals_unchanged() {
        let density = ResidualDensity::new(|x: &[f64]| x[0].abs(), 0.0, Region::Interior);
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let source = ListSource::new(1, rows.clone());
        let mut r = rng(8);
        let batch = metropolis_sample_vectorized(&density, 6, 4, &source, &mut r).unwrap();
        for (i, p) in batch.points.iter().enumerate() {
            assert_eq!(p[0], rows[i + 4][0]);
        }
    }

    #[test]
    fn sequential_and_vectorized_chains_agree_on_shared_streams() {
        // Drive both samplers with the same candidate list and a constant
        // uniform. The sequential chain has one extra leading state (its
        // start is drawn separately), so the vectorized run uses burn_in + 1
        // to line the retained windows up exactly.
        let density = ResidualDensity::new(|x: &[f64]| (x[0] * 2.2).sin().abs() + 0.05, 1.7, Region::Interior);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.7919).rem_euclid(1.0)])
            .collect();
        for u_star in [0.11, 0.37, 0.73, 0.95] {
            let (n, b) = (10, 6);
            let source = ListSource::new(1, rows.clone());
            let mut seq_rng = constant_u_rng(u_star);
            let seq = metropolis_sample(&density, n, b, &source, &mut seq_rng).unwrap();
            source.reset();
            let mut vec_rng = constant_u_rng(u_star);
            let vec = metropolis_sample_vectorized(&density, n, b + 1, &source, &mut vec_rng).unwrap();
            for i in 0..n {
                assert_eq!(seq.points.point(i), vec.points.point(i), "u* = {u_star}, index {i}");
            }
        }
    }

    #[test]
    fn sweep_never_rejects_a_candidate_with_higher_density() {
        // monotone density f(x) = x on (0,1): a candidate above its
        // predecessor always survives the sweep
        let mut r = rng(9);
        let n = 400;
        let mut points = PointSet::with_capacity(1, n);
        for _ in 0..n {
            points.push(&[r.gen::<f64>()]);
        }
        let original = points.clone();
        let mut densities: Vec<f64> = (0..n).map(|i| points.point(i)[0]).collect();
        let uniforms: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        acceptance_sweep(&mut points, &mut densities, &uniforms);
        for i in 1..n {
            if original.point(i)[0] >= densities[i - 1] {
                // densities[i-1] is the retained state's density
            }
            if points.point(i) != original.point(i) {
                // replaced: the rejected candidate had strictly lower density
                assert!(original.point(i)[0] < points.point(i)[0]);
            }
        }
    }

    #[test]
    fn metropolis_1d_quadratic_target_histogram() {
        // smoke version of the acceptance check: TV distance to 3x^2
        let density = ResidualDensity::new(|x: &[f64]| x[0] * x[0], 1.0, Region::Interior);
        let mut r = rng(10);
        let batch = metropolis_sample(&density, 20_000, 1000, &Interval, &mut r).unwrap();
        let bins = 20;
        let mut hist = vec![0.0f64; bins];
        for p in batch.points.iter() {
            hist[((p[0] * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let n = batch.len() as f64;
        let tv: f64 = (0..bins)
            .map(|k| {
                let lo = k as f64 / bins as f64;
                let hi = (k + 1) as f64 / bins as f64;
                let expect = hi.powi(3) - lo.powi(3);
                (hist[k] / n - expect).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.1, "TV distance {tv}");
    }

    #[test]
    fn metropolis_matches_the_independence_kernel_on_five_states() {
        // Discretized density over 5 cells with weights 1..5. The chain's
        // empirical pair frequencies must match pi_i * P(i -> j) with
        // P(i -> j) = (1/5) min(1, w_j / w_i) for j != i.
        let w = [1.0, 2.0, 3.0, 4.0, 5.0];
        let density = ResidualDensity::new(
            move |x: &[f64]| w[((x[0] * 5.0) as usize).min(4)],
            1.0,
            Region::Interior,
        );
        let mut r = rng(11);
        let steps = 1_000_000;
        let batch = metropolis_sample(&density, steps, 0, &Interval, &mut r).unwrap();
        let cell = |p: &[f64]| ((p[0] * 5.0) as usize).min(4);
        let mut pair = [[0.0f64; 5]; 5];
        let mut prev = cell(batch.points.point(0));
        for i in 1..batch.len() {
            let cur = cell(batch.points.point(i));
            pair[prev][cur] += 1.0;
            prev = cur;
        }
        let total: f64 = w.iter().sum();
        let n = (batch.len() - 1) as f64;
        for i in 0..5 {
            let pi = w[i] / total;
            for j in 0..5 {
                let p_ij = if i == j {
                    let mut stay = 1.0 / 5.0;
                    for k in 0..5 {
                        if k != i {
                            stay += (1.0 - (w[k] / w[i]).min(1.0)) / 5.0;
                        }
                    }
                    stay
                } else {
                    (w[j] / w[i]).min(1.0) / 5.0
                };
                let expect = pi * p_ij;
                let got = pair[i][j] / n;
                let sigma = (expect * (1.0 - expect) / n).sqrt();
                assert!(
                    (got - expect).abs() < 3.0 * sigma + 1e-9,
                    "pair ({i},{j}): got {got:.6}, expected {expect:.6}, sigma {sigma:.2e}"
                );
            }
        }
    }

    #[test]
    fn self_normalized_two_point_pool_frequencies() {
        // weights [1, 3] resample with probabilities [0.25, 0.75]
        let density = ResidualDensity::new(
            |x: &[f64]| if x[0] < 0.5 { 1.0 } else { 3.0 },
            1.0,
            Region::Interior,
        );
        let source = ListSource::new(1, vec![vec![0.2], vec![0.8]]);
        let mut r = rng(12);
        let n = 100_000;
        let batch = self_normalized_sample(&density, n, &mut r, 2, &source).unwrap();
        let heavy = batch.points.iter().filter(|p| p[0] > 0.5).count() as f64 / n as f64;
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        assert!((heavy - 0.75).abs() < 3.0 * sigma, "heavy fraction {heavy}");
    }

    #[test]
    fn self_normalized_flat_exponent_resamples_uniformly() {
        let density = ResidualDensity::new(|x: &[f64]| x[0], 0.0, Region::Interior);
        let source = ListSource::new(1, vec![vec![0.1], vec![0.5], vec![0.9]]);
        let mut r = rng(13);
        let n = 90_000;
        let batch = self_normalized_sample(&density, n, &mut r, 3, &source).unwrap();
        for v in [0.1, 0.5, 0.9] {
            let freq = batch.points.iter().filter(|p| (p[0] - v).abs() < 1e-12).count() as f64 / n as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq of {v} = {freq}");
        }
    }

    #[test]
    fn self_normalized_subset_probability_matches_weight_ratio() {
        // For f(x) = x on (0,1) and the subset (0, 1/2), the resampling
        // probability converges to the weight ratio 1/4.
        let density = ResidualDensity::new(|x: &[f64]| x[0], 1.0, Region::Interior);
        let mut r = rng(14);
        let n = 100_000;
        let batch = self_normalized_sample(&density, n, &mut r, n, &Interval).unwrap();
        let left = batch.points.iter().filter(|p| p[0] < 0.5).count() as f64 / n as f64;
        assert!((left - 0.25).abs() < 0.01, "left-half probability {left}");
    }

    #[test]
    fn self_normalized_zero_weights_fall_back_to_the_pool() {
        let density = ResidualDensity::new(|_: &[f64]| 0.0, 1.0, Region::Interior);
        let source = ListSource::new(1, (0..6).map(|i| vec![i as f64]).collect());
        let mut r = rng(15);
        let batch = self_normalized_sample(&density, 4, &mut r, 6, &source).unwrap();
        for (i, p) in batch.points.iter().enumerate() {
            assert_eq!(p[0], i as f64);
        }
    }

    #[test]
    fn self_normalized_rejects_empty_pool_and_empty_request() {
        let density = ResidualDensity::new(|x: &[f64]| x[0], 1.0, Region::Interior);
        let mut r = rng(16);
        assert!(self_normalized_sample(&density, 10, &mut r, 0, &Interval).is_err());
        assert!(self_normalized_sample(&density, 0, &mut r, 5, &Interval).is_err());
    }

    #[test]
    fn resampling_probability_is_monotone_in_weight_and_sharpens_with_p() {
        let w1 = 3.0f64;
        let w2 = 2.0f64;
        let mut prev_ratio = 0.0;
        for p in [0.5, 1.0, 2.0, 4.0] {
            let density = ResidualDensity::new(
                move |x: &[f64]| if x[0] < 0.5 { w1 } else { w2 },
                p,
                Region::Interior,
            );
            let v1 = density.value(&[0.2]);
            let v2 = density.value(&[0.8]);
            assert!(v1 > v2);
            let ratio = v1 / v2;
            assert!(ratio > prev_ratio, "ratio {ratio} did not grow at p = {p}");
            prev_ratio = ratio;
        }
    }

    #[test]
    fn rar_duplicates_the_largest_density_points() {
        let density = ResidualDensity::new(|x: &[f64]| x[0], 1.0, Region::Interior);
        let mut r = rng(17);
        let batch = rar_sample(&density, 100, 20, &Interval, &mut r).unwrap();
        assert_eq!(batch.len(), 120);
        let base: Vec<f64> = (0..100).map(|i| batch.points.point(i)[0]).collect();
        let mut sorted = base.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let threshold = sorted[19];
        for i in 100..120 {
            let v = batch.points.point(i)[0];
            assert!(v >= threshold);
            assert!(base.contains(&v), "duplicate {v} not in the base pool");
        }
    }

    #[test]
    fn rar_constant_density_ties_break_by_index() {
        let density = ResidualDensity::new(|_: &[f64]| 1.0, 1.0, Region::Interior);
        let mut r = rng(18);
        let batch = rar_sample(&density, 10, 3, &Interval, &mut r).unwrap();
        assert_eq!(batch.len(), 13);
        for k in 0..3 {
            assert_eq!(batch.points.point(10 + k), batch.points.point(k));
        }
    }

    #[test]
    fn rar_default_counts_give_twelve_thousand() {
        let density = ResidualDensity::new(|x: &[f64]| x[0].abs(), 1.0, Region::Interior);
        let source = AnnularBall::uniform(2);
        let mut r = rng(19);
        let batch = rar_sample(&density, 10_000, 2_000, &source, &mut r).unwrap();
        assert_eq!(batch.len(), 12_000);
    }

    #[test]
    fn samplers_are_deterministic_under_a_fixed_seed() {
        let density = ResidualDensity::new(|x: &[f64]| x[0] * x[0] + 0.01, 1.0, Region::Interior);
        let source = AnnularBall::new(2, 4).unwrap();
        let run = |seed: u64| {
            let mut r = rng(seed);
            let a = sample_uniform_annular::<f64, _>(64, 4, 2, &mut r).unwrap();
            let b = metropolis_sample_vectorized(&density, 32, 8, &source, &mut r).unwrap();
            let c = self_normalized_sample(&density, 32, &mut r, 64, &source).unwrap();
            let d = rar_sample(&density, 40, 8, &source, &mut r).unwrap();
            (a.points, b.points, c.points, d.points)
        };
        let x = run(99);
        let y = run(99);
        assert_eq!(x.0, y.0);
        assert_eq!(x.1, y.1);
        assert_eq!(x.2, y.2);
        assert_eq!(x.3, y.3);
    }

    #[test]
    fn density_counter_counts_every_evaluation() {
        let counter = AtomicU64::new(0);
        let density =
            ResidualDensity::new(|x: &[f64]| x[0].abs(), 1.0, Region::Interior).with_counter(&counter);
        let source = AnnularBall::uniform(1);
        let mut r = rng(20);
        let _ = self_normalized_sample(&density, 16, &mut r, 32, &source).unwrap();
        assert_eq!(counter.load(Ordering::Relaxed), 32);
    }

    #[test]
    fn degenerate_density_errors_out_of_the_chain() {
        let density = ResidualDensity::new(|_: &[f64]| 0.0, 1.0, Region::Interior);
        let mut r = rng(21);
        let err = metropolis_sample(&density, 8, 2, &Interval, &mut r);
        assert!(matches!(err, Err(Error::DegenerateDensity(_))));
        let err = metropolis_sample_vectorized(&density, 8, 2, &Interval, &mut r);
        assert!(matches!(err, Err(Error::DegenerateDensity(_))));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn annular_batches_stay_in_their_shells(seed in 0u64..500, annuli in 1usize..6, dim in 1usize..5) {
                let n = annuli * 20;
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let batch = sample_uniform_annular::<f64, _>(n, annuli, dim, &mut r).unwrap();
                for (i, p) in batch.points.iter().enumerate() {
                    let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                    prop_assert!(norm < 1.0);
                    let shell = i / 20;
                    prop_assert!(norm >= shell as f64 / annuli as f64);
                    prop_assert!(norm <= (shell + 1) as f64 / annuli as f64);
                }
            }

            #[test]
            fn boundary_batches_satisfy_their_piece_membership(seed in 0u64..200) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                for problem in [
                    PdeProblem::elliptic(3).unwrap(),
                    PdeProblem::parabolic(2).unwrap(),
                    PdeProblem::hyperbolic(2).unwrap(),
                    PdeProblem::poisson2d(),
                ] {
                    let batch = sample_boundary::<f64, _>(30, &problem, &mut r).unwrap();
                    prop_assert_eq!(batch.len(), 30);
                    for (p, piece) in batch.points.iter().zip(&batch.pieces) {
                        prop_assert!(problem.domain().on_boundary(p, *piece));
                    }
                }
            }

            #[test]
            fn adaptive_outputs_stay_inside_the_proposal_region(seed in 0u64..200) {
                let density = ResidualDensity::new(|x: &[f64]| x[0].abs() + 0.1, 1.0, Region::Interior);
                let source = AnnularBall::new(3, 2).unwrap();
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let mh = metropolis_sample_vectorized(&density, 24, 8, &source, &mut r).unwrap();
                let sn = self_normalized_sample(&density, 24, &mut r, 24, &source).unwrap();
                for batch in [mh, sn] {
                    for p in batch.points.iter() {
                        let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                        prop_assert!(norm < 1.0);
                    }
                }
            }
        }
    }
}
