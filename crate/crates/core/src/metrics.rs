//! Accuracy assessment on a fixed test set, error-reduction reporting, and
//! Monte-Carlo estimator diagnostics.
//!
//! Every trained model of a given problem is scored on the same 10000-point
//! test set: the points are drawn once from the uniform annular distribution
//! with a fixed, documented seed per problem, so error numbers are comparable
//! across runs and across samplers. The generator is pinned to ChaCha8 (a
//! counter-based stream cipher RNG), making the sets reproducible across
//! machines as well.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::nn::SolutionNetwork;
use crate::points::PointSet;
use crate::problems::PdeProblem;
use crate::samplers::{DomainInterior, PointSource};
use crate::scalar::{cast, Scalar};
use crate::{Error, Result};

/// Test-set seeds, one per benchmark problem.
pub const TEST_SEED_ELLIPTIC: u64 = 1001;
pub const TEST_SEED_PARABOLIC: u64 = 1002;
pub const TEST_SEED_HYPERBOLIC: u64 = 1003;
pub const TEST_SEED_POISSON2D: u64 = 1004;

/// Number of test points used for the error metrics.
pub const TEST_SET_SIZE: usize = 10_000;

/// Default shell count of the annular test distribution.
pub const TEST_SET_ANNULI: usize = 8;

pub fn default_test_seed(problem: &PdeProblem) -> u64 {
    match problem.kind() {
        crate::problems::ProblemKind::Elliptic => TEST_SEED_ELLIPTIC,
        crate::problems::ProblemKind::Parabolic => TEST_SEED_PARABOLIC,
        crate::problems::ProblemKind::Hyperbolic => TEST_SEED_HYPERBOLIC,
        crate::problems::ProblemKind::Poisson2d => TEST_SEED_POISSON2D,
    }
}

/// Fixed evaluation points with cached exact-solution values.
#[derive(Debug, Clone)]
pub struct TestSet<F> {
    points: PointSet<F>,
    exact: Vec<F>,
    exact_l2: F,
    exact_max: F,
}

impl<F: Scalar> TestSet<F> {
    /// Draws `count` annular points for `problem` with the given seed.
    pub fn generate(problem: &PdeProblem, seed: u64, count: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let annuli = if count % TEST_SET_ANNULI == 0 { TEST_SET_ANNULI } else { 1 };
        let source = DomainInterior::new(problem.domain(), annuli)?;
        let points: PointSet<F> = source.draw_batch(count, &mut rng)?;
        Ok(Self::from_points(problem, points))
    }

    /// The default per-problem test set (10000 points, documented seed).
    pub fn for_problem(problem: &PdeProblem) -> Result<Self> {
        Self::generate(problem, default_test_seed(problem), TEST_SET_SIZE)
    }

    pub fn from_points(problem: &PdeProblem, points: PointSet<F>) -> Self {
        let exact: Vec<F> = points.iter().map(|x| problem.exact_solution(x)).collect();
        let exact_l2 = exact.iter().map(|u| *u * *u).sum::<F>().sqrt();
        let exact_max = exact.iter().fold(F::zero(), |a, u| a.max(u.abs()));
        Self { points, exact, exact_l2, exact_max }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &PointSet<F> {
        &self.points
    }

    pub fn exact_values(&self) -> &[F] {
        &self.exact
    }
}

/// Relative l2 error of `phi` against the exact solution over the test set:
/// `sqrt(sum |phi - u|^2) / sqrt(sum |u|^2)`.
pub fn rel_l2_error_of<F: Scalar>(phi: impl Fn(&[F]) -> F, test: &TestSet<F>) -> Result<F> {
    if test.exact_l2 == F::zero() {
        return Err(Error::UndefinedDenominator("exact solution is zero over the whole test set"));
    }
    let mut sum = F::zero();
    for (x, u) in test.points.iter().zip(&test.exact) {
        let d = phi(x) - *u;
        sum = sum + d * d;
    }
    Ok(sum.sqrt() / test.exact_l2)
}

/// Max-modulus error ratio: `max |phi - u| / max |u|` over the test set.
pub fn max_modulus_error_of<F: Scalar>(phi: impl Fn(&[F]) -> F, test: &TestSet<F>) -> Result<F> {
    if test.exact_max == F::zero() {
        return Err(Error::UndefinedDenominator("exact solution is zero over the whole test set"));
    }
    let mut max = F::zero();
    for (x, u) in test.points.iter().zip(&test.exact) {
        max = max.max((phi(x) - *u).abs());
    }
    Ok(max / test.exact_max)
}

/// Relative l2 error of a trained network over the test set.
pub fn rel_l2_error<F: Scalar>(net: &SolutionNetwork<F>, test: &TestSet<F>) -> Result<F> {
    rel_l2_error_of(|x| net.forward(x), test)
}

/// Max-modulus error of a trained network over the test set.
pub fn max_modulus_error<F: Scalar>(net: &SolutionNetwork<F>, test: &TestSet<F>) -> Result<F> {
    max_modulus_error_of(|x| net.forward(x), test)
}

/// Both error metrics in one pass.
pub fn error_pair<F: Scalar>(net: &SolutionNetwork<F>, test: &TestSet<F>) -> Result<(F, F)> {
    Ok((rel_l2_error(net, test)?, max_modulus_error(net, test)?))
}

/// Error reduction of an adaptive run against the basic run, as a percentage:
/// `(1 - adaptive/basic) * 100`.
pub fn error_reduction(adaptive_err: f64, basic_err: f64) -> Result<f64> {
    if !(basic_err > 0.0) {
        return Err(Error::UndefinedDenominator("basic error must be positive"));
    }
    Ok((1.0 - adaptive_err / basic_err) * 100.0)
}

/// Plain Monte-Carlo estimate `|domain|/n * sum w(x_i) p(x_i)` with the
/// points drawn from `p` by the caller.
pub fn plain_mc_estimate<F: Scalar>(
    w: impl Fn(&[F]) -> F,
    p_density: impl Fn(&[F]) -> F,
    points: &PointSet<F>,
    volume: F,
) -> Result<F> {
    if points.is_empty() {
        return Err(Error::Config("estimator needs at least one point".into()));
    }
    let sum: F = points.iter().map(|x| w(x) * p_density(x)).sum();
    Ok(volume * sum / cast(points.len() as f64))
}

/// Importance-sampling estimate `|domain|/n * sum w(x_i) p(x_i) / q(x_i)`
/// with the points drawn from the biasing density `q` by the caller.
/// Requires `q > 0` wherever `w * p != 0`.
pub fn importance_estimate<F: Scalar>(
    w: impl Fn(&[F]) -> F,
    p_density: impl Fn(&[F]) -> F,
    q_density: impl Fn(&[F]) -> F,
    points: &PointSet<F>,
    volume: F,
) -> Result<F> {
    if points.is_empty() {
        return Err(Error::Config("estimator needs at least one point".into()));
    }
    let mut sum = F::zero();
    for x in points.iter() {
        let q = q_density(x);
        let wp = w(x) * p_density(x);
        if q == F::zero() {
            if wp != F::zero() {
                return Err(Error::SupportViolation(format!(
                    "q vanished at {x:?} where w*p = {wp}"
                )));
            }
            continue;
        }
        sum = sum + wp / q;
    }
    Ok(volume * sum / cast(points.len() as f64))
}
