//! Benchmark PDE definitions: interior/boundary residual evaluators, exact
//! solutions, analytic forcing terms, and domain descriptors.
//!
//! Four problems are built in, all with known exact solutions `u`:
//!
//! * `elliptic`   — `-div((1 + |x|^2/2) grad u) + |grad u|^2 = f` on the unit
//!   ball, `u = 0` on the sphere, `u = sin(pi/2 (1-|x|)^2.5)`.
//! * `parabolic`  — `u_t - div_x((1 + |x|/2) grad_x u) = f` on ball x (0,1),
//!   lateral data and initial data from `u = exp(|x| sqrt(1-t))`.
//! * `hyperbolic` — `u_tt - lap_x u = f` on ball x (0,1) with zero lateral,
//!   initial value and initial rate data, `u = (exp(t^2)-1) sin(pi/2 (1-|x|)^2.5)`.
//! * `poisson2d`  — `-lap u = f` on the unit square with `u = min(x^2, (1-x)^2)`.
//!
//! Divergence-form operators are expanded analytically,
//! `div(a grad u) = a lap u + grad a . grad u`, so no stencil is ever nested.
//! The `1/|x|` factor in the parabolic coefficient gradient is clamped at
//! `|x| >= 1e-10`; the radial exact solutions use series-safe forms for
//! `|x| < 1e-6` where the quotient `u'(r)/r` has a removable limit.

use crate::points::BoundaryPiece;
use crate::scalar::{cast, Scalar};
use crate::stencil::{
    probe_block, probe_count, quantities_from_values, Quantities, QuantityCotangent, StencilConfig,
};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Radius below which `u'(r)/r` switches to its analytic limit.
const RADIAL_LIMIT_EPS: f64 = 1e-6;

/// Clamp floor for the `1/|x|` coefficient factor of the parabolic operator.
const RADIUS_CLAMP: f64 = 1e-10;

/// Geometry of a benchmark domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainDescriptor {
    /// `{ x : |x| < 1 }`.
    UnitBall { spatial_dim: usize },
    /// `{ x : |x| < 1 } x (0, 1)`, time as the last coordinate.
    BallCylinder { spatial_dim: usize },
    /// `(0, 1) x (0, 1)`.
    UnitSquare,
}

impl DomainDescriptor {
    pub fn spatial_dim(&self) -> usize {
        match self {
            DomainDescriptor::UnitBall { spatial_dim } => *spatial_dim,
            DomainDescriptor::BallCylinder { spatial_dim } => *spatial_dim,
            DomainDescriptor::UnitSquare => 2,
        }
    }

    pub fn has_time(&self) -> bool {
        matches!(self, DomainDescriptor::BallCylinder { .. })
    }

    /// Length of the point vectors this domain works with.
    pub fn input_dim(&self) -> usize {
        self.spatial_dim() + usize::from(self.has_time())
    }

    fn spatial_norm<F: Scalar>(&self, x: &[F]) -> F {
        x[..self.spatial_dim()].iter().map(|v| *v * *v).sum::<F>().sqrt()
    }

    pub fn contains_interior<F: Scalar>(&self, x: &[F]) -> bool {
        if x.len() != self.input_dim() {
            return false;
        }
        match self {
            DomainDescriptor::UnitBall { .. } => self.spatial_norm(x) < F::one(),
            DomainDescriptor::BallCylinder { spatial_dim } => {
                let t = x[*spatial_dim];
                self.spatial_norm(x) < F::one() && t >= F::zero() && t < F::one()
            }
            DomainDescriptor::UnitSquare => {
                x.iter().all(|v| *v > F::zero() && *v < F::one())
            }
        }
    }

    pub fn on_boundary<F: Scalar>(&self, x: &[F], piece: BoundaryPiece) -> bool {
        if x.len() != self.input_dim() {
            return false;
        }
        let tol = cast::<F>(1e-9).max(F::epsilon() * cast::<F>(100.0));
        match (self, piece) {
            (DomainDescriptor::UnitBall { .. }, BoundaryPiece::Lateral) => {
                (self.spatial_norm(x) - F::one()).abs() <= tol
            }
            (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::Lateral) => {
                let t = x[*spatial_dim];
                (self.spatial_norm(x) - F::one()).abs() <= tol && t >= F::zero() && t <= F::one()
            }
            (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::InitialValue)
            | (DomainDescriptor::BallCylinder { spatial_dim }, BoundaryPiece::InitialRate) => {
                x[*spatial_dim].abs() <= tol && self.spatial_norm(x) < F::one()
            }
            (DomainDescriptor::UnitSquare, BoundaryPiece::Lateral) => {
                let inside_closure = x.iter().all(|v| *v >= -tol && *v <= F::one() + tol);
                let on_edge = x
                    .iter()
                    .any(|v| v.abs() <= tol || (*v - F::one()).abs() <= tol);
                inside_closure && on_edge
            }
            _ => false,
        }
    }
}

/// How a boundary batch of size `n2` is divided among constraint pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySplit {
    /// Fraction of `n2` assigned to the initial slice (`0` for stationary
    /// problems, `1/(d+1)` for the time-dependent benchmarks).
    pub initial_fraction: f64,
    /// Whether the initial allotment is split evenly between value and rate
    /// constraints (second-order-in-time problems).
    pub split_initial_rate: bool,
}

impl BoundarySplit {
    pub fn stationary() -> Self {
        Self { initial_fraction: 0.0, split_initial_rate: false }
    }

    /// Allocates counts per piece. The initial count is
    /// `round(n2 * initial_fraction)`; when the rate split applies and the
    /// initial count is odd, the value constraint receives the extra point.
    pub fn allocate(&self, n2: usize) -> Vec<(BoundaryPiece, usize)> {
        let n_init = (n2 as f64 * self.initial_fraction).round() as usize;
        let n_init = n_init.min(n2);
        let n_lateral = n2 - n_init;
        let mut pieces = vec![(BoundaryPiece::Lateral, n_lateral)];
        if self.split_initial_rate {
            let n_rate = n_init / 2;
            pieces.push((BoundaryPiece::InitialValue, n_init - n_rate));
            pieces.push((BoundaryPiece::InitialRate, n_rate));
        } else {
            pieces.push((BoundaryPiece::InitialValue, n_init));
        }
        pieces.retain(|&(_, n)| n > 0);
        pieces
    }
}

/// Which benchmark a [`PdeProblem`] instance is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
    Poisson2d,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(ProblemKind::Elliptic),
            "parabolic" => Ok(ProblemKind::Parabolic),
            "hyperbolic" => Ok(ProblemKind::Hyperbolic),
            "poisson2d" => Ok(ProblemKind::Poisson2d),
            other => Err(Error::Config(format!(
                "unknown problem '{other}' (expected elliptic|parabolic|hyperbolic|poisson2d)"
            ))),
        }
    }
}

/// Where a residual is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Interior,
    Boundary(BoundaryPiece),
}

/// A benchmark boundary-value problem with exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    kind: ProblemKind,
    spatial_dim: usize,
    domain: DomainDescriptor,
    boundary_split: BoundarySplit,
}

/// Shared radial profile `g(r) = sin(pi/2 (1-r)^2.5)` of the elliptic and
/// hyperbolic exact solutions, extended by zero for `r >= 1`.
/// Returns `(g, g', g'', g'/r)` with the series-safe quotient near `r = 0`.
fn radial_wave<F: Scalar>(r: F) -> (F, F, F, F) {
    let one_minus = (F::one() - r).max(F::zero());
    let psi = cast::<F>(PI / 2.0) * one_minus.powf(cast(2.5));
    let (sin_psi, cos_psi) = (psi.sin(), psi.cos());
    let g = sin_psi;
    let gp = -cast::<F>(5.0 * PI / 4.0) * one_minus.powf(cast(1.5)) * cos_psi;
    let gpp = cast::<F>(15.0 * PI / 8.0) * one_minus.sqrt() * cos_psi
        - cast::<F>(25.0 * PI * PI / 16.0) * one_minus.powi(3) * sin_psi;
    let gp_over_r = if r < cast(RADIAL_LIMIT_EPS) {
        cast::<F>(-25.0 * PI * PI / 16.0)
    } else {
        gp / r
    };
    (g, gp, gpp, gp_over_r)
}

/// Per-axis gradient and second derivatives of a radial profile, from
/// `g'/r` and `g''` at radius `r = |x|`.
fn radial_axis_derivs<F: Scalar>(
    x: &[F],
    r: F,
    gp_over_r: F,
    gpp: F,
    grad: &mut [F],
    second: &mut [F],
) {
    if r < cast(RADIAL_LIMIT_EPS) {
        // Isotropic limit: Hessian -> g''(0) I, and g''(0) = lim g'/r for a
        // profile with g'(0) = 0.
        for i in 0..x.len() {
            grad[i] = gp_over_r * x[i];
            second[i] = gp_over_r;
        }
        return;
    }
    for i in 0..x.len() {
        let w = x[i] / r;
        let w2 = w * w;
        grad[i] = gp_over_r * x[i];
        second[i] = gpp * w2 + gp_over_r * (F::one() - w2);
    }
}

impl PdeProblem {
    /// Nonlinear elliptic benchmark on the `d`-dimensional unit ball.
    pub fn elliptic(spatial_dim: usize) -> Result<Self> {
        if spatial_dim < 2 {
            return Err(Error::Config("elliptic problem needs spatial dimension >= 2".into()));
        }
        Ok(Self {
            kind: ProblemKind::Elliptic,
            spatial_dim,
            domain: DomainDescriptor::UnitBall { spatial_dim },
            boundary_split: BoundarySplit::stationary(),
        })
    }

    /// Parabolic benchmark on ball x (0,1).
    pub fn parabolic(spatial_dim: usize) -> Result<Self> {
        if spatial_dim < 2 {
            return Err(Error::Config("parabolic problem needs spatial dimension >= 2".into()));
        }
        Ok(Self {
            kind: ProblemKind::Parabolic,
            spatial_dim,
            domain: DomainDescriptor::BallCylinder { spatial_dim },
            boundary_split: BoundarySplit {
                initial_fraction: 1.0 / (spatial_dim as f64 + 1.0),
                split_initial_rate: false,
            },
        })
    }

    /// Wave-equation benchmark on ball x (0,1).
    pub fn hyperbolic(spatial_dim: usize) -> Result<Self> {
        if spatial_dim < 2 {
            return Err(Error::Config("hyperbolic problem needs spatial dimension >= 2".into()));
        }
        Ok(Self {
            kind: ProblemKind::Hyperbolic,
            spatial_dim,
            domain: DomainDescriptor::BallCylinder { spatial_dim },
            boundary_split: BoundarySplit {
                initial_fraction: 1.0 / (spatial_dim as f64 + 1.0),
                split_initial_rate: true,
            },
        })
    }

    /// 2D Poisson benchmark on the unit square.
    pub fn poisson2d() -> Self {
        Self {
            kind: ProblemKind::Poisson2d,
            spatial_dim: 2,
            domain: DomainDescriptor::UnitSquare,
            boundary_split: BoundarySplit::stationary(),
        }
    }

    pub fn from_kind(kind: ProblemKind, spatial_dim: usize) -> Result<Self> {
        match kind {
            ProblemKind::Elliptic => Self::elliptic(spatial_dim),
            ProblemKind::Parabolic => Self::parabolic(spatial_dim),
            ProblemKind::Hyperbolic => Self::hyperbolic(spatial_dim),
            ProblemKind::Poisson2d => {
                if spatial_dim != 2 {
                    return Err(Error::Config("poisson2d is two-dimensional".into()));
                }
                Ok(Self::poisson2d())
            }
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProblemKind::Elliptic => "elliptic",
            ProblemKind::Parabolic => "parabolic",
            ProblemKind::Hyperbolic => "hyperbolic",
            ProblemKind::Poisson2d => "poisson2d",
        }
    }

    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    pub fn time_dependent(&self) -> bool {
        self.domain.has_time()
    }

    /// Length of the point vectors the evaluators expect (`d`, or `d + 1`
    /// with time).
    pub fn input_dim(&self) -> usize {
        self.domain.input_dim()
    }

    pub fn domain(&self) -> DomainDescriptor {
        self.domain
    }

    pub fn boundary_split(&self) -> BoundarySplit {
        self.boundary_split
    }

    /// Default boundary batch size for an interior batch of `n1` points:
    /// `n1` for stationary problems, `n1 + n1/d` with time (integer division).
    pub fn default_boundary_count(&self, n1: usize) -> usize {
        if self.time_dependent() {
            n1 + n1 / self.spatial_dim
        } else {
            n1
        }
    }

    fn spatial_norm<F: Scalar>(&self, x: &[F]) -> F {
        self.domain.spatial_norm(x)
    }

    /// Exact solution `u` at `x` (radial profiles extended by zero outside
    /// the closed ball; the parabolic exponent is clamped at `t = 1`).
    pub fn exact_solution<F: Scalar>(&self, x: &[F]) -> F {
        debug_assert_eq!(x.len(), self.input_dim());
        match self.kind {
            ProblemKind::Elliptic => radial_wave(self.spatial_norm(x)).0,
            ProblemKind::Parabolic => {
                let r = self.spatial_norm(x);
                let beta = (F::one() - x[self.spatial_dim]).max(F::zero()).sqrt();
                (r * beta).exp()
            }
            ProblemKind::Hyperbolic => {
                let t = x[self.spatial_dim];
                let amp = (t * t).exp() - F::one();
                amp * radial_wave(self.spatial_norm(x)).0
            }
            ProblemKind::Poisson2d => {
                let a = x[0] * x[0];
                let b = (F::one() - x[0]) * (F::one() - x[0]);
                a.min(b)
            }
        }
    }

    /// Analytic forcing `f = D u` for the exact solution.
    pub fn forcing<F: Scalar>(&self, x: &[F]) -> F {
        debug_assert_eq!(x.len(), self.input_dim());
        let d = cast::<F>(self.spatial_dim as f64);
        match self.kind {
            ProblemKind::Elliptic => {
                let r = self.spatial_norm(x);
                let (_, gp, gpp, gp_over_r) = radial_wave(r);
                let a = F::one() + r * r / cast(2.0);
                -a * (gpp + (d - F::one()) * gp_over_r) - r * gp + gp * gp
            }
            ProblemKind::Parabolic => {
                let r = self.spatial_norm(x);
                let t = x[self.spatial_dim];
                let beta = (F::one() - t).sqrt();
                let u = (r * beta).exp();
                let r_hat = r.max(cast(RADIUS_CLAMP));
                let b = F::one() + r / cast(2.0);
                let du_dt = -u * r / (cast::<F>(2.0) * beta);
                du_dt - b * (beta * beta * u + (d - F::one()) * beta * u / r_hat)
                    - beta * u / cast(2.0)
            }
            ProblemKind::Hyperbolic => {
                let r = self.spatial_norm(x);
                let t = x[self.spatial_dim];
                let (g, _, gpp, gp_over_r) = radial_wave(r);
                let exp_t2 = (t * t).exp();
                let amp = exp_t2 - F::one();
                let amp_tt = (cast::<F>(2.0) + cast::<F>(4.0) * t * t) * exp_t2;
                amp_tt * g - amp * (gpp + (d - F::one()) * gp_over_r)
            }
            ProblemKind::Poisson2d => cast(-2.0),
        }
    }

    /// Boundary data for the given constraint piece: Dirichlet trace `g`,
    /// initial value, or initial rate.
    pub fn boundary_data<F: Scalar>(&self, x: &[F], piece: BoundaryPiece) -> F {
        debug_assert_eq!(x.len(), self.input_dim());
        match (self.kind, piece) {
            (ProblemKind::Elliptic, BoundaryPiece::Lateral) => F::zero(),
            (ProblemKind::Parabolic, BoundaryPiece::Lateral) => self.exact_solution(x),
            (ProblemKind::Parabolic, BoundaryPiece::InitialValue) => {
                self.spatial_norm(x).exp()
            }
            (ProblemKind::Hyperbolic, BoundaryPiece::Lateral)
            | (ProblemKind::Hyperbolic, BoundaryPiece::InitialValue)
            | (ProblemKind::Hyperbolic, BoundaryPiece::InitialRate) => F::zero(),
            (ProblemKind::Poisson2d, BoundaryPiece::Lateral) => self.exact_solution(x),
            (kind, piece) => {
                panic!("boundary piece {piece} does not exist for the {kind:?} problem")
            }
        }
    }

    /// The interior operator `D phi` assembled from stencil quantities.
    pub fn interior_operator<F: Scalar>(&self, x: &[F], q: &Quantities<F>) -> F {
        let sd = self.spatial_dim;
        match self.kind {
            ProblemKind::Elliptic => {
                let r2: F = x.iter().map(|v| *v * *v).sum();
                let a = F::one() + r2 / cast(2.0);
                let lap: F = q.second.iter().copied().sum();
                let advect: F = x.iter().zip(&q.grad).map(|(xi, gi)| *xi * *gi).sum();
                let grad_sq: F = q.grad.iter().map(|g| *g * *g).sum();
                -a * lap - advect + grad_sq
            }
            ProblemKind::Parabolic => {
                let r = self.spatial_norm(x);
                let r_hat = r.max(cast(RADIUS_CLAMP));
                let b = F::one() + r / cast(2.0);
                let lap: F = q.second[..sd].iter().copied().sum();
                let advect: F = x[..sd]
                    .iter()
                    .zip(&q.grad[..sd])
                    .map(|(xi, gi)| *xi * *gi / (cast::<F>(2.0) * r_hat))
                    .sum();
                q.grad[sd] - b * lap - advect
            }
            ProblemKind::Hyperbolic => {
                let lap: F = q.second[..sd].iter().copied().sum();
                q.second[sd] - lap
            }
            ProblemKind::Poisson2d => -(q.second[0] + q.second[1]),
        }
    }

    /// Partial derivatives of [`Self::interior_operator`] with respect to the
    /// quantities, used to chain residual cotangents onto probe points.
    pub fn interior_operator_partials<F: Scalar>(
        &self,
        x: &[F],
        q: &Quantities<F>,
    ) -> QuantityCotangent<F> {
        let dim = self.input_dim();
        let sd = self.spatial_dim;
        let mut ct = QuantityCotangent::zeros(dim);
        match self.kind {
            ProblemKind::Elliptic => {
                let r2: F = x.iter().map(|v| *v * *v).sum();
                let a = F::one() + r2 / cast(2.0);
                for i in 0..dim {
                    ct.d_grad[i] = -x[i] + cast::<F>(2.0) * q.grad[i];
                    ct.d_second[i] = -a;
                }
            }
            ProblemKind::Parabolic => {
                let r = self.spatial_norm(x);
                let r_hat = r.max(cast(RADIUS_CLAMP));
                let b = F::one() + r / cast(2.0);
                for i in 0..sd {
                    ct.d_grad[i] = -x[i] / (cast::<F>(2.0) * r_hat);
                    ct.d_second[i] = -b;
                }
                ct.d_grad[sd] = F::one();
            }
            ProblemKind::Hyperbolic => {
                for i in 0..sd {
                    ct.d_second[i] = -F::one();
                }
                ct.d_second[sd] = F::one();
            }
            ProblemKind::Poisson2d => {
                ct.d_second[0] = -F::one();
                ct.d_second[1] = -F::one();
            }
        }
        ct
    }

    /// Analytic stencil quantities of the exact solution; the cross-check
    /// counterpart to evaluating `u` through the finite-difference probes.
    pub fn exact_quantities<F: Scalar>(&self, x: &[F]) -> Quantities<F> {
        let dim = self.input_dim();
        let sd = self.spatial_dim;
        let mut grad = vec![F::zero(); dim];
        let mut second = vec![F::zero(); dim];
        let value = self.exact_solution(x);
        match self.kind {
            ProblemKind::Elliptic => {
                let r = self.spatial_norm(x);
                let (_, _, gpp, gp_over_r) = radial_wave(r);
                radial_axis_derivs(x, r, gp_over_r, gpp, &mut grad, &mut second);
            }
            ProblemKind::Parabolic => {
                let r = self.spatial_norm(x);
                let t = x[sd];
                let beta = (F::one() - t).max(cast(1e-12)).sqrt();
                let u = value;
                let r_hat = r.max(cast(RADIUS_CLAMP));
                let vp = beta * u;
                let vpp = beta * beta * u;
                radial_axis_derivs(&x[..sd], r_hat, vp / r_hat, vpp, &mut grad[..sd], &mut second[..sd]);
                grad[sd] = -u * r / (cast::<F>(2.0) * beta);
                second[sd] =
                    u * r / cast::<F>(4.0) * (r / (beta * beta) - F::one() / (beta * beta * beta));
            }
            ProblemKind::Hyperbolic => {
                let r = self.spatial_norm(x);
                let t = x[sd];
                let (g, _, gpp, gp_over_r) = radial_wave(r);
                let exp_t2 = (t * t).exp();
                let amp = exp_t2 - F::one();
                radial_axis_derivs(&x[..sd], r, amp * gp_over_r, amp * gpp, &mut grad[..sd], &mut second[..sd]);
                grad[sd] = cast::<F>(2.0) * t * exp_t2 * g;
                second[sd] = (cast::<F>(2.0) + cast::<F>(4.0) * t * t) * exp_t2 * g;
            }
            ProblemKind::Poisson2d => {
                // Left branch x <= 1/2 is u = x^2, right branch u = (1-x)^2.
                if x[0] <= cast(0.5) {
                    grad[0] = cast::<F>(2.0) * x[0];
                } else {
                    grad[0] = -cast::<F>(2.0) * (F::one() - x[0]);
                }
                second[0] = cast(2.0);
                second[1] = F::zero();
            }
        }
        Quantities { value, grad, second }
    }

    /// Signed interior residual `D phi(x) - f(x)` via stencil derivatives.
    pub fn interior_residual<F: Scalar>(
        &self,
        phi: impl Fn(&[F]) -> F,
        x: &[F],
        cfg: &StencilConfig<F>,
    ) -> F {
        let dim = self.input_dim();
        let mut probes = crate::points::PointSet::with_capacity(dim, probe_count(dim));
        probe_block(x, cfg.h(), &mut probes);
        let values: Vec<F> = probes.iter().map(&phi).collect();
        let q = quantities_from_values(&values, dim, cfg.h());
        self.interior_operator(x, &q) - self.forcing(x)
    }

    /// Signed boundary residual `B phi(x) - g(x)` for a constraint piece.
    pub fn boundary_residual<F: Scalar>(
        &self,
        phi: impl Fn(&[F]) -> F,
        x: &[F],
        piece: BoundaryPiece,
        cfg: &StencilConfig<F>,
    ) -> F {
        match piece {
            BoundaryPiece::Lateral | BoundaryPiece::InitialValue => {
                phi(x) - self.boundary_data(x, piece)
            }
            BoundaryPiece::InitialRate => {
                // forward difference in time at t = 0
                let sd = self.spatial_dim;
                let mut shifted = x.to_vec();
                shifted[sd] = shifted[sd] + cfg.h();
                (phi(&shifted) - phi(x)) / cfg.h() - self.boundary_data(x, piece)
            }
        }
    }

    /// Absolute residual `|D phi - f|` or `|B phi - g|` at a point, with the
    /// region contract checked.
    pub fn residual_abs<F: Scalar>(
        &self,
        phi: impl Fn(&[F]) -> F,
        x: &[F],
        location: Location,
        cfg: &StencilConfig<F>,
    ) -> Result<F> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, problem expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        match location {
            Location::Interior => {
                if !self.domain.contains_interior(x) {
                    return Err(Error::OutsideRegion {
                        region: "interior",
                        detail: format!("{x:?}"),
                    });
                }
                Ok(self.interior_residual(phi, x, cfg).abs())
            }
            Location::Boundary(piece) => {
                if !self.domain.on_boundary(x, piece) {
                    return Err(Error::OutsideRegion {
                        region: "boundary",
                        detail: format!("{x:?} ({piece})"),
                    });
                }
                Ok(self.boundary_residual(phi, x, piece, cfg).abs())
            }
        }
    }
}
