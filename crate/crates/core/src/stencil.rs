//! Numerical differentiation of a scalar field by finite differences.
//!
//! First derivatives use the one-sided forward difference
//! `(phi(a + h e_i) - phi(a)) / h` with truncation `O(h)`. Second derivatives
//! use the central difference `(phi(a + h e_i) - 2 phi(a) + phi(a - h e_i)) / h^2`
//! with truncation `O(h^2)`. The default step is `h = 1e-4`; at that step the
//! second difference divides by `1e-8`, so everything here assumes 64-bit
//! arithmetic for the default precision.
//!
//! [`probe_block`] / [`Quantities`] / [`push_back_cotangents`] expose the same
//! stencils in batched form: all probe points for one evaluation point are laid
//! out in a fixed order so a residual evaluator and its gradient chain see
//! identical numerics.

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::{cast, Scalar};

/// Finite-difference scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// One-sided first differences only.
    ForwardFirst,
    /// First differences forward, second differences central.
    CentralSecond,
}

/// Step size and scheme for stencil evaluation.
#[derive(Debug, Clone, Copy)]
pub struct StencilConfig<F> {
    h: F,
    scheme: Scheme,
}

impl<F: Scalar> StencilConfig<F> {
    /// Minimum admissible step: below this, rounding in the second
    /// difference exceeds what the truncation gain buys back.
    pub const MIN_STEP: f64 = 1e-6;

    pub fn new(h: F, scheme: Scheme) -> Result<Self> {
        if !(h > F::zero()) || !h.is_finite() {
            return Err(Error::Config(format!("stencil step must be positive, got {h}")));
        }
        if h < cast(Self::MIN_STEP) {
            return Err(Error::Config(format!(
                "stencil step {h} below the {} cancellation floor",
                Self::MIN_STEP
            )));
        }
        Ok(Self { h, scheme })
    }

    pub fn h(&self) -> F {
        self.h
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
}

impl<F: Scalar> Default for StencilConfig<F> {
    fn default() -> Self {
        Self { h: cast(1e-4), scheme: Scheme::CentralSecond }
    }
}

/// Forward-difference estimate of `d phi / d x_i` at `a`.
pub fn partial_fd<F: Scalar>(phi: impl Fn(&[F]) -> F, a: &[F], axis: usize, cfg: &StencilConfig<F>) -> F {
    assert!(axis < a.len(), "axis {axis} out of range for dim {}", a.len());
    let mut shifted = a.to_vec();
    shifted[axis] = shifted[axis] + cfg.h;
    (phi(&shifted) - phi(a)) / cfg.h
}

/// Forward-difference gradient; `d + 1` evaluations of `phi` sharing the base
/// point.
pub fn gradient_fd<F: Scalar>(phi: impl Fn(&[F]) -> F, a: &[F], cfg: &StencilConfig<F>) -> Vec<F> {
    let base = phi(a);
    let mut shifted = a.to_vec();
    let mut grad = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let orig = shifted[i];
        shifted[i] = orig + cfg.h;
        grad.push((phi(&shifted) - base) / cfg.h);
        shifted[i] = orig;
    }
    grad
}

/// Central-difference estimate of `d^2 phi / d x_i^2` at `a`.
pub fn second_partial_fd<F: Scalar>(
    phi: impl Fn(&[F]) -> F,
    a: &[F],
    axis: usize,
    cfg: &StencilConfig<F>,
) -> F {
    assert!(axis < a.len());
    assert_eq!(cfg.scheme, Scheme::CentralSecond, "second differences need the central scheme");
    let mut shifted = a.to_vec();
    shifted[axis] = a[axis] + cfg.h;
    let plus = phi(&shifted);
    shifted[axis] = a[axis] - cfg.h;
    let minus = phi(&shifted);
    let two = cast::<F>(2.0);
    (plus - two * phi(a) + minus) / (cfg.h * cfg.h)
}

/// Central-difference Laplacian; `2d + 1` evaluations sharing the base point.
pub fn laplacian_fd<F: Scalar>(phi: impl Fn(&[F]) -> F, a: &[F], cfg: &StencilConfig<F>) -> F {
    assert_eq!(cfg.scheme, Scheme::CentralSecond, "second differences need the central scheme");
    let base = phi(a);
    let two = cast::<F>(2.0);
    let h2 = cfg.h * cfg.h;
    let mut shifted = a.to_vec();
    let mut sum = F::zero();
    for i in 0..a.len() {
        let orig = shifted[i];
        shifted[i] = orig + cfg.h;
        let plus = phi(&shifted);
        shifted[i] = orig - cfg.h;
        let minus = phi(&shifted);
        shifted[i] = orig;
        sum = sum + (plus - two * base + minus) / h2;
    }
    sum
}

/// Value, forward-difference gradient, and central second differences of a
/// field at one point, all derived from a single probe block.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantities<F> {
    pub value: F,
    pub grad: Vec<F>,
    pub second: Vec<F>,
}

/// Cotangents flowing back into the quantities of one point.
#[derive(Debug, Clone)]
pub struct QuantityCotangent<F> {
    pub d_value: F,
    pub d_grad: Vec<F>,
    pub d_second: Vec<F>,
}

impl<F: Scalar> QuantityCotangent<F> {
    pub fn zeros(dim: usize) -> Self {
        Self { d_value: F::zero(), d_grad: vec![F::zero(); dim], d_second: vec![F::zero(); dim] }
    }
}

/// Number of probe points per evaluation point in a probe block.
pub fn probe_count(dim: usize) -> usize {
    2 * dim + 1
}

/// Probe layout for one point `a`, in fixed order:
/// `[a, a + h e_0, .., a + h e_{n-1}, a - h e_0, .., a - h e_{n-1}]`.
pub fn probe_block<F: Scalar>(a: &[F], h: F, out: &mut PointSet<F>) {
    debug_assert_eq!(out.dim(), a.len());
    out.push(a);
    let mut shifted = a.to_vec();
    for i in 0..a.len() {
        shifted[i] = a[i] + h;
        out.push(&shifted);
        shifted[i] = a[i];
    }
    for i in 0..a.len() {
        shifted[i] = a[i] - h;
        out.push(&shifted);
        shifted[i] = a[i];
    }
}

/// Derives [`Quantities`] from the field values at a probe block.
pub fn quantities_from_values<F: Scalar>(values: &[F], dim: usize, h: F) -> Quantities<F> {
    debug_assert_eq!(values.len(), probe_count(dim));
    let base = values[0];
    let two = cast::<F>(2.0);
    let h2 = h * h;
    let mut grad = Vec::with_capacity(dim);
    let mut second = Vec::with_capacity(dim);
    for i in 0..dim {
        grad.push((values[1 + i] - base) / h);
        second.push((values[1 + i] - two * base + values[1 + dim + i]) / h2);
    }
    Quantities { value: base, grad, second }
}

/// Distributes quantity cotangents back onto the probe values they came from.
/// `out` must have `probe_count(dim)` entries; contributions accumulate.
pub fn push_back_cotangents<F: Scalar>(ct: &QuantityCotangent<F>, dim: usize, h: F, out: &mut [F]) {
    debug_assert_eq!(out.len(), probe_count(dim));
    let h2 = h * h;
    let two = cast::<F>(2.0);
    out[0] += ct.d_value;
    for i in 0..dim {
        let dg = ct.d_grad[i];
        let ds = ct.d_second[i];
        out[1 + i] += dg / h + ds / h2;
        out[0] += -(dg / h) - two * ds / h2;
        out[1 + dim + i] += ds / h2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    fn cfg() -> StencilConfig<f64> {
        StencilConfig::default()
    }

    #[test]
    fn config_rejects_tiny_and_nonpositive_steps() {
        assert!(StencilConfig::new(1e-7, Scheme::CentralSecond).is_err());
        assert!(StencilConfig::new(0.0, Scheme::CentralSecond).is_err());
        assert!(StencilConfig::new(-1e-3, Scheme::CentralSecond).is_err());
        assert!(StencilConfig::new(1e-4, Scheme::CentralSecond).is_ok());
    }

    #[test]
    fn forward_difference_of_square_carries_half_h_bias() {
        // (phi(a+h) - phi(a))/h on x^2 is exactly 2a + h.
        let d = partial_fd(|x: &[f64]| x[0] * x[0], &[1.0], 0, &cfg());
        assert!((d - 2.0001).abs() < 1e-9);
    }

    #[test]
    fn forward_difference_exact_on_affine() {
        let d = partial_fd(|x: &[f64]| 3.5 * x[0] - 2.0, &[0.3], 0, &cfg());
        assert!((d - 3.5).abs() < 1e-10);
        let c = partial_fd(|_: &[f64]| 7.0, &[0.3], 0, &cfg());
        assert_eq!(c, 0.0);
    }

    #[test]
    fn degree_two_error_bounded_by_half_h_times_second_derivative() {
        // |partial_fd - analytic| <= h*M/2 + 1e-9 with M bounding |f''|.
        let cases: [(fn(&[f64]) -> f64, fn(f64) -> f64, f64); 3] = [
            (|x| 10.0 * x[0] * x[0], |a| 20.0 * a, 20.0),
            (|x| (x[0] * 2.0).sin() * 5.0, |a| 10.0 * (a * 2.0).cos(), 20.0),
            (|x| 0.005 * x[0] * x[0], |a| 0.01 * a, 0.01),
        ];
        for (f, fp, m) in cases {
            for a in [-0.7, 0.0, 0.4, 1.3] {
                let d = partial_fd(f, &[a], 0, &cfg());
                assert!(
                    (d - fp(a)).abs() <= 1e-4 * m / 2.0 + 1e-9,
                    "a={a}, err={}",
                    (d - fp(a)).abs()
                );
            }
        }
    }

    #[test]
    fn gradient_recovers_linear_coefficients() {
        let v = [2.0, -1.5, 0.25];
        let g = gradient_fd(
            |x: &[f64]| x.iter().zip(&v).map(|(a, b)| a * b).sum(),
            &[0.1, 0.2, 0.3],
            &cfg(),
        );
        for i in 0..3 {
            assert!((g[i] - v[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_of_half_norm_squared_shows_forward_bias() {
        // phi = |x|^2/2 has d phi/d x_i = x_i; forward difference adds h/2.
        let a = [0.4, -0.8];
        let g = gradient_fd(|x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / 2.0, &a, &cfg());
        for i in 0..2 {
            assert!((g[i] - (a[i] + 0.5e-4)).abs() < 1e-10);
        }
    }

    #[test]
    fn one_dimensional_gradient_reduces_to_partial() {
        let f = |x: &[f64]| x[0].powi(3);
        let a = [0.7];
        assert_eq!(gradient_fd(f, &a, &cfg())[0], partial_fd(f, &a, 0, &cfg()));
    }

    #[test]
    fn second_difference_on_quadratic_and_affine() {
        let d = second_partial_fd(|x: &[f64]| x[0] * x[0], &[0.3], 0, &cfg());
        assert!((d - 2.0).abs() < 1e-3);
        let a = second_partial_fd(|x: &[f64]| 4.0 * x[0] + 1.0, &[0.3], 0, &cfg());
        assert!(a.abs() < 1e-4);
    }

    #[test]
    fn second_difference_on_quartic_matches_taylor() {
        // On x^4 at a=1 the central second difference is 12 + 2h^2.
        let d = second_partial_fd(|x: &[f64]| x[0].powi(4), &[1.0], 0, &cfg());
        assert!((d - 12.0).abs() < 1e-3);
    }

    #[test]
    fn laplacian_examples() {
        let lap = laplacian_fd(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[0.2, -0.4, 0.6], &cfg());
        assert!((lap - 6.0).abs() < 3e-3);
        let harmonic = laplacian_fd(|x: &[f64]| x[0] * x[0] - x[1] * x[1], &[0.5, 0.1], &cfg());
        assert!(harmonic.abs() < 1e-3);
        let constant = laplacian_fd(|_: &[f64]| 3.25, &[0.5, 0.1], &cfg());
        assert_eq!(constant, 0.0);
    }

    #[test]
    fn evaluation_counts_are_exact() {
        let count = Cell::new(0usize);
        let f = |x: &[f64]| {
            count.set(count.get() + 1);
            x.iter().map(|v| v * v).sum::<f64>()
        };
        let a = [0.1, 0.2, 0.3, 0.4];
        gradient_fd(&f, &a, &cfg());
        assert_eq!(count.get(), a.len() + 1);
        count.set(0);
        laplacian_fd(&f, &a, &cfg());
        assert_eq!(count.get(), 2 * a.len() + 1);
    }

    #[test]
    fn probe_block_quantities_match_direct_stencils() {
        let f = |x: &[f64]| (x[0] * 1.3).sin() + x[1] * x[1] * 0.5 - x[0] * x[1];
        let a = [0.3, -0.6];
        let c = cfg();
        let mut probes = PointSet::with_capacity(2, probe_count(2));
        probe_block(&a, c.h(), &mut probes);
        let values: Vec<f64> = probes.iter().map(|p| f(p)).collect();
        let q = quantities_from_values(&values, 2, c.h());
        assert_eq!(q.value, f(&a));
        let g = gradient_fd(f, &a, &c);
        for i in 0..2 {
            assert_eq!(q.grad[i], g[i]);
            assert_eq!(q.second[i], second_partial_fd(f, &a, i, &c));
        }
    }

    #[test]
    fn push_back_matches_finite_difference_of_quantities() {
        // The pushed-back cotangents are the exact Jacobian transpose of
        // quantities_from_values, which is linear in the probe values.
        let dim = 3;
        let h = 1e-4;
        let n = probe_count(dim);
        let ct = QuantityCotangent {
            d_value: 0.7,
            d_grad: vec![0.3, -1.1, 0.25],
            d_second: vec![-0.4, 0.9, 0.05],
        };
        let mut pushed = vec![0.0; n];
        push_back_cotangents(&ct, dim, h, &mut pushed);

        let scalar_of = |values: &[f64]| {
            let q = quantities_from_values(values, dim, h);
            let mut s = ct.d_value * q.value;
            for i in 0..dim {
                s += ct.d_grad[i] * q.grad[i] + ct.d_second[i] * q.second[i];
            }
            s
        };
        let base = vec![0.0; n];
        for k in 0..n {
            let mut v = base.clone();
            v[k] = 1.0;
            let expect = scalar_of(&v) - scalar_of(&base);
            assert!(
                (pushed[k] - expect).abs() <= 1e-9 * expect.abs().max(1.0),
                "probe {k}: pushed {} expected {}",
                pushed[k],
                expect
            );
        }
    }
}
