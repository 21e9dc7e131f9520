//! Floating-point scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Scalar`] so the same
//! routines instantiate at `f32` or `f64`. The crate-root aliases pin the
//! default precision to `f64`: the second-difference stencils divide by
//! `h^2 = 1e-8`, which single precision cannot survive.

use rand::distributions::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar usable throughout the solver: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + SampleUniform
    + for<'a> std::ops::AddAssign<&'a Self>
    + std::ops::AddAssign<Self>
    + std::iter::Sum
    + Default
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Uniform draw from `[0, 1)`.
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal draw.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }

    #[inline]
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    #[inline]
    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.gen()
    }

    #[inline]
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub fn cast<F: Scalar>(v: f64) -> F {
    F::from_f64(v).expect("finite f64 converts to any Scalar")
}
