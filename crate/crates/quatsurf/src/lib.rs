//! Conformal surfaces in the quaternions.
//!
//! Surfaces are sampled on coordinate charts of a Riemann surface (planar
//! domains or the two standard charts of P¹) and described either directly
//! as a map `F`, by Kodaira data `(V, υ, φ)` or by Weierstrass data
//! `(U, B, χ, ψ)`. The [`verify`] module turns all of it into named checks.

pub mod catalog;
pub mod conformal;
pub mod dirac_p1;
pub mod field;
pub mod geometry;
pub mod isothermic;
pub mod quat;
pub mod representations;
pub mod transforms;
pub mod verify;

use num_traits::{Float, FromPrimitive, NumCast};

/// Real scalar a quaternion can be built over.
pub trait Scalar:
    Float + FromPrimitive + NumCast + std::fmt::Debug + Default + Send + Sync + 'static
{
}
impl Scalar for f32 {}
impl Scalar for f64 {}

pub use num_complex::Complex64 as C64;
pub use quat::{Quat, QuatError};

pub type Quatf32 = Quat<f32>;
pub type Quatf64 = Quat<f64>;
/// The working precision of all sampled fields.
pub type Q = Quat<f64>;
