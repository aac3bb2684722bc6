//! Hamilton quaternions `w + x i + y j + z k`.
//!
//! A quaternion is also written as a pair of complex numbers `a + b j` with
//! `a = w + x i` and `b = y + z i`. Left multiplication by a complex number
//! acts on both halves, so `c (a + b j) = c a + (c b) j`, while right
//! multiplication conjugates the second half: `(a + b j) c = a c + (b c̄) j`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuatError {
    #[error("quaternion is zero to machine precision")]
    ZeroQuaternion,
    #[error("rotation quaternion has norm {0}, expected 1")]
    NotUnit(f64),
    #[error("plane spanned by a vanishing quaternion")]
    DegeneratePlane,
    #[error("cannot parse quaternion from {0:?}")]
    Parse(String),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quat<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Quat<T> {
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Quat { w, x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::real(T::one())
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn real(w: T) -> Self {
        Self::new(w, T::zero(), T::zero(), T::zero())
    }

    /// Embeds a complex number as `re + im i`.
    pub fn from_complex(c: Complex<T>) -> Self {
        Self::new(c.re, c.im, T::zero(), T::zero())
    }

    /// Builds `a + b j`.
    pub fn from_pair(a: Complex<T>, b: Complex<T>) -> Self {
        Self::new(a.re, a.im, b.re, b.im)
    }

    /// Splits into `(a, b)` with `self = a + b j`.
    pub fn to_pair(self) -> (Complex<T>, Complex<T>) {
        (Complex::new(self.w, self.x), Complex::new(self.y, self.z))
    }

    pub fn from_array(a: [T; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [T; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(self) -> T {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> T {
        // hypot-style scaling keeps tiny and huge values representable
        let m = self.max_abs();
        if m == T::zero() || !m.is_finite() {
            return m;
        }
        (self / m).norm_sq().sqrt() * m
    }

    fn max_abs(self) -> T {
        self.w.abs().max(self.x.abs()).max(self.y.abs()).max(self.z.abs())
    }

    pub fn re(self) -> T {
        self.w
    }

    pub fn im(self) -> Self {
        Self::new(T::zero(), self.x, self.y, self.z)
    }

    /// Part commuting with `i`: the component in span{1, i}.
    pub fn plus(self) -> Self {
        Self::new(self.w, self.x, T::zero(), T::zero())
    }

    /// Part anticommuting with `i`: the component in span{j, k}.
    pub fn minus(self) -> Self {
        Self::new(T::zero(), T::zero(), self.y, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn inverse(self) -> Result<Self, QuatError> {
        let m = self.max_abs();
        if !(m > T::min_positive_value()) {
            return Err(QuatError::ZeroQuaternion);
        }
        // scale first so |a|² cannot underflow or overflow
        let s = self / m;
        Ok(s.conj() / (s.norm_sq() * m))
    }

    /// Unchecked inverse; non-finite for zero input.
    pub fn inv(self) -> Self {
        self.conj() / self.norm_sq()
    }

    /// `alpha x alpha⁻¹` for unit `alpha`.
    pub fn rotate(alpha: Self, x: Self) -> Result<Self, QuatError> {
        let n = alpha.norm();
        let tol = T::from_f64(1e-9).unwrap();
        if (n - T::one()).abs() > tol {
            return Err(QuatError::NotUnit(n.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(alpha * x * alpha.inv())
    }

    /// Left and right normals `(N, R)` of the oriented plane `span·C`.
    ///
    /// The orientation is the quarter turn `v ↦ v i` on `span·C`, so
    /// `R = i` and `N = span i span⁻¹`.
    pub fn plane_normals(span: Self) -> Result<(Self, Self), QuatError> {
        let inv = span.inverse().map_err(|_| QuatError::DegeneratePlane)?;
        let n = span * Self::i() * inv;
        Ok((n, Self::i()))
    }

    /// Left multiplication by a complex number.
    pub fn cmul(c: Complex<T>, q: Self) -> Self {
        let (a, b) = q.to_pair();
        Self::from_pair(c * a, c * b)
    }

    /// Right multiplication by a complex number.
    pub fn mulc(self, c: Complex<T>) -> Self {
        let (a, b) = self.to_pair();
        Self::from_pair(a * c, b * c.conj())
    }

    /// 4×4 matrix of `x ↦ self·x` acting on `(w, x, y, z)`.
    pub fn left_matrix(self) -> [[T; 4]; 4] {
        let Quat { w, x, y, z } = self;
        [[w, -x, -y, -z], [x, w, -z, y], [y, z, w, -x], [z, -y, x, w]]
    }

    /// 4×4 matrix of `x ↦ x·self`.
    pub fn right_matrix(self) -> [[T; 4]; 4] {
        let Quat { w, x, y, z } = self;
        [[w, -x, -y, -z], [x, w, z, -y], [y, -z, w, x], [z, y, -x, w]]
    }

    /// `|a − b| ≤ tol · max(1, |a|, |b|)`.
    pub fn approx_eq(self, other: Self, tol: T) -> bool {
        let scale = T::one().max(self.norm()).max(other.norm());
        (self - other).norm() <= tol * scale
    }

    pub fn cast<U: Scalar>(self) -> Quat<U> {
        Quat::new(
            U::from(self.w).unwrap(),
            U::from(self.x).unwrap(),
            U::from(self.y).unwrap(),
            U::from(self.z).unwrap(),
        )
    }
}

impl<T: Scalar> From<Complex<T>> for Quat<T> {
    fn from(c: Complex<T>) -> Self {
        Self::from_complex(c)
    }
}

impl<T: Scalar> Add for Quat<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Quat<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Quat<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul for Quat<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl<T: Scalar> Mul<T> for Quat<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Quat<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        Self::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Scalar> AddAssign for Quat<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Quat<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign<T> for Quat<T> {
    fn mul_assign(&mut self, s: T) {
        *self = *self * s;
    }
}

impl<T: Scalar> std::iter::Sum for Quat<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| a + b)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Quat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |v: T| if v.is_sign_negative() { '-' } else { '+' };
        write!(f, "{}", self.w)?;
        for (v, unit) in [(self.x, 'i'), (self.y, 'j'), (self.z, 'k')] {
            write!(f, "{}{}{}", sign(v), v.abs(), unit)?;
        }
        Ok(())
    }
}

impl<T: Scalar + FromStr> FromStr for Quat<T> {
    type Err = QuatError;

    /// Parses the `w+xi+yj+zk` form written by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QuatError::Parse(s.to_string());
        let s = s.trim();
        let mut parts = [T::zero(); 4];
        let mut rest = s;
        for (slot, unit) in [(0usize, None), (1, Some('i')), (2, Some('j')), (3, Some('k'))] {
            let end = match unit {
                None => next_sign(rest).ok_or_else(bad)?,
                Some(u) => rest.find(u).ok_or_else(bad)?,
            };
            let num = rest[..end].trim();
            parts[slot] = num.parse::<T>().map_err(|_| bad())?;
            rest = &rest[end + usize::from(unit.is_some())..];
        }
        if !rest.trim().is_empty() {
            return Err(bad());
        }
        Ok(Self::from_array(parts))
    }
}

/// Byte index of the first sign after position 0 that is not an exponent sign.
fn next_sign(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    (1..b.len()).find(|&p| (b[p] == b'+' || b[p] == b'-') && !matches!(b[p - 1], b'e' | b'E'))
}
