//! Complex 3-vectors and mixed real/complex helpers.

use faer::c64;
use nalgebra::Vector3;

use crate::mesh::Vec3;

pub type CVec3 = Vector3<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

#[inline]
pub fn czero() -> CVec3 {
    CVec3::new(ZERO, ZERO, ZERO)
}

#[inline]
pub fn scale(v: &Vec3, c: c64) -> CVec3 {
    CVec3::new(c * v.x, c * v.y, c * v.z)
}

#[inline]
pub fn real(v: &Vec3) -> CVec3 {
    v.map(|a| c64::new(a, 0.0))
}

#[inline]
pub fn cross_real(a: &CVec3, n: &Vec3) -> CVec3 {
    CVec3::new(
        a.y * n.z - a.z * n.y,
        a.z * n.x - a.x * n.z,
        a.x * n.y - a.y * n.x,
    )
}

/// `sum_i a_i * b_i` with a real second factor.
#[inline]
pub fn dot_real(a: &CVec3, b: &Vec3) -> c64 {
    a.x * b.x + a.y * b.y + a.z * b.z
}

/// `|a|^2 = sum_i |a_i|^2`.
#[inline]
pub fn norm2(a: &CVec3) -> f64 {
    a.x.norm_sqr() + a.y.norm_sqr() + a.z.norm_sqr()
}

/// Real and imaginary parts as real vectors.
#[inline]
pub fn split(a: &CVec3) -> (Vec3, Vec3) {
    (a.map(|c| c.re), a.map(|c| c.im))
}
