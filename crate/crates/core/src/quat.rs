//! Plain quaternion arithmetic.
//!
//! Points of the unit 3-sphere are identified with unit quaternions
//! `w + xi + yj + zk`; ambient coordinates are `(w, x, y, z)`.

use crate::error::{Error, Result};

/// A quaternion with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// A purely imaginary quaternion from a 3-vector.
    pub const fn imaginary(v: [f64; 3]) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn imag(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Euclidean inner product on R^4.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(Error::ZeroQuaternion);
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.w, c * self.x, c * self.y, c * self.z)
    }

    pub fn is_unit(self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn is_imaginary(self, tol: f64) -> bool {
        self.w.abs() <= tol
    }

    /// `cos(angle) + sin(angle) * axis` for a unit imaginary `axis`:
    /// the exponential of `angle * axis`.
    pub fn rotor(axis: Self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s * axis.x, s * axis.y, s * axis.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        (self.w - other.w).abs() <= tol
            && (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, q: Quaternion) -> Quaternion {
        let Quaternion { w: a, x: b, y: c, z: d } = self;
        let Quaternion { w: e, x: f, y: g, z: h } = q;
        Quaternion::new(
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        )
    }
}

impl std::ops::Add for Quaternion {
    type Output = Quaternion;

    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}
