//! Shared helpers for the oracle test suites.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spaceform::quat::Quaternion;
use spaceform::{AmbientPoint, ModelSpace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller; deterministic given the stream.
pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniform point on the unit 3-sphere as a quaternion.
pub fn random_unit_quaternion<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
        if q.norm() > 1e-6 {
            return q.normalized().unwrap();
        }
    }
}

/// Uniform purely imaginary unit quaternion.
pub fn random_imaginary_unit<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = Quaternion::imaginary([normal(rng), normal(rng), normal(rng)]);
        if q.norm() > 1e-6 {
            return q.normalized().unwrap();
        }
    }
}

/// Uniform point on S^3 as an ambient point of the given spherical
/// space (k = 1).
pub fn random_s3_point<R: Rng>(space: &ModelSpace, rng: &mut R) -> AmbientPoint {
    let q = random_unit_quaternion(rng);
    space.point_from(&q.to_array()).unwrap()
}

/// Composite Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n.is_multiple_of(2) { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
