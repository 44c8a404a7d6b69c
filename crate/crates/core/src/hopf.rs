//! The fibration of the 3-sphere over the 2-sphere by twist parallels,
//! and numerical linking numbers of its fibres.
//!
//! The projection is `h(q) = conj(q) i q`, read as a point of S^2
//! through its imaginary part; fibres are the left-multiplication
//! orbits `exp(theta i) q0`, which are Clifford left parallels.

use crate::error::{Error, Result};
use crate::quat::{Quaternion, I, J, K, ONE};

/// Project a unit quaternion to the 2-sphere.
pub fn hopf_map(q: Quaternion) -> Result<[f64; 3]> {
    let q = q.normalized()?;
    let h = q.conj() * I * q;
    Ok(h.imag())
}

/// One fibre: the base point on S^2 and a closed sample of the great
/// circle above it.
#[derive(Debug, Clone)]
pub struct HopfFiber {
    base: [f64; 3],
    anchor: Quaternion,
    samples: Vec<Quaternion>,
}

impl HopfFiber {
    pub fn base(&self) -> [f64; 3] {
        self.base
    }

    /// A point of the 3-sphere projecting onto the base.
    pub fn anchor(&self) -> Quaternion {
        self.anchor
    }

    pub fn samples(&self) -> &[Quaternion] {
        &self.samples
    }

    /// `count` fresh samples `exp(2 pi m/count * i) * anchor`.
    pub fn resample(&self, count: usize) -> Vec<Quaternion> {
        sample_orbit(self.anchor, count)
    }
}

fn sample_orbit(anchor: Quaternion, count: usize) -> Vec<Quaternion> {
    (0..count)
        .map(|m| {
            let theta = std::f64::consts::TAU * m as f64 / count as f64;
            Quaternion::rotor(I, theta) * anchor
        })
        .collect()
}

/// The fibre above `base` (a unit 3-vector), sampled at `n >= 8`
/// points.
pub fn hopf_fiber(base: [f64; 3], n: usize) -> Result<HopfFiber> {
    if n < 8 {
        return Err(Error::InvalidArgument {
            what: format!("fiber needs at least 8 samples, got {n}"),
        });
    }
    let norm = (base[0] * base[0] + base[1] * base[1] + base[2] * base[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument {
            what: format!("fiber base must be a unit vector, |b| = {norm}"),
        });
    }
    let b = Quaternion::imaginary([base[0] / norm, base[1] / norm, base[2] / norm]);
    // conj(q) i q = b has the solution q = normalize(i (i + b)) away
    // from the antipode of i, where j works. Negating an anchor keeps
    // the same fiber, so the sign is canonicalized to a nonnegative
    // leading coordinate.
    let anchor = if (b.x + 1.0).abs() < 1e-12 && b.y.abs() < 1e-12 && b.z.abs() < 1e-12 {
        J
    } else {
        let q = (I * (I + b)).normalized()?;
        let lead = [q.w, q.x, q.y, q.z]
            .into_iter()
            .find(|c| c.abs() > 1e-12)
            .unwrap_or(1.0);
        if lead < 0.0 {
            -q
        } else {
            q
        }
    };
    Ok(HopfFiber {
        base,
        anchor,
        samples: sample_orbit(anchor, n),
    })
}

/// Result of a discrete Gauss linking integral.
#[derive(Debug, Clone, Copy)]
pub struct Linking {
    /// Raw value of the double sum.
    pub value: f64,
    /// Nearest integer.
    pub rounded: i64,
    /// `|value - rounded|`.
    pub residual: f64,
}

impl Linking {
    fn from_value(value: f64) -> Self {
        let rounded = value.round() as i64;
        Self {
            value,
            rounded,
            residual: (value - rounded as f64).abs(),
        }
    }
}

/// Discrete Gauss linking integral of two closed polygonal curves in
/// R^3 (midpoint rule over all segment pairs).
pub fn gauss_linking_sum(c1: &[[f64; 3]], c2: &[[f64; 3]]) -> f64 {
    let n1 = c1.len();
    let n2 = c2.len();
    let mut acc = 0.0;
    for i in 0..n1 {
        let a = c1[i];
        let a2 = c1[(i + 1) % n1];
        let da = sub(a2, a);
        let ma = mid(a2, a);
        for j in 0..n2 {
            let b = c2[j];
            let b2 = c2[(j + 1) % n2];
            let db = sub(b2, b);
            let mb = mid(b2, b);
            let r = sub(ma, mb);
            let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            let cr = cross(da, db);
            acc += (cr[0] * r[0] + cr[1] * r[1] + cr[2] * r[2]) / (rn * rn * rn);
        }
    }
    acc / (4.0 * std::f64::consts::PI)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Candidate poles for stereographic projection: the signed axes, the
/// half-integer diagonals, and the two-axis midpoints.
fn pole_candidates() -> Vec<Quaternion> {
    let mut out = Vec::with_capacity(48);
    for s in [1.0, -1.0] {
        for q in [ONE, I, J, K] {
            out.push(q.scale(s));
        }
    }
    for sw in [1.0f64, -1.0] {
        for sx in [1.0f64, -1.0] {
            for sy in [1.0f64, -1.0] {
                for sz in [1.0f64, -1.0] {
                    out.push(Quaternion::new(0.5 * sw, 0.5 * sx, 0.5 * sy, 0.5 * sz));
                }
            }
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..4 {
        for j in (i + 1)..4 {
            for si in [1.0, -1.0] {
                for sj in [1.0, -1.0] {
                    let mut a = [0.0; 4];
                    a[i] = r * si;
                    a[j] = r * sj;
                    out.push(Quaternion::from_array(a));
                }
            }
        }
    }
    out
}

/// Pick the candidate pole farthest (in chordal distance) from every
/// sample of both curves.
fn select_pole(c1: &[Quaternion], c2: &[Quaternion]) -> Result<Quaternion> {
    let mut best: Option<(f64, Quaternion)> = None;
    for pole in pole_candidates() {
        let mut min_d = f64::INFINITY;
        for q in c1.iter().chain(c2.iter()) {
            let d2 = (*q + (-pole)).norm();
            min_d = min_d.min(d2);
        }
        if best.is_none_or(|(bd, _)| min_d > bd) {
            best = Some((min_d, pole));
        }
    }
    match best {
        Some((d, pole)) if d > 0.05 => Ok(pole),
        _ => Err(Error::PoleSelectionFailed),
    }
}

/// Orthonormal frame of the hyperplane orthogonal to `pole`. The
/// orientation (`det(pole, e1, e2, e3) < 0`) is fixed so that two
/// fibres traversed by increasing twist angle link with sign +1; it is
/// consistent across poles, so the sign does not depend on the pole
/// choice.
fn projection_frame(pole: Quaternion) -> [Quaternion; 3] {
    let axes = [ONE, I, J, K];
    let mut frame: Vec<Quaternion> = Vec::with_capacity(3);
    for ax in axes {
        if frame.len() == 3 {
            break;
        }
        let mut w = ax + (-pole.scale(ax.dot(pole)));
        for e in &frame {
            w = w + (-e.scale(w.dot(*e)));
        }
        let n = w.norm();
        if n > 1e-6 {
            w = w.scale(1.0 / n);
            frame.push(w);
        }
    }
    let mut frame: [Quaternion; 3] = [frame[0], frame[1], frame[2]];
    if det4(pole, frame[0], frame[1], frame[2]) > 0.0 {
        frame.swap(1, 2);
    }
    frame
}

fn det4(a: Quaternion, b: Quaternion, c: Quaternion, d: Quaternion) -> f64 {
    let m = nalgebra::Matrix4::from_columns(&[
        nalgebra::Vector4::from(a.to_array()),
        nalgebra::Vector4::from(b.to_array()),
        nalgebra::Vector4::from(c.to_array()),
        nalgebra::Vector4::from(d.to_array()),
    ]);
    m.determinant()
}

/// Stereographic image of S^3 samples from `pole`, in the coordinates
/// of `frame`.
fn project(samples: &[Quaternion], pole: Quaternion, frame: &[Quaternion; 3]) -> Vec<[f64; 3]> {
    samples
        .iter()
        .map(|q| {
            let denom = 1.0 - q.dot(pole);
            [
                q.dot(frame[0]) / denom,
                q.dot(frame[1]) / denom,
                q.dot(frame[2]) / denom,
            ]
        })
        .collect()
}

/// Linking number of two closed curves on the unit 3-sphere: both are
/// projected stereographically from a pole clear of each curve, then
/// the discrete Gauss integral is evaluated at the given sample counts.
pub fn linking_of_curves(c1: &[Quaternion], c2: &[Quaternion]) -> Result<Linking> {
    let pole = select_pole(c1, c2)?;
    let frame = projection_frame(pole);
    let p1 = project(c1, pole, &frame);
    let p2 = project(c2, pole, &frame);
    Ok(Linking::from_value(gauss_linking_sum(&p1, &p2)))
}

/// Linking number of two Hopf fibres, re-sampled at `n` points each.
/// Distinct fibres of the fibration link exactly once; the sign is +1
/// under the orientation fixed here (fibres traversed by increasing
/// twist angle, right-handed projection frame).
pub fn linking_number(f1: &HopfFiber, f2: &HopfFiber, n: usize) -> Result<Linking> {
    let db = sub(f1.base(), f2.base());
    if (db[0] * db[0] + db[1] * db[1] + db[2] * db[2]).sqrt() < 1e-9 {
        return Err(Error::SameBase);
    }
    if n < 8 {
        return Err(Error::InvalidArgument {
            what: format!("linking needs at least 8 samples, got {n}"),
        });
    }
    linking_of_curves(&f1.resample(n), &f2.resample(n))
}
