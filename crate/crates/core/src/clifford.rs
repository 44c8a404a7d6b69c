//! The flat torus inside the 3-sphere: twist-parallel families, the
//! ruled surface spanned by two intersecting great circles, and
//! numerical verification of its intrinsic flatness.

use crate::error::{Error, Result};
use crate::quat::{Quaternion, I};

/// A great circle of the unit 3-sphere through `point` with unit
/// tangent `direction`.
#[derive(Debug, Clone)]
pub struct GeodesicLine {
    point: Quaternion,
    direction: Quaternion,
}

impl GeodesicLine {
    pub fn new(point: Quaternion, direction: Quaternion) -> Result<Self> {
        let point = point.normalized()?;
        let direction = direction.normalized()?;
        if point.dot(direction).abs() > 1e-9 {
            return Err(Error::InvalidTangent);
        }
        Ok(Self { point, direction })
    }

    pub fn point(&self) -> Quaternion {
        self.point
    }

    pub fn direction(&self) -> Quaternion {
        self.direction
    }

    pub fn point_at(&self, s: f64) -> Quaternion {
        let (sn, cs) = s.sin_cos();
        Quaternion::new(
            cs * self.point.w + sn * self.direction.w,
            cs * self.point.x + sn * self.direction.x,
            cs * self.point.y + sn * self.direction.y,
            cs * self.point.z + sn * self.direction.z,
        )
    }

    /// Parameter and tangent of the circle at a point lying on it.
    fn tangent_at(&self, x: Quaternion) -> Quaternion {
        let s = x.dot(self.direction).atan2(x.dot(self.point));
        let (sn, cs) = s.sin_cos();
        Quaternion::new(
            -sn * self.point.w + cs * self.direction.w,
            -sn * self.point.x + cs * self.direction.x,
            -sn * self.point.y + cs * self.direction.y,
            -sn * self.point.z + cs * self.direction.z,
        )
    }
}

/// Which side a twist family multiplies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A one-parameter twist family `x -> exp(s u) x` (left) or
/// `x -> x exp(s u)` (right) leaving a given line invariant; the other
/// orbits are its parallels.
#[derive(Debug, Clone)]
pub struct ParallelFamily {
    side: Side,
    generator: Quaternion,
    line: GeodesicLine,
}

/// The twist family having `l` as an invariant line.
pub fn clifford_parallel_family(l: &GeodesicLine, side: Side) -> ParallelFamily {
    let generator = match side {
        Side::Left => l.direction * l.point.conj(),
        Side::Right => l.point.conj() * l.direction,
    };
    ParallelFamily { side, generator, line: l.clone() }
}

impl ParallelFamily {
    pub fn side(&self) -> Side {
        self.side
    }

    /// The unit imaginary twist generator.
    pub fn generator(&self) -> Quaternion {
        self.generator
    }

    pub fn line(&self) -> &GeodesicLine {
        &self.line
    }

    /// Move `x` along the family by twist parameter `s`.
    pub fn translate(&self, x: Quaternion, s: f64) -> Quaternion {
        let r = Quaternion::rotor(self.generator, s);
        match self.side {
            Side::Left => r * x,
            Side::Right => x * r,
        }
    }

    /// Distance from `x` to the whole orbit through `y` (closed form:
    /// the inner product with the orbit is a pure cosine in the twist
    /// parameter).
    pub fn orbit_distance(&self, x: Quaternion, y: Quaternion) -> f64 {
        let shifted = match self.side {
            Side::Left => self.generator * y,
            Side::Right => y * self.generator,
        };
        let c = x.dot(y).hypot(x.dot(shifted));
        c.min(1.0).acos()
    }
}

/// The ruled surface `x(s, t) = exp(s u) x0 exp(t v)` spanned by the
/// left parallels to one line meeting another; intrinsically a flat
/// torus with fundamental square `[0, 2 pi)^2`.
#[derive(Debug, Clone)]
pub struct CliffordSurface {
    x0: Quaternion,
    u: Quaternion,
    v: Quaternion,
}

impl CliffordSurface {
    pub fn new(x0: Quaternion, u: Quaternion, v: Quaternion) -> Result<Self> {
        let x0 = x0.normalized()?;
        let u = u.normalized()?;
        let v = v.normalized()?;
        if !u.is_imaginary(1e-9) || !v.is_imaginary(1e-9) {
            return Err(Error::InvalidArgument {
                what: "twist generators must be purely imaginary unit quaternions".into(),
            });
        }
        Ok(Self { x0, u, v })
    }

    pub fn base_point(&self) -> Quaternion {
        self.x0
    }

    pub fn left_generator(&self) -> Quaternion {
        self.u
    }

    pub fn right_generator(&self) -> Quaternion {
        self.v
    }

    pub fn point(&self, s: f64, t: f64) -> Quaternion {
        Quaternion::rotor(self.u, s) * self.x0 * Quaternion::rotor(self.v, t)
    }
}

/// The Clifford surface generated by the left parallels to `l` meeting
/// `l_prime`; the lines must intersect. Equivalently generated by the
/// right parallels to `l_prime` meeting `l`.
pub fn clifford_surface(l: &GeodesicLine, l_prime: &GeodesicLine) -> Result<CliffordSurface> {
    let x0 = intersect(l, l_prime)?;
    let u = l.tangent_at(x0) * x0.conj();
    let v = x0.conj() * l_prime.tangent_at(x0);
    CliffordSurface::new(x0, u, v)
}

/// Intersection point of two great circles: a unit vector in both
/// spanning 2-planes, found from the null space of `[p d -p' -d']`.
fn intersect(l: &GeodesicLine, l_prime: &GeodesicLine) -> Result<Quaternion> {
    use nalgebra::DMatrix;
    let cols = [
        l.point(),
        l.direction(),
        l_prime.point(),
        l_prime.direction(),
    ];
    let mut m = DMatrix::zeros(4, 4);
    for (j, q) in cols.iter().enumerate() {
        let sign = if j < 2 { 1.0 } else { -1.0 };
        let a = q.to_array();
        for i in 0..4 {
            m[(i, j)] = sign * a[i];
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd with v_t requested");
    let min_idx = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite singular values"))
        .map(|(i, _)| i)
        .expect("4x4 svd has singular values");
    if svd.singular_values[min_idx] > 1e-9 {
        return Err(Error::NonIntersectingLines);
    }
    let coeff = vt.row(min_idx);
    let x = l.point().scale(coeff[0]);
    let y = l.direction().scale(coeff[1]);
    Quaternion::new(x.w + y.w, x.x + y.x, x.y + y.y, x.z + y.z).normalized()
}

/// First-fundamental-form coefficients of a parametrized surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FundamentalForm {
    /// Metric determinant `EG - F^2`.
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-2).contains(&h) {
        return Err(Error::InvalidArgument {
            what: format!("finite-difference step {h} outside [1e-6, 1e-2]"),
        });
    }
    Ok(())
}

/// E, F, G of an arbitrary parametrization by central differences of
/// the position with step `h`.
pub fn parametrized_metric<F>(f: &F, s: f64, t: f64, h: f64) -> FundamentalForm
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    let xs = central_difference(|x| f(x, t), s, h);
    let xt = central_difference(|x| f(s, x), t, h);
    FundamentalForm {
        e: dot(&xs, &xs),
        f: dot(&xs, &xt),
        g: dot(&xt, &xt),
    }
}

fn central_difference<F: Fn(f64) -> Vec<f64>>(f: F, x: f64, h: f64) -> Vec<f64> {
    let plus = f(x + h);
    let minus = f(x - h);
    plus.iter()
        .zip(minus.iter())
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Metric coefficients of a Clifford surface at `(s, t)`.
pub fn induced_metric(
    surface: &CliffordSurface,
    s: f64,
    t: f64,
    h: f64,
) -> Result<FundamentalForm> {
    check_step(h)?;
    Ok(parametrized_metric(
        &|a, b| surface.point(a, b).to_array().to_vec(),
        s,
        t,
        h,
    ))
}

/// Stencil spacing for the metric derivatives inside the Brioschi
/// formula. Wider than the position step: the metric values carry
/// roundoff of order eps/h, and second differences amplify it by
/// 1/H^2, so H must stay well above h. Fourth-order differences keep
/// the truncation error at this spacing negligible.
const METRIC_STENCIL: f64 = 1e-2;

/// Gauss curvature of a parametrized surface by the Brioschi formula;
/// all derivatives of E, F, G are fourth-order central differences on
/// a 5x5 stencil of fixed spacing 1e-2.
pub fn parametrized_gauss_curvature<F>(f: &F, s: f64, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Vec<f64>,
{
    check_step(h)?;
    let hh = METRIC_STENCIL;
    // metric[i][j] at (s + (i-2) H, t + (j-2) H)
    let mut m = [[FundamentalForm { e: 0.0, f: 0.0, g: 0.0 }; 5]; 5];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let ss = s + (i as f64 - 2.0) * hh;
            let tt = t + (j as f64 - 2.0) * hh;
            *cell = parametrized_metric(f, ss, tt, h);
        }
    }
    // Fourth-order weights for first and second derivatives.
    let d1 = [1.0, -8.0, 0.0, 8.0, -1.0].map(|w| w / 12.0);
    let d2 = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|w| w / 12.0);

    let e = m[2][2].e;
    let fm = m[2][2].f;
    let g = m[2][2].g;

    let along_s = |pick: &dyn Fn(&FundamentalForm) -> f64, w: &[f64; 5], scale: f64| -> f64 {
        (0..5).map(|i| w[i] * pick(&m[i][2])).sum::<f64>() / scale
    };
    let along_t = |pick: &dyn Fn(&FundamentalForm) -> f64, w: &[f64; 5], scale: f64| -> f64 {
        (0..5).map(|j| w[j] * pick(&m[2][j])).sum::<f64>() / scale
    };

    let e_s = along_s(&|c| c.e, &d1, hh);
    let e_t = along_t(&|c| c.e, &d1, hh);
    let e_tt = along_t(&|c| c.e, &d2, hh * hh);
    let g_s = along_s(&|c| c.g, &d1, hh);
    let g_t = along_t(&|c| c.g, &d1, hh);
    let g_ss = along_s(&|c| c.g, &d2, hh * hh);
    let f_s = along_s(&|c| c.f, &d1, hh);
    let f_t = along_t(&|c| c.f, &d1, hh);
    let f_st = {
        let mut acc = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                acc += d1[i] * d1[j] * m[i][j].f;
            }
        }
        acc / (hh * hh)
    };

    let det = e * g - fm * fm;
    if det <= 1e-9 * (e * g).abs().max(1.0) {
        return Err(Error::DegenerateSurface { det });
    }

    let m1 = [
        [-0.5 * e_tt + f_st - 0.5 * g_ss, 0.5 * e_s, f_s - 0.5 * e_t],
        [f_t - 0.5 * g_s, e, fm],
        [0.5 * g_t, fm, g],
    ];
    let m2 = [
        [0.0, 0.5 * e_t, 0.5 * g_s],
        [0.5 * e_t, e, fm],
        [0.5 * g_s, fm, g],
    ];
    Ok((det3(&m1) - det3(&m2)) / (det * det))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Gauss curvature of a Clifford surface at `(s, t)`; identically zero
/// up to the numerical floor.
pub fn gauss_curvature(surface: &CliffordSurface, s: f64, t: f64, h: f64) -> Result<f64> {
    parametrized_gauss_curvature(
        &|a, b| surface.point(a, b).to_array().to_vec(),
        s,
        t,
        h,
    )
}

/// The canonical surface through 1 with generators i (left) and j
/// (right).
pub fn canonical_surface() -> CliffordSurface {
    CliffordSurface::new(Quaternion::new(1.0, 0.0, 0.0, 0.0), I, crate::quat::J)
        .expect("static parameters")
}
