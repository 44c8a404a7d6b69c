//! The three simply connected constant-curvature geometries as quadrics
//! in R^{n+1}.
//!
//! A space of curvature `s/k^2` (sign `s`, radius `k`) is modeled as the
//! level set `a(x, x) = s k^2` of the bilinear form
//!
//! ```text
//! a(x, y) = s k^2 x0 y0 + x1 y1 + ... + xn yn
//! ```
//!
//! with the extra condition `x0 > 0` selecting one sheet of the
//! hyperboloid when `s = -1`. The flat case degenerates to the affine
//! hyperplane `x0 = 1` carrying the Euclidean dot product on the
//! remaining coordinates. Distances come from
//! `k^2 cos(d/k) = a(x, y)` (spherical), its `cosh` analogue
//! (hyperbolic), and the Euclidean norm (flat).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::Isometry;

/// Curvature sign of a model space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curvature {
    Spherical,
    Flat,
    Hyperbolic,
}

impl Curvature {
    /// +1, 0 or -1.
    pub fn sign(self) -> f64 {
        match self {
            Curvature::Spherical => 1.0,
            Curvature::Flat => 0.0,
            Curvature::Hyperbolic => -1.0,
        }
    }
}

/// One of the three standard geometries: dimension, curvature sign and
/// radius of curvature. The curvature is `sign / k^2`; `k` is unused in
/// the flat case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    #[serde(rename = "kind")]
    curv: Curvature,
    #[serde(rename = "dim")]
    n: usize,
    #[serde(default = "one")]
    k: f64,
}

fn one() -> f64 {
    1.0
}

/// A point of the quadric (or of the flat hyperplane), stored in ambient
/// coordinates of length `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    x: DVector<f64>,
}

impl AmbientPoint {
    pub fn coords(&self) -> &DVector<f64> {
        &self.x
    }

    /// The spatial coordinates `x1..xn` (drops the homogeneous/quadric
    /// coordinate `x0`).
    pub fn spatial(&self) -> DVector<f64> {
        DVector::from_iterator(self.x.len() - 1, self.x.iter().skip(1).copied())
    }

    pub(crate) fn from_raw(x: DVector<f64>) -> Self {
        Self { x }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.x.len() == other.x.len() && (&self.x - &other.x).amax() <= tol
    }

    /// Lexicographic comparison of coordinate vectors, used for
    /// deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        for (a, b) in self.x.iter().zip(other.x.iter()) {
            match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// A tangent vector at a point, normalized so the induced geodesic has
/// unit speed.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: AmbientPoint,
    v: DVector<f64>,
}

impl TangentVector {
    pub fn base(&self) -> &AmbientPoint {
        &self.base
    }

    pub fn direction(&self) -> &DVector<f64> {
        &self.v
    }
}

pub(crate) const TOL: f64 = 1e-9;

impl ModelSpace {
    pub fn spherical(n: usize, k: f64) -> Result<Self> {
        Self::new(Curvature::Spherical, n, k)
    }

    pub fn hyperbolic(n: usize, k: f64) -> Result<Self> {
        Self::new(Curvature::Hyperbolic, n, k)
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(Curvature::Flat, n, 1.0)
    }

    pub fn new(curv: Curvature, n: usize, k: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument {
                what: "dimension must be at least 1".into(),
            });
        }
        if curv != Curvature::Flat && !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument {
                what: format!("radius of curvature must be positive, got {k}"),
            });
        }
        Ok(Self { curv, n, k })
    }

    pub fn curvature(&self) -> Curvature {
        self.curv
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn radius(&self) -> f64 {
        self.k
    }

    pub fn is_flat(&self) -> bool {
        self.curv == Curvature::Flat
    }

    /// Absolute tolerance used for quadric-membership checks, scaled so
    /// that large radii do not reject honestly rounded points.
    pub(crate) fn quadric_tol(&self) -> f64 {
        TOL * self.k.powi(2).max(1.0)
    }

    /// The bilinear form `a(x, y)`. Flat spaces use the Euclidean dot
    /// product of the spatial coordinates.
    pub fn bilinear_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        let m = self.ambient_dim();
        if x.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: x.len() });
        }
        if y.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: y.len() });
        }
        let spatial: f64 = (1..m).map(|i| x[i] * y[i]).sum();
        Ok(match self.curv {
            Curvature::Flat => spatial,
            _ => self.curv.sign() * self.k * self.k * x[0] * y[0] + spatial,
        })
    }

    /// Gram matrix of `a` in the standard basis (curved spaces only).
    pub(crate) fn form_matrix(&self) -> DMatrix<f64> {
        let m = self.ambient_dim();
        let mut g = DMatrix::identity(m, m);
        g[(0, 0)] = match self.curv {
            Curvature::Flat => 0.0,
            _ => self.curv.sign() * self.k * self.k,
        };
        g
    }

    /// Validate ambient coordinates and wrap them as a point.
    ///
    /// Flat points are snapped to `x0 = 1` exactly after the check.
    pub fn point(&self, coords: DVector<f64>) -> Result<AmbientPoint> {
        let m = self.ambient_dim();
        if coords.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: coords.len() });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::OffQuadric { residual: f64::INFINITY });
        }
        match self.curv {
            Curvature::Flat => {
                if (coords[0] - 1.0).abs() > TOL {
                    return Err(Error::OffQuadric { residual: (coords[0] - 1.0).abs() });
                }
                let mut c = coords;
                c[0] = 1.0;
                Ok(AmbientPoint::from_raw(c))
            }
            _ => {
                let target = self.curv.sign() * self.k * self.k;
                let a = self.bilinear_form(&coords, &coords)?;
                let residual = (a - target).abs();
                if residual > self.quadric_tol() {
                    return Err(Error::OffQuadric { residual });
                }
                if self.curv == Curvature::Hyperbolic && coords[0] <= 0.0 {
                    return Err(Error::OffQuadric { residual: coords[0].abs().max(1.0) });
                }
                Ok(AmbientPoint::from_raw(coords))
            }
        }
    }

    /// Convenience constructor from a slice.
    pub fn point_from(&self, coords: &[f64]) -> Result<AmbientPoint> {
        self.point(DVector::from_row_slice(coords))
    }

    /// A flat point from its spatial coordinates (prepends `x0 = 1`).
    pub fn flat_point(&self, spatial: &[f64]) -> Result<AmbientPoint> {
        let mut c = Vec::with_capacity(spatial.len() + 1);
        c.push(1.0);
        c.extend_from_slice(spatial);
        self.point_from(&c)
    }

    /// The base point `(1, 0, ..., 0)`.
    pub fn base_point(&self) -> AmbientPoint {
        let mut x = DVector::zeros(self.ambient_dim());
        x[0] = 1.0;
        AmbientPoint::from_raw(x)
    }

    /// Rescale coordinates onto the quadric; used by operations that
    /// accumulate rounding drift. Flat points get `x0` pinned back to 1.
    pub(crate) fn renormalize(&self, mut x: DVector<f64>) -> DVector<f64> {
        match self.curv {
            Curvature::Flat => {
                x[0] = 1.0;
                x
            }
            _ => {
                let a = self
                    .bilinear_form(&x, &x)
                    .expect("dimension preserved internally");
                let target = self.curv.sign() * self.k * self.k;
                let ratio = a / target;
                if ratio > 0.0 {
                    x /= ratio.sqrt();
                }
                if self.curv == Curvature::Hyperbolic && x[0] < 0.0 {
                    x = -x;
                }
                x
            }
        }
    }

    /// Geodesic distance between two on-model points.
    pub fn distance(&self, x: &AmbientPoint, y: &AmbientPoint) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let a = self.bilinear_form(x.coords(), y.coords())?;
        match self.curv {
            Curvature::Flat => {
                let d = x.coords().rows(1, self.n) - y.coords().rows(1, self.n);
                Ok(d.norm())
            }
            Curvature::Spherical => {
                let c = a / (self.k * self.k);
                let c = clamp_to(c, -1.0, 1.0)?;
                Ok(self.k * c.acos())
            }
            Curvature::Hyperbolic => {
                let c = a / (-self.k * self.k);
                if c < 1.0 - TOL {
                    return Err(Error::InvalidDistanceArgument { value: c });
                }
                Ok(self.k * c.max(1.0).acosh())
            }
        }
    }

    fn check_point(&self, x: &AmbientPoint) -> Result<()> {
        // Re-validate: callers may hold points constructed for another
        // space of the same ambient dimension.
        self.point(x.coords().clone()).map(|_| ())
    }

    /// Build a unit-speed tangent vector at `base`; errors on zero input
    /// or a vector that is not tangent to the quadric at `base`.
    pub fn tangent(&self, base: &AmbientPoint, v: DVector<f64>) -> Result<TangentVector> {
        let m = self.ambient_dim();
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: v.len() });
        }
        self.check_point(base)?;
        match self.curv {
            Curvature::Flat => {
                if v[0].abs() > TOL {
                    return Err(Error::InvalidTangent);
                }
                let norm = v.rows(1, self.n).norm();
                if norm < 1e-12 {
                    return Err(Error::InvalidTangent);
                }
                let mut v = v / norm;
                v[0] = 0.0;
                Ok(TangentVector { base: base.clone(), v })
            }
            _ => {
                let pairing = self.bilinear_form(base.coords(), &v)?;
                if pairing.abs() > self.quadric_tol().max(TOL * v.norm()) {
                    return Err(Error::InvalidTangent);
                }
                let norm_sq = self.bilinear_form(&v, &v)?;
                if norm_sq < 1e-12 {
                    return Err(Error::InvalidTangent);
                }
                Ok(TangentVector { base: base.clone(), v: v / norm_sq.sqrt() })
            }
        }
    }

    /// Initial tangent of the geodesic from `from` to `to`.
    ///
    /// Undefined (error) when the points coincide or, on the sphere, are
    /// antipodal.
    pub fn tangent_toward(&self, from: &AmbientPoint, to: &AmbientPoint) -> Result<TangentVector> {
        match self.curv {
            Curvature::Flat => {
                let mut v = to.coords() - from.coords();
                v[0] = 0.0;
                self.tangent(from, v)
            }
            _ => {
                let s = self.curv.sign();
                let coef = self.bilinear_form(from.coords(), to.coords())? / (s * self.k * self.k);
                let v = to.coords() - from.coords() * coef;
                self.tangent(from, v)
            }
        }
    }

    /// Angle between two unit tangent vectors at a common base point.
    pub fn tangent_angle(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        let c = self.bilinear_form(u.direction(), v.direction())?;
        Ok(clamp_to(c, -1.0, 1.0)?.acos())
    }

    /// Point at arclength `t` along the geodesic with initial data `v`.
    ///
    /// The result is renormalized onto the quadric to prevent drift.
    pub fn geodesic_point(&self, v: &TangentVector, t: f64) -> AmbientPoint {
        let p = v.base.coords();
        let dir = &v.v;
        let x = match self.curv {
            Curvature::Flat => p + dir * t,
            Curvature::Spherical => {
                let (s, c) = (t / self.k).sin_cos();
                p * c + dir * (self.k * s)
            }
            Curvature::Hyperbolic => {
                let u = t / self.k;
                p * u.cosh() + dir * (self.k * u.sinh())
            }
        };
        AmbientPoint::from_raw(self.renormalize(x))
    }

    /// An isometry carrying `p` to the base point `(1, 0, ..., 0)`.
    ///
    /// For curved spaces the map is assembled from an `a`-orthonormal
    /// basis whose first vector is `p`; for flat spaces it is the
    /// translation by `-p`.
    pub fn weierstrass_chart(&self, p: &AmbientPoint) -> Result<Isometry> {
        self.check_point(p)?;
        if self.is_flat() {
            return Isometry::translation(*self, -p.spatial());
        }
        let m = self.ambient_dim();
        let g = self.form_matrix();
        // Gram-Schmidt in the form `a`, seeded with p itself. The
        // orthocomplement of p is definite, so the standard sweep over
        // coordinate axes completes the basis.
        let mut basis: Vec<DVector<f64>> = vec![p.coords().clone()];
        let mut norms: Vec<f64> = vec![self.curv.sign() * self.k * self.k];
        for i in 0..m {
            if basis.len() == m {
                break;
            }
            let mut w = DVector::zeros(m);
            w[i] = 1.0;
            for (b, nb) in basis.iter().zip(norms.iter()) {
                let c = self.bilinear_form(b, &w)? / nb;
                w -= b * c;
            }
            let nw = self.bilinear_form(&w, &w)?;
            if nw > 1e-12 {
                w /= nw.sqrt();
                basis.push(w);
                norms.push(1.0);
            }
        }
        if basis.len() != m {
            return Err(Error::InvalidArgument {
                what: "failed to complete an orthonormal frame at p".into(),
            });
        }
        let b = DMatrix::from_columns(&basis);
        // B maps the standard frame onto the frame at p and preserves a;
        // its form-inverse G^-1 B^T G carries p back to the base point.
        let g_inv_diag: Vec<f64> = (0..m).map(|i| 1.0 / g[(i, i)]).collect();
        let mut a_mat = b.transpose() * &g;
        for (i, gi) in g_inv_diag.iter().enumerate() {
            for j in 0..m {
                a_mat[(i, j)] *= gi;
            }
        }
        Isometry::from_matrix(*self, a_mat)
    }

    /// Volume of the metric ball of radius `r` (dimension 3 only).
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if self.n != 3 {
            return Err(Error::UnsupportedDimension { required: 3, got: self.n });
        }
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidArgument { what: format!("negative radius {r}") });
        }
        let k = self.k;
        match self.curv {
            Curvature::Flat => Ok(4.0 * std::f64::consts::PI * r.powi(3) / 3.0),
            Curvature::Spherical => {
                if r > std::f64::consts::PI * k + TOL {
                    return Err(Error::InvalidArgument {
                        what: format!("spherical ball radius {r} exceeds pi*k"),
                    });
                }
                let r = r.min(std::f64::consts::PI * k);
                Ok(2.0 * std::f64::consts::PI * k * k * r
                    - std::f64::consts::PI * k.powi(3) * (2.0 * r / k).sin())
            }
            Curvature::Hyperbolic => Ok(std::f64::consts::PI * k.powi(3) * (2.0 * r / k).sinh()
                - 2.0 * std::f64::consts::PI * k * k * r),
        }
    }

    /// Area of the geodesic sphere of radius `d` (dimension 3 only);
    /// the flat case is `4 pi d^2`.
    pub fn sphere_area(&self, d: f64) -> Result<f64> {
        if self.n != 3 {
            return Err(Error::UnsupportedDimension { required: 3, got: self.n });
        }
        let k = self.k;
        let eff = match self.curv {
            Curvature::Flat => d,
            Curvature::Spherical => k * (d / k).sin(),
            Curvature::Hyperbolic => k * (d / k).sinh(),
        };
        Ok(4.0 * std::f64::consts::PI * eff * eff)
    }

    /// Observed parallax of a star at distance `d` over a baseline of
    /// length `b` erected perpendicular to the line of sight.
    ///
    /// This is the shift of the apparent direction between the two ends
    /// of the baseline: `pi/2` minus the angle the star makes with the
    /// baseline at its far end. Solving the geodesic right triangle:
    ///
    /// ```text
    /// flat        tan p = b / d
    /// spherical   tan p = sin(b/k) / tan(d/k)     (positive iff d < pi k / 2)
    /// hyperbolic  tan p = sinh(b/k) / tanh(d/k)   (floor atan(sinh(b/k)) as d -> inf)
    /// ```
    ///
    /// Both curved values converge to `atan(b/d)` as `k -> inf`.
    pub fn parallax(&self, baseline: f64, dist: f64) -> Result<f64> {
        if baseline.is_nan() || dist.is_nan() || baseline <= 0.0 || dist <= baseline {
            return Err(Error::DegenerateTriangle {
                reason: format!("need 0 < baseline < dist, got b={baseline}, d={dist}"),
            });
        }
        match self.curv {
            Curvature::Flat => Ok((baseline / dist).atan()),
            Curvature::Spherical => {
                if dist >= std::f64::consts::FRAC_PI_2 * self.k {
                    return Err(Error::DegenerateTriangle {
                        reason: format!(
                            "spherical parallax requires dist < pi*k/2 = {}",
                            std::f64::consts::FRAC_PI_2 * self.k
                        ),
                    });
                }
                Ok(((baseline / self.k).sin() / (dist / self.k).tan()).atan())
            }
            Curvature::Hyperbolic => {
                Ok(((baseline / self.k).sinh() / (dist / self.k).tanh()).atan())
            }
        }
    }

    /// Deterministic `a`-orthonormal frame of the tangent space at `p`
    /// (Gram-Schmidt over the coordinate axes projected to the tangent
    /// space).
    pub fn tangent_frame(&self, p: &AmbientPoint) -> Result<Vec<DVector<f64>>> {
        let m = self.ambient_dim();
        let mut frame: Vec<DVector<f64>> = Vec::with_capacity(self.n);
        for i in 0..m {
            if frame.len() == self.n {
                break;
            }
            let mut w = DVector::zeros(m);
            w[i] = 1.0;
            if self.is_flat() {
                if i == 0 {
                    continue;
                }
            } else {
                let s = self.curv.sign();
                let coef = self.bilinear_form(p.coords(), &w)? / (s * self.k * self.k);
                w -= p.coords() * coef;
            }
            for b in &frame {
                let c = self.bilinear_form(b, &w)?;
                w -= b * c;
            }
            let nw = self.bilinear_form(&w, &w)?;
            if nw > 1e-12 {
                frame.push(w / nw.sqrt());
            }
        }
        if frame.len() != self.n {
            return Err(Error::InvalidArgument {
                what: "failed to build a tangent frame".into(),
            });
        }
        Ok(frame)
    }

    /// A pseudo-random on-model point; used by sampled checks.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> AmbientPoint {
        let m = self.ambient_dim();
        match self.curv {
            Curvature::Flat => {
                let mut x = DVector::zeros(m);
                x[0] = 1.0;
                for i in 1..m {
                    x[i] = rng.random_range(-2.0..2.0);
                }
                AmbientPoint::from_raw(x)
            }
            Curvature::Spherical => {
                let mut x = DVector::zeros(m);
                loop {
                    for i in 0..m {
                        // Sum of uniforms is enough for direction sampling.
                        x[i] = rng.random_range(-1.0..1.0f64);
                    }
                    let n = x.norm();
                    if n > 1e-3 && n <= 1.0 {
                        break;
                    }
                }
                // Scale so a(x, x) = k^2: unit Euclidean direction needs
                // x0 shrunk by k.
                let n = x.norm();
                x /= n;
                x[0] /= self.k;
                AmbientPoint::from_raw(self.renormalize(x))
            }
            Curvature::Hyperbolic => {
                let mut x = DVector::zeros(m);
                for i in 1..m {
                    x[i] = rng.random_range(-2.0..2.0);
                }
                let spatial_sq: f64 = (1..m).map(|i| x[i] * x[i]).sum();
                x[0] = (1.0 + spatial_sq / (self.k * self.k)).sqrt();
                AmbientPoint::from_raw(x)
            }
        }
    }
}

/// Clamp `v` into `[lo, hi]`, tolerating overshoot up to `TOL` and
/// erroring beyond it.
pub(crate) fn clamp_to(v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v < lo - TOL || v > hi + TOL {
        return Err(Error::InvalidDistanceArgument { value: v });
    }
    Ok(v.clamp(lo, hi))
}
