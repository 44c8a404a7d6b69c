//! Form-preserving transformations of a model space, including the
//! quaternion twist isometries of the 3-sphere.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{AmbientPoint, Curvature, ModelSpace};
use crate::quat::Quaternion;

/// Entrywise tolerance for matrix equality / deduplication.
pub const MATRIX_TOL: f64 = 1e-8;

/// An isometry of a model space.
///
/// Curved spaces: a linear map `x -> A x` preserving the bilinear form.
/// Flat spaces: `u -> R u + b` on the spatial coordinates, stored with
/// `A = diag(1, R)` and the translation `b` separate. `word` records how
/// the element was produced from a generating set, when known.
#[derive(Debug, Clone)]
pub struct Isometry {
    space: ModelSpace,
    a: DMatrix<f64>,
    b: DVector<f64>,
    word: Option<Vec<u32>>,
}

impl Isometry {
    pub fn identity(space: ModelSpace) -> Self {
        let m = space.ambient_dim();
        Self {
            space,
            a: DMatrix::identity(m, m),
            b: DVector::zeros(space.dim()),
            word: Some(Vec::new()),
        }
    }

    /// A curved-space isometry from its ambient matrix; validates
    /// `A^T G A = G` with `G` the Gram matrix of the form.
    pub fn from_matrix(space: ModelSpace, a: DMatrix<f64>) -> Result<Self> {
        let m = space.ambient_dim();
        if a.nrows() != m || a.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, got: a.nrows() });
        }
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::NotFormPreserving { residual: f64::INFINITY });
        }
        if space.is_flat() {
            // Interpret as the homogeneous block form diag(1, R).
            let mut first_ok = (a[(0, 0)] - 1.0).abs() <= MATRIX_TOL;
            for i in 1..m {
                first_ok &= a[(0, i)].abs() <= MATRIX_TOL && a[(i, 0)].abs() <= MATRIX_TOL;
            }
            if !first_ok {
                return Err(Error::NotFormPreserving { residual: 1.0 });
            }
            let r = a.view((1, 1), (m - 1, m - 1)).into_owned();
            return Self::flat(space, r, DVector::zeros(m - 1));
        }
        let g = space.form_matrix();
        let residual = (a.transpose() * &g * &a - &g).amax();
        let scale = space.radius().powi(2).max(1.0);
        if residual > MATRIX_TOL * scale {
            return Err(Error::NotFormPreserving { residual });
        }
        if space.curvature() == Curvature::Hyperbolic && a[(0, 0)] <= 0.0 {
            // Must preserve the upper sheet.
            return Err(Error::NotFormPreserving { residual: a[(0, 0)].abs().max(1.0) });
        }
        Ok(Self {
            space,
            a,
            b: DVector::zeros(space.dim()),
            word: None,
        })
    }

    /// A flat isometry `u -> R u + b`; `R` must be orthogonal.
    pub fn flat(space: ModelSpace, r: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !space.is_flat() {
            return Err(Error::SpaceMismatch);
        }
        let n = space.dim();
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: r.nrows() });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        if r.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::NotFormPreserving { residual: f64::INFINITY });
        }
        let residual = (r.transpose() * &r - DMatrix::identity(n, n)).amax();
        if residual > MATRIX_TOL {
            return Err(Error::NotFormPreserving { residual });
        }
        let m = n + 1;
        let mut a = DMatrix::identity(m, m);
        a.view_mut((1, 1), (n, n)).copy_from(&r);
        Ok(Self { space, a, b, word: None })
    }

    /// A pure translation of a flat space.
    pub fn translation(space: ModelSpace, t: DVector<f64>) -> Result<Self> {
        let n = space.dim();
        Self::flat(space, DMatrix::identity(n, n), t)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Translation part (zero vector for curved spaces).
    pub fn translation_part(&self) -> &DVector<f64> {
        &self.b
    }

    /// Rotation block of a flat isometry.
    pub fn rotation_block(&self) -> DMatrix<f64> {
        let n = self.space.dim();
        self.a.view((1, 1), (n, n)).into_owned()
    }

    pub fn word(&self) -> Option<&[u32]> {
        self.word.as_deref()
    }

    pub fn with_word(mut self, word: Vec<u32>) -> Self {
        self.word = Some(word);
        self
    }

    pub(crate) fn clear_word(mut self) -> Self {
        self.word = None;
        self
    }

    /// Sign of the determinant: +1 or -1.
    pub fn orientation(&self) -> f64 {
        let det = if self.space.is_flat() {
            self.rotation_block().determinant()
        } else {
            self.a.determinant()
        };
        if det >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Apply to a point; the result is renormalized onto the quadric.
    pub fn apply(&self, p: &AmbientPoint) -> Result<AmbientPoint> {
        let m = self.space.ambient_dim();
        if p.coords().len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.coords().len() });
        }
        let mut x = &self.a * p.coords();
        if self.space.is_flat() {
            for i in 1..m {
                x[i] += self.b[i - 1];
            }
            x[0] = 1.0;
            Ok(AmbientPoint::from_raw(x))
        } else {
            Ok(AmbientPoint::from_raw(self.space.renormalize(x)))
        }
    }

    /// Apply the linear part to a raw ambient vector (no translation,
    /// no renormalization); maps tangent vectors to tangent vectors.
    pub fn apply_linear(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.a * v
    }

    /// `self` after `other`: `(f.compose(g))(x) = f(g(x))`.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let a = &self.a * &other.a;
        let b = if self.space.is_flat() {
            self.rotation_block() * &other.b + &self.b
        } else {
            DVector::zeros(self.space.dim())
        };
        let word = match (&self.word, &other.word) {
            (Some(w1), Some(w2)) => {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                Some(w)
            }
            _ => None,
        };
        Ok(Isometry { space: self.space, a, b, word })
    }

    /// Group inverse. The word is dropped (the inverse of a word needs
    /// the generating set's inverse table, which lives in the group).
    pub fn inverse(&self) -> Isometry {
        if self.space.is_flat() {
            let rt = self.rotation_block().transpose();
            let b = -(&rt * &self.b);
            let n = self.space.dim();
            let m = n + 1;
            let mut a = DMatrix::identity(m, m);
            a.view_mut((1, 1), (n, n)).copy_from(&rt);
            Isometry { space: self.space, a, b, word: None }
        } else {
            // A^-1 = G^-1 A^T G, exact for form-preserving A.
            let g = self.space.form_matrix();
            let g00 = g[(0, 0)];
            let mut inv = self.a.transpose();
            let m = inv.nrows();
            // inv <- G^-1 * inv * G, with G = diag(g00, 1, ..., 1).
            for j in 0..m {
                inv[(0, j)] /= g00;
            }
            for i in 0..m {
                inv[(i, 0)] *= g00;
            }
            Isometry {
                space: self.space,
                a: inv,
                b: DVector::zeros(self.space.dim()),
                word: None,
            }
        }
    }

    /// Entrywise comparison of matrix and translation.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        self.space == other.space
            && (&self.a - &other.a).amax() <= tol
            && (&self.b - &other.b).amax() <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let m = self.space.ambient_dim();
        (&self.a - DMatrix::identity(m, m)).amax() <= tol && self.b.amax() <= tol
    }

    /// Infimum over the space of the displacement `d(x, g x)`.
    ///
    /// Closed forms per geometry:
    /// - flat: norm of the component of `b` orthogonal to `col(R - I)`
    ///   (the screw translation length);
    /// - spherical: `k acos(lambda_max)` for the largest eigenvalue of
    ///   the symmetrized matrix of the form quadratic `a(x, A x)`;
    /// - hyperbolic: `k ln(spectral radius)`, zero for elliptic and
    ///   parabolic elements.
    pub fn minimal_displacement(&self) -> f64 {
        match self.space.curvature() {
            Curvature::Flat => {
                let n = self.space.dim();
                let m = self.rotation_block() - DMatrix::identity(n, n);
                let svd = m.svd(true, false);
                let u = svd.u.as_ref().expect("svd with u requested");
                let mut residual = self.b.clone();
                for (i, s) in svd.singular_values.iter().enumerate() {
                    if *s > MATRIX_TOL {
                        let col = u.column(i);
                        let c = col.dot(&self.b);
                        residual -= col * c;
                    }
                }
                residual.norm()
            }
            Curvature::Spherical => {
                let k = self.space.radius();
                let m = self.a.nrows();
                // B = G^(1/2) A G^(-1/2) with G^(1/2) = diag(k, 1, .., 1).
                let mut bmat = self.a.clone();
                for j in 0..m {
                    bmat[(0, j)] *= k;
                }
                for i in 0..m {
                    bmat[(i, 0)] /= k;
                }
                let sym = (&bmat + bmat.transpose()) * 0.5;
                let eig = nalgebra::SymmetricEigen::new(sym);
                let lambda_max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
                k * lambda_max.clamp(-1.0, 1.0).acos()
            }
            Curvature::Hyperbolic => {
                let k = self.space.radius();
                let rho = self
                    .a
                    .clone()
                    .complex_eigenvalues()
                    .iter()
                    .map(|l| l.norm())
                    .fold(0.0f64, f64::max);
                if rho > 1.0 + 1e-12 {
                    k * rho.ln()
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether some on-model point is fixed (eigen-residual below
    /// `MATRIX_TOL`).
    pub fn has_fixed_point(&self) -> bool {
        self.fixed_point().is_some()
    }

    /// A fixed point on the model, if one exists. The witness is
    /// normalized so its first nonzero coordinate is positive.
    pub fn fixed_point(&self) -> Option<AmbientPoint> {
        match self.space.curvature() {
            Curvature::Flat => {
                let n = self.space.dim();
                let m = self.rotation_block() - DMatrix::identity(n, n);
                let svd = m.svd(true, true);
                match svd.solve(&(-self.b.clone()), MATRIX_TOL) {
                    Ok(u) => {
                        let residual = (self.rotation_block() * &u - &u + &self.b).norm();
                        if residual <= MATRIX_TOL {
                            let mut c = vec![1.0];
                            c.extend(u.iter());
                            self.space.point_from(&c).ok()
                        } else {
                            None
                        }
                    }
                    Err(_) => None,
                }
            }
            Curvature::Spherical => self
                .unit_eigenvectors()
                .into_iter()
                .next()
                .map(|v| {
                    let v = sign_normalize(v);
                    AmbientPoint::from_raw(self.space.renormalize(v))
                }),
            Curvature::Hyperbolic => {
                // A fixed point on the sheet needs a timelike vector in
                // the fixed subspace. Individual null-space basis
                // vectors may all be lightlike even when a timelike
                // combination exists, so minimize the restricted form.
                let basis = self.unit_eigenvectors();
                if basis.is_empty() {
                    return None;
                }
                let m = basis.len();
                let g = self.space.form_matrix();
                let mut gram = DMatrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        gram[(i, j)] = (basis[i].transpose() * &g * &basis[j])[(0, 0)];
                    }
                }
                let eig = nalgebra::SymmetricEigen::new(gram);
                let (mut min_val, mut min_idx) = (f64::INFINITY, 0);
                for (i, l) in eig.eigenvalues.iter().enumerate() {
                    if *l < min_val {
                        min_val = *l;
                        min_idx = i;
                    }
                }
                if min_val >= -1e-9 {
                    return None;
                }
                let coeffs = eig.eigenvectors.column(min_idx);
                let mut v = DVector::zeros(self.a.nrows());
                for (c, b) in coeffs.iter().zip(basis.iter()) {
                    v += b * *c;
                }
                if v[0] < 0.0 {
                    v = -v;
                }
                Some(AmbientPoint::from_raw(self.space.renormalize(v)))
            }
        }
    }

    /// Unit null vectors of `A - I` (eigenvectors of eigenvalue 1),
    /// from the singular directions with sigma <= MATRIX_TOL.
    fn unit_eigenvectors(&self) -> Vec<DVector<f64>> {
        let m = self.a.nrows();
        let diff = &self.a - DMatrix::identity(m, m);
        let svd = diff.svd(false, true);
        let vt = svd.v_t.as_ref().expect("svd with v_t requested");
        let mut out = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s <= MATRIX_TOL {
                out.push(vt.row(i).transpose());
            }
        }
        out
    }
}

fn sign_normalize(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            v = -v;
        }
    }
    v
}

fn twist_space() -> ModelSpace {
    ModelSpace::spherical(3, 1.0).expect("static parameters")
}

/// Isometry of the unit 3-sphere by left quaternion multiplication
/// `x -> q x`.
pub fn left_twist(q: Quaternion) -> Result<Isometry> {
    let q = q.normalized()?;
    let Quaternion { w: a, x: b, y: c, z: d } = q;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            a, -b, -c, -d, //
            b, a, -d, c, //
            c, d, a, -b, //
            d, -c, b, a,
        ],
    );
    Isometry::from_matrix(twist_space(), m)
}

/// Isometry of the unit 3-sphere by right quaternion multiplication
/// `x -> x q`.
pub fn right_twist(q: Quaternion) -> Result<Isometry> {
    let q = q.normalized()?;
    let Quaternion { w: a, x: b, y: c, z: d } = q;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            a, -b, -c, -d, //
            b, a, d, -c, //
            c, -d, a, b, //
            d, c, -b, a,
        ],
    );
    Isometry::from_matrix(twist_space(), m)
}

/// View a point of the unit 3-sphere as a quaternion.
pub fn point_to_quat(p: &AmbientPoint) -> Quaternion {
    let c = p.coords();
    Quaternion::new(c[0], c[1], c[2], c[3])
}

/// View a unit quaternion as a point of the unit 3-sphere.
pub fn quat_to_point(q: Quaternion) -> AmbientPoint {
    AmbientPoint::from_raw(DVector::from_row_slice(&q.to_array()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat;

    #[test]
    fn compose_with_inverse_is_identity() {
        let q = Quaternion::new(0.3, -0.2, 0.9, 0.1).normalized().unwrap();
        let f = left_twist(q).unwrap();
        let id = f.compose(&f.inverse()).unwrap();
        assert!(id.is_identity(1e-12));
    }

    #[test]
    fn left_twists_compose_by_quaternion_product() {
        let q1 = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        let q2 = Quaternion::new(0.0, 0.6, 0.0, 0.8);
        let lhs = left_twist(q1).unwrap().compose(&left_twist(q2).unwrap()).unwrap();
        let rhs = left_twist(q1 * q2).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn flat_translations_add() {
        let flat = ModelSpace::flat(3).unwrap();
        let t1 = Isometry::translation(flat, DVector::from_row_slice(&[1.0, 0.0, 2.0])).unwrap();
        let t2 = Isometry::translation(flat, DVector::from_row_slice(&[-0.5, 3.0, 0.0])).unwrap();
        let sum = t1.compose(&t2).unwrap();
        let expect =
            Isometry::translation(flat, DVector::from_row_slice(&[0.5, 3.0, 2.0])).unwrap();
        assert!(sum.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn unit_twist_is_identity_and_i_moves_one_to_i() {
        assert!(left_twist(quat::ONE).unwrap().is_identity(0.0));
        let li = left_twist(quat::I).unwrap();
        let one = quat_to_point(quat::ONE);
        let moved = li.apply(&one).unwrap();
        assert!(point_to_quat(&moved).approx_eq(quat::I, 1e-15));
    }

    #[test]
    fn left_and_right_twists_commute() {
        let u = Quaternion::new(0.1, 0.7, -0.3, 0.2).normalized().unwrap();
        let v = Quaternion::new(-0.4, 0.2, 0.8, 0.1).normalized().unwrap();
        let l = left_twist(u).unwrap();
        let r = right_twist(v).unwrap();
        let lr = l.compose(&r).unwrap();
        let rl = r.compose(&l).unwrap();
        assert!(lr.approx_eq(&rl, 1e-12));
    }

    #[test]
    fn displacement_closed_forms() {
        let flat = ModelSpace::flat(3).unwrap();
        let t = Isometry::translation(flat, DVector::from_row_slice(&[1.0, 0.0, 0.0])).unwrap();
        assert!((t.minimal_displacement() - 1.0).abs() < 1e-12);

        let li = left_twist(quat::I).unwrap();
        assert!((li.minimal_displacement() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let id = Isometry::identity(flat);
        assert_eq!(id.minimal_displacement(), 0.0);
    }

    #[test]
    fn screw_displacement_is_axis_component() {
        // Quarter turn in the xy-plane plus lift along z: displacement
        // is the lift alone.
        let flat = ModelSpace::flat(3).unwrap();
        let r = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let screw =
            Isometry::flat(flat, r, DVector::from_row_slice(&[1.0, 0.0, 0.75])).unwrap();
        assert!((screw.minimal_displacement() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_of_sphere_maps() {
        // Rotation of S^2 about the z-axis fixes the poles.
        let s2 = ModelSpace::spherical(2, 1.0).unwrap();
        let (s, c) = (1.0f64.sin(), 1.0f64.cos());
        let rot = Isometry::from_matrix(
            s2,
            DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]),
        )
        .unwrap();
        assert!(rot.has_fixed_point());
        let witness = rot.fixed_point().unwrap();
        assert!(
            witness.approx_eq(&s2.point_from(&[0.0, 0.0, 1.0]).unwrap(), 1e-9),
            "witness {witness:?}"
        );

        // The antipodal map of S^2 has no fixed points.
        let neg = Isometry::from_matrix(s2, -DMatrix::identity(3, 3)).unwrap();
        assert!(!neg.has_fixed_point());
        assert_eq!(neg.orientation(), -1.0);

        // A nontrivial left twist of S^3 is fixed-point free.
        let q = Quaternion::new(0.8, 0.6, 0.0, 0.0);
        assert!(!left_twist(q).unwrap().has_fixed_point());
    }

    #[test]
    fn hyperbolic_rotation_has_fixed_axis() {
        // A rotation in the last two coordinates of H^3 fixes the whole
        // timelike plane spanned by e0 and e1; the witness must be
        // found even though the fixed space mixes timelike and
        // spacelike directions.
        let hyp = ModelSpace::hyperbolic(3, 1.0).unwrap();
        let (s, c) = (0.9f64.sin(), 0.9f64.cos());
        let rot = Isometry::from_matrix(
            hyp,
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    1.0, 0.0, 0.0, 0.0, //
                    0.0, 1.0, 0.0, 0.0, //
                    0.0, 0.0, c, -s, //
                    0.0, 0.0, s, c,
                ],
            ),
        )
        .unwrap();
        assert!(rot.has_fixed_point());
        let witness = rot.fixed_point().unwrap();
        let moved = rot.apply(&witness).unwrap();
        assert!(moved.approx_eq(&witness, 1e-9));
    }

    #[test]
    fn space_mismatch_rejected() {
        let f2 = ModelSpace::flat(2).unwrap();
        let f3 = ModelSpace::flat(3).unwrap();
        let a = Isometry::identity(f2);
        let b = Isometry::identity(f3);
        assert!(matches!(a.compose(&b), Err(Error::SpaceMismatch)));
    }
}
