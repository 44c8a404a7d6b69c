//! Finitely generated discrete isometry groups: breadth-first word
//! enumeration with deduplication, the finite subgroups of the unit
//! quaternions acting by left twists, and integer-lattice machinery for
//! flat translation groups.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::isometry::{left_twist, Isometry, MATRIX_TOL};
use crate::model::ModelSpace;
use crate::quat::{Quaternion, I, J};

/// Enumeration policy of a discrete group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Closure must stabilize before the word-length cutoff.
    Finite,
    /// Free abelian group of translations; exact window searches are
    /// available through the basis.
    Lattice,
    /// General flat isometries (point group times translations); only
    /// word-ball enumeration is offered.
    AffineFlat,
}

impl GroupKind {
    pub fn name(&self) -> &'static str {
        match self {
            GroupKind::Finite => "finite",
            GroupKind::Lattice => "lattice",
            GroupKind::AffineFlat => "affine-flat",
        }
    }
}

const DEFAULT_FINITE_CUTOFF: usize = 20;

/// A discrete group given by generators.
///
/// The generator list is closed under inverses on construction; word
/// indices refer to the closed list. Elements are enumerated lazily and
/// cached; a fully built group is immutable and safe to share.
#[derive(Debug)]
pub struct DiscreteGroup {
    space: ModelSpace,
    kind: GroupKind,
    gens: Vec<Isometry>,
    inv_index: Vec<u32>,
    user_gen_count: usize,
    max_word_length: usize,
    elements: OnceLock<Result<(Vec<Isometry>, bool)>>,
}

impl Clone for DiscreteGroup {
    fn clone(&self) -> Self {
        let elements = OnceLock::new();
        if let Some(e) = self.elements.get() {
            let _ = elements.set(e.clone());
        }
        Self {
            space: self.space,
            kind: self.kind,
            gens: self.gens.clone(),
            inv_index: self.inv_index.clone(),
            user_gen_count: self.user_gen_count,
            max_word_length: self.max_word_length,
            elements,
        }
    }
}

impl DiscreteGroup {
    /// Build a group from generators. Identity generators are dropped,
    /// and inverses are appended unless already present.
    pub fn new(
        space: ModelSpace,
        kind: GroupKind,
        generators: Vec<Isometry>,
        max_word_length: Option<usize>,
    ) -> Result<Self> {
        let mut gens: Vec<Isometry> = Vec::new();
        for g in generators {
            if g.space() != &space {
                return Err(Error::SpaceMismatch);
            }
            if g.is_identity(MATRIX_TOL) {
                continue;
            }
            if !gens.iter().any(|h| h.approx_eq(&g, MATRIX_TOL)) {
                gens.push(g.clear_word());
            }
        }
        let user_count = gens.len();
        let mut inv_index: Vec<u32> = vec![0; user_count];
        for i in 0..user_count {
            let inv = gens[i].inverse();
            match gens.iter().position(|h| h.approx_eq(&inv, MATRIX_TOL)) {
                Some(j) => inv_index[i] = j as u32,
                None => {
                    gens.push(inv);
                    inv_index.push(i as u32);
                    inv_index[i] = (gens.len() - 1) as u32;
                }
            }
        }
        for (i, g) in gens.iter_mut().enumerate() {
            *g = g.clone().with_word(vec![i as u32]);
        }
        Ok(Self {
            space,
            kind,
            gens,
            inv_index,
            user_gen_count: user_count,
            max_word_length: max_word_length.unwrap_or(DEFAULT_FINITE_CUTOFF),
            elements: OnceLock::new(),
        })
    }

    /// The integer lattice Z^n of a flat space.
    pub fn integer_lattice(space: ModelSpace, max_word_length: usize) -> Result<Self> {
        if !space.is_flat() {
            return Err(Error::InvalidLattice);
        }
        let n = space.dim();
        let gens = (0..n)
            .map(|i| {
                let mut t = DVector::zeros(n);
                t[i] = 1.0;
                Isometry::translation(space, t)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, GroupKind::Lattice, gens, Some(max_word_length))
    }

    /// A lattice of translations from basis vectors.
    pub fn lattice(space: ModelSpace, basis: &[DVector<f64>], max_word_length: usize) -> Result<Self> {
        let gens = basis
            .iter()
            .map(|t| Isometry::translation(space, t.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, GroupKind::Lattice, gens, Some(max_word_length))
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// Generators, closed under inverses; word index `i` names
    /// `generators()[i]`.
    pub fn generators(&self) -> &[Isometry] {
        &self.gens
    }

    /// Index of the inverse of generator `i`.
    pub fn inverse_index(&self, i: usize) -> u32 {
        self.inv_index[i]
    }

    /// Number of generators supplied by the caller (the tail of
    /// [`Self::generators`] holds appended inverses).
    pub fn user_gen_count(&self) -> usize {
        self.user_gen_count
    }

    pub fn max_word_length(&self) -> usize {
        self.max_word_length
    }

    /// Breadth-first closure of the generators up to the word-length
    /// cutoff, deduplicated by matrix proximity. Each element carries a
    /// shortest discovered word; the order is deterministic (word
    /// length, then lexicographic word).
    ///
    /// For `Finite` groups an error is returned if the closure has not
    /// stabilized at the cutoff; for lattice and affine kinds the
    /// word-length ball is the documented result.
    pub fn enumerate(&self) -> Result<&[Isometry]> {
        let (elems, closed) = self.ball()?;
        if !closed && self.kind == GroupKind::Finite {
            return Err(Error::NotClosedAtCutoff {
                cutoff: self.max_word_length,
                size: elems.len(),
            });
        }
        Ok(elems)
    }

    /// The word-length ball regardless of closure; the second value
    /// says whether the closure stabilized inside the cutoff. This is
    /// the window offered for groups that cannot be enumerated
    /// completely (hyperbolic deck groups).
    pub fn enumerate_window(&self) -> Result<(&[Isometry], bool)> {
        self.ball()
    }

    fn ball(&self) -> Result<(&[Isometry], bool)> {
        self.elements
            .get_or_init(|| self.run_enumeration())
            .as_ref()
            .map(|(v, closed)| (v.as_slice(), *closed))
            .map_err(|e| e.clone())
    }

    fn run_enumeration(&self) -> Result<(Vec<Isometry>, bool)> {
        let mut elems = vec![Isometry::identity(self.space)];
        let mut frontier: Vec<usize> = vec![0];
        for _depth in 1..=self.max_word_length {
            let mut next: Vec<usize> = Vec::new();
            for &ei in &frontier {
                for g in &self.gens {
                    let h = elems[ei].compose(g)?.renormalize_onto_group();
                    if !elems.iter().any(|e| e.approx_eq(&h, MATRIX_TOL)) {
                        elems.push(h);
                        next.push(elems.len() - 1);
                    }
                }
            }
            if next.is_empty() {
                return Ok((elems, true));
            }
            frontier = next;
        }
        // One more sweep decides whether the ball happens to be closed.
        let closed = frontier.iter().all(|&ei| {
            self.gens.iter().all(|g| {
                elems[ei]
                    .compose(g)
                    .map(|h| elems.iter().any(|e| e.approx_eq(&h, MATRIX_TOL)))
                    .unwrap_or(false)
            })
        });
        Ok((elems, closed))
    }

    /// Number of enumerated elements.
    pub fn order(&self) -> Result<usize> {
        Ok(self.enumerate()?.len())
    }

    /// Smallest displacement of any non-identity element: the shortest
    /// lattice vector for lattices, otherwise the minimum of
    /// [`Isometry::minimal_displacement`] over the enumeration. Reported
    /// so callers can pick a displacement bound `r`.
    pub fn min_displacement(&self) -> Result<f64> {
        match self.kind {
            GroupKind::Lattice => {
                let basis = LatticeBasis::from_group(self)?;
                Ok(basis.shortest_vector())
            }
            _ => {
                let mut best = f64::INFINITY;
                for g in self.enumerate()? {
                    if g.is_identity(MATRIX_TOL) {
                        continue;
                    }
                    best = best.min(g.minimal_displacement());
                }
                if best.is_infinite() {
                    Err(Error::InvalidArgument {
                        what: "group has no non-identity element".into(),
                    })
                } else {
                    Ok(best)
                }
            }
        }
    }
}

impl Isometry {
    /// One polar-decomposition Newton step pulling the matrix back onto
    /// the form-preserving group; stops drift across long products.
    pub(crate) fn renormalize_onto_group(self) -> Isometry {
        // A <- A (3I - G^-1 A^T G A) / 2; identity on exact elements.
        if self.space().is_flat() {
            return self;
        }
        let g = self.space().form_matrix();
        let a = self.matrix();
        let m = a.nrows();
        let mut gram = a.transpose() * &g * a;
        let g00 = g[(0, 0)];
        for j in 0..m {
            gram[(0, j)] /= g00;
        }
        let correction = DMatrix::identity(m, m) * 3.0 - gram;
        let new_a = a * correction * 0.5;
        let word = self.word().map(|w| w.to_vec());
        let out = Isometry::from_matrix(*self.space(), new_a).unwrap_or(self);
        match word {
            Some(w) => out.with_word(w),
            None => out.clear_word(),
        }
    }
}

/// The finite subgroups of the unit quaternions, acting on the unit
/// 3-sphere by left twists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphericalGroupKind {
    /// Cyclic of order `m`.
    Cyclic(u32),
    /// Binary dihedral (dicyclic) of order `4m`.
    BinaryDihedral(u32),
    /// Binary tetrahedral, order 24.
    BinaryTetrahedral,
    /// Binary octahedral, order 48.
    BinaryOctahedral,
    /// Binary icosahedral, order 120.
    BinaryIcosahedral,
}

impl SphericalGroupKind {
    pub fn expected_order(&self) -> usize {
        match self {
            SphericalGroupKind::Cyclic(m) => *m as usize,
            SphericalGroupKind::BinaryDihedral(m) => 4 * *m as usize,
            SphericalGroupKind::BinaryTetrahedral => 24,
            SphericalGroupKind::BinaryOctahedral => 48,
            SphericalGroupKind::BinaryIcosahedral => 120,
        }
    }

    /// Standard generating quaternions. Components that are exactly
    /// 0 or +/-1 up to trig roundoff are snapped, so the twist matrices
    /// of the small groups are exact.
    pub fn generator_quaternions(&self) -> Result<Vec<Quaternion>> {
        use std::f64::consts::PI;
        fn snap(q: Quaternion) -> Quaternion {
            let fix = |c: f64| {
                if c.abs() < 1e-15 {
                    0.0
                } else if (c - 1.0).abs() < 1e-15 {
                    1.0
                } else if (c + 1.0).abs() < 1e-15 {
                    -1.0
                } else {
                    c
                }
            };
            Quaternion::new(fix(q.w), fix(q.x), fix(q.y), fix(q.z))
        }
        Ok(match self {
            SphericalGroupKind::Cyclic(m) => {
                if *m < 1 {
                    return Err(Error::InvalidArgument {
                        what: "cyclic order must be at least 1".into(),
                    });
                }
                let th = 2.0 * PI / *m as f64;
                vec![snap(Quaternion::rotor(I, th))]
            }
            SphericalGroupKind::BinaryDihedral(m) => {
                if *m < 1 {
                    return Err(Error::InvalidArgument {
                        what: "binary dihedral parameter must be at least 1".into(),
                    });
                }
                vec![snap(Quaternion::rotor(I, PI / *m as f64)), J]
            }
            SphericalGroupKind::BinaryTetrahedral => {
                vec![Quaternion::new(0.5, 0.5, 0.5, 0.5), I]
            }
            SphericalGroupKind::BinaryOctahedral => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![
                    Quaternion::new(0.5, 0.5, 0.5, 0.5),
                    I,
                    Quaternion::new(s, s, 0.0, 0.0),
                ]
            }
            SphericalGroupKind::BinaryIcosahedral => {
                let phi = (1.0 + 5f64.sqrt()) / 2.0;
                vec![
                    Quaternion::new(phi / 2.0, 1.0 / (2.0 * phi), 0.5, 0.0),
                    I,
                ]
            }
        })
    }
}

/// Build one of the named finite spherical groups on S^3 (k = 1).
pub fn finite_spherical_group(kind: SphericalGroupKind) -> Result<DiscreteGroup> {
    let space = ModelSpace::spherical(3, 1.0)?;
    let gens = kind
        .generator_quaternions()?
        .into_iter()
        .map(left_twist)
        .collect::<Result<Vec<_>>>()?;
    DiscreteGroup::new(space, GroupKind::Finite, gens, None)
}

/// Basis of a translation lattice with certified integer window
/// searches. Generators must be linearly independent pure translations.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    /// n x m matrix of basis columns.
    b: DMatrix<f64>,
    /// Moore-Penrose pseudo-inverse (m x n).
    pinv: DMatrix<f64>,
    /// Row norms of the pseudo-inverse: box bounds per coordinate.
    pinv_row_norms: Vec<f64>,
    /// Indices of the basis translations in the group generator list.
    gen_indices: Vec<usize>,
}

impl LatticeBasis {
    pub fn from_group(group: &DiscreteGroup) -> Result<Self> {
        if group.kind() != GroupKind::Lattice {
            return Err(Error::UnsupportedGroupKind {
                op: "lattice window search",
                kind: group.kind().name().into(),
            });
        }
        let n = group.space().dim();
        let mut cols: Vec<DVector<f64>> = Vec::new();
        let mut gen_indices = Vec::new();
        for (i, g) in group
            .generators()
            .iter()
            .enumerate()
            .take(group.user_gen_count())
        {
            let r = g.rotation_block();
            if (r - DMatrix::identity(n, n)).amax() > MATRIX_TOL {
                return Err(Error::InvalidLattice);
            }
            cols.push(g.translation_part().clone());
            gen_indices.push(i);
        }
        if cols.is_empty() {
            return Err(Error::InvalidLattice);
        }
        let b = DMatrix::from_columns(&cols);
        let svd = b.clone().svd(true, true);
        let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if sigma_min <= 1e-9 {
            return Err(Error::InvalidLattice);
        }
        let pinv = svd
            .pseudo_inverse(1e-12)
            .map_err(|_| Error::InvalidLattice)?;
        let pinv_row_norms = (0..pinv.nrows()).map(|i| pinv.row(i).norm()).collect();
        Ok(Self { b, pinv, pinv_row_norms, gen_indices })
    }

    pub fn rank(&self) -> usize {
        self.b.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// |det| of a full-rank square basis.
    pub fn cell_volume(&self) -> Result<f64> {
        if self.b.nrows() != self.b.ncols() {
            return Err(Error::InfiniteVolume {
                reason: format!(
                    "lattice rank {} is below the space dimension {}",
                    self.b.ncols(),
                    self.b.nrows()
                ),
            });
        }
        Ok(self.b.determinant().abs())
    }

    pub fn combine(&self, a: &[i64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.b.nrows());
        for (j, &aj) in a.iter().enumerate() {
            v += self.b.column(j) * aj as f64;
        }
        v
    }

    /// Visit an integer box guaranteed to contain every combination
    /// with `|B a - center| <= radius`; callers filter by the exact
    /// distance. The bounds derive from the pseudo-inverse row norms,
    /// so no qualifying point is missed.
    pub fn for_each_covering<F: FnMut(&[i64], &DVector<f64>)>(
        &self,
        center: &DVector<f64>,
        radius: f64,
        mut f: F,
    ) {
        let m = self.rank();
        let mid = self.pinv.clone() * center;
        let half: Vec<i64> = self
            .pinv_row_norms
            .iter()
            .map(|rn| (rn * radius + 1e-9).ceil() as i64)
            .collect();
        let mut a = vec![0i64; m];
        self.walk_box(&mid, &half, 0, &mut a, &mut f);
    }

    fn walk_box<F: FnMut(&[i64], &DVector<f64>)>(
        &self,
        mid: &DVector<f64>,
        half: &[i64],
        axis: usize,
        a: &mut Vec<i64>,
        f: &mut F,
    ) {
        if axis == self.rank() {
            let v = self.combine(a);
            f(a, &v);
            return;
        }
        let c = mid[axis].round() as i64;
        for step in (c - half[axis])..=(c + half[axis]) {
            a[axis] = step;
            self.walk_box(mid, half, axis + 1, a, f);
        }
    }

    /// Minimizer of `|target - B a|` over integer `a`, with all ties
    /// within `tie_tol`. The returned candidates are exact: the search
    /// box provably covers every competitor.
    pub fn nearest(&self, target: &DVector<f64>, tie_tol: f64) -> Vec<(Vec<i64>, DVector<f64>, f64)> {
        let m = self.rank();
        let a0: Vec<i64> = {
            let c = self.pinv.clone() * target;
            (0..m).map(|i| c[i].round() as i64).collect()
        };
        let best0 = (target - self.combine(&a0)).norm();
        let radius = 2.0 * best0 + tie_tol + 1e-12;
        let mut hits: Vec<(Vec<i64>, DVector<f64>, f64)> = Vec::new();
        let mut best = f64::INFINITY;
        self.for_each_covering(target, radius, |a, v| {
            let d = (target - v).norm();
            if d < best {
                best = d;
            }
            if d <= best + tie_tol {
                hits.push((a.to_vec(), v.clone(), d));
            }
        });
        hits.retain(|(_, _, d)| *d <= best + tie_tol);
        hits
    }

    /// Norm of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        let bound = (0..self.rank())
            .map(|j| self.b.column(j).norm())
            .fold(f64::INFINITY, f64::min);
        let origin = DVector::zeros(self.b.nrows());
        let mut best = bound;
        self.for_each_covering(&origin, bound + 1e-9, |a, v| {
            if a.iter().any(|&x| x != 0) {
                best = best.min(v.norm());
            }
        });
        best
    }

    /// Generator word for the integer combination `a`.
    pub fn word_for(&self, a: &[i64], group: &DiscreteGroup) -> Vec<u32> {
        let mut word = Vec::new();
        for (j, &aj) in a.iter().enumerate() {
            let gi = self.gen_indices[j];
            let idx = if aj >= 0 {
                gi as u32
            } else {
                group.inverse_index(gi)
            };
            for _ in 0..aj.unsigned_abs() {
                word.push(idx);
            }
        }
        word
    }
}
