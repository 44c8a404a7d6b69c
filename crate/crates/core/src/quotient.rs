//! Space forms: quotients of a model space by a verified free and
//! discontinuous group, with Dirichlet canonical representatives,
//! covering projection, path lifting and deck-transformation recovery.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{DiscreteGroup, GroupKind, LatticeBasis};
use crate::isometry::{Isometry, MATRIX_TOL};
use crate::model::{AmbientPoint, Curvature, ModelSpace, TOL};

/// A verified space form: model space, deck group, displacement bound
/// `r`, and the Dirichlet base point.
#[derive(Debug, Clone)]
pub struct SpaceForm {
    space: ModelSpace,
    group: DiscreteGroup,
    r: f64,
    base: AmbientPoint,
}

/// Canonical orbit representative inside the Dirichlet domain of the
/// base point.
#[derive(Debug, Clone)]
pub struct QuotientPoint {
    rep: AmbientPoint,
}

impl QuotientPoint {
    pub fn rep(&self) -> &AmbientPoint {
        &self.rep
    }
}

/// Why a candidate space form was rejected.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A non-identity element fixes an on-model point.
    FixedPoint { word: Vec<u32>, point: Vec<f64> },
    /// A non-identity element moves some point less than `required`.
    SmallDisplacement {
        word: Vec<u32>,
        displacement: f64,
        required: f64,
    },
    /// Two orbit points of the base are closer than `required`.
    OrbitCluster {
        word_a: Vec<u32>,
        word_b: Vec<u32>,
        distance: f64,
        required: f64,
    },
}

/// Structured rejection of a candidate space form. Not an error: the
/// check ran to completion and names the violating elements.
#[derive(Debug, Clone, Serialize)]
pub struct RejectionReport {
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for RejectionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "space form rejected ({} violations):", self.violations.len())?;
        for v in &self.violations {
            match v {
                Violation::FixedPoint { word, point } => {
                    writeln!(f, "  element {word:?} fixes the point {point:?}")?
                }
                Violation::SmallDisplacement { word, displacement, required } => writeln!(
                    f,
                    "  element {word:?} has displacement {displacement} < r = {required}"
                )?,
                Violation::OrbitCluster { word_a, word_b, distance, required } => writeln!(
                    f,
                    "  orbit points {word_a:?}, {word_b:?} are {distance} apart (< {required})"
                )?,
            }
        }
        Ok(())
    }
}

/// Result of [`verify_space_form`].
#[derive(Debug, Clone)]
pub enum VerifyOutcome {
    Verified(SpaceForm),
    Rejected(RejectionReport),
}

impl VerifyOutcome {
    pub fn into_form(self) -> std::result::Result<SpaceForm, RejectionReport> {
        match self {
            VerifyOutcome::Verified(f) => Ok(f),
            VerifyOutcome::Rejected(r) => Err(r),
        }
    }
}

/// Deck elements available for exact search. Hyperbolic deck groups
/// cannot be enumerated completely; they get the word-length window
/// (experimental, no completeness claim), every other kind gets the
/// full closure.
fn window_elements<'g>(space: &ModelSpace, group: &'g DiscreteGroup) -> Result<&'g [Isometry]> {
    if space.curvature() == Curvature::Hyperbolic {
        group.enumerate_window().map(|(v, _)| v)
    } else {
        group.enumerate()
    }
}

/// Check that `group` acts freely with displacement at least `r` and
/// that the orbit of the base point does not cluster, returning either
/// a verified [`SpaceForm`] or a [`RejectionReport`].
///
/// Desk-scale orbit check: orbit points of the base within distance
/// `3 r` must be pairwise at least `r` apart.
pub fn verify_space_form(
    space: ModelSpace,
    group: DiscreteGroup,
    r: f64,
    base: Option<AmbientPoint>,
) -> Result<VerifyOutcome> {
    if group.space() != &space {
        return Err(Error::SpaceMismatch);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument {
            what: format!("displacement bound must be positive, got {r}"),
        });
    }
    let base = match base {
        Some(b) => space.point(b.coords().clone())?,
        None => space.base_point(),
    };
    let mut violations = Vec::new();
    match group.kind() {
        GroupKind::Lattice => {
            let basis = LatticeBasis::from_group(&group)?;
            // Translations are fixed-point free; only the displacement
            // bound and orbit spacing need checking.
            let shortest = basis.shortest_vector();
            if shortest < r - TOL {
                let mut witness_word = Vec::new();
                basis.for_each_covering(&DVector::zeros(space.dim()), shortest + TOL, |a, v| {
                    if a.iter().any(|&x| x != 0) && (v.norm() - shortest).abs() <= TOL
                        && witness_word.is_empty() {
                            witness_word = basis.word_for(a, &group);
                        }
                });
                violations.push(Violation::SmallDisplacement {
                    word: witness_word,
                    displacement: shortest,
                    required: r,
                });
            }
            let mut orbit: Vec<(Vec<u32>, DVector<f64>)> = Vec::new();
            basis.for_each_covering(&DVector::zeros(space.dim()), 3.0 * r, |a, v| {
                if v.norm() <= 3.0 * r + TOL {
                    orbit.push((basis.word_for(a, &group), v.clone()));
                }
            });
            for i in 0..orbit.len() {
                for j in (i + 1)..orbit.len() {
                    let d = (&orbit[i].1 - &orbit[j].1).norm();
                    if d < r - TOL {
                        violations.push(Violation::OrbitCluster {
                            word_a: orbit[i].0.clone(),
                            word_b: orbit[j].0.clone(),
                            distance: d,
                            required: r,
                        });
                    }
                }
            }
        }
        _ => {
            let elems = window_elements(&space, &group)?;
            for g in elems {
                if g.is_identity(MATRIX_TOL) {
                    continue;
                }
                let word = g.word().map(|w| w.to_vec()).unwrap_or_default();
                if let Some(p) = g.fixed_point() {
                    violations.push(Violation::FixedPoint {
                        word: word.clone(),
                        point: p.coords().iter().copied().collect(),
                    });
                }
                let disp = g.minimal_displacement();
                if disp < r - TOL {
                    violations.push(Violation::SmallDisplacement {
                        word,
                        displacement: disp,
                        required: r,
                    });
                }
            }
            // Orbit spacing at desk scale.
            let mut orbit: Vec<(Vec<u32>, AmbientPoint)> = Vec::new();
            for g in elems {
                let p = g.apply(&base)?;
                if space.distance(&base, &p)? <= 3.0 * r + TOL {
                    orbit.push((g.word().map(|w| w.to_vec()).unwrap_or_default(), p));
                }
            }
            for i in 0..orbit.len() {
                for j in (i + 1)..orbit.len() {
                    let d = space.distance(&orbit[i].1, &orbit[j].1)?;
                    if d < r - TOL {
                        violations.push(Violation::OrbitCluster {
                            word_a: orbit[i].0.clone(),
                            word_b: orbit[j].0.clone(),
                            distance: d,
                            required: r,
                        });
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(VerifyOutcome::Verified(SpaceForm { space, group, r, base }))
    } else {
        Ok(VerifyOutcome::Rejected(RejectionReport { violations }))
    }
}

impl SpaceForm {
    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn group(&self) -> &DiscreteGroup {
        &self.group
    }

    pub fn displacement_bound(&self) -> f64 {
        self.r
    }

    pub fn base(&self) -> &AmbientPoint {
        &self.base
    }

    fn lattice(&self) -> Result<LatticeBasis> {
        LatticeBasis::from_group(&self.group)
    }

    /// Quotient metric: min over deck elements of `d(x, g y)`. Exact
    /// for finite groups; exact by certified window search for
    /// lattices; other kinds are rejected rather than silently
    /// truncated.
    pub fn quotient_distance(&self, x: &AmbientPoint, y: &AmbientPoint) -> Result<f64> {
        match self.group.kind() {
            GroupKind::Finite => {
                let mut best = f64::INFINITY;
                for g in window_elements(&self.space, &self.group)? {
                    best = best.min(self.space.distance(x, &g.apply(y)?)?);
                }
                Ok(best)
            }
            GroupKind::Lattice => {
                let basis = self.lattice()?;
                let diff = x.spatial() - y.spatial();
                let hits = basis.nearest(&diff, 0.0);
                hits.iter()
                    .map(|(_, _, d)| *d)
                    .fold(None, |acc: Option<f64>, d| {
                        Some(acc.map_or(d, |a| a.min(d)))
                    })
                    .ok_or_else(|| Error::WindowInsufficient {
                        reason: "empty lattice window".into(),
                    })
            }
            kind => Err(Error::UnsupportedGroupKind {
                op: "quotient_distance",
                kind: kind.name().into(),
            }),
        }
    }

    /// Dirichlet canonical representative of the orbit of `x`: the
    /// translate nearest the base point, ties broken toward the
    /// lexicographically largest coordinate vector.
    pub fn reduce(&self, x: &AmbientPoint) -> Result<QuotientPoint> {
        let mut candidates: Vec<(AmbientPoint, f64)> = Vec::new();
        match self.group.kind() {
            GroupKind::Finite => {
                for g in window_elements(&self.space, &self.group)? {
                    let p = g.apply(x)?;
                    let d = self.space.distance(&self.base, &p)?;
                    candidates.push((p, d));
                }
            }
            GroupKind::Lattice => {
                let basis = self.lattice()?;
                let u = x.spatial() - self.base.spatial();
                for (_, v, d) in basis.nearest(&u, TOL) {
                    let spatial = x.spatial() - v;
                    let mut coords = vec![1.0];
                    coords.extend(spatial.iter());
                    candidates.push((self.space.point_from(&coords)?, d));
                }
            }
            kind => {
                return Err(Error::UnsupportedGroupKind {
                    op: "reduce",
                    kind: kind.name().into(),
                })
            }
        }
        let best = candidates
            .iter()
            .map(|(_, d)| *d)
            .fold(f64::INFINITY, f64::min);
        let mut tied: Vec<&AmbientPoint> = candidates
            .iter()
            .filter(|(_, d)| *d <= best + TOL)
            .map(|(p, _)| p)
            .collect();
        tied.sort_by(|a, b| a.lex_cmp(b));
        let rep = tied
            .last()
            .ok_or_else(|| Error::WindowInsufficient {
                reason: "no reduction candidates".into(),
            })?
            .to_owned()
            .clone();
        Ok(QuotientPoint { rep })
    }

    /// Lift a quotient path to the covering space, starting at `start`
    /// (which must project onto the first path point). Each successive
    /// lift is the orbit translate nearest the previous one; steps of
    /// `r/2` or more are ambiguous and rejected.
    pub fn lift_path(
        &self,
        path: &[QuotientPoint],
        start: &AmbientPoint,
    ) -> Result<Vec<AmbientPoint>> {
        let first = path.first().ok_or_else(|| Error::InvalidArgument {
            what: "empty path".into(),
        })?;
        if !self.reduce(start)?.rep.approx_eq(&first.rep, 1e-7) {
            return Err(Error::StartMismatch);
        }
        let half_r = self.r / 2.0;
        let mut out = vec![start.clone()];
        for (i, qp) in path.iter().enumerate().skip(1) {
            let current = out.last().expect("nonempty by construction");
            let (best_point, best_dist) = self.nearest_orbit_point(&qp.rep, current)?;
            if best_dist >= half_r - 1e-12 {
                return Err(Error::AmbiguousLift {
                    index: i,
                    step: best_dist,
                    half_r,
                });
            }
            out.push(best_point);
        }
        Ok(out)
    }

    /// Orbit translate of `target` nearest to `anchor`.
    fn nearest_orbit_point(
        &self,
        target: &AmbientPoint,
        anchor: &AmbientPoint,
    ) -> Result<(AmbientPoint, f64)> {
        match self.group.kind() {
            GroupKind::Finite => {
                let mut best: Option<(AmbientPoint, f64)> = None;
                for g in window_elements(&self.space, &self.group)? {
                    let p = g.apply(target)?;
                    let d = self.space.distance(anchor, &p)?;
                    if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
                        best = Some((p, d));
                    }
                }
                best.ok_or_else(|| Error::WindowInsufficient {
                    reason: "empty group".into(),
                })
            }
            GroupKind::Lattice => {
                let basis = self.lattice()?;
                let diff = anchor.spatial() - target.spatial();
                let hits = basis.nearest(&diff, 0.0);
                let (_, v, d) = hits.first().ok_or_else(|| Error::WindowInsufficient {
                    reason: "empty lattice window".into(),
                })?;
                let spatial = target.spatial() + v;
                let mut coords = vec![1.0];
                coords.extend(spatial.iter());
                Ok((self.space.point_from(&coords)?, *d))
            }
            kind => Err(Error::UnsupportedGroupKind {
                op: "lift_path",
                kind: kind.name().into(),
            }),
        }
    }

    /// The deck element carrying `x` to `y` (coordinatewise within
    /// 1e-8), or `None` when the points are not in the same orbit.
    /// Uniqueness follows from freeness and the displacement bound.
    pub fn deck_transformation(
        &self,
        x: &AmbientPoint,
        y: &AmbientPoint,
    ) -> Result<Option<Isometry>> {
        match self.group.kind() {
            GroupKind::Finite => {
                for g in window_elements(&self.space, &self.group)? {
                    if g.apply(x)?.approx_eq(y, 1e-8) {
                        return Ok(Some(g.clone()));
                    }
                }
                Ok(None)
            }
            GroupKind::Lattice => {
                let basis = self.lattice()?;
                let diff = y.spatial() - x.spatial();
                let hits = basis.nearest(&diff, 0.0);
                match hits.first() {
                    Some((a, v, d)) if *d <= 1e-8 => {
                        let word = basis.word_for(a, &self.group);
                        let iso =
                            Isometry::translation(self.space, v.clone())?.with_word(word);
                        Ok(Some(iso))
                    }
                    _ => Ok(None),
                }
            }
            kind => Err(Error::UnsupportedGroupKind {
                op: "deck_transformation",
                kind: kind.name().into(),
            }),
        }
    }

    /// Total volume of the quotient: `|det B|` for a rank-n lattice,
    /// `2 pi^2 k^3 / |G|` for a spherical quotient in dimension 3.
    pub fn volume(&self) -> Result<f64> {
        match (self.group.kind(), self.space.curvature()) {
            (GroupKind::Lattice, Curvature::Flat) => {
                let basis = self.lattice()?;
                if basis.rank() != self.space.dim() {
                    return Err(Error::InfiniteVolume {
                        reason: format!(
                            "lattice rank {} is below the space dimension {}",
                            basis.rank(),
                            self.space.dim()
                        ),
                    });
                }
                basis.cell_volume()
            }
            (GroupKind::Finite, Curvature::Spherical) => {
                if self.space.dim() != 3 {
                    return Err(Error::UnsupportedDimension {
                        required: 3,
                        got: self.space.dim(),
                    });
                }
                let k = self.space.radius();
                let order = self.group.order()? as f64;
                Ok(2.0 * std::f64::consts::PI.powi(2) * k.powi(3) / order)
            }
            (_, Curvature::Flat) => Err(Error::InfiniteVolume {
                reason: "flat quotient by a finite or affine group has infinite volume".into(),
            }),
            (_, Curvature::Hyperbolic) => Err(Error::InfiniteVolume {
                reason: "hyperbolic quotient volume is not supported".into(),
            }),
            (kind, _) => Err(Error::UnsupportedGroupKind {
                op: "volume",
                kind: kind.name().into(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::finite_spherical_group;
    use crate::group::SphericalGroupKind;
    use std::f64::consts::PI;

    fn z3_form() -> SpaceForm {
        let flat = ModelSpace::flat(3).unwrap();
        let group = DiscreteGroup::integer_lattice(flat, 8).unwrap();
        verify_space_form(flat, group, 1.0, None)
            .unwrap()
            .into_form()
            .unwrap()
    }

    fn elliptic_form() -> SpaceForm {
        let s3 = ModelSpace::spherical(3, 1.0).unwrap();
        let group = finite_spherical_group(SphericalGroupKind::Cyclic(2)).unwrap();
        verify_space_form(s3, group, PI, None)
            .unwrap()
            .into_form()
            .unwrap()
    }

    #[test]
    fn cubic_lattice_is_verified() {
        let form = z3_form();
        assert_eq!(form.displacement_bound(), 1.0);
        assert_eq!(form.volume().unwrap(), 1.0);
    }

    #[test]
    fn antipodal_quotient_is_verified() {
        let form = elliptic_form();
        assert!((form.volume().unwrap() - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn rotation_group_is_rejected_with_witness() {
        // Half turn about the z-axis of S^2 fixes the poles.
        let s2 = ModelSpace::spherical(2, 1.0).unwrap();
        let rot = Isometry::from_matrix(
            s2,
            nalgebra::DMatrix::from_row_slice(
                3,
                3,
                &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0],
            ),
        )
        .unwrap();
        let group = DiscreteGroup::new(s2, GroupKind::Finite, vec![rot], None).unwrap();
        let outcome = verify_space_form(s2, group, 1.0, None).unwrap();
        match outcome {
            VerifyOutcome::Rejected(report) => {
                let has_pole = report.violations.iter().any(|v| match v {
                    Violation::FixedPoint { point, .. } => {
                        (point[0].abs() < 1e-8)
                            && (point[1].abs() < 1e-8)
                            && ((point[2] - 1.0).abs() < 1e-8 || (point[2] + 1.0).abs() < 1e-8)
                    }
                    _ => false,
                });
                assert!(has_pole, "expected a fixed-point witness at a pole: {report}");
            }
            VerifyOutcome::Verified(_) => panic!("rotation group must be rejected"),
        }
    }

    #[test]
    fn quotient_distance_wraps() {
        let form = z3_form();
        let flat = *form.space();
        let x = flat.flat_point(&[0.1, 0.0, 0.0]).unwrap();
        let y = flat.flat_point(&[0.9, 0.0, 0.0]).unwrap();
        assert!((form.quotient_distance(&x, &y).unwrap() - 0.2).abs() < 1e-12);

        let x = flat.flat_point(&[0.0, 0.0, 0.0]).unwrap();
        let y = flat.flat_point(&[0.5, 0.5, 0.5]).unwrap();
        assert!((form.quotient_distance(&x, &y).unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn antipodal_points_are_identified() {
        let form = elliptic_form();
        let s3 = *form.space();
        let x = s3.point_from(&[0.6, 0.8, 0.0, 0.0]).unwrap();
        let y = s3.point_from(&[-0.6, -0.8, 0.0, 0.0]).unwrap();
        assert!(form.quotient_distance(&x, &y).unwrap() < 1e-7);
    }

    #[test]
    fn reduce_picks_lexicographically_largest_tie() {
        let form = z3_form();
        let flat = *form.space();
        let x = flat.flat_point(&[1.25, -0.5, 3.0]).unwrap();
        let rep = form.reduce(&x).unwrap();
        let expected = flat.flat_point(&[0.25, 0.5, 0.0]).unwrap();
        assert!(
            rep.rep().approx_eq(&expected, 1e-12),
            "got {:?}",
            rep.rep()
        );
    }

    #[test]
    fn reduce_is_idempotent_and_fixes_base() {
        let form = z3_form();
        let rep = form.reduce(form.base()).unwrap();
        assert!(rep.rep().approx_eq(form.base(), 1e-15));
        let x = form.space().flat_point(&[0.3, -0.4, 0.2]).unwrap();
        let r1 = form.reduce(&x).unwrap();
        let r2 = form.reduce(r1.rep()).unwrap();
        assert!(r1.rep().approx_eq(r2.rep(), 1e-12));
    }

    #[test]
    fn far_point_reduces_to_antipode() {
        let form = elliptic_form();
        let s3 = *form.space();
        let x = s3.point_from(&[-0.9, (1.0f64 - 0.81).sqrt(), 0.0, 0.0]).unwrap();
        let rep = form.reduce(&x).unwrap();
        let expected = s3
            .point_from(&[0.9, -(1.0f64 - 0.81).sqrt(), 0.0, 0.0])
            .unwrap();
        assert!(rep.rep().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn unit_loop_lifts_to_deck_translation() {
        let form = z3_form();
        let flat = *form.space();
        let pts = [
            [0.0, 0.0, 0.0],
            [0.25, 0.0, 0.0],
            [0.5, 0.0, 0.0],
            [0.75, 0.0, 0.0],
            [0.0, 0.0, 0.0],
        ];
        let path: Vec<QuotientPoint> = pts
            .iter()
            .map(|p| form.reduce(&flat.flat_point(p).unwrap()).unwrap())
            .collect();
        let start = flat.flat_point(&[0.0, 0.0, 0.0]).unwrap();
        let lift = form.lift_path(&path, &start).unwrap();
        let end = lift.last().unwrap();
        assert!(end.approx_eq(&flat.flat_point(&[1.0, 0.0, 0.0]).unwrap(), 1e-12));

        let deck = form
            .deck_transformation(&start, end)
            .unwrap()
            .expect("loop must close up to a deck element");
        assert!(
            (deck.translation_part() - DVector::from_row_slice(&[1.0, 0.0, 0.0])).amax() < 1e-12
        );
        assert_eq!(deck.word().unwrap(), &[0]);
    }

    #[test]
    fn mismatched_start_is_rejected() {
        let form = z3_form();
        let flat = *form.space();
        let path = vec![form.reduce(&flat.flat_point(&[0.0, 0.0, 0.0]).unwrap()).unwrap()];
        let start = flat.flat_point(&[0.3, 0.0, 0.0]).unwrap();
        assert!(matches!(
            form.lift_path(&path, &start),
            Err(Error::StartMismatch)
        ));
    }

    #[test]
    fn big_step_is_ambiguous() {
        let form = z3_form();
        let flat = *form.space();
        let path = vec![
            form.reduce(&flat.flat_point(&[0.0, 0.0, 0.0]).unwrap()).unwrap(),
            form.reduce(&flat.flat_point(&[0.5, 0.0, 0.0]).unwrap()).unwrap(),
        ];
        let start = flat.flat_point(&[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            form.lift_path(&path, &start),
            Err(Error::AmbiguousLift { index: 1, .. })
        ));
    }

    #[test]
    fn deck_of_identical_points_is_identity() {
        let form = z3_form();
        let x = form.space().flat_point(&[0.2, 0.3, 0.4]).unwrap();
        let deck = form.deck_transformation(&x, &x).unwrap().unwrap();
        assert!(deck.is_identity(1e-12));
    }

    #[test]
    fn rank_deficient_lattice_volume_errors() {
        let flat = ModelSpace::flat(3).unwrap();
        let basis = [DVector::from_row_slice(&[1.0, 0.0, 0.0])];
        let group = DiscreteGroup::lattice(flat, &basis, 6).unwrap();
        let form = verify_space_form(flat, group, 1.0, None)
            .unwrap()
            .into_form()
            .unwrap();
        assert!(matches!(form.volume(), Err(Error::InfiniteVolume { .. })));
    }
}
