//! Oracles for the quotient operations: brute-force translate windows,
//! Monte Carlo volume, orbit invariance, and lift/deck round trips.

mod common;

use common::{random_s3_point, rng};
use rand::Rng;
use spaceform::{
    finite_spherical_group, verify_space_form, DiscreteGroup, ModelSpace, QuotientPoint,
    SphericalGroupKind, SpaceForm,
};

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
    verify_space_form(s3, group, std::f64::consts::PI, None)
        .unwrap()
        .into_form()
        .unwrap()
}

/// Brute-force quotient distance over the translate window
/// {-w..w}^3.
fn brute_force_z3_distance(x: &[f64; 3], y: &[f64; 3], w: i64) -> f64 {
    let mut best = f64::INFINITY;
    for a in -w..=w {
        for b in -w..=w {
            for c in -w..=w {
                let dx = x[0] - (y[0] + a as f64);
                let dy = x[1] - (y[1] + b as f64);
                let dz = x[2] - (y[2] + c as f64);
                best = best.min((dx * dx + dy * dy + dz * dz).sqrt());
            }
        }
    }
    best
}

#[test]
fn quotient_distance_matches_brute_force_window() {
    let form = z3_form();
    let flat = *form.space();
    let mut r = rng(101);
    for _ in 0..1000 {
        let x = [
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        ];
        let y = [
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        ];
        let px = flat.flat_point(&x).unwrap();
        let py = flat.flat_point(&y).unwrap();
        let ours = form.quotient_distance(&px, &py).unwrap();
        let oracle = brute_force_z3_distance(&x, &y, 3);
        assert!(
            (ours - oracle).abs() <= 1e-12,
            "window mismatch: {ours} vs {oracle}"
        );
        assert!(ours <= flat.distance(&px, &py).unwrap() + 1e-15);
    }
}

#[test]
fn quotient_metric_axioms_on_canonical_representatives() {
    let form = z3_form();
    let flat = *form.space();
    let mut r = rng(103);
    for _ in 0..1000 {
        let mut pt = || {
            let p = flat
                .flat_point(&[
                    r.random_range(-2.0..2.0),
                    r.random_range(-2.0..2.0),
                    r.random_range(-2.0..2.0),
                ])
                .unwrap();
            form.reduce(&p).unwrap()
        };
        let (x, y, z) = (pt(), pt(), pt());
        let dxy = form.quotient_distance(x.rep(), y.rep()).unwrap();
        let dyx = form.quotient_distance(y.rep(), x.rep()).unwrap();
        let dxz = form.quotient_distance(x.rep(), z.rep()).unwrap();
        let dyz = form.quotient_distance(y.rep(), z.rep()).unwrap();
        assert!((dxy - dyx).abs() < 1e-12, "symmetry");
        assert!(dxz <= dxy + dyz + 1e-9, "triangle inequality");
    }
}

#[test]
fn covering_compatibility_against_larger_window() {
    // The certified window must agree with a strictly larger one.
    let form = z3_form();
    let flat = *form.space();
    let mut r = rng(107);
    for _ in 0..200 {
        let x = [
            r.random_range(-1.5..1.5),
            r.random_range(-1.5..1.5),
            r.random_range(-1.5..1.5),
        ];
        let y = [
            r.random_range(-1.5..1.5),
            r.random_range(-1.5..1.5),
            r.random_range(-1.5..1.5),
        ];
        let px = form.reduce(&flat.flat_point(&x).unwrap()).unwrap();
        let py = form.reduce(&flat.flat_point(&y).unwrap()).unwrap();
        let ours = form.quotient_distance(px.rep(), py.rep()).unwrap();
        let sx = px.rep().spatial();
        let sy = py.rep().spatial();
        let oracle = brute_force_z3_distance(
            &[sx[0], sx[1], sx[2]],
            &[sy[0], sy[1], sy[2]],
            4,
        );
        assert!((ours - oracle).abs() <= 1e-12);
    }
}

#[test]
fn reduce_is_orbit_invariant() {
    let form = z3_form();
    let flat = *form.space();
    let mut r = rng(109);
    for _ in 0..200 {
        let x = flat
            .flat_point(&[
                r.random_range(-2.0..2.0),
                r.random_range(-2.0..2.0),
                r.random_range(-2.0..2.0),
            ])
            .unwrap();
        let rep = form.reduce(&x).unwrap();
        // Translate by a few deck elements and reduce again.
        for shift in [[1.0, 0.0, 0.0], [0.0, -2.0, 1.0], [3.0, 1.0, -1.0]] {
            let moved = flat
                .flat_point(&[
                    x.spatial()[0] + shift[0],
                    x.spatial()[1] + shift[1],
                    x.spatial()[2] + shift[2],
                ])
                .unwrap();
            let rep2 = form.reduce(&moved).unwrap();
            assert!(rep.rep().approx_eq(rep2.rep(), 1e-9));
        }
    }

    let eform = elliptic_form();
    let s3 = *eform.space();
    let mut r = rng(113);
    for _ in 0..200 {
        let x = random_s3_point(&s3, &mut r);
        let neg = s3
            .point_from(&[
                -x.coords()[0],
                -x.coords()[1],
                -x.coords()[2],
                -x.coords()[3],
            ])
            .unwrap();
        let r1 = eform.reduce(&x).unwrap();
        let r2 = eform.reduce(&neg).unwrap();
        assert!(r1.rep().approx_eq(r2.rep(), 1e-9));
    }
}

fn random_short_path<R: Rng>(
    form: &SpaceForm,
    r: &mut R,
    steps: usize,
    step_size: f64,
) -> (Vec<QuotientPoint>, spaceform::AmbientPoint) {
    let space = form.space();
    let start = space.random_point(r);
    let mut current = start.clone();
    let mut path = vec![form.reduce(&start).unwrap()];
    for _ in 0..steps {
        // Random small step in ambient coordinates, projected back.
        let m = space.ambient_dim();
        let mut delta = nalgebra::DVector::zeros(m);
        for i in 0..m {
            delta[i] = r.random_range(-step_size..step_size);
        }
        if space.is_flat() {
            delta[0] = 0.0;
            current = space
                .point(current.coords() + delta)
                .expect("flat step stays on hyperplane");
        } else {
            let moved = current.coords() + delta;
            let normalized = moved.clone() * (1.0 / moved.norm());
            current = space.point(normalized).expect("renormalized onto sphere");
        }
        path.push(form.reduce(&current).unwrap());
    }
    (path, start)
}

#[test]
fn lift_then_project_is_identity_on_random_short_paths() {
    let forms = [z3_form(), elliptic_form()];
    for form in &forms {
        let mut r = rng(127);
        for _ in 0..100 {
            let (path, start) = random_short_path(form, &mut r, 12, 0.08);
            let lift = form.lift_path(&path, &start).unwrap();
            assert_eq!(lift.len(), path.len());
            for (lifted, qp) in lift.iter().zip(path.iter()) {
                let proj = form.reduce(lifted).unwrap();
                assert!(
                    proj.rep().approx_eq(qp.rep(), 1e-7),
                    "projection differs from path point"
                );
            }
            // Consecutive lifted distances equal consecutive quotient
            // distances.
            for w in 0..path.len() - 1 {
                let dq = form
                    .quotient_distance(path[w].rep(), path[w + 1].rep())
                    .unwrap();
                let dl = form.space().distance(&lift[w], &lift[w + 1]).unwrap();
                assert!((dq - dl).abs() < 1e-7, "lift changed a step: {dq} vs {dl}");
            }
        }
    }
}

#[test]
fn constant_path_has_constant_lift() {
    let form = z3_form();
    let p = form.space().flat_point(&[0.2, 0.1, 0.4]).unwrap();
    let qp = form.reduce(&p).unwrap();
    let path = vec![qp.clone(), qp.clone(), qp];
    let lift = form.lift_path(&path, &p).unwrap();
    for l in &lift {
        assert!(l.approx_eq(&p, 1e-12));
    }
}

#[test]
fn deck_recovers_face_crossings() {
    let form = z3_form();
    let flat = *form.space();
    // A loop crossing the x-face once and the y-face once.
    let raw = [
        [0.0, 0.0, 0.0],
        [0.3, 0.0, 0.0],
        [0.6, 0.0, 0.0],
        [0.9, 0.0, 0.0],
        [0.9, 0.3, 0.0],
        [0.9, 0.6, 0.0],
        [0.9, 0.9, 0.0],
        [1.0, 1.0, 0.0],
    ];
    let path: Vec<QuotientPoint> = raw
        .iter()
        .map(|p| form.reduce(&flat.flat_point(p).unwrap()).unwrap())
        .collect();
    let start = flat.flat_point(&[0.0, 0.0, 0.0]).unwrap();
    let lift = form.lift_path(&path, &start).unwrap();
    let end = lift.last().unwrap();
    let deck = form.deck_transformation(&start, end).unwrap().unwrap();
    let t = deck.translation_part();
    assert!((t[0] - 1.0).abs() < 1e-9 && (t[1] - 1.0).abs() < 1e-9 && t[2].abs() < 1e-9);
    // Word spells one x-translation and one y-translation.
    assert_eq!(deck.word().unwrap(), &[0, 1]);
}

#[test]
fn deck_transformation_absent_for_non_orbit_points() {
    let form = z3_form();
    let flat = *form.space();
    let x = flat.flat_point(&[0.0, 0.0, 0.0]).unwrap();
    let y = flat.flat_point(&[0.5, 0.25, 0.0]).unwrap();
    assert!(form.deck_transformation(&x, &y).unwrap().is_none());
}

#[test]
fn spherical_deck_transformation_carries_word() {
    let form = elliptic_form();
    let s3 = *form.space();
    let x = s3.point_from(&[0.6, 0.0, 0.8, 0.0]).unwrap();
    let y = s3.point_from(&[-0.6, 0.0, -0.8, 0.0]).unwrap();
    let deck = form.deck_transformation(&x, &y).unwrap().unwrap();
    assert_eq!(deck.word().unwrap().len(), 1);
    assert!(deck.approx_eq(
        &spaceform::left_twist(-spaceform::quat::ONE).unwrap(),
        1e-12
    ));
}

/// Monte Carlo volume oracle: the fraction of uniform samples whose
/// Dirichlet representative is themselves estimates 1/|G| of the total
/// volume 2 pi^2.
fn monte_carlo_spherical_volume(form: &SpaceForm, samples: usize, seed: u64) -> f64 {
    let space = form.space();
    let base = form.base();
    let elems = form.group().enumerate().unwrap();
    let mut r = rng(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let q = common::random_unit_quaternion(&mut r);
        let x = space.point_from(&q.to_array()).unwrap();
        // In the Dirichlet domain iff no translate is closer to the
        // base; compare through the form value (monotone in distance).
        let ax = space.bilinear_form(base.coords(), x.coords()).unwrap();
        let mut inside = true;
        for g in elems {
            if g.is_identity(1e-12) {
                continue;
            }
            let gx = g.apply(&x).unwrap();
            let agx = space.bilinear_form(base.coords(), gx.coords()).unwrap();
            if agx > ax {
                inside = false;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    2.0 * std::f64::consts::PI.powi(2) * hits as f64 / samples as f64
}

#[test]
fn monte_carlo_volume_sanity_elliptic() {
    let form = elliptic_form();
    let mc = monte_carlo_spherical_volume(&form, 100_000, 5);
    let closed = form.volume().unwrap();
    assert!(
        ((mc - closed) / closed).abs() < 0.01,
        "mc {mc} vs closed {closed}"
    );
}

#[test]
fn volume_closed_forms() {
    let icosa = finite_spherical_group(SphericalGroupKind::BinaryIcosahedral).unwrap();
    let s3 = ModelSpace::spherical(3, 1.0).unwrap();
    let r = icosa.min_displacement().unwrap();
    let form = verify_space_form(s3, icosa, r, None)
        .unwrap()
        .into_form()
        .unwrap();
    let expected = 2.0 * std::f64::consts::PI.powi(2) / 120.0;
    assert!((form.volume().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn glide_group_verifies_on_the_word_window() {
    // A screw motion (half turn plus lift) generates a free action;
    // verification runs over the word ball, and the exact quotient
    // searches decline the affine kind rather than guess.
    let flat = ModelSpace::flat(3).unwrap();
    let r = nalgebra::DMatrix::from_row_slice(
        3,
        3,
        &[-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0],
    );
    let glide = spaceform::Isometry::flat(
        flat,
        r,
        nalgebra::DVector::from_row_slice(&[0.0, 0.0, 0.5]),
    )
    .unwrap();
    let group = DiscreteGroup::new(
        flat,
        spaceform::GroupKind::AffineFlat,
        vec![glide],
        Some(12),
    )
    .unwrap();
    let form = verify_space_form(flat, group, 0.5, None)
        .unwrap()
        .into_form()
        .expect("free screw action verifies");
    let x = flat.flat_point(&[0.1, 0.2, 0.0]).unwrap();
    assert!(matches!(
        form.quotient_distance(&x, &x),
        Err(spaceform::Error::UnsupportedGroupKind { .. })
    ));
}

#[test]
fn hyperbolic_quotients_are_window_limited() {
    // The cyclic group of a translation along a geodesic of H^3 cannot
    // close, but the form is still accepted with window semantics, and
    // window operations work; the volume does not exist.
    let hyp = ModelSpace::hyperbolic(3, 1.0).unwrap();
    let t = 1.5f64;
    let (ch, sh) = (t.cosh(), t.sinh());
    let m = nalgebra::DMatrix::from_row_slice(
        4,
        4,
        &[
            ch, sh, 0.0, 0.0, sh, ch, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ],
    );
    let g = spaceform::Isometry::from_matrix(hyp, m).unwrap();
    let group =
        DiscreteGroup::new(hyp, spaceform::GroupKind::Finite, vec![g.clone()], Some(3)).unwrap();
    assert!(group.enumerate().is_err(), "closure must fail at the cutoff");

    let group =
        DiscreteGroup::new(hyp, spaceform::GroupKind::Finite, vec![g], Some(3)).unwrap();
    let form = verify_space_form(hyp, group, t, None)
        .unwrap()
        .into_form()
        .expect("hyperbolic form accepted with window semantics");
    // Points a geodesic step apart are identified within the window.
    let x = hyp.point_from(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    let y = hyp.point_from(&[ch, sh, 0.0, 0.0]).unwrap();
    assert!(form.quotient_distance(&x, &y).unwrap() < 1e-9);
    assert!(matches!(
        form.volume(),
        Err(spaceform::Error::InfiniteVolume { .. })
    ));
}
