//! Property tests over randomly generated points and group elements.

use nalgebra::DVector;
use proptest::prelude::*;
use spaceform::quat::Quaternion;
use spaceform::{
    left_twist, right_twist, verify_space_form, DiscreteGroup, ModelSpace, SpaceForm,
};

fn z3_form() -> SpaceForm {
    let flat = ModelSpace::flat(3).unwrap();
    let group = DiscreteGroup::integer_lattice(flat, 8).unwrap();
    verify_space_form(flat, group, 1.0, None)
        .unwrap()
        .into_form()
        .unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64).prop_filter("finite", |x| x.is_finite())
}

fn unit_quaternion() -> impl Strategy<Value = Quaternion> {
    [coord(), coord(), coord(), coord()]
        .prop_filter_map("nonzero", |c| {
            Quaternion::new(c[0], c[1], c[2], c[3]).normalized().ok()
        })
}

fn sphere_point(space: ModelSpace) -> impl Strategy<Value = spaceform::AmbientPoint> {
    [coord(), coord(), coord(), coord()].prop_filter_map("nonzero", move |c| {
        let v = DVector::from_row_slice(&c);
        let n = v.norm();
        if n < 1e-3 {
            return None;
        }
        space.point(v / n).ok()
    })
}

proptest! {
    #[test]
    fn quotient_distance_never_exceeds_distance(
        x in [coord(), coord(), coord()],
        y in [coord(), coord(), coord()],
    ) {
        let form = z3_form();
        let space = *form.space();
        let px = space.flat_point(&x).unwrap();
        let py = space.flat_point(&y).unwrap();
        let dq = form.quotient_distance(&px, &py).unwrap();
        let d = space.distance(&px, &py).unwrap();
        prop_assert!(dq <= d + 1e-12);
    }

    #[test]
    fn reduce_is_idempotent_and_orbit_stable(p in [coord(), coord(), coord()]) {
        let form = z3_form();
        let space = *form.space();
        let x = space.flat_point(&p).unwrap();
        let r1 = form.reduce(&x).unwrap();
        let r2 = form.reduce(r1.rep()).unwrap();
        prop_assert!(r1.rep().approx_eq(r2.rep(), 1e-12));
        // A deck translate reduces to the same representative.
        let moved = space
            .flat_point(&[p[0] + 2.0, p[1] - 1.0, p[2]])
            .unwrap();
        let r3 = form.reduce(&moved).unwrap();
        prop_assert!(r1.rep().approx_eq(r3.rep(), 1e-9));
    }

    #[test]
    fn twists_commute_and_preserve_distances(
        u in unit_quaternion(),
        v in unit_quaternion(),
        seed_x in [coord(), coord(), coord(), coord()],
    ) {
        let s3 = ModelSpace::spherical(3, 1.0).unwrap();
        let l = left_twist(u).unwrap();
        let r = right_twist(v).unwrap();
        let lr = l.compose(&r).unwrap();
        let rl = r.compose(&l).unwrap();
        prop_assert!(lr.approx_eq(&rl, 1e-12));

        let n = DVector::from_row_slice(&seed_x).norm();
        prop_assume!(n > 1e-3);
        let x = s3.point(DVector::from_row_slice(&seed_x) / n).unwrap();
        let y = s3.base_point();
        let before = s3.distance(&x, &y).unwrap();
        let after = s3
            .distance(&lr.apply(&x).unwrap(), &lr.apply(&y).unwrap())
            .unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn spherical_distance_is_a_metric(
        seed in prop::array::uniform4(coord()),
        seed2 in prop::array::uniform4(coord()),
        seed3 in prop::array::uniform4(coord()),
    ) {
        let s3 = ModelSpace::spherical(3, 1.0).unwrap();
        let strategy_inputs = [seed, seed2, seed3];
        let mut pts = Vec::new();
        for s in strategy_inputs {
            let v = DVector::from_row_slice(&s);
            let n = v.norm();
            prop_assume!(n > 1e-3);
            pts.push(s3.point(v / n).unwrap());
        }
        let dxy = s3.distance(&pts[0], &pts[1]).unwrap();
        let dyz = s3.distance(&pts[1], &pts[2]).unwrap();
        let dxz = s3.distance(&pts[0], &pts[2]).unwrap();
        prop_assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&dxy));
        prop_assert_eq!(dxy, s3.distance(&pts[1], &pts[0]).unwrap());
        prop_assert!(dxz <= dxy + dyz + 1e-9);
    }

    #[test]
    fn enumerated_twist_groups_act_freely(q in unit_quaternion()) {
        // Any non-identity left twist is fixed-point free on S^3.
        prop_assume!(!q.approx_eq(Quaternion::new(1.0, 0.0, 0.0, 0.0), 1e-6));
        let t = left_twist(q).unwrap();
        prop_assert!(!t.has_fixed_point());
    }

    #[test]
    fn geodesic_round_trip(p in prop::array::uniform4(coord()), t in -1.0..1.0f64) {
        let s3 = ModelSpace::spherical(3, 1.0).unwrap();
        let v = DVector::from_row_slice(&p);
        let n = v.norm();
        prop_assume!(n > 1e-3);
        let base = s3.point(v / n).unwrap();
        let frame = s3.tangent_frame(&base).unwrap();
        let tv = s3.tangent(&base, frame[0].clone()).unwrap();
        let q = s3.geodesic_point(&tv, t);
        prop_assert!((s3.distance(&base, &q).unwrap() - t.abs()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_points_strategy_is_consistent(p in sphere_point(ModelSpace::spherical(3, 1.0).unwrap())) {
        let s3 = ModelSpace::spherical(3, 1.0).unwrap();
        prop_assert!(s3.point(p.coords().clone()).is_ok());
    }
}
