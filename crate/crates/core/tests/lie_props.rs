use proptest::prelude::*;

use chansurf::conformal::{isotropy_lift, isotropy_projection, MinkowskiPoint};
use chansurf::lie::*;
use chansurf::subspace::{Subspace, SIG_21};

fn vec3() -> impl Strategy<Value = Vec3> {
    (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit3() -> impl Strategy<Value = Vec3> {
    vec3()
        .prop_filter("nonzero", |v| v.norm() > 1e-3)
        .prop_map(|v| v.normalize())
}

fn lievec() -> impl Strategy<Value = LieVec> {
    proptest::collection::vec(-5.0f64..5.0, 6).prop_map(|v| LieVec::from_column_slice(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sphere_roundtrip(c in vec3(), r in prop_oneof![-5.0f64..-0.01, 0.01f64..5.0]) {
        match project_to_euclidean(&sphere_lift(&c, r)).unwrap() {
            EuclideanSphere::Sphere { center, radius } => {
                prop_assert!((center - c).amax() <= 1e-12 * c.amax().max(1.0));
                prop_assert!((radius - r).abs() <= 1e-12 * c.norm_squared().max(1.0));
            }
            other => prop_assert!(false, "got {other}"),
        }
    }

    #[test]
    fn point_roundtrip(c in vec3()) {
        match project_to_euclidean(&sphere_lift(&c, 0.0)).unwrap() {
            EuclideanSphere::Point { position } => prop_assert!((position - c).amax() <= 1e-12 * c.amax().max(1.0)),
            other => prop_assert!(false, "got {other}"),
        }
    }

    #[test]
    fn plane_roundtrip(n in unit3(), d in -10.0f64..10.0) {
        match project_to_euclidean(&plane_lift(&n, d).unwrap()).unwrap() {
            EuclideanSphere::Plane { normal, offset } => {
                prop_assert!((normal - n).amax() <= 1e-12);
                prop_assert!((offset - d).abs() <= 1e-12 * d.abs().max(1.0));
            }
            other => prop_assert!(false, "got {other}"),
        }
    }

    #[test]
    fn tangency_identity(c1 in vec3(), c2 in vec3(), r1 in -5.0f64..5.0, r2 in -5.0f64..5.0) {
        let lhs = inner(sphere_lift(&c1, r1).rep(), sphere_lift(&c2, r2).rep());
        let rhs = -((c1 - c2).norm_squared() - (r1 - r2).powi(2)) / 2.0;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + c1.norm_squared() + c2.norm_squared()));
    }

    #[test]
    fn wedge_is_skew_and_antisymmetric(a in lievec(), b in lievec(), c in lievec(), d in lievec()) {
        let w = wedge(&a, &b);
        let scale = a.norm() * b.norm() * c.norm() * d.norm();
        prop_assert!((inner(&w.apply(&c), &d) + inner(&c, &w.apply(&d))).abs() <= 1e-12 * scale);
        prop_assert!((w.apply(&c) + wedge(&b, &a).apply(&c)).amax() <= 1e-12 * scale);
        prop_assert!(wedge(&a, &a).apply(&c).amax() <= 1e-12 * scale);
    }

    #[test]
    fn curly_wedge_is_symmetric(v in proptest::collection::vec(lievec(), 4)) {
        let a = curly_wedge(&v[0], &v[1], &v[2], &v[3]);
        let b = curly_wedge(&v[2], &v[3], &v[0], &v[1]);
        prop_assert!((a.matrix() - b.matrix()).amax() <= 1e-10);
    }

    #[test]
    fn parallel_transform_is_lie_and_composes(v in lievec(), w in lievec(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let pa = parallel_transform_matrix(a);
        let scale = v.norm() * w.norm() * (1.0 + a * a);
        prop_assert!((inner(&(pa * v), &(pa * w)) - inner(&v, &w)).abs() <= 1e-12 * scale);
        let composed = parallel_transform_matrix(a) * parallel_transform_matrix(b);
        prop_assert!((composed - parallel_transform_matrix(a + b)).amax() <= 1e-12 * (1.0 + (a + b).powi(2)));
    }

    #[test]
    fn parallel_transform_grows_radius(c in vec3(), r in -3.0f64..3.0, a in -3.0f64..3.0) {
        let p = parallel_transform(&sphere_lift(&c, r), a);
        let q = isotropy_projection(&p);
        if (r + a).abs() > 1e-6 {
            let q = q.unwrap();
            prop_assert!((q.c - c).amax() <= 1e-9 * c.amax().max(1.0));
            prop_assert!((q.r - (r + a)).abs() <= 1e-9 * c.norm_squared().max(1.0));
        }
    }

    #[test]
    fn isotropy_roundtrip(c in vec3(), r in -5.0f64..5.0) {
        let q = MinkowskiPoint { c, r };
        let back = isotropy_projection(&isotropy_lift(&q)).unwrap();
        prop_assert!((back.c - c).amax() <= 1e-12 * c.amax().max(1.0));
        prop_assert!((back.r - r).abs() <= 1e-12 * c.norm_squared().max(1.0));
    }

    #[test]
    fn lightcone_circle_is_null(cs in proptest::collection::vec(vec3(), 3), rs in proptest::collection::vec(0.1f64..2.0, 3), t in 0.0f64..6.3) {
        let span = Subspace::span(&[0, 1, 2].map(|k| *sphere_lift(&cs[k], rs[k]).rep()));
        if let Ok(span) = span {
            if span.dim() == 3 && span.signature() == SIG_21 {
                let p = span.lightcone_circle(t).unwrap();
                prop_assert!(nullity(p.rep()) <= 1e-10);
                prop_assert!(span.membership_residual(p.rep()) <= 1e-10);
            }
        }
    }
}

#[test]
fn isotropy_examples() {
    let q = isotropy_projection(&sphere_lift(&Vec3::new(1.0, 2.0, 3.0), 4.0)).unwrap();
    assert!((q.c - Vec3::new(1.0, 2.0, 3.0)).amax() <= 1e-14 && (q.r - 4.0).abs() <= 1e-14);
    let q = isotropy_projection(&sphere_lift(&Vec3::new(-1.0, 0.5, 0.0), 0.0)).unwrap();
    assert_eq!(q.r, 0.0);
    assert!(isotropy_projection(&plane_lift(&Vec3::x(), 1.0).unwrap()).is_err());
    let inf = LiePoint::new(LieVec::from_column_slice(&[0.0, 0.0, 0.0, -1.0, 1.0, 0.0])).unwrap();
    assert!(isotropy_projection(&inf).is_err());
}

#[test]
fn minkowski_interval_detects_contact() {
    let a = MinkowskiPoint {
        c: Vec3::zeros(),
        r: 1.0,
    };
    let b = MinkowskiPoint {
        c: Vec3::new(3.0, 0.0, 0.0),
        r: -2.0,
    };
    assert!(a.interval(&b).abs() <= 1e-14);
    assert!(inner(isotropy_lift(&a).rep(), isotropy_lift(&b).rep()).abs() <= 1e-14);
}
