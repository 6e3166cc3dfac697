use chansurf::conformal::*;
use chansurf::curve::CenterCurve;
use chansurf::grid::{Axis, StencilOrder};
use chansurf::legendre::*;
use chansurf::lie::*;
use chansurf::transforms::verify_ribaucour;

fn line(x: f64, speed: f64, n: usize) -> ConformalCurve {
    let c = CenterCurve::Line {
        point: [x, 0.0, 0.0],
        direction: [0.0, 0.0, speed],
    };
    ConformalCurve::new(&c, Axis::closed(-1.0, 1.0, n)).unwrap()
}

fn circle(n: usize) -> ConformalCurve {
    let c = CenterCurve::Circle {
        center: [0.0; 3],
        radius: 2.0,
    };
    ConformalCurve::new(&c, Axis::periodic(0.0, std::f64::consts::TAU, n)).unwrap()
}

#[test]
fn curve_lift_is_point_sphere_curve() {
    let c = circle(64);
    assert!(c.p_residual() == 0.0);
    for i in 0..64 {
        let v = c.lift.value(i);
        assert_eq!(v[5], 0.0);
        assert!(nullity(&v) <= 1e-14);
        assert!((c.gamma[i].norm() - 2.0).abs() <= 1e-14);
    }
    let g = curve_legendre_lift(&c, 32, StencilOrder::Fourth).unwrap();
    assert!(validate_legendre(&g, &LegendreTolerances::default()).pass);
    // every element contains the point sphere of the curve
    for i in (0..64).step_by(8) {
        for j in 0..32 {
            let p = surface_point(g.frame(i, j)).unwrap();
            assert!((p - c.gamma[i]).amax() <= 1e-12);
        }
    }
}

#[test]
fn stationary_curve_rejected() {
    let pts = vec![Vec3::new(1.0, 0.0, 0.0); 8];
    assert!(ConformalCurve::from_points(&pts, Axis::closed(0.0, 1.0, 8)).is_err());
}

#[test]
fn tube_of_line_is_unit_cylinder() {
    let c = line(0.0, 1.0, 33);
    let g = tube(&c, 1.0, 32, StencilOrder::Fourth).unwrap();
    for i in 0..33 {
        for j in 0..32 {
            let p = surface_point(g.frame(i, j)).unwrap();
            assert!((p.x.hypot(p.y) - 1.0).abs() <= 1e-10);
        }
    }
    let cd = curvature_data(&g).unwrap();
    assert!(is_channel(&g, &cd, None).unwrap().circular.includes_dir1());
    assert!(tube(&c, 0.0, 32, StencilOrder::Fourth).is_err());
}

#[test]
fn tube_of_circle_is_standard_torus() {
    let c = circle(64);
    let g = tube(&c, 1.0, 32, StencilOrder::Fourth).unwrap();
    for i in 0..64 {
        for j in 0..32 {
            let p = surface_point(g.frame(i, j)).unwrap();
            let d = (p.x.hypot(p.y) - 2.0).powi(2) + p.z * p.z;
            assert!((d - 1.0).abs() <= 1e-10);
        }
    }
    // radius 2 collapses the inner equator onto the axis
    assert!(tube(&c, 2.0, 32, StencilOrder::Fourth).is_err());
}

#[test]
fn parallel_transforms_compose_on_tubes() {
    let c = line(0.0, 1.0, 17);
    let (a, b) = (0.3, 0.5);
    let shifted = tube(&c, a, 16, StencilOrder::Second)
        .unwrap()
        .transformed(&parallel_transform_matrix(b));
    let direct = tube(&c, a + b, 16, StencilOrder::Second).unwrap();
    for i in 0..17 {
        for j in 0..16 {
            let (e1, e2) = (
                shifted.element(i, j).unwrap(),
                direct.element(i, j).unwrap(),
            );
            assert!(e1.distance(&e2) <= 1e-12);
        }
    }
}

#[test]
fn ribaucour_check_matches_tube_level() {
    let base = line(0.0, 1.0, 65);
    let tol = 1e-8;
    let partner = line(2.0, 1.0, 65);
    let curve = ribaucour_curve_check(&base, &partner).unwrap();
    assert!(curve.max <= 1e-10);
    for a in [0.3, 1.0] {
        let t = verify_ribaucour(&base.tube_curve(a), &partner.tube_curve(a)).unwrap();
        for (x, y) in curve.per_sample.iter().zip(&t.per_sample) {
            assert!((x - y).abs() <= tol);
        }
    }
    // the span distance is not a Lie invariant, so off the Ribaucour locus
    // only the verdict is compared
    let mismatched = line(2.0, 2.0, 65);
    let curve = ribaucour_curve_check(&base, &mismatched).unwrap();
    assert!(curve.max >= 1e-2);
    for a in [0.3, 1.0] {
        let t = verify_ribaucour(&base.tube_curve(a), &mismatched.tube_curve(a)).unwrap();
        for (x, y) in curve.per_sample.iter().zip(&t.per_sample) {
            assert_eq!(*x <= tol, *y <= tol);
        }
    }
}

#[test]
fn circle_congruence_of_parallel_lines() {
    let (c1, c2) = (line(0.0, 1.0, 33), line(2.0, 1.0, 33));
    let cc = circle_congruence(&c1, &c2, 1e-8).unwrap();
    assert_eq!(cc.len(), 33);
    for i in 0..33 {
        let u = c1.axis().coord(i);
        assert!(cc.membership(i) <= 1e-8);
        let [t1, t2] = cc.tangency(i).unwrap();
        assert!(t1 <= 1e-4 && t2 <= 1e-4);
        for k in 0..12 {
            let sphere = cc.sphere(i, k as f64 * 0.5);
            assert!(nullity(sphere.rep()) <= 1e-12);
            assert!(sphere.rep()[5].abs() <= 1e-12);
            match cc.point(i, k as f64 * 0.5).unwrap() {
                // circle of radius 1 about (1, 0, u) in the xz-plane
                EuclideanSphere::Point { position: p } => {
                    assert!(p.y.abs() <= 1e-12);
                    assert!(((p.x - 1.0).hypot(p.z - u) - 1.0).abs() <= 1e-12);
                }
                other => panic!("{other}"),
            }
        }
    }
    assert!(circle_congruence(&c1, &line(2.0, 2.0, 33), 1e-8).is_err());
}

#[test]
fn circle_congruence_of_concentric_circles() {
    // circles of radius 1 and 2 about the origin, matched by angle
    let small = CenterCurve::Circle {
        center: [0.0; 3],
        radius: 1.0,
    };
    let axis = Axis::periodic(0.0, std::f64::consts::TAU, 32);
    let (c1, c2) = (ConformalCurve::new(&small, axis).unwrap(), circle(32));
    let cc = circle_congruence(&c1, &c2, 1e-8).unwrap();
    for i in 0..32 {
        let [t1, t2] = cc.tangency(i).unwrap();
        assert!(t1 <= 1e-4 && t2 <= 1e-4, "{t1} {t2}");
        assert!(cc.membership(i) <= 1e-8);
    }
}

#[test]
fn conformal_geometry_override() {
    let p = LieVec::from_column_slice(&[0.2, 0.0, 0.0, 0.3, 0.0, 1.0]);
    let c = line(0.0, 1.0, 17).with_p(&p).unwrap();
    assert!(c.p_residual() <= 1e-12);
    assert!((inner(&c.p_vec, &c.p_vec) + 1.0).abs() <= 1e-12);
    for i in 0..17 {
        assert!(nullity(&c.lift.value(i)) <= 1e-12);
    }
    // Ribaucour checks are unchanged by the Lie sphere transformation
    let d = line(2.0, 1.0, 17).with_p(&p).unwrap();
    assert!(ribaucour_curve_check(&c, &d).unwrap().max <= 1e-10);
    assert!(ribaucour_curve_check(&c, &line(2.0, 1.0, 17)).is_err());
    let spacelike = LieVec::from_column_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(line(0.0, 1.0, 17).with_p(&spacelike).is_err());
}
