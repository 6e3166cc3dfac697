use std::f64::consts::TAU;

use chansurf::channel::{envelope, VChoice};
use chansurf::grid::{Axis, Frame, LegendreGrid, ParamGrid, StencilOrder};
use chansurf::legendre::*;
use chansurf::lie::*;
use chansurf::surfaces::*;

fn cylinder_envelope(n_u: usize, n_t: usize, order: StencilOrder) -> LegendreGrid {
    let s = line_tube_curve(-1.0, 1.0, n_u, 1.0).unwrap();
    envelope(&s, n_t, VChoice::Osculating, order).unwrap()
}

#[test]
fn cylinder_envelope_points_at_unit_distance() {
    let g = cylinder_envelope(64, 64, StencilOrder::Second);
    let axis = g.grid.u;
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let p = surface_point(g.frame(i, j)).unwrap();
            assert!((p.x.hypot(p.y) - 1.0).abs() <= 1e-8, "({i},{j}) {p:?}");
            assert!((p.z - axis.coord(i)).abs() <= 1e-12);
        }
    }
    assert!(validate_legendre(&g, &LegendreTolerances::default()).pass);
}

#[test]
fn cylinder_point_sphere_worked_example() {
    let g = cylinder_envelope(16, 16, StencilOrder::Second);
    let theta = g.grid.theta;
    for j in 0..g.n_theta() {
        let p = surface_point(g.frame(5, j)).unwrap();
        let t = theta.coord(j);
        let expect = Vec3::new(-t.cos(), -t.sin(), g.grid.u.coord(5));
        assert!((p - expect).amax() <= 1e-12, "{p:?} vs {expect:?}");
    }
}

#[test]
fn contact_residual_converges_at_second_order() {
    let residual = |n: usize| {
        let g = cylinder_envelope(n, n - 1, StencilOrder::Second);
        validate_legendre(&g, &LegendreTolerances::default()).contact
    };
    let r: Vec<f64> = [33, 65, 129].iter().map(|&n| residual(n)).collect();
    for w in r.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "ratios from {r:?}");
    }
}

#[test]
fn analytic_surfaces_validate() {
    let cyl = cylinder_surface(-1.0, 1.0, 32, 32, StencilOrder::Second).unwrap();
    assert!(validate_legendre(&cyl, &LegendreTolerances::default()).pass);
    let torus = torus_surface(2.0, 1.0, 64, 64, StencilOrder::Second).unwrap();
    let rep = validate_legendre(&torus, &LegendreTolerances::default());
    assert!(rep.pass && rep.immersion > 0.1, "{rep:?}");
}

#[test]
fn constant_grid_fails_immersion() {
    let grid = ParamGrid::new(
        Axis::closed(0.0, 1.0, 8),
        Axis::closed(0.0, 1.0, 8),
        StencilOrder::Second,
    )
    .unwrap();
    let f = Frame::normalized(
        *sphere_lift(&Vec3::zeros(), 1.0).rep(),
        *plane_lift(&Vec3::x(), -1.0).unwrap().rep(),
    );
    let g = LegendreGrid::new(grid, vec![f; 64]).unwrap();
    let rep = validate_legendre(&g, &LegendreTolerances::default());
    assert!(!rep.pass);
    assert!(rep.immersion <= 1e-12);
}

#[test]
fn cylinder_curvature_spheres() {
    let g = cylinder_envelope(33, 32, StencilOrder::Fourth);
    let cd = curvature_data(&g).unwrap();
    for i in 0..g.n_u() {
        let tube = sphere_lift(&Vec3::new(0.0, 0.0, g.grid.u.coord(i)), 1.0);
        for j in 0..g.n_theta() {
            let p = cd.at(i, j);
            assert!(!p.umbilic);
            assert!(projective_distance(&p.s1, tube.rep()) <= 1e-6, "({i},{j})");
            match project_to_euclidean(&cd.s2_point(i, j)).unwrap() {
                EuclideanSphere::Plane { normal, offset } => {
                    assert!(normal.z.abs() <= 1e-6 && (offset.abs() - 1.0).abs() <= 1e-6);
                }
                other => panic!("s2 is {other}"),
            }
            for k in 1..=2 {
                assert!(curvature_sphere_residual(&g, &cd, k, i, j).unwrap() <= 1e-6);
            }
        }
    }
}

#[test]
fn round_sphere_is_all_umbilic() {
    let g = round_sphere_surface(0.3, 2.8, 32, 32, StencilOrder::Second).unwrap();
    let cd = curvature_data(&g).unwrap();
    assert!(cd.all_umbilic());
}

#[test]
fn channel_detection() {
    let helix = envelope(
        &helix_tube_curve(0.0, 4.0, 64, 0.5, 0.3).unwrap(),
        64,
        VChoice::Osculating,
        StencilOrder::Second,
    )
    .unwrap();
    let torus = torus_surface(2.0, 1.0, 64, 64, StencilOrder::Second).unwrap();
    let ellipsoid = ellipsoid_surface(
        [4.0, 2.0, 1.0],
        (0.2, 1.2),
        (0.4, 1.3),
        64,
        StencilOrder::Second,
    )
    .unwrap();
    for (g, expect) in [
        (&helix, CircularDir::Dir1),
        (&torus, CircularDir::Both),
        (&ellipsoid, CircularDir::None),
    ] {
        let cd = curvature_data(g).unwrap();
        let rep = is_channel(g, &cd, None).unwrap();
        assert_eq!(rep.circular, expect, "{rep:?}");
        for k in 0..2 {
            assert_eq!(
                rep.direct[k] <= rep.tol,
                rep.cyclide[k] <= rep.tol,
                "{rep:?}"
            );
        }
    }
}

fn max_n(n: usize) -> (f64, f64) {
    let g = torus_surface(2.0, 1.0, n, n, StencilOrder::Fourth).unwrap();
    let cd = curvature_data(&g).unwrap();
    let split = lie_cyclide_split(&g, &cd);
    assert!(split.failures.is_empty());
    assert!(split.cross_inner() <= 1e-8);
    let mut m: f64 = 0.0;
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            for k in 1..=2 {
                m = m.max(split.n_along(i, j, cd.at(i, j).dir(k)).unwrap().norm());
            }
        }
    }
    (m, grid_tolerance(g.grid.h_max()))
}

#[test]
fn torus_lie_cyclides_are_constant() {
    let (coarse, tol) = max_n(64);
    let (fine, _) = max_n(128);
    assert!(coarse <= tol, "{coarse} > {tol}");
    assert!(coarse / fine >= 4.0, "{coarse} -> {fine}");
}

#[test]
fn spherical_lines() {
    let torus = torus_surface(2.0, 1.0, 32, 32, StencilOrder::Second).unwrap();
    for i in [0, 7, 20] {
        assert!(
            spherical_line_residual(&torus, GridLine::Theta(i))
                .unwrap()
                .residual
                <= 1e-8
        );
        assert!(
            spherical_line_residual(&torus, GridLine::U(i))
                .unwrap()
                .residual
                <= 1e-8
        );
    }
    // a curvature line of the ellipsoid is not spherical
    let ell = ellipsoid_surface(
        [4.0, 2.0, 1.0],
        (0.2, 1.2),
        (0.4, 1.3),
        32,
        StencilOrder::Second,
    )
    .unwrap();
    assert!(
        spherical_line_residual(&ell, GridLine::Theta(16))
            .unwrap()
            .residual
            >= 1e-4
    );
    assert!(spherical_line_residual(&ell, GridLine::Theta(99)).is_err());
}

#[test]
fn point_sphere_of_special_elements() {
    // zero tube: the point sphere is the curve point itself
    let c = sphere_lift(&Vec3::new(1.0, 2.0, 3.0), 0.0);
    let f = Frame::normalized(*c.rep(), *plane_lift(&Vec3::x(), 1.0).unwrap().rep());
    assert!((surface_point(&f).unwrap() - Vec3::new(1.0, 2.0, 3.0)).amax() <= 1e-12);
    // two parallel planes meet only at infinity
    let inf = LieVec::from_column_slice(&[0.0, 0.0, 0.0, -1.0, 1.0, 0.0]);
    let f = Frame::normalized(inf, *plane_lift(&Vec3::x(), 1.0).unwrap().rep());
    assert!(point_sphere_of(&f).is_none());
}

#[test]
fn periodic_theta_spans_full_circle() {
    let g = cylinder_envelope(8, 12, StencilOrder::Second);
    assert!(g.grid.theta.periodic);
    assert!((g.grid.theta.h * 12.0 - TAU).abs() <= 1e-12);
}
