//! Analytic reference surfaces and sphere curves used by tests, demos and benches.

use std::f64::consts::TAU;

use crate::curve::{sphere_curve, CenterCurve, RadiusProfile, SphereCurve};
use crate::error::Result;
use crate::grid::{Axis, LegendreGrid, ParamGrid, StencilOrder};
use crate::legendre::make_legendre_from_surface;
use crate::lie::Vec3;

/// Tube spheres of radius `r` along the z-axis, `u` in `[a, b]`.
pub fn line_tube_curve(a: f64, b: f64, n: usize, r: f64) -> Result<SphereCurve> {
    sphere_curve(
        &CenterCurve::Line {
            point: [0.0; 3],
            direction: [0.0, 0.0, 1.0],
        },
        &RadiusProfile::Constant(r),
        Axis::closed(a, b, n),
    )
}

/// Tube spheres of radius `r` along the circle of radius `big_r` in the xy-plane.
pub fn circle_tube_curve(n: usize, big_r: f64, r: f64) -> Result<SphereCurve> {
    sphere_curve(
        &CenterCurve::Circle {
            center: [0.0; 3],
            radius: big_r,
        },
        &RadiusProfile::Constant(r),
        Axis::periodic(0.0, TAU, n),
    )
}

/// Tube spheres along the helix `(cos u, sin u, pitch u)`.
pub fn helix_tube_curve(a: f64, b: f64, n: usize, pitch: f64, r: f64) -> Result<SphereCurve> {
    sphere_curve(
        &CenterCurve::Helix { radius: 1.0, pitch },
        &RadiusProfile::Constant(r),
        Axis::closed(a, b, n),
    )
}

fn surface(
    u: Axis,
    t: Axis,
    order: StencilOrder,
    f: impl Fn(f64, f64) -> (Vec3, Vec3),
) -> Result<LegendreGrid> {
    let grid = ParamGrid::new(u, t, order)?;
    let mut pts = Vec::with_capacity(grid.len());
    let mut nrm = Vec::with_capacity(grid.len());
    for i in 0..u.n {
        for j in 0..t.n {
            let (p, n) = f(u.coord(i), t.coord(j));
            pts.push(p);
            nrm.push(n.normalize());
        }
    }
    make_legendre_from_surface(&pts, &nrm, grid)
}

/// Unit cylinder `(cos t, sin t, u)` with outward normal.
pub fn cylinder_surface(
    a: f64,
    b: f64,
    n_u: usize,
    n_t: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    surface(
        Axis::closed(a, b, n_u),
        Axis::periodic(0.0, TAU, n_t),
        order,
        |u, t| {
            let (s, c) = t.sin_cos();
            (Vec3::new(c, s, u), Vec3::new(c, s, 0.0))
        },
    )
}

/// Torus with center-circle radius `big_r` and tube radius `r`; `u` runs along the center circle.
pub fn torus_surface(
    big_r: f64,
    r: f64,
    n_u: usize,
    n_t: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    surface(
        Axis::periodic(0.0, TAU, n_u),
        Axis::periodic(0.0, TAU, n_t),
        order,
        |u, t| {
            let (su, cu) = u.sin_cos();
            let (st, ct) = t.sin_cos();
            let n = Vec3::new(ct * cu, ct * su, st);
            (Vec3::new(big_r * cu, big_r * su, 0.0) + n * r, n)
        },
    )
}

/// Unit sphere without the polar caps, `u` the polar angle in `[a, b]`.
pub fn round_sphere_surface(
    a: f64,
    b: f64,
    n_u: usize,
    n_t: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    surface(
        Axis::closed(a, b, n_u),
        Axis::periodic(0.0, TAU, n_t),
        order,
        |u, t| {
            let (st, ct) = t.sin_cos();
            let p = Vec3::new(u.sin() * ct, u.sin() * st, u.cos());
            (p, p)
        },
    )
}

/// Triaxial ellipsoid `x^2/a + y^2/b + z^2/c = 1` (`a > b > c` squared
/// semi-axes) on a patch of curvature-line coordinates `(alpha, beta)`.
pub fn ellipsoid_surface(
    axes: [f64; 3],
    alpha: (f64, f64),
    beta: (f64, f64),
    n: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    let [a, b, c] = axes;
    surface(
        Axis::closed(alpha.0, alpha.1, n),
        Axis::closed(beta.0, beta.1, n),
        order,
        move |al, be| {
            let v = b + (a - b) * be.sin().powi(2);
            let x = a.sqrt() * be.cos() * (1.0 - (b - c) * al.sin().powi(2) / (a - c)).sqrt();
            let y = b.sqrt() * al.cos() * be.sin();
            let z = c.sqrt() * al.sin() * ((v - c) / (a - c)).sqrt();
            (Vec3::new(x, y, z), Vec3::new(x / a, y / b, z / c))
        },
    )
}
