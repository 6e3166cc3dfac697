//! Curves in conformal 3-space as sphere curves orthogonal to a timelike
//! vector `p`, their tubes, Ribaucour pairs and circle congruences, and the
//! isotropy projection to R^{3,1}.

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::channel::{envelope, VChoice};
use crate::curve::{sphere_curve, CenterCurve, RadiusProfile, SphereCurve, EPS_REG};
use crate::error::{Error, Result};
use crate::grid::{Axis, LegendreGrid, StencilOrder};
use crate::legendre::{surface_point, validate_legendre, LegendreTolerances};
use crate::lie::{
    basis, inner, parallel_transform_matrix, project_to_euclidean, sphere_lift, EuclideanSphere,
    LiePoint, LieVec, Vec3,
};
use crate::subspace::{circle_parameter, circle_point, Subspace};
use crate::transforms::{verify_ribaucour, RibaucourResidual};

/// A curve in the conformal geometry `<p>^perp`.
#[derive(Debug, Clone)]
pub struct ConformalCurve {
    pub gamma: Vec<Vec3>,
    /// Unit timelike `p` (default `e6`).
    pub p_vec: LieVec,
    /// Lie sphere transformation taking `e6` to `p_vec`.
    pub frame_map: Matrix6<f64>,
    /// The curve's lift, orthogonal to `p_vec`.
    pub lift: SphereCurve,
}

/// Reflection of R^{4,2} taking `e6` to the unit timelike `p` (up to sign of `p`).
fn reflection_to(p: &LieVec) -> Result<(Matrix6<f64>, LieVec)> {
    let n = inner(p, p);
    if n >= -1e-12 {
        return Err(Error::Invalid(format!("p must be timelike, (p,p) = {n:e}")));
    }
    let e6 = basis(5);
    let mut ph = p / (-n).sqrt();
    if inner(&e6, &ph) > 0.0 {
        ph = -ph;
    }
    let w = e6 - ph;
    let ww = inner(&w, &w);
    if w.norm() < 1e-12 {
        return Ok((Matrix6::identity(), e6));
    }
    let (w, ww, ph) = if ww.abs() < 1e-8 {
        // e6 - p null: reflect onto -p instead
        let ph = -ph;
        let w = e6 - ph;
        (w, inner(&w, &w), ph)
    } else {
        (w, ww, ph)
    };
    let wl = crate::lie::lower(&w);
    let m = Matrix6::identity() - (w * wl.transpose()) * (2.0 / ww);
    Ok((m, ph))
}

impl ConformalCurve {
    /// Point-sphere curve of a preset center curve, with `p = e6`.
    pub fn new(center: &CenterCurve, axis: Axis) -> Result<Self> {
        let lift = sphere_curve(center, &RadiusProfile::Constant(0.0), axis)?;
        lift.check_regular(EPS_REG)?;
        let gamma = (0..axis.n).map(|i| center.position(&axis, i)).collect();
        Ok(ConformalCurve {
            gamma,
            p_vec: basis(5),
            frame_map: Matrix6::identity(),
            lift,
        })
    }

    /// Curve given by samples.
    pub fn from_points(points: &[Vec3], axis: Axis) -> Result<Self> {
        let center = CenterCurve::Polyline {
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
        };
        Self::new(&center, axis)
    }

    /// The same curve read in the conformal geometry `<p>^perp`.
    pub fn with_p(mut self, p: &LieVec) -> Result<Self> {
        let (m, ph) = reflection_to(p)?;
        self.lift = self
            .lift
            .transformed(m * self.frame_map.try_inverse().expect("reflection"));
        self.frame_map = m;
        self.p_vec = ph;
        Ok(self)
    }

    pub fn axis(&self) -> &Axis {
        self.lift.axis()
    }

    /// Max `|(lift, p)|` relative to the lift size.
    pub fn p_residual(&self) -> f64 {
        (0..self.lift.len())
            .map(|i| {
                let v = self.lift.value(i);
                inner(&v, &self.p_vec).abs() / v.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Parallel transformation by `a` relative to `p`.
    pub fn parallel_map(&self, a: f64) -> Matrix6<f64> {
        let inv = self.frame_map.try_inverse().expect("reflection");
        self.frame_map * parallel_transform_matrix(a) * inv
    }

    /// The sphere curve of the radius-`a` tube.
    pub fn tube_curve(&self, a: f64) -> SphereCurve {
        self.lift.transformed(self.parallel_map(a))
    }
}

/// The curve as a degenerate Legendre map: envelope of its point spheres.
pub fn curve_legendre_lift(
    c: &ConformalCurve,
    n_theta: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    envelope(&c.lift, n_theta, VChoice::Osculating, order)
}

/// Tube of signed radius `a`: the parallel transform of the curve's Legendre lift.
pub fn tube(
    c: &ConformalCurve,
    a: f64,
    n_theta: usize,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    if a == 0.0 {
        return Err(Error::Invalid("tube radius must be nonzero".into()));
    }
    let g = curve_legendre_lift(c, n_theta, order)?.transformed(&c.parallel_map(a));
    let rep = validate_legendre(&g, &LegendreTolerances::default());
    if !rep.pass {
        return Err(Error::degenerate(
            format!(
                "tube of radius {a} is not immersed (immersion {:e}, contact {:e})",
                rep.immersion, rep.contact
            ),
            format!("grid point {:?}", rep.immersion_at),
        ));
    }
    let (ratio, at) = front_regularity(&g)?;
    if ratio < FRONT_TOL {
        return Err(Error::degenerate(
            format!("tube of radius {a} has a singular Euclidean front (area ratio {ratio:e})"),
            format!("grid point {at:?}"),
        ));
    }
    Ok(g)
}

/// Area ratios below this mark a singular front.
const FRONT_TOL: f64 = 1e-6;

/// Smallest `|p_u x p_theta| / max |p_u| |p_theta|` of the Euclidean surface points.
fn front_regularity(g: &LegendreGrid) -> Result<(f64, (usize, usize))> {
    let mut pts = Vec::with_capacity(g.grid.len());
    for (k, f) in g.frames().iter().enumerate() {
        let p = surface_point(f).ok_or_else(|| {
            Error::degenerate(
                "surface point at infinity",
                format!("grid point {:?}", (k / g.n_theta(), k % g.n_theta())),
            )
        })?;
        pts.push(p);
    }
    let gr = &g.grid;
    let mut area = Vec::with_capacity(pts.len());
    let mut scale: f64 = 0.0;
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let pu = gr.d_u(i, j, |a, b| pts[gr.idx(a, b)]);
            let pt = gr.d_theta(i, j, |a, b| pts[gr.idx(a, b)]);
            scale = scale.max(pu.norm() * pt.norm());
            area.push(((i, j), pu.cross(&pt).norm()));
        }
    }
    let (at, min) =
        area.into_iter().fold(
            ((0, 0), f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        );
    Ok((if scale > 0.0 { min / scale } else { 0.0 }, at))
}

/// Ribaucour check for two curves with pointwise correspondence.
pub fn ribaucour_curve_check(
    c1: &ConformalCurve,
    c2: &ConformalCurve,
) -> Result<RibaucourResidual> {
    if (c1.p_vec - c2.p_vec).amax() > 1e-12 {
        return Err(Error::Invalid(
            "curves live in different conformal geometries".into(),
        ));
    }
    verify_ribaucour(&c1.lift, &c2.lift)
}

/// The circle congruence enveloped by a Ribaucour pair of curves:
/// circles `L(span{s1, s1', s2})` through corresponding points.
#[derive(Debug, Clone)]
pub struct CircleCongruence {
    pub spans: Vec<Subspace>,
    frames: Vec<[LieVec; 3]>,
    c1: SphereCurve,
    c2: SphereCurve,
}

/// Builds the circle congruence; rejects pairs failing the Ribaucour check at `tol`.
pub fn circle_congruence(
    c1: &ConformalCurve,
    c2: &ConformalCurve,
    tol: f64,
) -> Result<CircleCongruence> {
    let rib = ribaucour_curve_check(c1, c2)?;
    if let Some((i, r)) = rib.per_sample.iter().enumerate().find(|(_, r)| **r > tol) {
        return Err(Error::Tolerance {
            what: format!("Ribaucour residual at sample {i}"),
            value: *r,
            tol,
        });
    }
    let mut spans = Vec::with_capacity(c1.lift.len());
    let mut frames = Vec::with_capacity(c1.lift.len());
    for i in 0..c1.lift.len() {
        let [a, da, _] = c1.lift.jet_at(i);
        let sp = Subspace::span(&[a, da, c2.lift.value(i)])?;
        frames.push(sp.pseudo_orthonormal_frame()?);
        spans.push(sp);
    }
    Ok(CircleCongruence {
        spans,
        frames,
        c1: c1.lift.clone(),
        c2: c2.lift.clone(),
    })
}

fn euclidean(v: &LieVec) -> Option<Vec3> {
    let w = v[3] + v[4];
    (w.abs() > 1e-12 * v.norm()).then(|| Vec3::new(v[0], v[1], v[2]) / w)
}

impl CircleCongruence {
    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Point sphere of the circle at sample `i`, parameter `theta`.
    pub fn sphere(&self, i: usize, theta: f64) -> LiePoint {
        circle_point(&self.frames[i], theta)
    }

    /// Euclidean point of the circle at sample `i`, parameter `theta`.
    pub fn point(&self, i: usize, theta: f64) -> Result<EuclideanSphere> {
        project_to_euclidean(&self.sphere(i, theta))
    }

    /// Max membership residual of the two curve points in the circle's span.
    pub fn membership(&self, i: usize) -> f64 {
        let sp = &self.spans[i];
        sp.membership_residual(&self.c1.value(i))
            .max(sp.membership_residual(&self.c2.value(i)))
    }

    /// Angles (radians) between the circle tangent at each curve point and the curve tangent.
    pub fn tangency(&self, i: usize) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        for (k, c) in [&self.c1, &self.c2].into_iter().enumerate() {
            let [v, dv, _] = c.jet_at(i);
            let fr = &self.frames[i];
            let t = circle_parameter(fr, &v);
            let (s, co) = t.sin_cos();
            let x = fr[0] * co + fr[1] * s + fr[2];
            let dx = fr[1] * co - fr[0] * s;
            let w = x[3] + x[4];
            let dw = dx[3] + dx[4];
            if w.abs() < 1e-12 * x.norm() {
                return Err(Error::degenerate(
                    "circle point at infinity",
                    format!("sample {i}"),
                ));
            }
            let p = Vec3::new(x[0], x[1], x[2]);
            let dp = Vec3::new(dx[0], dx[1], dx[2]);
            let tangent = (dp * w - p * dw) / (w * w);
            // curve tangent from the point-sphere lift: d/du of x_{1..3} / (x4 + x5)
            let cw = v[3] + v[4];
            let cdw = dv[3] + dv[4];
            let cp = Vec3::new(v[0], v[1], v[2]);
            let cdp = Vec3::new(dv[0], dv[1], dv[2]);
            let curve_t = (cdp * cw - cp * cdw) / (cw * cw);
            out[k] = tangent
                .cross(&curve_t)
                .norm()
                .atan2(tangent.dot(&curve_t).abs());
        }
        Ok(out)
    }

    /// Euclidean points of the circle at sample `i` from `n` parameter values.
    pub fn polyline(&self, i: usize, n: usize) -> Vec<Vec3> {
        (0..n)
            .filter_map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                euclidean(self.sphere(i, t).rep())
            })
            .collect()
    }
}

/// A point of Minkowski space R^{3,1}: a sphere's center and signed radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiPoint {
    pub c: Vec3,
    pub r: f64,
}

impl MinkowskiPoint {
    /// `|c - c'|^2 - (r - r')^2`: zero exactly for spheres in oriented contact.
    pub fn interval(&self, other: &MinkowskiPoint) -> f64 {
        (self.c - other.c).norm_squared() - (self.r - other.r).powi(2)
    }
}

pub fn isotropy_projection(p: &LiePoint) -> Result<MinkowskiPoint> {
    match project_to_euclidean(p)? {
        EuclideanSphere::Sphere { center, radius } => Ok(MinkowskiPoint {
            c: center,
            r: radius,
        }),
        EuclideanSphere::Point { position } => Ok(MinkowskiPoint {
            c: position,
            r: 0.0,
        }),
        other => Err(Error::Invalid(format!("{other} has no image in R^(3,1)"))),
    }
}

pub fn isotropy_lift(q: &MinkowskiPoint) -> LiePoint {
    sphere_lift(&q.c, q.r)
}
