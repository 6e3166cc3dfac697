//! Sphere curves: one-parameter families of Lie spheres with derivative access.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fd_weights, Axis};
use crate::lie::{inner, nullity, LiePoint, LieVec, Vec3, TOL_NULL};

/// Value, first and second derivative of a lift at one parameter.
pub type Jet = [LieVec; 3];

/// Regularity threshold on `(s', s')` for the Euclidean-unit lift.
pub const EPS_REG: f64 = 1e-6;

type JetFn = Arc<dyn Fn(f64) -> Jet + Send + Sync>;

#[derive(Clone)]
enum Source {
    Analytic(JetFn),
    Sampled(Vec<LieVec>),
}

/// A sphere curve sampled on an axis. Derivatives come from a closed form when
/// available, otherwise from 5-point differences of the samples.
#[derive(Clone)]
pub struct SphereCurve {
    axis: Axis,
    source: Source,
}

impl fmt::Debug for SphereCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.source {
            Source::Analytic(_) => "analytic",
            Source::Sampled(_) => "sampled",
        };
        f.debug_struct("SphereCurve")
            .field("axis", &self.axis)
            .field("source", &kind)
            .finish()
    }
}

impl SphereCurve {
    /// Curve given by a jet closure; samples are checked for nullity.
    pub fn analytic(axis: Axis, jet: impl Fn(f64) -> Jet + Send + Sync + 'static) -> Result<Self> {
        Self::analytic_within(axis, jet, TOL_NULL)
    }

    // Integrated curves carry the drift of their integrator; callers report it.
    pub(crate) fn analytic_within(
        axis: Axis,
        jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
        tol: f64,
    ) -> Result<Self> {
        let c = SphereCurve {
            axis,
            source: Source::Analytic(Arc::new(jet)),
        };
        c.check_null(tol)?;
        Ok(c)
    }

    pub fn sampled(axis: Axis, values: Vec<LieVec>) -> Result<Self> {
        Self::sampled_within(axis, values, TOL_NULL)
    }

    pub(crate) fn sampled_within(axis: Axis, values: Vec<LieVec>, tol: f64) -> Result<Self> {
        if values.len() != axis.n {
            return Err(Error::Shape(format!(
                "{} samples for an axis of {}",
                values.len(),
                axis.n
            )));
        }
        if axis.n < 5 {
            return Err(Error::Shape(
                "sampled curves need at least 5 samples".into(),
            ));
        }
        let c = SphereCurve {
            axis,
            source: Source::Sampled(values),
        };
        c.check_null(tol)?;
        Ok(c)
    }

    fn check_null(&self, tol: f64) -> Result<()> {
        for i in 0..self.axis.n {
            let v = self.value(i);
            if v.norm() == 0.0 {
                return Err(Error::degenerate("zero lift", format!("sample {i}")));
            }
            let r = nullity(&v);
            if r > tol {
                return Err(Error::NotNull { residual: r });
            }
        }
        Ok(())
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn len(&self) -> usize {
        self.axis.n
    }

    pub fn is_empty(&self) -> bool {
        self.axis.n == 0
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.source, Source::Analytic(_))
    }

    pub fn u(&self, i: usize) -> f64 {
        self.axis.coord(i)
    }

    /// Jet at an arbitrary parameter (local quartic interpolation for sampled curves).
    pub fn jet(&self, u: f64) -> Jet {
        match &self.source {
            Source::Analytic(f) => f(u),
            Source::Sampled(vals) => self.interpolate(vals, u),
        }
    }

    pub fn jet_at(&self, i: usize) -> Jet {
        match &self.source {
            Source::Analytic(f) => f(self.axis.coord(i)),
            Source::Sampled(vals) => {
                let mut j = self.interpolate(vals, self.axis.coord(i));
                j[0] = vals[i];
                j
            }
        }
    }

    fn interpolate(&self, vals: &[LieVec], u: f64) -> Jet {
        let a = &self.axis;
        let mut x = (u - a.start) / a.h;
        if a.periodic {
            x = x.rem_euclid(a.n as f64);
        }
        let k = x.round() as isize;
        let n = a.n as isize;
        let (lo, idx): (isize, Vec<usize>) = if a.periodic {
            (k - 2, (k - 2..=k + 2).map(|m| a.wrap(m).unwrap()).collect())
        } else {
            let lo = (k - 2).clamp(0, n - 5);
            (lo, (lo..lo + 5).map(|m| m as usize).collect())
        };
        let offs: Vec<f64> = (0..5).map(|m| (lo + m) as f64 - x).collect();
        let mut jet = [LieVec::zeros(); 3];
        for (d, out) in jet.iter_mut().enumerate() {
            let w = fd_weights(&offs, d);
            let scale = a.h.powi(d as i32);
            for (m, &id) in idx.iter().enumerate() {
                *out += vals[id] * (w[m] / scale);
            }
        }
        jet
    }

    pub fn value(&self, i: usize) -> LieVec {
        match &self.source {
            Source::Analytic(f) => f(self.axis.coord(i))[0],
            Source::Sampled(vals) => vals[i],
        }
    }

    pub fn point(&self, i: usize) -> LiePoint {
        LiePoint::from_null(self.value(i))
    }

    pub fn values(&self) -> Vec<LieVec> {
        (0..self.axis.n).map(|i| self.value(i)).collect()
    }

    /// `(s', s')` for the Euclidean-unit lift: the induced metric on `s^(1)/s`.
    pub fn regularity(&self, i: usize) -> f64 {
        let [v, d1, _] = self.jet_at(i);
        inner(&d1, &d1) / v.norm_squared()
    }

    /// Smallest regularity value; fails below `eps` naming the first bad sample.
    pub fn check_regular(&self, eps: f64) -> Result<f64> {
        let mut min = f64::INFINITY;
        for i in 0..self.axis.n {
            let r = self.regularity(i);
            if r.is_nan() || r <= eps {
                return Err(Error::degenerate(
                    format!("stationary sphere curve ((s',s') = {r:e})"),
                    format!("sample {i}, u = {}", self.u(i)),
                ));
            }
            min = min.min(r);
        }
        Ok(min)
    }

    /// Image under a constant linear map (e.g. a Lie sphere transformation).
    pub fn transformed(&self, m: Matrix6<f64>) -> SphereCurve {
        let source = match &self.source {
            Source::Analytic(f) => {
                let f = f.clone();
                Source::Analytic(Arc::new(move |u| {
                    let j = f(u);
                    [m * j[0], m * j[1], m * j[2]]
                }))
            }
            Source::Sampled(vals) => Source::Sampled(vals.iter().map(|v| m * v).collect()),
        };
        SphereCurve {
            axis: self.axis,
            source,
        }
    }

    /// Rescales the lift by a positive function `mu(u)` given with its derivatives.
    pub fn rescaled(&self, mu: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> SphereCurve {
        let base = self.clone();
        let jet = move |u: f64| {
            let [s, s1, s2] = base.jet(u);
            let [m, m1, m2] = mu(u);
            [s * m, s1 * m + s * m1, s2 * m + s1 * (2.0 * m1) + s * m2]
        };
        match &self.source {
            Source::Analytic(_) => SphereCurve {
                axis: self.axis,
                source: Source::Analytic(Arc::new(jet)),
            },
            Source::Sampled(_) => {
                let vals = (0..self.axis.n)
                    .map(|i| jet(self.axis.coord(i))[0])
                    .collect();
                SphereCurve {
                    axis: self.axis,
                    source: Source::Sampled(vals),
                }
            }
        }
    }
}

/// Center curves available as presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CenterCurve {
    /// `point + u direction`.
    Line {
        point: [f64; 3],
        direction: [f64; 3],
    },
    /// Circle `center + R (cos u, sin u, 0)`.
    Circle { center: [f64; 3], radius: f64 },
    /// Helix `(R cos u, R sin u, pitch u)`.
    Helix { radius: f64, pitch: f64 },
    /// Explicit samples, one per axis point.
    Polyline { points: Vec<[f64; 3]> },
}

impl CenterCurve {
    /// Position and two derivatives, `None` for sampled polylines.
    pub fn jet(&self, u: f64) -> Option<[Vec3; 3]> {
        match self {
            CenterCurve::Line { point, direction } => {
                let p = Vec3::from(*point);
                let d = Vec3::from(*direction);
                Some([p + d * u, d, Vec3::zeros()])
            }
            CenterCurve::Circle { center, radius } => {
                let c = Vec3::from(*center);
                let (s, co) = u.sin_cos();
                Some([
                    c + Vec3::new(co, s, 0.0) * *radius,
                    Vec3::new(-s, co, 0.0) * *radius,
                    Vec3::new(-co, -s, 0.0) * *radius,
                ])
            }
            CenterCurve::Helix { radius, pitch } => {
                let (s, co) = u.sin_cos();
                Some([
                    Vec3::new(radius * co, radius * s, pitch * u),
                    Vec3::new(-radius * s, radius * co, *pitch),
                    Vec3::new(-radius * co, -radius * s, 0.0),
                ])
            }
            CenterCurve::Polyline { .. } => None,
        }
    }

    /// Position at sample `i` of `axis`.
    pub fn position(&self, axis: &Axis, i: usize) -> Vec3 {
        match self {
            CenterCurve::Polyline { points } => Vec3::from(points[i]),
            _ => self.jet(axis.coord(i)).expect("analytic preset")[0],
        }
    }
}

/// Signed radius as a function of the curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum RadiusProfile {
    Constant(f64),
    /// Coefficients `r0 + r1 u + r2 u^2 + ...`.
    Polynomial(Vec<f64>),
    /// One value per axis sample.
    Table(Vec<f64>),
}

impl RadiusProfile {
    pub fn jet(&self, u: f64) -> Option<[f64; 3]> {
        match self {
            RadiusProfile::Constant(r) => Some([*r, 0.0, 0.0]),
            RadiusProfile::Polynomial(c) => {
                let mut out = [0.0; 3];
                for (k, &ck) in c.iter().enumerate() {
                    let k = k as i32;
                    out[0] += ck * u.powi(k);
                    if k >= 1 {
                        out[1] += ck * k as f64 * u.powi(k - 1);
                    }
                    if k >= 2 {
                        out[2] += ck * (k * (k - 1)) as f64 * u.powi(k - 2);
                    }
                }
                Some(out)
            }
            RadiusProfile::Table(_) => None,
        }
    }
}

/// Jet of `sphere_lift(c(u), r(u))` from the jets of `c` and `r`.
pub fn lift_jet(c: &[Vec3; 3], r: &[f64; 3]) -> Jet {
    let [c0, c1, c2] = c;
    let [r0, r1, r2] = *r;
    let q0 = c0.norm_squared() - r0 * r0;
    let q1 = 2.0 * (c0.dot(c1) - r0 * r1);
    let q2 = 2.0 * (c1.norm_squared() + c0.dot(c2) - r1 * r1 - r0 * r2);
    let mk =
        |c: &Vec3, h: f64, q: f64, r: f64| LieVec::new(c.x, c.y, c.z, h - q / 2.0, h + q / 2.0, r);
    [
        mk(c0, 0.5, q0, r0),
        mk(c1, 0.0, q1, r1),
        mk(c2, 0.0, q2, r2),
    ]
}

/// Sphere curve of the preset center curve with the given radius profile.
pub fn sphere_curve(
    center: &CenterCurve,
    radius: &RadiusProfile,
    axis: Axis,
) -> Result<SphereCurve> {
    if let CenterCurve::Polyline { points } = center {
        if points.len() != axis.n {
            return Err(Error::Shape(format!(
                "{} polyline points for {} samples",
                points.len(),
                axis.n
            )));
        }
    }
    if let RadiusProfile::Table(t) = radius {
        if t.len() != axis.n {
            return Err(Error::Shape(format!(
                "{} radius values for {} samples",
                t.len(),
                axis.n
            )));
        }
    }
    match (center.jet(axis.start), radius.jet(axis.start)) {
        (Some(_), Some(_)) => {
            let (c, r) = (center.clone(), radius.clone());
            SphereCurve::analytic(axis, move |u| {
                lift_jet(&c.jet(u).unwrap(), &r.jet(u).unwrap())
            })
        }
        _ => {
            let vals = (0..axis.n)
                .map(|i| {
                    let r = match radius {
                        RadiusProfile::Table(t) => t[i],
                        other => other.jet(axis.coord(i)).unwrap()[0],
                    };
                    let c = center.position(&axis, i);
                    lift_jet(&[c, Vec3::zeros(), Vec3::zeros()], &[r, 0.0, 0.0])[0]
                })
                .collect();
            SphereCurve::sampled(axis, vals)
        }
    }
}
