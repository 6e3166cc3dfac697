//! The ambient space R^{4,2} of Lie sphere geometry.
//!
//! Coordinates are `(x1, .., x6)` with metric signs `(+,+,+,+,-,-)`. An
//! oriented Euclidean sphere with center `c` and signed radius `r` lifts to
//!
//! ```text
//! (c1, c2, c3, (1 - |c|^2 + r^2)/2, (1 + |c|^2 - r^2)/2, r)
//! ```
//!
//! so `x4 + x5` is the homogenising coordinate and `x6` the signed radius.
//! Oriented planes `{x : x.n = d}` lift to `(n, -d, d, 1)`; point spheres are
//! the `r = 0` slice. Two lifts have vanishing inner product exactly when the
//! spheres are in oriented contact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vector of R^{4,2}.
pub type LieVec = Vector6<f64>;
/// A Euclidean 3-vector.
pub type Vec3 = Vector3<f64>;

pub const METRIC_SIGNS: [f64; 6] = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0];

/// Default relative nullity tolerance for [`LiePoint`].
pub const TOL_NULL: f64 = 1e-10;
/// Threshold below which the homogenising or radius coordinate counts as zero.
pub const TOL_PROJ: f64 = 1e-10;
/// Tolerance for projective comparison (sine of the angle between lines).
pub const TOL_PROJECTIVE: f64 = 1e-8;

/// The Gram matrix `G = diag(1,1,1,1,-1,-1)`.
pub fn metric() -> Matrix6<f64> {
    Matrix6::from_diagonal(&Vector6::from_row_slice(&METRIC_SIGNS))
}

/// The indefinite inner product of R^{4,2}.
#[inline]
pub fn inner(a: &LieVec, b: &LieVec) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] - a[4] * b[4] - a[5] * b[5]
}

/// `G a`, i.e. the covector `inner(a, .)` as a column.
#[inline]
pub fn lower(a: &LieVec) -> LieVec {
    LieVec::new(a[0], a[1], a[2], a[3], -a[4], -a[5])
}

/// Standard basis vector `e_{i+1}` (zero based index).
pub fn basis(i: usize) -> LieVec {
    let mut v = LieVec::zeros();
    v[i] = 1.0;
    v
}

/// Relative nullity residual `|(v,v)| / |v|^2`.
pub fn nullity(v: &LieVec) -> f64 {
    let n2 = v.norm_squared();
    if n2 == 0.0 {
        return 0.0;
    }
    inner(v, v).abs() / n2
}

/// The nearest-scale null vector to a nearly null `v`: the spacelike part
/// `x1..x4` and the timelike part `x5, x6` are rescaled to equal length,
/// keeping `|x|^2 + |y|^2`. Used to clean accumulated drift off transported
/// spheres; the change is of the order of `nullity(v)`.
pub fn null_projection(v: &LieVec) -> LieVec {
    let x = v.fixed_rows::<4>(0).norm();
    let y = v.fixed_rows::<2>(4).norm();
    if x == 0.0 || y == 0.0 {
        return *v;
    }
    let m = ((x * x + y * y) / 2.0).sqrt();
    let mut out = *v;
    out.fixed_rows_mut::<4>(0).scale_mut(m / x);
    out.fixed_rows_mut::<2>(4).scale_mut(m / y);
    out
}

/// `|sin|` of the angle between the lines spanned by `a` and `b`.
pub fn projective_distance(a: &LieVec, b: &LieVec) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let bh = b / nb;
    let perp = a - bh * a.dot(&bh);
    (perp.norm() / na).min(1.0)
}

/// Flip `v` so that it points into the same Euclidean half-space as `reference`.
pub fn align_sign(v: LieVec, reference: &LieVec) -> LieVec {
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v
    }
}

/// Flip `v` so that its largest-magnitude component is positive (first index on ties).
pub fn canonical_sign(v: LieVec) -> LieVec {
    let mut k = 0;
    for i in 1..6 {
        if v[i].abs() > v[k].abs() * (1.0 + 1e-12) {
            k = i;
        }
    }
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// A point of the projective lightcone: an oriented sphere, plane or point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LiePoint {
    rep: LieVec,
    tol_null: f64,
}

impl LiePoint {
    pub fn new(rep: LieVec) -> Result<Self> {
        Self::with_tolerance(rep, TOL_NULL)
    }

    pub fn with_tolerance(rep: LieVec, tol_null: f64) -> Result<Self> {
        if rep.norm() == 0.0 {
            return Err(Error::Invalid("zero vector has no projective class".into()));
        }
        let residual = nullity(&rep);
        if residual > tol_null {
            return Err(Error::NotNull { residual });
        }
        Ok(LiePoint { rep, tol_null })
    }

    /// Wraps a representative known to be null by construction.
    pub(crate) fn from_null(rep: LieVec) -> Self {
        LiePoint {
            rep,
            tol_null: TOL_NULL,
        }
    }

    pub fn rep(&self) -> &LieVec {
        &self.rep
    }

    pub fn tol_null(&self) -> f64 {
        self.tol_null
    }

    /// Euclidean-normalised representative.
    pub fn normalized(&self) -> LieVec {
        self.rep / self.rep.norm()
    }

    pub fn distance(&self, other: &LiePoint) -> f64 {
        projective_distance(&self.rep, &other.rep)
    }

    /// Projective equality with the default tolerance.
    pub fn same_as(&self, other: &LiePoint) -> bool {
        self.distance(other) <= TOL_PROJECTIVE
    }

    pub fn inner(&self, other: &LiePoint) -> f64 {
        inner(&self.rep, &other.rep)
    }
}

impl From<LiePoint> for LieVec {
    fn from(p: LiePoint) -> Self {
        p.rep
    }
}

/// Euclidean reading of a Lie sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EuclideanSphere {
    Sphere { center: Vec3, radius: f64 },
    Plane { normal: Vec3, offset: f64 },
    Point { position: Vec3 },
    Infinity,
}

impl EuclideanSphere {
    /// The lift of this object to the lightcone.
    pub fn lift(&self) -> Result<LiePoint> {
        match *self {
            EuclideanSphere::Sphere { center, radius } => Ok(sphere_lift(&center, radius)),
            EuclideanSphere::Point { position } => Ok(sphere_lift(&position, 0.0)),
            EuclideanSphere::Plane { normal, offset } => plane_lift(&normal, offset),
            EuclideanSphere::Infinity => Ok(LiePoint::from_null(LieVec::new(
                0.0, 0.0, 0.0, -1.0, 1.0, 0.0,
            ))),
        }
    }

    pub fn point(&self) -> Option<Vec3> {
        match *self {
            EuclideanSphere::Point { position } => Some(position),
            EuclideanSphere::Sphere {
                center,
                radius: 0.0,
            } => Some(center),
            _ => None,
        }
    }
}

impl fmt::Display for EuclideanSphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EuclideanSphere::Sphere { center, radius } => write!(
                f,
                "sphere(c=({}, {}, {}), r={})",
                center.x, center.y, center.z, radius
            ),
            EuclideanSphere::Plane { normal, offset } => write!(
                f,
                "plane(n=({}, {}, {}), d={})",
                normal.x, normal.y, normal.z, offset
            ),
            EuclideanSphere::Point { position } => {
                write!(f, "point({}, {}, {})", position.x, position.y, position.z)
            }
            EuclideanSphere::Infinity => write!(f, "infinity"),
        }
    }
}

/// Lift of the oriented sphere with center `c` and signed radius `r`.
pub fn sphere_lift(center: &Vec3, radius: f64) -> LiePoint {
    let c2 = center.norm_squared();
    let r2 = radius * radius;
    LiePoint::from_null(LieVec::new(
        center.x,
        center.y,
        center.z,
        (1.0 - c2 + r2) / 2.0,
        (1.0 + c2 - r2) / 2.0,
        radius,
    ))
}

/// Lift of the oriented plane `{x : x.n = d}`.
///
/// Contact with `sphere_lift(c, r)` holds iff `c.n - d = r`.
pub fn plane_lift(normal: &Vec3, offset: f64) -> Result<LiePoint> {
    let norm = normal.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitNormal { norm });
    }
    Ok(LiePoint::from_null(LieVec::new(
        normal.x, normal.y, normal.z, -offset, offset, 1.0,
    )))
}

/// Reads a lightcone point as a Euclidean sphere, plane, point or infinity.
pub fn project_to_euclidean(p: &LiePoint) -> Result<EuclideanSphere> {
    project_vec(p.rep())
}

pub(crate) fn project_vec(v: &LieVec) -> Result<EuclideanSphere> {
    let residual = nullity(v);
    if residual > TOL_NULL.max(1e-8) {
        return Err(Error::NotNull { residual });
    }
    let scale = v.norm();
    let h = v[3] + v[4];
    if h.abs() > TOL_PROJ * scale {
        let w = v / h;
        let center = Vec3::new(w[0], w[1], w[2]);
        if w[5].abs() <= TOL_PROJ {
            return Ok(EuclideanSphere::Point { position: center });
        }
        return Ok(EuclideanSphere::Sphere {
            center,
            radius: w[5],
        });
    }
    if v[5].abs() > TOL_PROJ * scale {
        let w = v / v[5];
        let normal = Vec3::new(w[0], w[1], w[2]);
        let normal = normal / normal.norm();
        return Ok(EuclideanSphere::Plane {
            normal,
            offset: -w[3],
        });
    }
    Ok(EuclideanSphere::Infinity)
}

/// The Lie sphere transformation shifting every signed radius by `a`.
pub fn parallel_transform_matrix(a: f64) -> Matrix6<f64> {
    let mut m = Matrix6::identity();
    let h = a * a / 2.0;
    // x4' = x4 + a x6 + h (x4 + x5)
    m[(3, 3)] += h;
    m[(3, 4)] += h;
    m[(3, 5)] += a;
    // x5' = x5 - a x6 - h (x4 + x5)
    m[(4, 3)] -= h;
    m[(4, 4)] -= h;
    m[(4, 5)] -= a;
    // x6' = x6 + a (x4 + x5)
    m[(5, 3)] += a;
    m[(5, 4)] += a;
    m
}

pub fn parallel_transform(p: &LiePoint, a: f64) -> LiePoint {
    LiePoint::from_null(parallel_transform_matrix(a) * p.rep())
}

/// An element of o(4,2), acting on R^{4,2} by matrix multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewMap(pub Matrix6<f64>);

impl SkewMap {
    pub fn zero() -> Self {
        SkewMap(Matrix6::zeros())
    }

    pub fn apply(&self, v: &LieVec) -> LieVec {
        self.0 * v
    }

    pub fn matrix(&self) -> &Matrix6<f64> {
        &self.0
    }

    /// Largest entry of `M^T G + G M`; zero for a metric-skew map.
    pub fn skew_defect(&self) -> f64 {
        let g = metric();
        let s = self.0.transpose() * g + g * self.0;
        s.amax()
    }

    pub fn commutator(&self, other: &SkewMap) -> SkewMap {
        SkewMap(self.0 * other.0 - other.0 * self.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Cayley transform `(I - A/2)^{-1} (I + A/2)`; lands in O(4,2) for skew `A`.
    pub fn cayley(&self) -> Matrix6<f64> {
        let half = self.0 * 0.5;
        let id = Matrix6::identity();
        (id - half)
            .lu()
            .solve(&(id + half))
            .expect("Cayley transform of a small skew map")
    }
}

impl Add for SkewMap {
    type Output = SkewMap;
    fn add(self, rhs: SkewMap) -> SkewMap {
        SkewMap(self.0 + rhs.0)
    }
}

impl Sub for SkewMap {
    type Output = SkewMap;
    fn sub(self, rhs: SkewMap) -> SkewMap {
        SkewMap(self.0 - rhs.0)
    }
}

impl Neg for SkewMap {
    type Output = SkewMap;
    fn neg(self) -> SkewMap {
        SkewMap(-self.0)
    }
}

impl Mul<f64> for SkewMap {
    type Output = SkewMap;
    fn mul(self, rhs: f64) -> SkewMap {
        SkewMap(self.0 * rhs)
    }
}

/// `a ^ b`, acting as `c -> (a,c) b - (b,c) a`.
pub fn wedge(a: &LieVec, b: &LieVec) -> SkewMap {
    SkewMap(b * lower(a).transpose() - a * lower(b).transpose())
}

/// The product of two vector-valued 1-forms, evaluated on `(d/du, d/dtheta)`.
pub fn curly_wedge(w1_u: &LieVec, w1_t: &LieVec, w2_u: &LieVec, w2_t: &LieVec) -> SkewMap {
    wedge(w1_u, w2_t) - wedge(w1_t, w2_u)
}

/// `[A ^ B]` for o(4,2)-valued 1-forms, evaluated on `(d/du, d/dtheta)`.
pub fn form_bracket(a_u: &SkewMap, a_t: &SkewMap, b_u: &SkewMap, b_t: &SkewMap) -> SkewMap {
    a_u.commutator(b_t) - a_t.commutator(b_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: [f64; 6]) -> LieVec {
        LieVec::from_row_slice(&x)
    }

    #[test]
    fn basis_gram_entries() {
        assert_eq!(inner(&basis(0), &basis(0)), 1.0);
        assert_eq!(inner(&basis(4), &basis(4)), -1.0);
        assert_eq!(inner(&basis(0), &basis(4)), 0.0);
        let g = metric();
        let plus = (0..6).filter(|&i| g[(i, i)] > 0.0).count();
        assert_eq!(plus, 4);
    }

    #[test]
    fn sphere_lift_examples() {
        let s = sphere_lift(&Vec3::zeros(), 1.0);
        assert_eq!(*s.rep(), v([0., 0., 0., 1., 0., 1.]));
        assert_eq!(inner(s.rep(), s.rep()), 0.0);
        let p = sphere_lift(&Vec3::zeros(), 0.0);
        assert_eq!(*p.rep(), v([0., 0., 0., 0.5, 0.5, 0.]));
        let q = sphere_lift(&Vec3::new(2., 0., 0.), 0.0);
        assert_eq!(*q.rep(), v([2., 0., 0., -1.5, 2.5, 0.]));
        assert_eq!(inner(q.rep(), q.rep()), 0.0);
    }

    #[test]
    fn concentric_spheres_inner() {
        let s1 = sphere_lift(&Vec3::zeros(), 1.0);
        let s2 = sphere_lift(&Vec3::zeros(), 2.0);
        assert_eq!(*s2.rep(), v([0., 0., 0., 2.5, -1.5, 2.]));
        assert_abs_diff_eq!(s1.inner(&s2), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn plane_lift_examples() {
        let p = plane_lift(&Vec3::new(1., 0., 0.), 0.0).unwrap();
        assert_eq!(*p.rep(), v([1., 0., 0., 0., 0., 1.]));
        let on_plane = sphere_lift(&Vec3::new(0., 1., -2.), 0.0);
        assert_eq!(p.inner(&on_plane), 0.0);
        // signed distance of the point to the plane
        let off_plane = sphere_lift(&Vec3::new(1., 0., 0.), 0.0);
        assert_eq!(p.inner(&off_plane), 1.0);
        let q = plane_lift(&Vec3::new(0., 0., 1.), 5.0).unwrap();
        assert_eq!(*q.rep(), v([0., 0., 1., -5., 5., 1.]));
        let tangent = plane_lift(&Vec3::new(1., 0., 0.), -1.0).unwrap();
        for t in [-3.0, -0.5, 0.0, 1.25, 7.0] {
            let s = sphere_lift(&Vec3::new(0., 0., t), 1.0);
            assert_abs_diff_eq!(tangent.inner(&s), 0.0, epsilon = 1e-12);
        }
        assert!(matches!(
            plane_lift(&Vec3::new(1., 1., 0.), 0.0),
            Err(Error::NonUnitNormal { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let s = LiePoint::new(v([0., 0., 0., 1., 0., 1.])).unwrap();
        assert_eq!(
            project_to_euclidean(&s).unwrap(),
            EuclideanSphere::Sphere {
                center: Vec3::zeros(),
                radius: 1.0
            }
        );
        let inf = LiePoint::new(v([0., 0., 0., -1., 1., 0.])).unwrap();
        assert_eq!(
            project_to_euclidean(&inf).unwrap(),
            EuclideanSphere::Infinity
        );
        let pl = LiePoint::new(v([7., 0., 0., 0., 0., 7.])).unwrap();
        assert_eq!(
            project_to_euclidean(&pl).unwrap(),
            EuclideanSphere::Plane {
                normal: Vec3::new(1., 0., 0.),
                offset: 0.0
            }
        );
    }

    #[test]
    fn non_null_rejected() {
        let err = LiePoint::new(basis(0)).unwrap_err();
        assert!(matches!(err, Error::NotNull { residual } if residual > 0.5));
        assert!(project_vec(&basis(0)).is_err());
    }

    #[test]
    fn wedge_examples() {
        let w = wedge(&basis(0), &basis(4));
        assert_eq!(w.apply(&basis(0)), basis(4));
        let a = v([0.3, -1.0, 2.0, 0.5, 0.1, -0.7]);
        assert_eq!(wedge(&a, &a).norm(), 0.0);
        assert!(w.skew_defect() < 1e-15);
    }

    #[test]
    fn curly_wedge_of_equal_forms_doubles() {
        let a = v([0.3, -1.0, 2.0, 0.5, 0.1, -0.7]);
        let b = v([1.0, 0.2, -0.4, 0.0, 1.5, 0.3]);
        let cw = curly_wedge(&a, &b, &a, &b);
        assert_abs_diff_eq!((cw - wedge(&a, &b) * 2.0).norm(), 0.0, epsilon = 1e-14);
        let z = LieVec::zeros();
        assert_eq!(curly_wedge(&a, &b, &z, &z).norm(), 0.0);
    }

    #[test]
    fn form_bracket_vanishes_for_channel_form() {
        let a = wedge(&basis(0), &basis(5));
        let z = SkewMap::zero();
        assert_eq!(form_bracket(&a, &z, &a, &z).norm(), 0.0);
    }

    #[test]
    fn parallel_transform_examples() {
        let p = sphere_lift(&Vec3::zeros(), 0.0);
        assert_eq!(parallel_transform_matrix(0.0), Matrix6::identity());
        let q = parallel_transform(&p, 1.0);
        match project_to_euclidean(&q).unwrap() {
            EuclideanSphere::Sphere { center, radius } => {
                assert_abs_diff_eq!(center.norm(), 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(radius, 1.0, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let m = parallel_transform_matrix(0.7);
        let g = metric();
        assert!((m.transpose() * g * m - g).amax() < 1e-12);
    }
}
