//! Subspaces of R^{4,2}: spans, metric complements, intersections, signatures.
//!
//! Bases are stored Euclidean-orthonormal. Span equality is a statement about
//! spans only, so it is measured with Euclidean principal angles; everything
//! that depends on the indefinite metric (complements, signatures, projectors)
//! goes through the Gram matrix.

use std::fmt;

use nalgebra::{DMatrix, Dyn, Matrix6, OMatrix, SymmetricEigen, U6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{canonical_sign, inner, lower, metric, LiePoint, LieVec};

/// Relative threshold for counting a Gram eigenvalue as zero.
pub const SIGNATURE_REL_TOL: f64 = 1e-9;
/// Relative singular value threshold used for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub const fn new(plus: usize, minus: usize, zero: usize) -> Self {
        Signature { plus, minus, zero }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.plus, self.minus, self.zero)
    }
}

pub const SIG_21: Signature = Signature::new(2, 1, 0);

type Basis = OMatrix<f64, U6, Dyn>;

#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Basis,
    gram: DMatrix<f64>,
    signature: Signature,
}

fn signature_of(gram: &DMatrix<f64>) -> Signature {
    if gram.nrows() == 0 {
        return Signature::new(0, 0, 0);
    }
    let eig = SymmetricEigen::new(gram.clone());
    let scale = eig.eigenvalues.amax();
    let tol = SIGNATURE_REL_TOL * scale.max(f64::MIN_POSITIVE);
    let mut sig = Signature::new(0, 0, 0);
    for &l in eig.eigenvalues.iter() {
        if l.abs() < tol {
            sig.zero += 1;
        } else if l > 0.0 {
            sig.plus += 1;
        } else {
            sig.minus += 1;
        }
    }
    sig
}

/// Euclidean orthonormal basis of the column span of `m` (columns pre-normalised).
fn orthonormal_columns(vs: &[LieVec]) -> (Basis, usize) {
    let cols: Vec<LieVec> = vs
        .iter()
        .filter(|v| v.norm() > 0.0)
        .map(|v| v / v.norm())
        .collect();
    if cols.is_empty() {
        return (Basis::zeros(0), 0);
    }
    let m = DMatrix::from_columns(
        &cols
            .iter()
            .map(|c| nalgebra::DVector::from_column_slice(c.as_slice()))
            .collect::<Vec<_>>(),
    );
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.amax();
    let mut keep = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > RANK_REL_TOL * smax {
            keep.push(k);
        }
    }
    let mut basis = Basis::zeros(keep.len());
    for (c, &k) in keep.iter().enumerate() {
        for r in 0..6 {
            basis[(r, c)] = u[(r, k)];
        }
    }
    (basis, keep.len())
}

impl Subspace {
    fn from_orthonormal(basis: Basis) -> Self {
        let k = basis.ncols();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            let bi: LieVec = basis.column(i).into_owned();
            for j in 0..k {
                let bj: LieVec = basis.column(j).into_owned();
                gram[(i, j)] = inner(&bi, &bj);
            }
        }
        let signature = signature_of(&gram);
        Subspace {
            basis,
            gram,
            signature,
        }
    }

    /// Span of `vs`; fails when the vectors are (numerically) dependent.
    pub fn span(vs: &[LieVec]) -> Result<Self> {
        let (sub, rank) = Self::span_reporting(vs);
        if rank != vs.len() {
            return Err(Error::RankDeficient {
                expected: vs.len(),
                found: rank,
            });
        }
        Ok(sub)
    }

    /// Span of `vs` together with the numerical rank found.
    pub fn span_reporting(vs: &[LieVec]) -> (Self, usize) {
        let (basis, rank) = orthonormal_columns(vs);
        (Self::from_orthonormal(basis), rank)
    }

    pub fn whole() -> Self {
        Self::span(&(0..6).map(crate::lie::basis).collect::<Vec<_>>()).expect("standard basis")
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn basis_vectors(&self) -> Vec<LieVec> {
        (0..self.dim())
            .map(|i| self.basis.column(i).into_owned())
            .collect()
    }

    /// Euclidean distance of the unit vector along `v` from this span.
    pub fn membership_residual(&self, v: &LieVec) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        let u = v / n;
        let proj = &self.basis * (self.basis.transpose() * u);
        (u - proj).norm()
    }

    /// Metric orthogonal complement; `dim S + dim S^perp = 6` always.
    pub fn orth_complement(&self) -> Subspace {
        let lowered: Vec<LieVec> = self.basis_vectors().iter().map(lower).collect();
        let (q, _) = orthonormal_columns(&lowered);
        let p = Matrix6::identity() - &q * q.transpose();
        let eig = SymmetricEigen::new(p);
        let mut cols: Vec<(usize, LieVec)> = Vec::new();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 0.5 {
                cols.push((k, canonical_sign(eig.eigenvectors.column(k).into_owned())));
            }
        }
        let mut basis = Basis::zeros(cols.len());
        for (c, (_, v)) in cols.iter().enumerate() {
            basis.set_column(c, v);
        }
        Self::from_orthonormal(basis)
    }

    /// Intersection of two spans; directions whose principal angle has sine
    /// below `tol` count as shared.
    pub fn intersect(&self, other: &Subspace, tol: f64) -> Subspace {
        if self.dim() == 0 || other.dim() == 0 {
            return Self::from_orthonormal(Basis::zeros(0));
        }
        // singular values of the part of self outside other are the principal-angle sines
        let p = Matrix6::identity() - &other.basis * other.basis.transpose();
        let r = p * &self.basis;
        let svd = r.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let mut vs = Vec::new();
        for (k, &sv) in svd.singular_values.iter().enumerate() {
            if sv < tol {
                vs.push(&self.basis * v_t.row(k).transpose());
            }
        }
        let (basis, _) = orthonormal_columns(&vs);
        Self::from_orthonormal(basis)
    }

    /// Largest sine of the principal angles between the spans. Spans of
    /// different dimension compare as `1.0`.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.dim() != other.dim() {
            return 1.0;
        }
        if self.dim() == 0 {
            return 0.0;
        }
        let p = Matrix6::identity() - &self.basis * self.basis.transpose();
        let r = p * &other.basis;
        let svd = r.svd(false, false);
        svd.singular_values.amax().min(1.0)
    }

    /// Span equality with residual (max principal-angle sine).
    pub fn equal(&self, other: &Subspace, tol: f64) -> (bool, f64) {
        let r = self.distance(other);
        (r <= tol && self.dim() == other.dim(), r)
    }

    /// Metric-orthogonal projector onto this subspace; needs a non-degenerate span.
    pub fn projector(&self) -> Result<Matrix6<f64>> {
        if self.signature.zero != 0 {
            return Err(Error::WrongSignature {
                expected: Signature::new(
                    self.signature.plus,
                    self.signature.minus + self.signature.zero,
                    0,
                ),
                found: self.signature,
            });
        }
        let gi = self
            .gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("singular Gram matrix".into()))?;
        let b = DMatrix::from_column_slice(6, self.dim(), self.basis.as_slice());
        let p = &b * gi * b.transpose() * DMatrix::from_column_slice(6, 6, metric().as_slice());
        Ok(Matrix6::from_column_slice(p.as_slice()))
    }

    /// A basis `(E1, E2, E3)` with `(E1,E1) = (E2,E2) = 1 = -(E3,E3)`, mutually
    /// orthogonal, chosen deterministically from the span.
    pub fn pseudo_orthonormal_frame(&self) -> Result<[LieVec; 3]> {
        if self.signature != SIG_21 || self.dim() != 3 {
            return Err(Error::WrongSignature {
                expected: SIG_21,
                found: self.signature,
            });
        }
        let eig = SymmetricEigen::new(self.gram.clone());
        let (kneg, lneg) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (k, &l)| if l < acc.1 { (k, l) } else { acc },
                );
        let w = eig.eigenvectors.column(kneg);
        let mut e3 = LieVec::zeros();
        for c in 0..3 {
            e3 += self.basis.column(c) * w[c];
        }
        if lneg >= 0.0 {
            return Err(Error::degenerate("timelike direction", "frame"));
        }
        let e3 = canonical_sign(e3);
        let e3 = e3 / (-inner(&e3, &e3)).sqrt();
        let p = self.projector()?;
        let positive_part = |x: &LieVec| -> LieVec {
            let y = p * x;
            y + e3 * inner(&y, &e3)
        };
        let pick = |exclude: Option<&LieVec>| -> Option<LieVec> {
            let mut best: Option<(f64, LieVec)> = None;
            for k in 0..6 {
                let mut y = positive_part(&crate::lie::basis(k));
                if let Some(e) = exclude {
                    y -= e * inner(&y, e);
                }
                let n = inner(&y, &y);
                if best.as_ref().is_none_or(|(bn, _)| n > bn * (1.0 + 1e-9)) {
                    best = Some((n, y));
                }
            }
            best.filter(|(n, _)| *n > 1e-12).map(|(n, y)| y / n.sqrt())
        };
        let e1 =
            pick(None).ok_or_else(|| Error::degenerate("positive part of (2,1) span", "frame"))?;
        let e2 = pick(Some(&e1))
            .ok_or_else(|| Error::degenerate("positive part of (2,1) span", "frame"))?;
        Ok([e1, e2, e3])
    }

    /// `cos t E1 + sin t E2 + E3` for the deterministic pseudo-orthonormal frame.
    pub fn lightcone_circle(&self, theta: f64) -> Result<LiePoint> {
        let [e1, e2, e3] = self.pseudo_orthonormal_frame()?;
        Ok(circle_point(&[e1, e2, e3], theta))
    }
}

/// Null vector `cos t E1 + sin t E2 + E3` of a pseudo-orthonormal frame.
pub fn circle_point(frame: &[LieVec; 3], theta: f64) -> LiePoint {
    LiePoint::from_null(frame[0] * theta.cos() + frame[1] * theta.sin() + frame[2])
}

/// Parameter `t` at which the circle of `frame` passes through the line of `v`.
pub fn circle_parameter(frame: &[LieVec; 3], v: &LieVec) -> f64 {
    // v ~ c (cos t E1 + sin t E2 + E3) with c = -(v,E3)
    let c = -inner(v, &frame[2]);
    let x = inner(v, &frame[0]) / c;
    let y = inner(v, &frame[1]) / c;
    y.atan2(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{basis, sphere_lift, Vec3};
    use approx::assert_abs_diff_eq;

    #[test]
    fn signature_of_coordinate_span() {
        let s = Subspace::span(&[basis(0), basis(3), basis(4)]).unwrap();
        assert_eq!(s.signature(), Signature::new(2, 1, 0));
        assert_eq!(Subspace::whole().signature(), Signature::new(4, 2, 0));
    }

    #[test]
    fn complement_of_point_sphere_osculating_span() {
        // sigma(u) = point sphere of (0,0,u) at u = 0.3
        let u = 0.3;
        let s = LieVec::new(0., 0., u, (1. - u * u) / 2., (1. + u * u) / 2., 0.);
        let s1 = LieVec::new(0., 0., 1., -u, u, 0.);
        let s2 = LieVec::new(0., 0., 0., -1., 1., 0.);
        let v = Subspace::span(&[s, s1, s2]).unwrap();
        let vp = v.orth_complement();
        let expected = Subspace::span(&[basis(0), basis(1), basis(5)]).unwrap();
        assert!(vp.equal(&expected, 1e-12).0);
        assert_eq!(vp.signature(), SIG_21);
    }

    #[test]
    fn equal_spans() {
        let a = LieVec::new(1., 2., 0., 0.5, 0., 1.);
        let b = LieVec::new(0., 1., 3., 0., -1., 0.);
        let s1 = Subspace::span(&[a, b]).unwrap();
        let s2 = Subspace::span(&[b, a + b * 2.0]).unwrap();
        let (eq, r) = s1.equal(&s2, 1e-12);
        assert!(eq, "residual {r}");
    }

    #[test]
    fn rank_deficiency_reported() {
        let a = basis(0);
        let err = Subspace::span(&[a, a * 2.0, basis(1)]).unwrap_err();
        assert_eq!(
            err,
            Error::RankDeficient {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn lightcone_circle_examples() {
        let s = Subspace::span(&[basis(0), basis(1), basis(5)]).unwrap();
        let p = s.lightcone_circle(0.0).unwrap();
        assert_abs_diff_eq!(
            (p.rep() - LieVec::new(1., 0., 0., 0., 0., 1.)).norm(),
            0.0,
            epsilon = 1e-14
        );

        let u = LieVec::new(0., 0., 0., 1., -1., 1.);
        let s = Subspace::span(&[basis(0), basis(1), u]).unwrap();
        for t in [0.0, 0.4, 2.0, -1.3] {
            let p = s.lightcone_circle(t).unwrap();
            let want = LieVec::new(t.cos(), t.sin(), 0., 1., -1., 1.);
            assert_abs_diff_eq!((p.rep() - want).norm(), 0.0, epsilon = 1e-12);
        }
        let wrong = Subspace::span(&[basis(0), basis(1), basis(2)]).unwrap();
        assert!(matches!(
            wrong.lightcone_circle(0.0),
            Err(Error::WrongSignature { .. })
        ));
    }

    #[test]
    fn intersection_of_contact_elements() {
        let a = *sphere_lift(&Vec3::new(0., 0., 0.), 1.0).rep();
        let b = *sphere_lift(&Vec3::new(2., 0., 0.), 1.0).rep();
        let c = *sphere_lift(&Vec3::new(0., 3., 0.), 1.0).rep();
        let s1 = Subspace::span(&[a, b]).unwrap();
        let s2 = Subspace::span(&[b, c]).unwrap();
        let i = s1.intersect(&s2, 1e-8);
        assert_eq!(i.dim(), 1);
        assert!(i.membership_residual(&b) < 1e-12);
    }

    #[test]
    fn projector_is_idempotent_and_metric() {
        let s = Subspace::span(&[basis(0), basis(3) + basis(1) * 0.3, basis(4)]).unwrap();
        let p = s.projector().unwrap();
        assert!((p * p - p).amax() < 1e-12);
        let g = metric();
        assert!((p.transpose() * g - g * p).amax() < 1e-12);
    }

    #[test]
    fn circle_parameter_inverts_circle_point() {
        let u = LieVec::new(0., 0., 0., 1., -1., 1.);
        let s = Subspace::span(&[basis(0), basis(1) + basis(2), u]).unwrap();
        let f = s.pseudo_orthonormal_frame().unwrap();
        for t in [0.1, 1.0, 3.0, -2.5] {
            let p = circle_point(&f, t);
            assert_abs_diff_eq!(circle_parameter(&f, &(p.rep() * -3.0)), t, epsilon = 1e-12);
        }
    }
}
