//! Discrete Legendre maps: construction from surfaces, validation, curvature
//! spheres, Lie cyclide splitting and channel detection.

mod curvature;
mod split;

pub use curvature::{
    curvature_data, curvature_sphere_residual, CurvatureData, CurvaturePoint, UMBILIC_TOL,
};
pub use split::{
    is_channel, lie_cyclide_split, spherical_line_residual, ChannelReport, CircularDir, GridLine,
    LieCyclideSplit, SphericalLine, SplitPoint,
};

use nalgebra::{Matrix2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{at, Frame, LegendreGrid, ParamGrid};
use crate::lie::{inner, plane_lift, sphere_lift, LieVec, Vec3};
use crate::subspace::Subspace;

/// Isotropy tolerance for Euclidean-normalised frames.
pub const TOL_ISOTROPY: f64 = 1e-10;
/// Default lower bound for the discrete immersion measure.
pub const TOL_IMMERSION: f64 = 1e-4;

/// Contact lift of a surface: element = point sphere + oriented tangent plane.
pub fn make_legendre_from_surface(
    points: &[Vec3],
    normals: &[Vec3],
    grid: ParamGrid,
) -> Result<LegendreGrid> {
    if points.len() != grid.len() || normals.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} points / {} normals for a {}x{} grid",
            points.len(),
            normals.len(),
            grid.n_u(),
            grid.n_theta()
        )));
    }
    let mut frames = Vec::with_capacity(points.len());
    for (p, n) in points.iter().zip(normals) {
        let s = sphere_lift(p, 0.0);
        let t = plane_lift(n, p.dot(n))?;
        frames.push(Frame::normalized(*s.rep(), *t.rep()));
    }
    let g = LegendreGrid::new(grid, frames)?;
    let iso = g.isotropy();
    if iso > TOL_ISOTROPY {
        return Err(Error::Tolerance {
            what: "isotropy".into(),
            value: iso,
            tol: TOL_ISOTROPY,
        });
    }
    Ok(g)
}

/// Thresholds used by [`validate_legendre`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreTolerances {
    pub isotropy: f64,
    /// Absolute contact tolerance; `None` means `max(1e-8, 10 h^2)`.
    pub contact: Option<f64>,
    pub immersion: f64,
}

impl Default for LegendreTolerances {
    fn default() -> Self {
        LegendreTolerances {
            isotropy: TOL_ISOTROPY,
            contact: None,
            immersion: TOL_IMMERSION,
        }
    }
}

impl LegendreTolerances {
    pub fn contact_for(&self, g: &LegendreGrid) -> f64 {
        self.contact
            .unwrap_or_else(|| grid_tolerance(g.grid.h_max()))
    }
}

/// The `max(1e-8, 10 h^2)` rule for quantities with second-order truncation error.
pub fn grid_tolerance(h: f64) -> f64 {
    (10.0 * h * h).max(1e-8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreReport {
    pub isotropy: f64,
    pub contact: f64,
    pub immersion: f64,
    /// Grid point where the immersion measure is smallest.
    pub immersion_at: (usize, usize),
    pub tol_isotropy: f64,
    pub tol_contact: f64,
    pub tol_immersion: f64,
    pub pass: bool,
}

/// Difference-quotient solder data at one grid point: a metric-orthonormal
/// basis of `f^perp / f` and the matrices of `d_u`, `d_theta` acting on the frame.
#[derive(Debug, Clone, Copy)]
pub struct Solder {
    pub quotient: [LieVec; 2],
    pub m_u: Matrix2<f64>,
    pub m_t: Matrix2<f64>,
}

impl Solder {
    /// Coordinates of `x` in `f^perp / f`.
    pub fn coords(&self, x: &LieVec) -> [f64; 2] {
        [inner(x, &self.quotient[0]), inner(x, &self.quotient[1])]
    }
}

/// Two positive directions of the element's orthogonal complement, metric-orthonormal.
pub fn quotient_basis(frame: &Frame) -> Result<[LieVec; 2]> {
    let perp = frame.element()?.orth_complement();
    let eig = SymmetricEigen::new(perp.gram().clone());
    let basis = perp.basis_vectors();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = [LieVec::zeros(); 2];
    for (slot, &k) in out.iter_mut().zip(&order) {
        let l = eig.eigenvalues[k];
        if l <= 1e-6 {
            return Err(Error::degenerate(
                "f^perp/f is not positive definite",
                "quotient",
            ));
        }
        let w = eig.eigenvectors.column(k);
        let v: LieVec = basis.iter().zip(w.iter()).map(|(b, c)| b * *c).sum();
        *slot = v / l.sqrt();
    }
    Ok(out)
}

pub fn solder(g: &LegendreGrid, i: usize, j: usize) -> Result<Solder> {
    let quotient = quotient_basis(g.frame(i, j))
        .map_err(|_| Error::degenerate("f^perp/f not positive definite", at(i, j)))?;
    let gr = &g.grid;
    let s = |a: usize, b: usize| g.sigma(a, b);
    let t = |a: usize, b: usize| g.tau(a, b);
    let cols = [
        gr.d_dir_projective(i, j, [1.0, 0.0], s),
        gr.d_dir_projective(i, j, [1.0, 0.0], t),
        gr.d_dir_projective(i, j, [0.0, 1.0], s),
        gr.d_dir_projective(i, j, [0.0, 1.0], t),
    ];
    let q = |x: &LieVec| [inner(x, &quotient[0]), inner(x, &quotient[1])];
    let [us, ut, ts, tt] = cols.map(|c| q(&c));
    Ok(Solder {
        quotient,
        m_u: Matrix2::new(us[0], ut[0], us[1], ut[1]),
        m_t: Matrix2::new(ts[0], tt[0], ts[1], tt[1]),
    })
}

/// Smallest singular value of the 4x2 matrix `[vec M_u, vec M_theta]`.
pub fn immersion_measure(s: &Solder) -> f64 {
    let m = nalgebra::Matrix4x2::from_columns(&[
        nalgebra::Vector4::from_column_slice(s.m_u.as_slice()),
        nalgebra::Vector4::from_column_slice(s.m_t.as_slice()),
    ]);
    m.svd(false, false).singular_values.min()
}

/// Largest `|(D v, w)|` over frame vectors and both difference operators at one point.
pub fn contact_residual_at(g: &LegendreGrid, i: usize, j: usize) -> f64 {
    let f = g.frame(i, j);
    let gr = &g.grid;
    let mut r: f64 = 0.0;
    for dir in [[1.0, 0.0], [0.0, 1.0]] {
        for which in 0..2 {
            let field = |a: usize, b: usize| {
                if which == 0 {
                    g.sigma(a, b)
                } else {
                    g.tau(a, b)
                }
            };
            let d = gr.d_dir_projective(i, j, dir, field);
            r = r
                .max(inner(&d, &f.sigma).abs())
                .max(inner(&d, &f.tau).abs());
        }
    }
    r
}

/// Isotropy, contact and immersion residuals of a discrete Legendre map.
pub fn validate_legendre(g: &LegendreGrid, tol: &LegendreTolerances) -> LegendreReport {
    let isotropy = g.isotropy();
    let mut contact: f64 = 0.0;
    let mut immersion = f64::INFINITY;
    let mut immersion_at = (0, 0);
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            contact = contact.max(contact_residual_at(g, i, j));
            let m = solder(g, i, j)
                .map(|s| immersion_measure(&s))
                .unwrap_or(0.0);
            if m < immersion {
                immersion = m;
                immersion_at = (i, j);
            }
        }
    }
    let tol_contact = tol.contact_for(g);
    let pass = isotropy <= tol.isotropy && contact <= tol_contact && immersion >= tol.immersion;
    LegendreReport {
        isotropy,
        contact,
        immersion,
        immersion_at,
        tol_isotropy: tol.isotropy,
        tol_contact,
        tol_immersion: tol.immersion,
        pass,
    }
}

/// The point sphere of a contact element, `None` when it is the point at infinity.
pub fn point_sphere_of(frame: &Frame) -> Option<LieVec> {
    let (s, t) = (frame.sigma, frame.tau);
    let v = s * t[5] - t * s[5];
    let v = if v.norm() < 1e-12 * s.norm().max(t.norm()) {
        // both vectors already have x6 = 0: the element is a single point sphere
        if s[5].abs() < 1e-12 {
            s
        } else {
            return None;
        }
    } else {
        v
    };
    if (v[3] + v[4]).abs() <= 1e-10 * v.norm() {
        None
    } else {
        Some(v / (v[3] + v[4]))
    }
}

/// Euclidean point of the contact element.
pub fn surface_point(frame: &Frame) -> Option<Vec3> {
    point_sphere_of(frame).map(|p| Vec3::new(p[0], p[1], p[2]))
}

/// Elements as subspaces, for callers that need the full subspace calculus.
pub fn elements(g: &LegendreGrid) -> Result<Vec<Subspace>> {
    g.frames().iter().map(Frame::element).collect()
}
