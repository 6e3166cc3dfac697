use nalgebra::{Matrix2, Matrix4x2, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{solder, Solder};
use crate::error::Result;
use crate::grid::{unit, Dir, LegendreGrid};
use crate::lie::{projective_distance, LiePoint, LieVec};

/// Curvature spheres closer than this (projective distance) mark an umbilic.
pub const UMBILIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePoint {
    /// Euclidean-unit representatives of the two curvature spheres.
    pub s1: LieVec,
    pub s2: LieVec,
    /// Unit curvature directions in `(u, theta)` coordinates; `dir1` is the
    /// more theta-like one.
    pub dir1: Dir,
    pub dir2: Dir,
    pub kappa_gap: f64,
    pub umbilic: bool,
}

impl CurvaturePoint {
    pub fn sphere(&self, k: usize) -> LieVec {
        if k == 1 {
            self.s1
        } else {
            self.s2
        }
    }

    pub fn dir(&self, k: usize) -> Dir {
        if k == 1 {
            self.dir1
        } else {
            self.dir2
        }
    }
}

#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub n_u: usize,
    pub n_theta: usize,
    pub points: Vec<CurvaturePoint>,
}

impl CurvatureData {
    pub fn at(&self, i: usize, j: usize) -> &CurvaturePoint {
        &self.points[i * self.n_theta + j]
    }

    pub fn s1_point(&self, i: usize, j: usize) -> LiePoint {
        LiePoint::from_null(self.at(i, j).s1)
    }

    pub fn s2_point(&self, i: usize, j: usize) -> LiePoint {
        LiePoint::from_null(self.at(i, j).s2)
    }

    pub fn umbilic_count(&self) -> usize {
        self.points.iter().filter(|p| p.umbilic).count()
    }

    pub fn all_umbilic(&self) -> bool {
        self.points.iter().all(|p| p.umbilic)
    }
}

fn normalize_dir(x: [f64; 2]) -> Dir {
    let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let mut d = [x[0] / n, x[1] / n];
    let k = if d[0].abs() >= d[1].abs() { 0 } else { 1 };
    if d[k] < 0.0 {
        d = [-d[0], -d[1]];
    }
    d
}

/// Null directions of the binary form `c2 x^2 + c1 x y + c0 y^2`, if it is indefinite.
fn null_directions(c2: f64, c1: f64, c0: f64) -> Option<[Dir; 2]> {
    let q = Matrix2::new(c2, 0.5 * c1, 0.5 * c1, c0);
    let scale = q.amax();
    if scale == 0.0 {
        return None;
    }
    let eig = SymmetricEigen::new(q / scale);
    let (ka, kb) = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let (la, lb) = (eig.eigenvalues[ka], eig.eigenvalues[kb]);
    if la < -1e-14 || lb > 1e-14 {
        return None;
    }
    let (la, lb) = (la.max(0.0), lb.min(0.0));
    if la - lb < 1e-12 {
        return None;
    }
    let ea = eig.eigenvectors.column(ka);
    let eb = eig.eigenvectors.column(kb);
    let (a, b) = ((-lb).sqrt(), la.sqrt());
    let x1 = [a * ea[0] + b * eb[0], a * ea[1] + b * eb[1]];
    let x2 = [a * ea[0] - b * eb[0], a * ea[1] - b * eb[1]];
    Some([normalize_dir(x1), normalize_dir(x2)])
}

/// Kernel of a (numerically) singular 2x2 matrix.
fn kernel(m: &Matrix2<f64>) -> [f64; 2] {
    let r0 = [m[(0, 0)], m[(0, 1)]];
    let r1 = [m[(1, 0)], m[(1, 1)]];
    let r = if r0[0].hypot(r0[1]) >= r1[0].hypot(r1[1]) {
        r0
    } else {
        r1
    };
    [-r[1], r[0]]
}

fn point_data(g: &LegendreGrid, sd: &Solder, i: usize, j: usize) -> CurvaturePoint {
    let f = g.frame(i, j);
    let combine = |k: [f64; 2]| unit(f.sigma * k[0] + f.tau * k[1]);
    let c2 = sd.m_u.determinant();
    let c0 = sd.m_t.determinant();
    let c1 = sd.m_u[(0, 0)] * sd.m_t[(1, 1)] + sd.m_t[(0, 0)] * sd.m_u[(1, 1)]
        - sd.m_u[(0, 1)] * sd.m_t[(1, 0)]
        - sd.m_t[(0, 1)] * sd.m_u[(1, 0)];

    let stacked = Matrix4x2::from_rows(&[
        sd.m_u.row(0).into_owned(),
        sd.m_u.row(1).into_owned(),
        sd.m_t.row(0).into_owned(),
        sd.m_t.row(1).into_owned(),
    ]);
    let svd = stacked.svd(false, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    let umbilic_point = || {
        let v_t = svd.v_t.expect("requested");
        let k = if svd.singular_values[0] <= svd.singular_values[1] {
            0
        } else {
            1
        };
        let s = combine([v_t[(k, 0)], v_t[(k, 1)]]);
        CurvaturePoint {
            s1: s,
            s2: s,
            dir1: [0.0, 1.0],
            dir2: [1.0, 0.0],
            kappa_gap: 0.0,
            umbilic: true,
        }
    };
    if smax == 0.0 || smin <= UMBILIC_TOL * smax {
        return umbilic_point();
    }
    let Some(dirs) = null_directions(c2, c1, c0) else {
        return umbilic_point();
    };
    let [d1, d2] = if dirs[0][1].abs() >= dirs[1][1].abs() {
        dirs
    } else {
        [dirs[1], dirs[0]]
    };
    let s_of = |d: Dir| combine(kernel(&(sd.m_u * d[0] + sd.m_t * d[1])));
    let (s1, s2) = (s_of(d1), s_of(d2));
    let kappa_gap = projective_distance(&s1, &s2);
    CurvaturePoint {
        s1,
        s2,
        dir1: d1,
        dir2: d2,
        kappa_gap,
        umbilic: kappa_gap < UMBILIC_TOL,
    }
}

/// Curvature spheres and directions at every grid point.
pub fn curvature_data(g: &LegendreGrid) -> Result<CurvatureData> {
    let mut points = Vec::with_capacity(g.grid.len());
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let sd = solder(g, i, j)?;
            points.push(point_data(g, &sd, i, j));
        }
    }
    Ok(CurvatureData {
        n_u: g.n_u(),
        n_theta: g.n_theta(),
        points,
    })
}

/// `|d_{dir_k} s_k|` in `f^perp/f` at one point: zero for exact curvature spheres.
pub fn curvature_sphere_residual(
    g: &LegendreGrid,
    cd: &CurvatureData,
    k: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    let sd = solder(g, i, j)?;
    let p = cd.at(i, j);
    let d = g
        .grid
        .d_dir_projective(i, j, p.dir(k), |a, b| cd.at(a, b).sphere(k));
    let [x, y] = sd.coords(&d);
    Ok(x.hypot(y))
}
