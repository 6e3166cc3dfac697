use nalgebra::{DMatrix, Matrix6};
use serde::{Deserialize, Serialize};

use super::curvature::CurvatureData;
use super::{grid_tolerance, point_sphere_of};
use crate::error::{Error, Result};
use crate::grid::{Dir, LegendreGrid};
use crate::lie::{inner, lower, LieVec, SkewMap};
use crate::subspace::{Subspace, SIG_21};

/// Lie cyclide data at one grid point.
#[derive(Debug, Clone)]
pub struct SplitPoint {
    pub s1: Subspace,
    pub s2: Subspace,
    /// Metric projector onto `S1`.
    pub p1: Matrix6<f64>,
    /// Distance between `S1^perp` and the span built directly from `s2`.
    pub s2_consistency: f64,
}

/// Pointwise splitting `R^{4,2} = S1 (+) S2` and the off-diagonal part `N` of
/// the trivial connection.
#[derive(Debug, Clone)]
pub struct LieCyclideSplit {
    pub n_u: usize,
    pub n_theta: usize,
    /// `None` where the point is umbilic or the signature check failed.
    pub points: Vec<Option<SplitPoint>>,
    pub n_u_comp: Vec<Option<SkewMap>>,
    pub n_t_comp: Vec<Option<SkewMap>>,
    /// Grid points where the construction failed, with the reason.
    pub failures: Vec<((usize, usize), String)>,
}

impl LieCyclideSplit {
    pub fn at(&self, i: usize, j: usize) -> Option<&SplitPoint> {
        self.points[i * self.n_theta + j].as_ref()
    }

    /// `N(X) = X_u N_u + X_theta N_theta`.
    pub fn n_along(&self, i: usize, j: usize, x: Dir) -> Option<SkewMap> {
        let k = i * self.n_theta + j;
        match (&self.n_u_comp[k], &self.n_t_comp[k]) {
            (Some(a), Some(b)) => Some(*a * x[0] + *b * x[1]),
            _ => None,
        }
    }

    /// Largest `|g(a,b)|` between bases of `S1` and `S2`.
    pub fn cross_inner(&self) -> f64 {
        let mut r: f64 = 0.0;
        for p in self.points.iter().flatten() {
            for a in p.s1.basis_vectors() {
                for b in p.s2.basis_vectors() {
                    r = r.max(inner(&a, &b).abs());
                }
            }
        }
        r
    }

    /// Largest `|P1 N P1| + |P2 N P2|` (N should be block off-diagonal).
    pub fn block_diagonal_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for (k, p) in self.points.iter().enumerate() {
            let Some(p) = p else { continue };
            let p2 = Matrix6::identity() - p.p1;
            for n in [&self.n_u_comp[k], &self.n_t_comp[k]].into_iter().flatten() {
                let m = n.matrix();
                r = r.max((p.p1 * m * p.p1).norm() + (p2 * m * p2).norm());
            }
        }
        r
    }
}

fn osculating(
    g: &LegendreGrid,
    cd: &CurvatureData,
    k: usize,
    i: usize,
    j: usize,
) -> Result<Subspace> {
    let p = cd.at(i, j);
    let y = p.dir(if k == 1 { 2 } else { 1 });
    let field = |a: usize, b: usize| cd.at(a, b).sphere(k);
    let d1 = g.grid.d_dir_projective(i, j, y, field);
    let d2 = g.grid.d_dir2_projective(i, j, y, field);
    Subspace::span(&[p.sphere(k), d1, d2])
}

/// `S1 = span{s1, d_Y s1, d_Y d_Y s1}` with `Y` the second curvature
/// direction, `S2 = S1^perp`, and `N_X = [d_X P1, P1]`.
pub fn lie_cyclide_split(g: &LegendreGrid, cd: &CurvatureData) -> LieCyclideSplit {
    let (n_u, n_t) = (g.n_u(), g.n_theta());
    let mut points = Vec::with_capacity(n_u * n_t);
    let mut failures = Vec::new();
    for i in 0..n_u {
        for j in 0..n_t {
            if cd.at(i, j).umbilic {
                failures.push(((i, j), "umbilic".to_string()));
                points.push(None);
                continue;
            }
            let built = osculating(g, cd, 1, i, j).and_then(|s1| {
                if s1.signature() != SIG_21 {
                    return Err(Error::WrongSignature {
                        expected: SIG_21,
                        found: s1.signature(),
                    });
                }
                let p1 = s1.projector()?;
                let s2 = s1.orth_complement();
                let s2_consistency = osculating(g, cd, 2, i, j)
                    .map(|d| d.distance(&s2))
                    .unwrap_or(1.0);
                Ok(SplitPoint {
                    s1,
                    s2,
                    p1,
                    s2_consistency,
                })
            });
            match built {
                Ok(p) => points.push(Some(p)),
                Err(e) => {
                    failures.push(((i, j), e.to_string()));
                    points.push(None);
                }
            }
        }
    }
    let proj = |a: usize, b: usize| points[a * n_t + b].as_ref().map(|p: &SplitPoint| p.p1);
    let mut n_u_comp = Vec::with_capacity(n_u * n_t);
    let mut n_t_comp = Vec::with_capacity(n_u * n_t);
    for i in 0..n_u {
        for j in 0..n_t {
            let Some(p1) = proj(i, j) else {
                n_u_comp.push(None);
                n_t_comp.push(None);
                continue;
            };
            let comp = |x: Dir| -> Option<SkewMap> {
                // a stencil touching a failed point leaves N undefined here
                let missing = std::cell::Cell::new(false);
                let d = g.grid.d_dir(i, j, x, |a, b| {
                    proj(a, b).unwrap_or_else(|| {
                        missing.set(true);
                        Matrix6::zeros()
                    })
                });
                (!missing.get()).then(|| SkewMap(d * p1 - p1 * d))
            };
            n_u_comp.push(comp([1.0, 0.0]));
            n_t_comp.push(comp([0.0, 1.0]));
        }
    }
    LieCyclideSplit {
        n_u,
        n_theta: n_t,
        points,
        n_u_comp,
        n_t_comp,
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircularDir {
    None,
    Dir1,
    Dir2,
    Both,
}

impl CircularDir {
    pub fn from_flags(c1: bool, c2: bool) -> Self {
        match (c1, c2) {
            (true, true) => CircularDir::Both,
            (true, false) => CircularDir::Dir1,
            (false, true) => CircularDir::Dir2,
            (false, false) => CircularDir::None,
        }
    }

    pub fn includes_dir1(self) -> bool {
        matches!(self, CircularDir::Dir1 | CircularDir::Both)
    }

    pub fn includes_dir2(self) -> bool {
        matches!(self, CircularDir::Dir2 | CircularDir::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub circular: CircularDir,
    /// Max projective variation of `s_k` along `dir_k`, k = 1, 2.
    pub direct: [f64; 2],
    /// Max `|N(dir_k)|`, k = 1, 2.
    pub cyclide: [f64; 2],
    pub tol: f64,
    /// Points skipped (umbilic or failed splitting).
    pub skipped: usize,
}

/// Decides which curvature directions are circular, by the variation of the
/// curvature spheres and independently by the constancy of the Lie cyclides.
/// `tol = None` uses `max(1e-8, 10 h^2)` (floored at `1e-6`).
pub fn is_channel(g: &LegendreGrid, cd: &CurvatureData, tol: Option<f64>) -> Result<ChannelReport> {
    let split = lie_cyclide_split(g, cd);
    let tol = tol.unwrap_or_else(|| grid_tolerance(g.grid.h_max()).max(1e-6));
    let mut direct = [0.0f64; 2];
    let mut cyclide = [0.0f64; 2];
    let mut used = 0;
    let mut skipped = 0;
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let p = cd.at(i, j);
            if p.umbilic {
                skipped += 1;
                continue;
            }
            for k in [1usize, 2] {
                let s = p.sphere(k);
                let d = g
                    .grid
                    .d_dir_projective(i, j, p.dir(k), |a, b| cd.at(a, b).sphere(k));
                let var = (d - s * d.dot(&s)).norm();
                direct[k - 1] = direct[k - 1].max(var);
            }
            let n1 = split.n_along(i, j, p.dir1);
            let n2 = split.n_along(i, j, p.dir2);
            match (n1, n2) {
                (Some(a), Some(b)) => {
                    cyclide[0] = cyclide[0].max(a.norm());
                    cyclide[1] = cyclide[1].max(b.norm());
                    used += 1;
                }
                _ => skipped += 1,
            }
        }
    }
    if used == 0 {
        return Err(Error::degenerate(
            "no umbilic-free point with a Lie cyclide splitting",
            "whole grid",
        ));
    }
    let c = [direct[0] <= tol, direct[1] <= tol];
    let n = [cyclide[0] <= tol, cyclide[1] <= tol];
    if c != n {
        return Err(Error::CriteriaDisagree(format!(
            "sphere variation {:?} vs cyclide N {:?} at tolerance {:e}",
            direct, cyclide, tol
        )));
    }
    Ok(ChannelReport {
        circular: CircularDir::from_flags(c[0], c[1]),
        direct,
        cyclide,
        tol,
        skipped,
    })
}

/// A coordinate line of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridLine {
    /// The theta-line at fixed u index.
    Theta(usize),
    /// The u-line at fixed theta index.
    U(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalLine {
    pub residual: f64,
    /// The sphere (unit representative) best containing the line.
    pub sphere: LieVec,
    pub samples: usize,
}

/// Smallest singular value of the rows `(p_j, .)` restricted to `x1..x5`
/// (point spheres have `x6 = 0`); near zero exactly when one sphere contains
/// the whole line.
pub fn spherical_line_residual(g: &LegendreGrid, line: GridLine) -> Result<SphericalLine> {
    let frames: Vec<_> = match line {
        GridLine::Theta(i) if i < g.n_u() => (0..g.n_theta()).map(|j| g.frame(i, j)).collect(),
        GridLine::U(j) if j < g.n_theta() => (0..g.n_u()).map(|i| g.frame(i, j)).collect(),
        _ => return Err(Error::Invalid(format!("line {line:?} outside the grid"))),
    };
    let rows: Vec<LieVec> = frames
        .iter()
        .filter_map(|f| point_sphere_of(f))
        .map(|p| {
            let r = lower(&p);
            r / r.norm()
        })
        .collect();
    if rows.len() < 6 {
        return Err(Error::Invalid(format!(
            "spherical line test needs at least 6 finite samples, got {}",
            rows.len()
        )));
    }
    let mut m = DMatrix::zeros(rows.len(), 5);
    for (r, row) in rows.iter().enumerate() {
        for c in 0..5 {
            m[(r, c)] = row[c];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (k, residual) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc },
            );
    let mut sphere = LieVec::zeros();
    for c in 0..5 {
        sphere[c] = v_t[(k, c)];
    }
    // the radius coordinate makes the sphere null; a timelike kernel has no real points
    sphere[5] = inner(&sphere, &sphere).max(0.0).sqrt();
    Ok(SphericalLine {
        residual,
        sphere: sphere / sphere.norm(),
        samples: rows.len(),
    })
}
