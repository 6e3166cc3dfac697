use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axis, Frame, LegendreGrid, ParamGrid, StencilOrder};
use crate::legendre::point_sphere_of;
use crate::lie::{inner, LiePoint, LieVec, Vec3};
use crate::subspace::{circle_point, Subspace, SIG_21};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromThreeSpheres,
    FromSplitting,
    /// A member of the cyclide congruence of a Ribaucour pair.
    FromRibaucourPair,
}

/// A Dupin cyclide `R^{4,2} = D (+) D^perp`, both of signature (2,1).
#[derive(Debug, Clone)]
pub struct DupinCyclide {
    pub d: Subspace,
    pub dperp: Subspace,
    pub provenance: Provenance,
    frame_d: [LieVec; 3],
    frame_dperp: [LieVec; 3],
}

impl DupinCyclide {
    pub fn new(d: Subspace, provenance: Provenance) -> Result<Self> {
        if d.dim() != 3 {
            return Err(Error::RankDeficient {
                expected: 3,
                found: d.dim(),
            });
        }
        if d.signature() != SIG_21 {
            return Err(Error::WrongSignature {
                expected: SIG_21,
                found: d.signature(),
            });
        }
        let dperp = d.orth_complement();
        let frame_d = d.pseudo_orthonormal_frame()?;
        let frame_dperp = dperp.pseudo_orthonormal_frame()?;
        Ok(DupinCyclide {
            d,
            dperp,
            provenance,
            frame_d,
            frame_dperp,
        })
    }

    /// Sphere of the `D` family at circle parameter `t`.
    pub fn sphere_d(&self, t: f64) -> LiePoint {
        circle_point(&self.frame_d, t)
    }

    /// Sphere of the `D^perp` family at circle parameter `t`.
    pub fn sphere_dperp(&self, t: f64) -> LiePoint {
        circle_point(&self.frame_dperp, t)
    }

    /// Max `|(x, a)|` over `n` samples `x` of the `D^perp` family and the given spheres.
    pub fn contact_residual(&self, spheres: &[LieVec], n: usize) -> f64 {
        let mut r: f64 = 0.0;
        for k in 0..n {
            let x = self
                .sphere_dperp(std::f64::consts::TAU * k as f64 / n as f64)
                .normalized();
            for a in spheres {
                r = r.max(inner(&x, a).abs() / a.norm());
            }
        }
        r
    }

    /// Max `|(x, y)|` over `n x n` pairs from the two families.
    pub fn duality_residual(&self, n: usize) -> f64 {
        let ts: Vec<f64> = (0..n)
            .map(|k| std::f64::consts::TAU * k as f64 / n as f64)
            .collect();
        let xs: Vec<LieVec> = ts.iter().map(|&t| self.sphere_d(t).normalized()).collect();
        let ys: Vec<LieVec> = ts
            .iter()
            .map(|&t| self.sphere_dperp(t).normalized())
            .collect();
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| inner(x, y).abs()))
            .fold(0.0, f64::max)
    }

    /// The cyclide as a doubly periodic Legendre map, element `L(t1) (+) L^perp(t2)`.
    pub fn legendre_grid(&self, n1: usize, n2: usize, order: StencilOrder) -> Result<LegendreGrid> {
        let a = Axis::periodic(0.0, std::f64::consts::TAU, n1);
        let b = Axis::periodic(0.0, std::f64::consts::TAU, n2);
        let grid = ParamGrid::new(a, b, order)?;
        let mut frames = Vec::with_capacity(n1 * n2);
        for i in 0..n1 {
            let x = *self.sphere_d(a.coord(i)).rep();
            for j in 0..n2 {
                frames.push(Frame::normalized(x, *self.sphere_dperp(b.coord(j)).rep()));
            }
        }
        LegendreGrid::new(grid, frames)
    }

    /// Euclidean point of the element `L(t1) (+) L^perp(t2)`.
    pub fn point(&self, t1: f64, t2: f64) -> Option<Vec3> {
        let f = Frame::normalized(*self.sphere_d(t1).rep(), *self.sphere_dperp(t2).rep());
        point_sphere_of(&f).map(|p| Vec3::new(p[0], p[1], p[2]))
    }
}

/// The cyclide enveloping all spheres in contact with `a`, `b`, `c`.
pub fn dupin_from_spheres(a: &LiePoint, b: &LiePoint, c: &LiePoint) -> Result<DupinCyclide> {
    let d = Subspace::span(&[*a.rep(), *b.rep(), *c.rep()])?;
    DupinCyclide::new(d, Provenance::FromThreeSpheres)
}
