//! Transformations of channel surfaces: Lie-Darboux, Calapso, Ribaucour, and
//! Dupin cyclides.

mod calapso;
mod darboux;
mod dupin;
mod ribaucour;

pub use calapso::{calapso_transform, CalapsoResult, GaugeField};
pub use darboux::{darboux_transform, lightcone_seed, DarbouxResult};
pub use dupin::{dupin_from_spheres, DupinCyclide, Provenance};
pub use ribaucour::{
    cyclide_congruence, darboux_pair_structure, on_cyclide_residual, ribaucour_cyclides,
    ribaucour_partner_curve, verify_ribaucour, CyclideReport, DarbouxPairReport, RibaucourResidual,
};

use serde::{Deserialize, Serialize};

use crate::channel::Omega0Structure;
use crate::lie::SkewMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub lambdas: Vec<f64>,
    /// Max plaquette holonomy defect `|H - I|` per lambda.
    pub defects: Vec<f64>,
}

/// Discrete curvature of `d + lambda eta`: holonomy around every plaquette,
/// with edge transports `cay(-lambda h eta(mid))`.
pub fn flatness_check(omega: &Omega0Structure, lambdas: &[f64]) -> FlatnessReport {
    let g = &omega.grid;
    let (nu, nt) = (g.n_u(), g.n_theta());
    let iu = if g.u.periodic { nu } else { nu - 1 };
    let it = if g.theta.periodic { nt } else { nt - 1 };
    let defects = lambdas
        .iter()
        .map(|&lambda| {
            let u_edge = |i: usize| {
                let um = g.u.coord(i) + 0.5 * g.u.h;
                (omega.eta_u_at(um) * (-lambda * g.u.h)).cayley()
            };
            let t_edge = |i: usize, j: usize| {
                let j1 = (j + 1) % nt;
                let mid = SkewMap((omega.eta_theta_at(i, j).0 + omega.eta_theta_at(i, j1).0) * 0.5);
                (mid * (-lambda * g.theta.h)).cayley()
            };
            let mut worst: f64 = 0.0;
            for i in 0..iu {
                let i1 = (i + 1) % nu;
                let a = u_edge(i);
                let a_inv = a.try_inverse().expect("Cayley image is invertible");
                for j in 0..it {
                    let b = t_edge(i1, j);
                    let c_inv = t_edge(i, j)
                        .try_inverse()
                        .expect("Cayley image is invertible");
                    // around (i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1) -> (i,j)
                    let h = c_inv * a_inv * b * a;
                    worst = worst.max((h - nalgebra::Matrix6::identity()).amax());
                }
            }
            worst
        })
        .collect();
    FlatnessReport {
        lambdas: lambdas.to_vec(),
        defects,
    }
}
