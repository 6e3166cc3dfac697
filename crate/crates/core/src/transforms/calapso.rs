use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::channel::Omega0Structure;
use crate::error::{Error, Result};
use crate::grid::{Frame, LegendreGrid};
use crate::lie::{inner, metric, LieVec};
use crate::ode::rk4_trajectory;

/// Trivialising gauge `T(lambda)` of `d + lambda eta`, per u-sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeField {
    pub lambda: f64,
    pub t_inv: Vec<Matrix6<f64>>,
    pub t: Vec<Matrix6<f64>>,
    /// `max |T^T G T - G|` entrywise.
    pub ortho_defect: f64,
    /// Max edge residual of `(T^-1)' + lambda eta T^-1` (midpoint rule).
    pub gauge_residual: f64,
}

#[derive(Debug, Clone)]
pub struct CalapsoResult {
    pub gauge: GaugeField,
    /// `f^lambda = T(lambda) f`.
    pub f_lambda: LegendreGrid,
    /// `q^lambda_uu` from the transformed lift `T sigma1`.
    pub q_lambda: Vec<f64>,
}

impl CalapsoResult {
    /// `max |q^lambda_uu - q_uu|`.
    pub fn q_defect(&self, omega: &Omega0Structure) -> f64 {
        self.q_lambda
            .iter()
            .zip(&omega.q_uu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Calapso transform: integrates `(T^-1)' = -lambda eta(d/du) T^-1` from the
/// identity at the first u-sample and applies `T` to every element.
pub fn calapso_transform(
    g: &LegendreGrid,
    omega: &Omega0Structure,
    lambda: f64,
) -> Result<CalapsoResult> {
    if omega.eta_theta.iter().any(|e| e.0.amax() > 1e-10) {
        return Err(Error::Invalid(
            "Calapso transform needs eta(d/dtheta) = 0 (channel surface)".into(),
        ));
    }
    if g.n_u() != omega.sigma1.len() {
        return Err(Error::Shape(format!(
            "grid has {} u-rows, eta {}",
            g.n_u(),
            omega.sigma1.len()
        )));
    }
    let axis = g.grid.u;
    let u0 = axis.coord(0);
    let rhs = |u: f64, y: &Matrix6<f64>| omega.eta_u_at(u).0 * y * (-lambda);
    let t_inv = rk4_trajectory(rhs, u0, Matrix6::identity(), axis.h, axis.n);
    let mut t = Vec::with_capacity(axis.n);
    for (i, m) in t_inv.iter().enumerate() {
        t.push(m.try_inverse().ok_or_else(|| {
            Error::degenerate(
                "gauge matrix not invertible",
                format!("sample {i}, u = {}", axis.coord(i)),
            )
        })?);
    }
    let gm = metric();
    let ortho_defect = t
        .iter()
        .map(|m| (m.transpose() * gm * m - gm).amax())
        .fold(0.0, f64::max);
    let mut gauge_residual: f64 = 0.0;
    for k in 0..axis.n - 1 {
        let um = axis.coord(k) + 0.5 * axis.h;
        let mid = (t_inv[k] + t_inv[k + 1]) * 0.5;
        let r = (t_inv[k + 1] - t_inv[k]) / axis.h + omega.eta_u_at(um).0 * mid * lambda;
        gauge_residual = gauge_residual.max(r.amax());
    }
    let mut frames = Vec::with_capacity(g.grid.len());
    for (i, ti) in t.iter().enumerate().take(g.n_u()) {
        for j in 0..g.n_theta() {
            let f = g.frame(i, j);
            frames.push(Frame::normalized(ti * f.sigma, ti * f.tau));
        }
    }
    let mut grid = g.grid.clone();
    // the gauge does not close up around a loop in general
    grid.u.periodic = false;
    let f_lambda = LegendreGrid::new(grid, frames)?;
    // T' = lambda T eta, so (T sigma1)' = T (sigma1' + lambda eta sigma1)
    let q_lambda = (0..axis.n)
        .map(|i| {
            let d: LieVec =
                t[i] * (omega.dsigma1[i] + omega.eta_u[i].apply(&omega.sigma1[i]) * lambda);
            -omega.star.t2 * inner(&d, &d)
        })
        .collect();
    Ok(CalapsoResult {
        gauge: GaugeField {
            lambda,
            t_inv,
            t,
            ortho_defect,
            gauge_residual,
        },
        f_lambda,
        q_lambda,
    })
}
