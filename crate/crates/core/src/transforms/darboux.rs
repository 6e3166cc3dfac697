use crate::channel::Omega0Structure;
use crate::curve::SphereCurve;
use crate::error::{Error, Result};
use crate::grid::{Axis, Frame, LegendreGrid};
use crate::legendre::{validate_legendre, LegendreReport, LegendreTolerances};
use crate::lie::{inner, nullity, wedge, LiePoint, LieVec};
use crate::ode::{rk4_step, rk4_trajectory};
use crate::subspace::{Subspace, SIG_21};

/// Null drift above this aborts the transform.
pub const NULL_DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DarbouxResult {
    pub m: f64,
    /// The parallel section `phi` per u-sample (unnormalised).
    pub hat_s: Vec<LieVec>,
    /// `hat_s` as a sphere curve on the u-axis of the transform.
    pub hat_curve: SphereCurve,
    /// Frames `(phi, s0)`: the circular curvature sphere comes first.
    pub hat_f: LegendreGrid,
    /// Max `|(phi, phi)| / |phi|^2` along the flow.
    pub null_drift: f64,
    /// The sphere congruence shared by `f` and `hat_f`, per grid point.
    pub s0: Vec<LiePoint>,
    pub validation: LegendreReport,
}

/// A point on the lightcone circle of a `(2,1)` subspace, the admissible seeds
/// for [`darboux_transform`].
pub fn lightcone_seed(span: &Subspace, theta: f64) -> Result<LieVec> {
    if span.signature() != SIG_21 {
        return Err(Error::WrongSignature {
            expected: SIG_21,
            found: span.signature(),
        });
    }
    Ok(*span.lightcone_circle(theta)?.rep())
}

/// Dense output of the parallel section: one RK4 step from the nearest sample,
/// derivatives from the ODE itself (`phi' = -m eta phi`, `eta' = sigma1 ^ sigma1''`).
fn parallel_section_curve(
    axis: Axis,
    lift: SphereCurve,
    m: f64,
    t2: f64,
    samples: Vec<LieVec>,
) -> Result<SphereCurve> {
    let start = axis.start;
    SphereCurve::analytic_within(
        axis,
        move |u| {
            let eta = |x: f64| {
                let [v, d1, _] = lift.jet(x);
                wedge(&v, &(d1 * t2))
            };
            let k = (((u - start) / axis.h).round().max(0.0) as usize).min(samples.len() - 1);
            let uk = axis.coord(k);
            let phi = rk4_step(
                &|x, y: &LieVec| eta(x).apply(y) * (-m),
                uk,
                samples[k],
                u - uk,
            );
            let [v, _, d2] = lift.jet(u);
            let e = eta(u);
            let d_phi = e.apply(&phi) * (-m);
            let d2_phi = (wedge(&v, &(d2 * t2)).apply(&phi) + e.apply(&d_phi)) * (-m);
            [phi, d_phi, d2_phi]
        },
        NULL_DRIFT_TOL,
    )
}

/// Lie-Darboux transform with parameter `m`: `phi' = -m eta(d/du) phi`,
/// `hat_f = (f cap phi^perp) (+) phi`.
pub fn darboux_transform(
    g: &LegendreGrid,
    omega: &Omega0Structure,
    m: f64,
    phi0: &LieVec,
) -> Result<DarbouxResult> {
    if m == 0.0 {
        return Err(Error::Invalid("Darboux parameter m must be nonzero".into()));
    }
    if phi0.norm() == 0.0 || nullity(phi0) > 1e-10 {
        return Err(Error::NotNull {
            residual: nullity(phi0),
        });
    }
    let phi0 = phi0 / phi0.norm();
    let s_start = omega.sigma1[0];
    let c = inner(&phi0, &s_start).abs() / s_start.norm();
    if c < 1e-6 {
        return Err(Error::degenerate(
            format!("initial sphere orthogonal to sigma1 (|(phi0, sigma1)| = {c:e})"),
            "u0",
        ));
    }
    let axis = g.grid.u;
    let u0 = axis.coord(0);
    let rhs = |u: f64, y: &LieVec| omega.eta_u_at(u).apply(y) * (-m);
    let mut traj = rk4_trajectory(
        rhs,
        u0,
        phi0,
        axis.h,
        if axis.periodic { axis.n + 1 } else { axis.n },
    );
    let mut periodic = axis.periodic;
    if axis.periodic {
        // keep the loop only if the section closes up (projectively)
        let closed = traj.pop().expect("n + 1 samples");
        periodic = crate::lie::projective_distance(&closed, &phi0) <= 1e-8;
    }
    let null_drift = traj.iter().map(nullity).fold(0.0, f64::max);
    if null_drift > NULL_DRIFT_TOL {
        return Err(Error::Tolerance {
            what: "null drift of the parallel section".into(),
            value: null_drift,
            tol: NULL_DRIFT_TOL,
        });
    }
    let mut frames = Vec::with_capacity(g.grid.len());
    let mut s0 = Vec::with_capacity(g.grid.len());
    for (i, phi) in traj.iter().enumerate() {
        for j in 0..g.n_theta() {
            let line = g.line_orthogonal_to(i, j, phi);
            if line.norm() < 1e-10 * phi.norm() {
                return Err(Error::degenerate(
                    "element orthogonal to the parallel section",
                    format!("({i}, {j}), u = {}", axis.coord(i)),
                ));
            }
            let f = Frame::normalized(*phi, line);
            s0.push(LiePoint::from_null(f.tau));
            frames.push(f);
        }
    }
    let mut grid = g.grid.clone();
    grid.u.periodic = periodic;
    let hat_f = LegendreGrid::new(grid, frames)?;
    let hat_axis = Axis { periodic, ..axis };
    let hat_curve =
        parallel_section_curve(hat_axis, omega.lift.clone(), m, omega.star.t2, traj.clone())?;
    let validation = validate_legendre(&hat_f, &LegendreTolerances::default());
    Ok(DarbouxResult {
        m,
        hat_s: traj,
        hat_curve,
        hat_f,
        null_drift,
        s0,
        validation,
    })
}
