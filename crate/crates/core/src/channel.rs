//! Envelopes of sphere curves, the special lift and the channel 1-form `eta`.

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::curve::{SphereCurve, EPS_REG};
use crate::error::{Error, Result};
use crate::grid::{Axis, Frame, LegendreGrid, ParamGrid, StencilOrder};
use crate::legendre::{is_channel, CurvatureData};
use crate::lie::{form_bracket, inner, projective_distance, wedge, LieVec, SkewMap};
use crate::subspace::{circle_point, Subspace, SIG_21};

/// Which 3-space `V(u)` containing `s^(1)` defines the second sphere family `V^perp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", content = "vector", rename_all = "snake_case")]
pub enum VChoice {
    /// `span{s, s', s''}`: the Lie cyclide splitting, curvature-line adapted.
    #[default]
    Osculating,
    /// `span{s, s', x}` for a fixed vector `x`.
    Through([f64; 6]),
}

/// Pseudo-orthonormal frames of `V(u)^perp` along the curve.
#[derive(Debug, Clone)]
pub struct NormalFrames {
    pub frames: Vec<[LieVec; 3]>,
    /// Whether the u-axis could be kept periodic.
    pub periodic: bool,
    /// Frame mismatch after one loop, before any correction (0 for open curves).
    pub holonomy: f64,
}

fn v_space(s: &SphereCurve, choice: VChoice, i: usize) -> Result<Subspace> {
    let [v, d1, d2] = s.jet_at(i);
    let third = match choice {
        VChoice::Osculating => d2,
        VChoice::Through(x) => LieVec::from_row_slice(&x),
    };
    let sub = Subspace::span(&[v, d1, third]).map_err(|_| {
        Error::degenerate(
            "V(u) is not 3-dimensional",
            format!("sample {i}, u = {}", s.u(i)),
        )
    })?;
    if sub.signature() != SIG_21 {
        return Err(Error::degenerate(
            format!(
                "V(u) has signature {} (inflection of the sphere curve)",
                sub.signature()
            ),
            format!("sample {i}, u = {}", s.u(i)),
        ));
    }
    Ok(sub)
}

fn reorthonormalize(e: [LieVec; 3], q: &Matrix6<f64>) -> [LieVec; 3] {
    let [e1, e2, e3] = e.map(|x| q * x);
    let e3 = e3 / (-inner(&e3, &e3)).sqrt();
    let e1 = e1 + e3 * inner(&e1, &e3);
    let e1 = e1 / inner(&e1, &e1).sqrt();
    let e2 = e2 + e3 * inner(&e2, &e3) - e1 * inner(&e2, &e1);
    let e2 = e2 / inner(&e2, &e2).sqrt();
    [e1, e2, e3]
}

fn rotate(e: &[LieVec; 3], psi: f64) -> [LieVec; 3] {
    let (s, c) = psi.sin_cos();
    [e[0] * c + e[1] * s, e[1] * c - e[0] * s, e[2]]
}

/// Parallel frames of the normal bundle `V^perp`: the generator `[Q', Q]` of
/// the projector field is integrated with midpoint Cayley steps, so that
/// `E' in V` and the u-lines of the envelope are curvature lines.
pub fn normal_frames(s: &SphereCurve, choice: VChoice) -> Result<NormalFrames> {
    let axis = *s.axis();
    let n = axis.n;
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        q.push(Matrix6::identity() - v_space(s, choice, i)?.projector()?);
    }
    let start = v_space(s, choice, 0)?
        .orth_complement()
        .pseudo_orthonormal_frame()?;
    let step = |e: &[LieVec; 3], qa: &Matrix6<f64>, qb: &Matrix6<f64>| -> [LieVec; 3] {
        let dq = (qb - qa) / axis.h;
        let qm = (qa + qb) * 0.5;
        let k = SkewMap((dq * qm - qm * dq) * axis.h);
        let c = k.cayley();
        reorthonormalize(e.map(|x| c * x), qb)
    };
    let mut frames = Vec::with_capacity(n);
    frames.push(start);
    for i in 1..n {
        let next = step(&frames[i - 1], &q[i - 1], &q[i]);
        frames.push(next);
    }
    let mut periodic = axis.periodic;
    let mut holonomy = 0.0;
    if axis.periodic {
        let closed = step(&frames[n - 1], &q[n - 1], &q[0]);
        holonomy = (0..3)
            .map(|k| (closed[k] - start[k]).amax())
            .fold(0.0, f64::max);
        if holonomy > 1e-8 {
            // a pure rotation about E3 is spread evenly along the loop; boosts cannot be
            let rotation_only = (closed[2] - start[2]).amax() < 1e-6;
            if rotation_only {
                let psi = inner(&closed[0], &start[1]).atan2(inner(&closed[0], &start[0]));
                for (i, f) in frames.iter_mut().enumerate() {
                    *f = rotate(f, -psi * i as f64 / n as f64);
                }
            } else {
                periodic = false;
            }
        }
    }
    Ok(NormalFrames {
        frames,
        periodic,
        holonomy,
    })
}

/// Envelope of a sphere curve: `f(u, theta) = s(u) (+) c(u, theta)` with
/// `c` running through the lightcone circle of `V(u)^perp`.
pub fn envelope(
    s: &SphereCurve,
    n_theta: usize,
    choice: VChoice,
    order: StencilOrder,
) -> Result<LegendreGrid> {
    s.check_regular(EPS_REG)?;
    let nf = normal_frames(s, choice)?;
    let mut u_axis = *s.axis();
    u_axis.periodic = nf.periodic;
    let t_axis = Axis::periodic(0.0, std::f64::consts::TAU, n_theta);
    let grid = ParamGrid::new(u_axis, t_axis, order)?;
    let mut frames = Vec::with_capacity(grid.len());
    for i in 0..u_axis.n {
        let sigma = s.value(i);
        for j in 0..n_theta {
            let tau = circle_point(&nf.frames[i], t_axis.coord(j));
            frames.push(Frame::normalized(sigma, *tau.rep()));
        }
    }
    LegendreGrid::new(grid, frames)
}

/// Gauge of the special lift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "p", rename_all = "snake_case")]
pub enum LiftNormalisation {
    /// The representative as given.
    Raw,
    /// Euclidean length one.
    Unit,
    /// `(sigma, p) = -1`.
    AgainstP([f64; 6]),
}

/// A theta-independent lift of the circular curvature sphere with a chosen gauge.
pub fn special_lift(s: &SphereCurve, norm: LiftNormalisation) -> Result<SphereCurve> {
    match norm {
        LiftNormalisation::Raw => Ok(s.clone()),
        LiftNormalisation::Unit => {
            let base = s.clone();
            Ok(s.rescaled(move |u| {
                let [v, d1, d2] = base.jet(u);
                let n = v.norm();
                let n1 = v.dot(&d1) / n;
                let n2 = (d1.norm_squared() + v.dot(&d2) - n1 * n1) / n;
                [
                    1.0 / n,
                    -n1 / (n * n),
                    -n2 / (n * n) + 2.0 * n1 * n1 / (n * n * n),
                ]
            }))
        }
        LiftNormalisation::AgainstP(p) => {
            let p = LieVec::from_row_slice(&p);
            for i in 0..s.len() {
                let v = s.value(i);
                if inner(&v, &p).abs() <= 1e-12 * v.norm() * p.norm() {
                    return Err(Error::degenerate(
                        "(sigma, p) = 0",
                        format!("sample {i}, u = {}", s.u(i)),
                    ));
                }
            }
            let base = s.clone();
            Ok(s.rescaled(move |u| {
                let [v, d1, d2] = base.jet(u);
                let (a, a1, a2) = (inner(&v, &p), inner(&d1, &p), inner(&d2, &p));
                [
                    -1.0 / a,
                    a1 / (a * a),
                    a2 / (a * a) - 2.0 * a1 * a1 / (a * a * a),
                ]
            }))
        }
    }
}

/// Sign choice of the Hodge star on the two curvature line fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarConvention {
    /// Sign on `T1^*` (the circular direction, here `d theta`).
    pub t1: f64,
    /// Sign on `T2^*` (here `du`).
    pub t2: f64,
}

/// `star = -id` on `T1^*`, `+id` on `T2^*`.
pub const STAR: StarConvention = StarConvention { t1: -1.0, t2: 1.0 };

/// The closed 1-form `eta = sigma1 ^ star d sigma1` of a channel surface.
#[derive(Debug, Clone)]
pub struct Omega0Structure {
    pub grid: ParamGrid,
    /// The special lift, evaluable between samples.
    pub lift: SphereCurve,
    pub sigma1: Vec<LieVec>,
    pub dsigma1: Vec<LieVec>,
    /// `eta(d/du)` per u-sample.
    pub eta_u: Vec<SkewMap>,
    /// `eta(d/dtheta)` per grid point (vanishes on channel surfaces).
    pub eta_theta: Vec<SkewMap>,
    pub star: StarConvention,
    /// Coefficient of the quadratic differential `q = q_uu du^2`.
    pub q_uu: Vec<f64>,
}

impl Omega0Structure {
    /// `eta(d/du)` at an arbitrary parameter, from the lift's jet.
    pub fn eta_u_at(&self, u: f64) -> SkewMap {
        let [v, d1, _] = self.lift.jet(u);
        wedge(&v, &(d1 * self.star.t2))
    }

    pub fn eta_theta_at(&self, i: usize, j: usize) -> &SkewMap {
        &self.eta_theta[self.grid.idx(i, j)]
    }

    /// `max |d_u eta_theta - d_theta eta_u|` over the grid.
    pub fn closedness_residual(&self) -> f64 {
        let g = &self.grid;
        let mut r: f64 = 0.0;
        for i in 0..g.n_u() {
            for j in 0..g.n_theta() {
                let a = g.d_u(i, j, |a, b| self.eta_theta[g.idx(a, b)].0);
                let b = g.d_theta(i, j, |a, _| self.eta_u[a].0);
                r = r.max((a - b).amax());
            }
        }
        r
    }

    /// `max |[eta ^ eta]|` over the grid.
    pub fn bracket_residual(&self) -> f64 {
        let g = &self.grid;
        let mut r: f64 = 0.0;
        for i in 0..g.n_u() {
            for j in 0..g.n_theta() {
                let t = self.eta_theta_at(i, j);
                let b = form_bracket(&self.eta_u[i], t, &self.eta_u[i], t);
                r = r.max(b.0.amax());
            }
        }
        r
    }

    pub fn skew_defect(&self) -> f64 {
        self.eta_u
            .iter()
            .chain(&self.eta_theta)
            .map(SkewMap::skew_defect)
            .fold(0.0, f64::max)
    }
}

/// Builds `eta` for a channel grid whose circular direction is `d/dtheta`.
/// `lift` must represent the circular curvature sphere `s1` at every sample.
pub fn omega0_form(
    g: &LegendreGrid,
    cd: &CurvatureData,
    lift: &SphereCurve,
) -> Result<Omega0Structure> {
    let report = is_channel(g, cd, None)?;
    if !report.circular.includes_dir1() {
        return Err(Error::Invalid(format!(
            "not a channel surface in dir1 (variation {:e}, tolerance {:e})",
            report.direct[0], report.tol
        )));
    }
    if lift.len() != g.n_u() {
        return Err(Error::Shape(format!(
            "lift has {} samples, grid {} u-rows",
            lift.len(),
            g.n_u()
        )));
    }
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let p = cd.at(i, j);
            if p.dir1[0].abs() > 1e-6 {
                return Err(Error::Invalid(format!(
                    "circular direction {:?} is not the theta direction at ({i}, {j})",
                    p.dir1
                )));
            }
            let d = projective_distance(&lift.value(i), &p.s1);
            if d > 1e-6 {
                return Err(Error::Tolerance {
                    what: format!("lift vs curvature sphere s1 at ({i}, {j})"),
                    value: d,
                    tol: 1e-6,
                });
            }
        }
    }
    let grid = g.grid.clone();
    let star = STAR;
    let mut sigma1 = Vec::with_capacity(g.n_u());
    let mut dsigma1 = Vec::with_capacity(g.n_u());
    let mut eta_u = Vec::with_capacity(g.n_u());
    let mut q_uu = Vec::with_capacity(g.n_u());
    for i in 0..g.n_u() {
        let [v, d1, _] = lift.jet_at(i);
        eta_u.push(wedge(&v, &(d1 * star.t2)));
        q_uu.push(-inner(&(d1 * star.t2), &d1));
        sigma1.push(v);
        dsigma1.push(d1);
    }
    let mut eta_theta = Vec::with_capacity(grid.len());
    for i in 0..g.n_u() {
        for j in 0..g.n_theta() {
            let dt = grid.d_theta(i, j, |a, _| sigma1[a]);
            eta_theta.push(wedge(&sigma1[i], &(dt * star.t1)));
        }
    }
    Ok(Omega0Structure {
        grid,
        lift: lift.clone(),
        sigma1,
        dsigma1,
        eta_u,
        eta_theta,
        star,
        q_uu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservedQuantityReport {
    pub lambdas: Vec<f64>,
    /// Max edge residual `|Dp + lambda eta p|` for each lambda.
    pub residuals: Vec<f64>,
    /// `max |(sigma1, p) + 1|`.
    pub normalisation_defect: f64,
}

/// Edge residuals of `p(lambda) = p + lambda sigma1` without checking the gauge.
pub fn conserved_quantity_residuals(
    omega: &Omega0Structure,
    p: &LieVec,
    lambdas: &[f64],
) -> ConservedQuantityReport {
    let axis = omega.grid.u;
    let edges = if axis.periodic { axis.n } else { axis.n - 1 };
    let normalisation_defect = omega
        .sigma1
        .iter()
        .map(|s| (inner(s, p) + 1.0).abs())
        .fold(0.0, f64::max);
    let residuals = lambdas
        .iter()
        .map(|&lambda| {
            let mut r: f64 = 0.0;
            for e in 0..edges {
                let (ua, ub) = (axis.coord(e), axis.coord(e) + axis.h);
                let pa = p + omega.lift.jet(ua)[0] * lambda;
                let pb = p + omega.lift.jet(ub)[0] * lambda;
                let um = 0.5 * (ua + ub);
                let pm = p + omega.lift.jet(um)[0] * lambda;
                let res = (pb - pa) / axis.h + omega.eta_u_at(um).apply(&pm) * lambda;
                r = r.max(res.amax());
            }
            r
        })
        .collect();
    ConservedQuantityReport {
        lambdas: lambdas.to_vec(),
        residuals,
        normalisation_defect,
    }
}

/// The linear conserved quantity check; the lift must satisfy `(sigma1, p) = -1`.
pub fn conserved_quantity(
    omega: &Omega0Structure,
    p: &LieVec,
    lambdas: &[f64],
) -> Result<ConservedQuantityReport> {
    let rep = conserved_quantity_residuals(omega, p, lambdas);
    if rep.normalisation_defect > 1e-10 {
        return Err(Error::Tolerance {
            what: "lift normalisation (sigma1, p) + 1".into(),
            value: rep.normalisation_defect,
            tol: 1e-10,
        });
    }
    Ok(rep)
}
