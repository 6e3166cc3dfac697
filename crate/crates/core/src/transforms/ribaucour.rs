use std::cell::Cell;

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use super::dupin::{DupinCyclide, Provenance};
use crate::curve::{SphereCurve, EPS_REG};
use crate::error::{Error, Result};
use crate::grid::{unit, Axis, LegendreGrid};
use crate::legendre::{grid_tolerance, CurvatureData};
use crate::lie::{curly_wedge, inner, projective_distance, wedge, LieVec, SkewMap};
use crate::subspace::Subspace;

/// `(s, hat s)` below this (relative) counts as a contact element.
const TOL_CONTACT: f64 = 1e-10;

fn same_axis(a: &Axis, b: &Axis) -> bool {
    a.n == b.n && (a.start - b.start).abs() <= 1e-12 && (a.h - b.h).abs() <= 1e-12
}

fn check_pair(s: &SphereCurve, hat: &SphereCurve) -> Result<()> {
    if !same_axis(s.axis(), hat.axis()) {
        return Err(Error::Shape(
            "sphere curves live on different u-grids".into(),
        ));
    }
    for i in 0..s.len() {
        let (a, b) = (s.value(i), hat.value(i));
        if inner(&a, &b).abs() <= TOL_CONTACT * a.norm() * b.norm() {
            return Err(Error::degenerate(
                "s and hat s span a contact element",
                format!("sample {i}, u = {}", s.u(i)),
            ));
        }
    }
    Ok(())
}

fn span3(vs: [LieVec; 3], what: &str, i: usize, u: f64) -> Result<Subspace> {
    let sub = Subspace::span(&vs.map(unit))?;
    if sub.dim() != 3 {
        return Err(Error::degenerate(
            format!("{what} has rank {}", sub.dim()),
            format!("sample {i}, u = {u}"),
        ));
    }
    Ok(sub)
}

/// Nullity drift accepted on an integrated partner curve.
pub const PARTNER_NULL_TOL: f64 = 1e-8;

/// Generates a Ribaucour partner by integrating
/// `hat s' = alpha sigma + beta sigma' + gamma hat s` with the nullity-preserving
/// `alpha = -beta (sigma', hat s) / (sigma, hat s)`.
pub fn ribaucour_partner_curve(
    s: &SphereCurve,
    beta: &dyn Fn(f64) -> f64,
    gamma: &dyn Fn(f64) -> f64,
    hat0: &LieVec,
) -> Result<SphereCurve> {
    let axis = *s.axis();
    let rhs = |u: f64, y: &LieVec| -> LieVec {
        let [v, d1, _] = s.jet(u);
        let b = beta(u);
        let alpha = -b * inner(&d1, y) / inner(&v, y);
        v * alpha + d1 * b + y * gamma(u)
    };
    let mut y = *hat0;
    let mut out = Vec::with_capacity(axis.n);
    for i in 0..axis.n {
        let v = s.value(i);
        if !y.iter().all(|x| x.is_finite())
            || inner(&v, &y).abs() <= TOL_CONTACT * v.norm() * y.norm()
        {
            return Err(Error::degenerate(
                "partner sphere in contact with s",
                format!("sample {i}, u = {}", axis.coord(i)),
            ));
        }
        out.push(y);
        if i + 1 < axis.n {
            y = crate::ode::rk4_step(&rhs, axis.coord(i), y, axis.h);
        }
    }
    // RK4 only preserves nullity to truncation order
    let hat = SphereCurve::sampled_within(
        Axis {
            periodic: false,
            ..axis
        },
        out,
        PARTNER_NULL_TOL,
    )?;
    hat.check_regular(EPS_REG)?;
    Ok(hat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibaucourResidual {
    /// Distance between `span{s, s', hat s}` and `span{hat s, hat s', s}` per sample.
    pub per_sample: Vec<f64>,
    pub max: f64,
}

/// Checks `s^(1) (+) hat s = hat s^(1) (+) s` sample by sample.
pub fn verify_ribaucour(s: &SphereCurve, hat: &SphereCurve) -> Result<RibaucourResidual> {
    check_pair(s, hat)?;
    let mut per_sample = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let [a, da, _] = s.jet_at(i);
        let [b, db, _] = hat.jet_at(i);
        let u = s.u(i);
        let left = span3([a, da, b], "span{s, s', hat s}", i, u)?;
        let right = span3([b, db, a], "span{hat s, hat s', s}", i, u)?;
        per_sample.push(left.distance(&right));
    }
    let max = per_sample.iter().copied().fold(0.0, f64::max);
    Ok(RibaucourResidual { per_sample, max })
}

/// The cyclide congruence `D(u) = span{s, s', hat s}` of a Ribaucour pair of sphere curves.
pub fn cyclide_congruence(s: &SphereCurve, hat: &SphereCurve) -> Result<Vec<DupinCyclide>> {
    check_pair(s, hat)?;
    (0..s.len())
        .map(|i| {
            let [a, da, _] = s.jet_at(i);
            let d = span3([a, da, hat.value(i)], "span{s, s', hat s}", i, s.u(i))?;
            DupinCyclide::new(d, Provenance::FromRibaucourPair)
        })
        .collect()
}

/// `|(P_D p, P_D p)| / |p|^2`: zero exactly when the point sphere `p` lies on the cyclide.
pub fn on_cyclide_residual(d: &DupinCyclide, p: &LieVec) -> Result<f64> {
    let q = d.d.projector()? * p;
    Ok(inner(&q, &q).abs() / p.norm_squared())
}

/// Ribaucour cyclide congruences of a pair of Legendre grids on the same parameter grid.
#[derive(Debug, Clone)]
pub struct CyclideReport {
    /// `D_k = span{s_k, hat s_k, d_Y s_k}` (`Y` the other curvature direction), per point.
    pub d1: Vec<Option<Subspace>>,
    pub d2: Vec<Option<Subspace>>,
    /// Max distance between `D_k` and `span{s_k, hat s_k, d_Y hat s_k}`.
    pub coincidence: [f64; 2],
    /// Max distance between `D_k^perp` and `span{s0, d_X s0, d_X d_X s0}`, `X = dir_k`.
    pub duality: [f64; 2],
    /// Max `|d_{dir_k} P_{D_k}|`.
    pub constancy: [f64; 2],
    /// Max `|dir_k - hat dir_k|` (curvature directions must correspond).
    pub direction_mismatch: f64,
    pub failures: Vec<((usize, usize), String)>,
}

fn common_sphere(f: &LegendreGrid, fh: &LegendreGrid, i: usize, j: usize) -> Result<LieVec> {
    let e = f.element(i, j)?;
    let eh = fh.element(i, j)?;
    let cap = e.intersect(&eh, 1e-8);
    if cap.dim() != 1 {
        return Err(Error::RankDeficient {
            expected: 1,
            found: cap.dim(),
        });
    }
    Ok(cap.basis_vectors()[0])
}

/// Builds the two cyclide congruences of a Ribaucour pair `(f, hat f)` and
/// measures their coincidence, duality with the enveloped congruence `s0`,
/// and constancy along the curvature directions.
pub fn ribaucour_cyclides(
    f: &LegendreGrid,
    cd: &CurvatureData,
    fh: &LegendreGrid,
    cdh: &CurvatureData,
) -> Result<CyclideReport> {
    if f.n_u() != fh.n_u() || f.n_theta() != fh.n_theta() {
        return Err(Error::Shape("Ribaucour pair on different grids".into()));
    }
    let gr = &f.grid;
    let (nu, nt) = (f.n_u(), f.n_theta());
    let mut failures = Vec::new();
    let mut s0 = vec![None; nu * nt];
    let mut direction_mismatch: f64 = 0.0;
    for i in 0..nu {
        for j in 0..nt {
            let (p, ph) = (cd.at(i, j), cdh.at(i, j));
            if p.umbilic || ph.umbilic {
                failures.push(((i, j), "umbilic".to_string()));
                continue;
            }
            for k in 1..=2 {
                let (a, b) = (p.dir(k), ph.dir(k));
                direction_mismatch = direction_mismatch.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
            match common_sphere(f, fh, i, j) {
                Ok(v) => {
                    let close = [p.s1, p.s2, ph.s1, ph.s2]
                        .iter()
                        .any(|c| projective_distance(c, &v) <= 1e-6);
                    if close {
                        failures.push(((i, j), "s0 coincides with a curvature sphere".to_string()));
                    } else {
                        s0[gr.idx(i, j)] = Some(v);
                    }
                }
                Err(e) => failures.push(((i, j), format!("f cap hat f: {e}"))),
            }
        }
    }
    let mut d = [vec![None; nu * nt], vec![None; nu * nt]];
    let mut coincidence = [0.0f64; 2];
    let mut duality = [0.0f64; 2];
    for i in 0..nu {
        for j in 0..nt {
            let k_idx = gr.idx(i, j);
            let Some(v0) = s0[k_idx] else { continue };
            for k in 1..=2usize {
                let y = cd.at(i, j).dir(3 - k);
                let x = cd.at(i, j).dir(k);
                let sk = cd.at(i, j).sphere(k);
                let hk = cdh.at(i, j).sphere(k);
                let ds = gr.d_dir_projective(i, j, y, |a, b| cd.at(a, b).sphere(k));
                let dh = gr.d_dir_projective(i, j, y, |a, b| cdh.at(a, b).sphere(k));
                let built = Subspace::span(&[sk, hk, unit(ds)]).and_then(|dk| {
                    let dkh = Subspace::span(&[sk, hk, unit(dh)])?;
                    let missing = Cell::new(false);
                    let field = |a: usize, b: usize| {
                        s0[gr.idx(a, b)].unwrap_or_else(|| {
                            missing.set(true);
                            v0
                        })
                    };
                    let d1 = gr.d_dir_projective(i, j, x, field);
                    let d2 = gr.d_dir2_projective(i, j, x, field);
                    let dual = Subspace::span(&[v0, unit(d1), unit(d2)])?;
                    Ok((dk, dkh, (!missing.get()).then_some(dual)))
                });
                match built {
                    Ok((dk, dkh, dual)) => {
                        coincidence[k - 1] = coincidence[k - 1].max(dk.distance(&dkh));
                        if let Some(dual) = dual {
                            duality[k - 1] =
                                duality[k - 1].max(dk.orth_complement().distance(&dual));
                        }
                        d[k - 1][k_idx] = Some(dk);
                    }
                    Err(e) => failures.push(((i, j), format!("D{k}: {e}"))),
                }
            }
        }
    }
    let mut constancy = [0.0f64; 2];
    for (k, dk) in d.iter().enumerate() {
        let proj: Vec<Option<Matrix6<f64>>> = dk
            .iter()
            .map(|s| s.as_ref().and_then(|s| s.projector().ok()))
            .collect();
        for i in 0..nu {
            for j in 0..nt {
                if proj[gr.idx(i, j)].is_none() {
                    continue;
                }
                let missing = Cell::new(false);
                let dp = gr.d_dir(i, j, cd.at(i, j).dir(k + 1), |a, b| {
                    proj[gr.idx(a, b)].unwrap_or_else(|| {
                        missing.set(true);
                        Matrix6::zeros()
                    })
                });
                if !missing.get() {
                    constancy[k] = constancy[k].max(dp.norm());
                }
            }
        }
    }
    let [d1, d2] = d;
    Ok(CyclideReport {
        d1,
        d2,
        coincidence,
        duality,
        constancy,
        direction_mismatch,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct DarbouxPairReport {
    /// `eta(d/du) = sigma1 ^ hat sigma1'` per u-sample.
    pub eta_u: Vec<SkewMap>,
    /// Max violation of `(sigma1, hat sigma1) = -1`, `(sigma1', hat sigma1) = 0`, `(hat sigma1', sigma1) = 0`.
    pub normalisation_defect: f64,
    /// Max edge residual of `d hat sigma1 + eta hat sigma1`.
    pub parallel_residual: f64,
    /// Max `|(hat sigma1', x)|` over frame vectors `x` of `f`: `eta` must take values in `f ^ f^perp`.
    pub membership_residual: f64,
    /// `|d sigma1 curlywedge d hat sigma1|` (theta components vanish for channel pairs).
    pub closedness: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Rescales the circular curvature sphere lifts of a channel Ribaucour pair so
/// that they become a Lie-Darboux pair with parameter 1 for
/// `eta = sigma1 ^ d hat sigma1`, and verifies the result against `f`.
pub fn darboux_pair_structure(
    f: &LegendreGrid,
    s: &SphereCurve,
    hat: &SphereCurve,
) -> Result<DarbouxPairReport> {
    check_pair(s, hat)?;
    if s.len() != f.n_u() {
        return Err(Error::Shape(format!(
            "curve has {} samples, grid {} u-rows",
            s.len(),
            f.n_u()
        )));
    }
    let axis = *s.axis();
    // a'/a = -(s', hat s)/(s, hat s) makes (sigma1)' orthogonal to hat s
    let log_rate = |u: f64| {
        let ([a, da, _], [b, _, _]) = (s.jet(u), hat.jet(u));
        -inner(&da, &b) / inner(&a, &b)
    };
    let a_of = crate::ode::rk4_trajectory(
        |u, a: &f64| a * log_rate(u),
        axis.coord(0),
        1.0,
        axis.h,
        axis.n,
    );
    let lifts = |i: usize, a: f64| {
        let ([v, dv, _], [w, dw, _]) = (s.jet_at(i), hat.jet_at(i));
        let c = inner(&v, &w);
        let dc = inner(&dv, &w) + inner(&v, &dw);
        let da = a * log_rate(s.u(i));
        let b = -1.0 / (a * c);
        let db = (da * c + a * dc) / (a * c).powi(2);
        (v * a, dv * a + v * da, w * b, dw * b + w * db)
    };
    let mut eta_u = Vec::with_capacity(axis.n);
    let mut hat_lift = Vec::with_capacity(axis.n);
    let mut normalisation_defect: f64 = 0.0;
    let mut membership_residual: f64 = 0.0;
    let mut closedness: f64 = 0.0;
    for (i, &a) in a_of.iter().enumerate() {
        let (s1, ds1, h1, dh1) = lifts(i, a);
        let scale = ds1.norm().max(dh1.norm()).max(1.0) * s1.norm().max(h1.norm());
        normalisation_defect = normalisation_defect
            .max((inner(&s1, &h1) + 1.0).abs())
            .max(inner(&ds1, &h1).abs() / scale)
            .max(inner(&dh1, &s1).abs() / scale);
        for j in 0..f.n_theta() {
            let fr = f.frame(i, j);
            let m = inner(&dh1, &fr.sigma).abs().max(inner(&dh1, &fr.tau).abs()) / dh1.norm();
            membership_residual = membership_residual.max(m);
        }
        let z = LieVec::zeros();
        closedness = closedness.max(curly_wedge(&ds1, &z, &dh1, &z).norm());
        eta_u.push(wedge(&s1, &dh1));
        hat_lift.push(h1);
    }
    // eta hat sigma1 at any u, from the same normalisation (a integrated from the nearest sample)
    let eta_hat = |k: usize, u: f64| {
        let a = crate::ode::rk4_step(
            &|x, a: &f64| a * log_rate(x),
            axis.coord(k),
            a_of[k],
            u - axis.coord(k),
        );
        let ([v, dv, _], [w, dw, _]) = (s.jet(u), hat.jet(u));
        let c = inner(&v, &w);
        let dc = inner(&dv, &w) + inner(&v, &dw);
        let da = a * log_rate(u);
        let b = -1.0 / (a * c);
        let db = (da * c + a * dc) / (a * c).powi(2);
        let (s1, h1, dh1) = (v * a, w * b, dw * b + w * db);
        wedge(&s1, &dh1).apply(&h1)
    };
    let mut parallel_residual: f64 = 0.0;
    for k in 0..axis.n - 1 {
        let (ua, ub) = (axis.coord(k), axis.coord(k) + axis.h);
        // Simpson average of eta hat sigma1 over the edge against the difference quotient
        let avg = (eta_hat(k, ua) + eta_hat(k, 0.5 * (ua + ub)) * 4.0 + eta_hat(k, ub)) / 6.0;
        let r = (hat_lift[k + 1] - hat_lift[k]) / axis.h + avg;
        parallel_residual = parallel_residual.max(r.amax());
    }
    let tol = grid_tolerance(axis.h);
    let pass =
        normalisation_defect <= tol && parallel_residual <= tol && membership_residual <= tol;
    Ok(DarbouxPairReport {
        eta_u,
        normalisation_defect,
        parallel_residual,
        membership_residual,
        closedness,
        tol,
        pass,
    })
}
