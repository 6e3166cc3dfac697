//! Executes a scene: builds objects, runs the stages in order and collects
//! diagnostics, assertions and meshes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chansurf::channel::{
    conserved_quantity_residuals, envelope, omega0_form, special_lift, LiftNormalisation,
    Omega0Structure, VChoice,
};
use chansurf::conformal::{
    circle_congruence, curve_legendre_lift, ribaucour_curve_check, tube, ConformalCurve,
};
use chansurf::curve::sphere_curve;
use chansurf::legendre::{
    contact_residual_at, curvature_data, is_channel, lie_cyclide_split, point_sphere_of,
    spherical_line_residual, validate_legendre, ChannelReport, CircularDir, GridLine,
    LegendreReport, LegendreTolerances,
};
use chansurf::lie::{
    null_projection, nullity, parallel_transform_matrix, projective_distance, sphere_lift,
    LiePoint, LieVec, Vec3,
};
use chansurf::mesh::{mesh_cyclide, mesh_grid, MeshOutput};
use chansurf::surfaces::{
    cylinder_surface, ellipsoid_surface, round_sphere_surface, torus_surface,
};
use chansurf::transforms::{
    calapso_transform, cyclide_congruence, darboux_pair_structure, darboux_transform,
    dupin_from_spheres, flatness_check, lightcone_seed, on_cyclide_residual, ribaucour_cyclides,
    ribaucour_partner_curve, verify_ribaucour, DupinCyclide,
};
use chansurf::{legendre::grid_tolerance, LegendreGrid, SphereCurve, Subspace};

use crate::config::{
    LiftSpec, MeshRequest, ObjectDef, ObjectKind, Operation, SceneConfig, SphereDef, Stage,
    SurfacePreset,
};
use crate::report::{
    Assertion, Comparison, Diagnostics, MeshRecord, RunReport, StageError, StageReport,
};

/// Samples per circle when checking cyclide contact.
const CIRCLE_SAMPLES: usize = 64;
/// Default cyclide mesh resolution.
const CYCLIDE_MESH_N: usize = 48;
/// `[eta ^ eta]` vanishes to rounding.
const BRACKET_TOL: f64 = 1e-12;
const NULL_DRIFT_TOL: f64 = 1e-10;
const TRANSFORM_TOL: f64 = 1e-6;
const DUALITY_TOL: f64 = 1e-10;
const CALAPSO_TOL: f64 = 1e-8;

/// A named value in the scene.
pub enum Object {
    Curve(ConformalCurve),
    SphereCurve(SphereCurve),
    /// A Legendre grid, with the circular curvature sphere curve when known.
    Surface {
        grid: LegendreGrid,
        circular: Option<SphereCurve>,
    },
    Spheres(Vec<LiePoint>),
    Omega(Box<Omega0Structure>),
    Cyclide(DupinCyclide),
    Congruence(Vec<DupinCyclide>),
}

impl Object {
    fn kind(&self) -> &'static str {
        match self {
            Object::Curve(_) => "curve",
            Object::SphereCurve(_) => "sphere_curve",
            Object::Surface { .. } => "surface",
            Object::Spheres(_) => "spheres",
            Object::Omega(_) => "omega",
            Object::Cyclide(_) => "cyclide",
            Object::Congruence(_) => "cyclide congruence",
        }
    }
}

#[derive(Default)]
pub struct Registry(BTreeMap<String, Object>);

impl Registry {
    fn get(&self, name: &str) -> Result<&Object> {
        self.0
            .get(name)
            .ok_or_else(|| anyhow!("{name} is not defined"))
    }

    fn wrong(&self, name: &str, want: &str) -> anyhow::Error {
        let kind = self.0.get(name).map_or("nothing", |o| o.kind());
        anyhow!("{name} is a {kind}, expected a {want}")
    }

    fn curve(&self, name: &str) -> Result<&ConformalCurve> {
        match self.get(name)? {
            Object::Curve(c) => Ok(c),
            _ => Err(self.wrong(name, "curve")),
        }
    }

    /// Sphere curves, or the point-sphere lift of a curve.
    fn sphere_curve(&self, name: &str) -> Result<&SphereCurve> {
        match self.get(name)? {
            Object::SphereCurve(s) => Ok(s),
            Object::Curve(c) => Ok(&c.lift),
            _ => Err(self.wrong(name, "sphere curve")),
        }
    }

    fn surface(&self, name: &str) -> Result<(&LegendreGrid, Option<&SphereCurve>)> {
        match self.get(name)? {
            Object::Surface { grid, circular } => Ok((grid, circular.as_ref())),
            _ => Err(self.wrong(name, "surface")),
        }
    }

    fn channel_surface(&self, name: &str) -> Result<(&LegendreGrid, &SphereCurve)> {
        let (g, s) = self.surface(name)?;
        let s = s.ok_or_else(|| {
            anyhow!("{name} carries no circular sphere curve (build it as an envelope)")
        })?;
        Ok((g, s))
    }

    fn spheres(&self, name: &str) -> Result<&[LiePoint]> {
        match self.get(name)? {
            Object::Spheres(s) => Ok(s),
            _ => Err(self.wrong(name, "sphere list")),
        }
    }

    fn omega(&self, name: &str) -> Result<&Omega0Structure> {
        match self.get(name)? {
            Object::Omega(o) => Ok(o),
            _ => Err(self.wrong(name, "omega structure")),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|k| k.as_str())
    }
}

fn lie(v: &[f64; 6]) -> LieVec {
    LieVec::from_row_slice(v)
}

fn sphere(d: &SphereDef) -> LiePoint {
    sphere_lift(&Vec3::from(d.center), d.radius)
}

fn polynomial(c: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync {
    move |u| c.iter().rev().fold(0.0, |acc, &ck| acc * u + ck)
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn build_object(o: &ObjectDef) -> Result<Object> {
    Ok(match &o.kind {
        ObjectKind::Curve { center, u, p } => {
            let c = ConformalCurve::new(center, u.axis())?;
            Object::Curve(match p {
                Some(p) => c.with_p(&lie(p))?,
                None => c,
            })
        }
        ObjectKind::SphereCurve { center, radius, u } => {
            Object::SphereCurve(sphere_curve(center, radius, u.axis())?)
        }
        ObjectKind::Surface {
            preset,
            n_u,
            n_theta,
            order,
        } => {
            let (nu, nt, order) = (*n_u, *n_theta, *order);
            let grid = match preset {
                SurfacePreset::Cylinder { u } => cylinder_surface(u.0, u.1, nu, nt, order)?,
                SurfacePreset::Torus { big_r, r } => torus_surface(*big_r, *r, nu, nt, order)?,
                SurfacePreset::RoundSphere { u } => round_sphere_surface(u.0, u.1, nu, nt, order)?,
                SurfacePreset::Ellipsoid { axes, alpha, beta } => {
                    ellipsoid_surface(*axes, *alpha, *beta, nu, order)?
                }
            };
            Object::Surface {
                grid,
                circular: None,
            }
        }
        ObjectKind::Spheres { spheres } => Object::Spheres(spheres.iter().map(sphere).collect()),
    })
}

/// Collects the diagnostics and assertions of one stage.
struct StageCtx<'a> {
    id: &'a str,
    diag: Diagnostics,
    assertions: Vec<Assertion>,
}

impl StageCtx<'_> {
    fn le(&mut self, name: &str, measured: f64, tol: f64) {
        self.assertions
            .push(Assertion::new(self.id, name, measured, tol, Comparison::Le));
    }

    fn ge(&mut self, name: &str, measured: f64, tol: f64) {
        self.assertions
            .push(Assertion::new(self.id, name, measured, tol, Comparison::Ge));
    }

    fn legendre(&mut self, prefix: &str, r: &LegendreReport) {
        self.diag.set(&format!("{prefix}validation"), r);
        self.le(&format!("{prefix}isotropy"), r.isotropy, r.tol_isotropy);
        self.le(&format!("{prefix}contact"), r.contact, r.tol_contact);
        self.ge(&format!("{prefix}immersion"), r.immersion, r.tol_immersion);
    }

    /// Per direction: circular ones must pass both criteria, the others must fail the direct one.
    fn channel(&mut self, prefix: &str, r: &ChannelReport, expect: CircularDir, direct: bool) {
        let wanted = [expect.includes_dir1(), expect.includes_dir2()];
        for (k, &want) in wanted.iter().enumerate() {
            let dir = k + 1;
            let values = if direct {
                vec![("direct", r.direct[k]), ("cyclide", r.cyclide[k])]
            } else {
                vec![("cyclide", r.cyclide[k])]
            };
            for (what, v) in values {
                let name = format!("{prefix}{what}_dir{dir}");
                if want {
                    self.le(&name, v, r.tol);
                } else {
                    self.ge(&name, v, r.tol);
                }
            }
        }
    }
}

fn spherical_theta_lines(g: &LegendreGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..g.n_u() {
        worst = worst.max(spherical_line_residual(g, GridLine::Theta(i))?.residual);
    }
    Ok(worst)
}

/// Runs one stage, returning the object it defines.
fn run_stage(
    reg: &Registry,
    stage: &Stage,
    ctx: &mut StageCtx,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Object>> {
    use Operation::*;
    let out = match &stage.op {
        Envelope {
            curve,
            n_theta,
            order,
            ..
        } => {
            let s = reg.sphere_curve(curve)?;
            let grid = envelope(s, *n_theta, VChoice::Osculating, *order)?;
            ctx.diag.set("n_u", grid.n_u());
            ctx.diag.set("n_theta", grid.n_theta());
            ctx.diag.set("u_periodic", grid.grid.u.periodic);
            Object::Surface {
                grid,
                circular: Some(s.clone()),
            }
        }
        CurveLift {
            curve,
            n_theta,
            order,
            ..
        } => {
            let c = reg.curve(curve)?;
            let grid = curve_legendre_lift(c, *n_theta, *order)?;
            ctx.diag.set("n_u", grid.n_u());
            ctx.diag.set("n_theta", grid.n_theta());
            ctx.diag.set("p_residual", c.p_residual());
            Object::Surface {
                grid,
                circular: Some(c.lift.clone()),
            }
        }
        Tube {
            curve,
            radius,
            n_theta,
            order,
            ..
        } => {
            let c = reg.curve(curve)?;
            let grid = tube(c, *radius, *n_theta, *order)?;
            ctx.diag.set("radius", radius);
            Object::Surface {
                grid,
                circular: Some(c.tube_curve(*radius)),
            }
        }
        ParallelTransform { input, a, .. } => {
            let m = parallel_transform_matrix(*a);
            ctx.diag.set("a", a);
            match reg.get(input)? {
                Object::Surface { grid, circular } => Object::Surface {
                    grid: grid.transformed(&m),
                    circular: circular.as_ref().map(|s| s.transformed(m)),
                },
                Object::SphereCurve(s) => Object::SphereCurve(s.transformed(m)),
                Object::Curve(c) => Object::SphereCurve(c.tube_curve(*a)),
                _ => return Err(reg.wrong(input, "surface or sphere curve")),
            }
        }
        Validate { input } => {
            let (g, _) = reg.surface(input)?;
            ctx.legendre("", &validate_legendre(g, &LegendreTolerances::default()));
            return Ok(None);
        }
        Channel { input, expect } => {
            let (g, _) = reg.surface(input)?;
            let cd = curvature_data(g)?;
            let r = is_channel(g, &cd, None)?;
            ctx.diag.set("report", &r);
            ctx.diag.set("umbilics", cd.umbilic_count());
            ctx.le(
                "classification",
                if r.circular == *expect { 0.0 } else { 1.0 },
                0.0,
            );
            ctx.channel("", &r, *expect, true);
            return Ok(None);
        }
        LieCyclides { input, expect } => {
            let (g, _) = reg.surface(input)?;
            let cd = curvature_data(g)?;
            let split = lie_cyclide_split(g, &cd);
            ctx.diag.set("cross_inner", split.cross_inner());
            ctx.diag
                .set("block_diagonal_residual", split.block_diagonal_residual());
            ctx.diag.set("split_failures", split.failures.len());
            let r = is_channel(g, &cd, None)?;
            ctx.diag.set("cyclide", r.cyclide);
            ctx.diag.set("tol", r.tol);
            ctx.channel("", &r, *expect, false);
            return Ok(None);
        }
        SphericalLines { input, tol } => {
            let (g, _) = reg.surface(input)?;
            ctx.le("theta_lines", spherical_theta_lines(g)?, *tol);
            return Ok(None);
        }
        Omega {
            surface,
            lift,
            closedness_tol,
            expect_q,
            ..
        } => {
            let (g, s) = reg.channel_surface(surface)?;
            let norm = match lift {
                LiftSpec::Unit => LiftNormalisation::Unit,
                LiftSpec::AgainstP(p) => LiftNormalisation::AgainstP(*p),
            };
            let cd = curvature_data(g)?;
            let om = omega0_form(g, &cd, &special_lift(s, norm)?)?;
            let closedness = om.closedness_residual();
            let (qmin, qmax) = om
                .q_uu
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| {
                    (a.min(q), b.max(q))
                });
            ctx.diag.set("closedness", closedness);
            ctx.diag.set("skew_defect", om.skew_defect());
            ctx.diag.set("q_uu_min", qmin);
            ctx.diag.set("q_uu_max", qmax);
            ctx.le("bracket", om.bracket_residual(), BRACKET_TOL);
            if let Some(tol) = closedness_tol {
                ctx.le("closedness", closedness, *tol);
            }
            if let Some(e) = expect_q {
                ctx.le(
                    "q_uu",
                    max(om.q_uu.iter().map(|q| (q - e.value).abs())),
                    e.tol,
                );
            }
            Object::Omega(Box::new(om))
        }
        ConservedQuantity {
            omega,
            p,
            lambdas,
            tol,
            expect_fail,
        } => {
            let om = reg.omega(omega)?;
            let r = conserved_quantity_residuals(om, &lie(p), lambdas);
            ctx.diag.set("report", &r);
            for (l, res) in r.lambdas.iter().zip(&r.residuals) {
                let name = format!("residual[lambda={l}]");
                if *expect_fail {
                    ctx.ge(&name, *res, *tol);
                } else {
                    ctx.le(&name, *res, *tol);
                }
            }
            if !expect_fail {
                ctx.le("normalisation", r.normalisation_defect, *tol);
            }
            return Ok(None);
        }
        Flatness {
            omega,
            lambdas,
            tol,
        } => {
            let r = flatness_check(reg.omega(omega)?, lambdas);
            for (l, d) in r.lambdas.iter().zip(&r.defects) {
                ctx.le(&format!("holonomy[lambda={l}]"), *d, *tol);
            }
            return Ok(None);
        }
        Darboux {
            surface,
            omega,
            m,
            seed,
            ..
        } => {
            let (g, _) = reg.surface(surface)?;
            let om = reg.omega(omega)?;
            let spheres = reg.spheres(&seed.spheres)?;
            ensure!(
                spheres.len() == 3,
                "seed span needs 3 spheres, {} has {}",
                seed.spheres,
                spheres.len()
            );
            let span = Subspace::span(&spheres.iter().map(|s| *s.rep()).collect::<Vec<_>>())?;
            let theta = seed.theta.unwrap_or_else(|| rng.gen::<f64>() * TAU);
            ctx.diag.set("m", m);
            ctx.diag.set("theta", theta);
            let phi0 = lightcone_seed(&span, theta)?;
            let r = darboux_transform(g, om, *m, &phi0)?;
            ctx.le("null_drift", r.null_drift, NULL_DRIFT_TOL);
            ctx.legendre("", &r.validation);
            let cdh = curvature_data(&r.hat_f)?;
            let ch = is_channel(&r.hat_f, &cdh, None)?;
            ctx.diag.set("channel", &ch);
            ctx.le("circular_dir1", ch.direct[0], ch.tol);
            ctx.le(
                "ribaucour",
                verify_ribaucour(&om.lift, &r.hat_curve)?.max,
                TRANSFORM_TOL,
            );
            let cd = curvature_data(g)?;
            let cy = ribaucour_cyclides(g, &cd, &r.hat_f, &cdh)?;
            ctx.diag.set("cyclide_duality", cy.duality);
            ctx.diag.set("cyclide_failures", cy.failures.len());
            ctx.le("cyclide_coincidence", cy.coincidence[0], TRANSFORM_TOL);
            ctx.le("cyclide_constancy", cy.constancy[0], TRANSFORM_TOL);
            ctx.le(
                "spherical_theta_lines",
                spherical_theta_lines(&r.hat_f)?,
                1e-8,
            );
            let pair = darboux_pair_structure(g, &om.lift, &r.hat_curve)?;
            ctx.diag
                .set("pair_normalisation", pair.normalisation_defect);
            ctx.diag.set("pair_closedness", pair.closedness);
            ctx.le("pair_parallel", pair.parallel_residual, TRANSFORM_TOL);
            ctx.le("pair_membership", pair.membership_residual, pair.tol);
            Object::Surface {
                grid: r.hat_f,
                circular: Some(r.hat_curve),
            }
        }
        Calapso {
            surface,
            omega,
            lambda,
            ..
        } => {
            let (g, _) = reg.surface(surface)?;
            let om = reg.omega(omega)?;
            let r = calapso_transform(g, om, *lambda)?;
            ctx.diag.set("lambda", lambda);
            ctx.diag.set("gauge_residual", r.gauge.gauge_residual);
            ctx.le("ortho_defect", r.gauge.ortho_defect, CALAPSO_TOL);
            ctx.le("q_defect", r.q_defect(om), CALAPSO_TOL);
            let cd = curvature_data(g)?;
            let cdl = curvature_data(&r.f_lambda)?;
            let ch = is_channel(&r.f_lambda, &cdl, None)?;
            ctx.diag.set("channel", &ch);
            ctx.le("circular_dir1", ch.direct[0], ch.tol);
            let mut sphere_map: f64 = 0.0;
            for i in 0..g.n_u() {
                for j in 0..g.n_theta() {
                    let pushed = r.gauge.t[i] * cd.at(i, j).s1;
                    sphere_map = sphere_map.max(projective_distance(&cdl.at(i, j).s1, &pushed));
                }
            }
            ctx.le("curvature_sphere_map", sphere_map, TRANSFORM_TOL);
            // T(lambda) is orthogonal only to the integration accuracy
            let pushed: Vec<LieVec> = (0..g.n_u()).map(|i| r.gauge.t[i] * om.sigma1[i]).collect();
            ctx.diag
                .set("circular_nullity", max(pushed.iter().map(nullity)));
            let values = pushed.iter().map(null_projection).collect();
            let circular = SphereCurve::sampled(r.f_lambda.grid.u, values)?;
            Object::Surface {
                grid: r.f_lambda,
                circular: Some(circular),
            }
        }
        Ribaucour {
            a,
            b,
            tol,
            expect_fail,
        } => {
            let r = match (reg.get(a)?, reg.get(b)?) {
                (Object::Curve(c1), Object::Curve(c2)) => ribaucour_curve_check(c1, c2)?,
                _ => verify_ribaucour(reg.sphere_curve(a)?, reg.sphere_curve(b)?)?,
            };
            ctx.diag.set("max", r.max);
            match expect_fail {
                None => ctx.le("residual", r.max, *tol),
                Some(min_abs_u) => {
                    let axis = *reg.sphere_curve(a)?.axis();
                    let far = (0..axis.n).filter(|&i| axis.coord(i).abs() >= *min_abs_u);
                    let least = far.map(|i| r.per_sample[i]).fold(f64::INFINITY, f64::min);
                    ctx.diag.set("min_abs_u", min_abs_u);
                    ctx.ge("residual_off_locus", least, *tol);
                }
            }
            return Ok(None);
        }
        TubeRibaucour { a, b, radii, tol } => {
            let (c1, c2) = (reg.curve(a)?, reg.curve(b)?);
            let curve = ribaucour_curve_check(c1, c2)?;
            let on_locus = curve.max <= *tol;
            ctx.diag.set("curve_max", curve.max);
            ctx.diag.set("ribaucour", on_locus);
            for r in radii {
                let t = verify_ribaucour(&c1.tube_curve(*r), &c2.tube_curve(*r))?;
                ctx.diag.set(&format!("tube_max[a={r}]"), t.max);
                let pairs = curve.per_sample.iter().zip(&t.per_sample);
                if on_locus {
                    ctx.le(
                        &format!("agreement[a={r}]"),
                        max(pairs.map(|(x, y)| (x - y).abs())),
                        *tol,
                    );
                } else {
                    // off the locus the residual values are gauge dependent; verdicts must still agree
                    let mismatched = pairs
                        .filter(|(x, y)| (**x <= *tol) != (**y <= *tol))
                        .count();
                    ctx.le(
                        &format!("verdict_mismatches[a={r}]"),
                        mismatched as f64,
                        0.0,
                    );
                }
            }
            return Ok(None);
        }
        CircleCongruence { a, b, tol } => {
            let cc = circle_congruence(reg.curve(a)?, reg.curve(b)?, *tol)?;
            let membership = max((0..cc.len()).map(|i| cc.membership(i)));
            let mut tangency: f64 = 0.0;
            for i in 0..cc.len() {
                let [t1, t2] = cc.tangency(i)?;
                tangency = tangency.max(t1).max(t2);
            }
            ctx.diag.set("circles", cc.len());
            ctx.le("membership", membership, *tol);
            ctx.le("tangency", tangency, *tol);
            return Ok(None);
        }
        RibaucourPartner {
            curve,
            beta,
            gamma,
            initial,
            ..
        } => {
            let s = reg.sphere_curve(curve)?;
            let hat0 = *sphere(initial).rep();
            let hat = ribaucour_partner_curve(
                s,
                &polynomial(beta.clone()),
                &polynomial(gamma.clone()),
                &hat0,
            )?;
            let tol = grid_tolerance(s.axis().h);
            ctx.le("ribaucour", verify_ribaucour(s, &hat)?.max, tol);
            let drift = max((0..hat.len()).map(|i| nullity(&hat.value(i))));
            ctx.diag.set("null_drift", drift);
            Object::SphereCurve(hat)
        }
        CyclideCongruence {
            surface,
            partner,
            tol,
            ..
        } => {
            let (g, s) = reg.channel_surface(surface)?;
            let (gh, sh) = reg.channel_surface(partner)?;
            ensure!(
                g.n_u() == gh.n_u(),
                "{surface} and {partner} have different u-grids"
            );
            let cys = cyclide_congruence(s, sh)?;
            let (mut contact, mut on_cyclide, mut spherical) = (0.0f64, 0.0f64, 0.0f64);
            let mut skipped = 0;
            for (i, cy) in cys.iter().enumerate() {
                contact =
                    contact.max(cy.contact_residual(&[s.value(i), sh.value(i)], CIRCLE_SAMPLES));
                for grid in [g, gh] {
                    for j in 0..grid.n_theta() {
                        match point_sphere_of(grid.frame(i, j)) {
                            Some(p) => on_cyclide = on_cyclide.max(on_cyclide_residual(cy, &p)?),
                            None => skipped += 1,
                        }
                    }
                    spherical =
                        spherical.max(spherical_line_residual(grid, GridLine::Theta(i))?.residual);
                }
            }
            ctx.diag.set("cyclides", cys.len());
            ctx.diag.set("points_at_infinity", skipped);
            ctx.le("contact", contact, *tol);
            ctx.le("curvature_lines_on_cyclides", on_cyclide, *tol);
            ctx.le("spherical_theta_lines", spherical, *tol);
            Object::Congruence(cys)
        }
        Dupin { spheres, .. } => {
            let sp = reg.spheres(spheres)?;
            ensure!(
                sp.len() == 3,
                "a cyclide needs 3 spheres, {spheres} has {}",
                sp.len()
            );
            let cy = dupin_from_spheres(&sp[0], &sp[1], &sp[2])?;
            let reps: Vec<_> = sp.iter().map(|s| *s.rep()).collect();
            ctx.le("duality", cy.duality_residual(CIRCLE_SAMPLES), DUALITY_TOL);
            ctx.le(
                "contact",
                cy.contact_residual(&reps, CIRCLE_SAMPLES),
                DUALITY_TOL,
            );
            Object::Cyclide(cy)
        }
    };
    Ok(Some(out))
}

fn op_name(op: &Operation) -> String {
    match serde_json::to_value(op) {
        Ok(serde_json::Value::Object(m)) => m
            .get("op")
            .and_then(|v| v.as_str())
            .unwrap_or("?")
            .to_string(),
        _ => "?".to_string(),
    }
}

/// The result of running a scene, before anything is written.
pub struct Outcome {
    pub report: RunReport,
    pub registry: Registry,
    pub meshes: Vec<(MeshRequest, MeshOutput)>,
}

fn build_mesh(reg: &Registry, req: &MeshRequest) -> Result<MeshOutput> {
    match reg.get(&req.object)? {
        Object::Surface { grid, .. } => {
            let mut m = mesh_grid(grid)?;
            let contact = m
                .samples
                .iter()
                .map(|&[i, j]| contact_residual_at(grid, i, j))
                .collect();
            m.add_scalar("contact", contact)?;
            Ok(m)
        }
        Object::Cyclide(cy) => Ok(mesh_cyclide(cy, req.resolution.unwrap_or(CYCLIDE_MESH_N))?),
        Object::Congruence(cys) => {
            let every = req.every.unwrap_or(1).max(1);
            let mut out: Option<MeshOutput> = None;
            for (k, cy) in cys.iter().enumerate().step_by(every) {
                let mut m = match mesh_cyclide(cy, req.resolution.unwrap_or(CYCLIDE_MESH_N)) {
                    Ok(m) => m,
                    // a member entirely at infinity contributes nothing
                    Err(_) => continue,
                };
                m.add_scalar("member", vec![k as f64; m.vertices.len()])?;
                match &mut out {
                    Some(acc) => acc.merge(&m),
                    None => out = Some(m),
                }
            }
            out.ok_or_else(|| anyhow!("no member of {} has a finite point", req.object))
        }
        other => bail!("{} is a {}, which has no mesh", req.object, other.kind()),
    }
}

/// Runs the scene in memory. Stops at the first failing stage; assertion
/// failures do not stop the run.
pub fn execute(cfg: &SceneConfig) -> Outcome {
    let mut report = RunReport::new(&cfg.name, cfg.seed);
    let mut reg = Registry::default();
    let mut meshes = Vec::new();
    let fail = |report: &mut RunReport, stage: &str, e: anyhow::Error| {
        report.error = Some(StageError {
            stage: stage.to_string(),
            message: format!("{e:#}"),
        })
    };
    for o in &cfg.objects {
        match build_object(o).with_context(|| format!("building {}", o.name)) {
            Ok(v) => {
                reg.0.insert(o.name.clone(), v);
            }
            Err(e) => {
                fail(&mut report, &format!("objects/{}", o.name), e);
                report.finish();
                return Outcome {
                    report,
                    registry: reg,
                    meshes,
                };
            }
        }
    }
    for (k, stage) in cfg.pipeline.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        let mut ctx = StageCtx {
            id: &stage.id,
            diag: Diagnostics::default(),
            assertions: Vec::new(),
        };
        let result = run_stage(&reg, stage, &mut ctx, &mut rng);
        report.stages.push(StageReport {
            id: stage.id.clone(),
            op: op_name(&stage.op),
            diagnostics: ctx.diag.0,
        });
        report.assertions.extend(ctx.assertions);
        match result {
            Ok(Some(obj)) => {
                let name = stage
                    .op
                    .output()
                    .expect("stages returning objects name them");
                reg.0.insert(name.to_string(), obj);
            }
            Ok(None) => {}
            Err(e) => {
                fail(&mut report, &stage.id, e);
                break;
            }
        }
    }
    if report.error.is_none() {
        for req in &cfg.outputs.meshes {
            match build_mesh(&reg, req) {
                Ok(m) => {
                    report.meshes.push(MeshRecord {
                        object: req.object.clone(),
                        file: req.file.clone(),
                        vertices: m.vertices.len(),
                        faces: m.faces.len(),
                        dropped_vertices: m.dropped_vertices,
                        dropped_cells: m.dropped_cells,
                        scalars_file: m.scalars_csv().map(|_| scalars_file(&req.file)),
                    });
                    meshes.push((req.clone(), m));
                }
                Err(e) => {
                    fail(&mut report, &format!("outputs/{}", req.file), e);
                    meshes.clear();
                    break;
                }
            }
        }
    }
    report.finish();
    Outcome {
        report,
        registry: reg,
        meshes,
    }
}

fn scalars_file(obj: &str) -> String {
    let stem = obj.strip_suffix(".obj").unwrap_or(obj);
    format!("{stem}.scalars.csv")
}

/// Writes `report.json`, `residuals.csv` and the meshes into `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: &str| {
        std::fs::write(dir.join(name), text)
            .with_context(|| format!("writing {}", dir.join(name).display()))
    };
    for (req, m) in &outcome.meshes {
        write(&req.file, &m.to_obj())?;
        if let Some(csv) = m.scalars_csv() {
            write(&scalars_file(&req.file), &csv)?;
        }
    }
    write("residuals.csv", &outcome.report.residuals_csv())?;
    write("report.json", &outcome.report.to_json())?;
    Ok(())
}
