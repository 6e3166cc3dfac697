//! Scene configuration: named objects, an ordered pipeline of operations and
//! the requested outputs.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use chansurf::curve::{CenterCurve, RadiusProfile};
use chansurf::grid::{Axis, StencilOrder};
use chansurf::legendre::CircularDir;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub objects: Vec<ObjectDef>,
    pub pipeline: Vec<Stage>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub start: f64,
    pub end: f64,
    pub n: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl AxisSpec {
    pub fn axis(&self) -> Axis {
        if self.periodic {
            Axis::periodic(self.start, self.end - self.start, self.n)
        } else {
            Axis::closed(self.start, self.end, self.n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereDef {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfacePreset {
    Cylinder {
        u: (f64, f64),
    },
    Torus {
        big_r: f64,
        r: f64,
    },
    RoundSphere {
        u: (f64, f64),
    },
    Ellipsoid {
        axes: [f64; 3],
        alpha: (f64, f64),
        beta: (f64, f64),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectKind {
    /// A curve in conformal 3-space (its point-sphere lift).
    Curve {
        center: CenterCurve,
        u: AxisSpec,
        /// Timelike `p` of the conformal geometry (default `e6`).
        #[serde(default)]
        p: Option<[f64; 6]>,
    },
    /// A sphere curve with centers on a preset curve and a radius profile.
    SphereCurve {
        center: CenterCurve,
        radius: RadiusProfile,
        u: AxisSpec,
    },
    /// A surface given by points and unit normals.
    Surface {
        preset: SurfacePreset,
        n_u: usize,
        n_theta: usize,
        #[serde(default)]
        order: StencilOrder,
    },
    Spheres {
        spheres: Vec<SphereDef>,
    },
}

// unknown keys are rejected by the flattened, tagged enum
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: ObjectKind,
}

/// Gauge of the special lift used for `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "p", rename_all = "snake_case")]
pub enum LiftSpec {
    Unit,
    AgainstP([f64; 6]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub value: f64,
    pub tol: f64,
}

/// Initial sphere of a Darboux transform: a point of the lightcone circle of
/// the span of three spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarbouxSeed {
    /// Name of a `spheres` object with exactly three spheres.
    pub spheres: String,
    /// Circle parameter; drawn from the scene seed when absent.
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    /// Envelope of a sphere curve.
    Envelope {
        curve: String,
        n_theta: usize,
        #[serde(default)]
        order: StencilOrder,
        out: String,
    },
    /// Envelope of the point spheres of a curve (the zero tube).
    CurveLift {
        curve: String,
        n_theta: usize,
        #[serde(default)]
        order: StencilOrder,
        out: String,
    },
    Tube {
        curve: String,
        radius: f64,
        n_theta: usize,
        #[serde(default)]
        order: StencilOrder,
        out: String,
    },
    ParallelTransform {
        input: String,
        a: f64,
        out: String,
    },
    Validate {
        input: String,
    },
    Channel {
        input: String,
        expect: CircularDir,
    },
    LieCyclides {
        input: String,
        expect: CircularDir,
    },
    SphericalLines {
        input: String,
        tol: f64,
    },
    Omega {
        surface: String,
        lift: LiftSpec,
        /// Bound on the closedness residual of `eta`, when asserted.
        #[serde(default)]
        closedness_tol: Option<f64>,
        /// Expected constant value of `q_uu`.
        #[serde(default)]
        expect_q: Option<Expect>,
        out: String,
    },
    ConservedQuantity {
        omega: String,
        p: [f64; 6],
        lambdas: Vec<f64>,
        tol: f64,
        /// Negative control: every residual must exceed `tol`.
        #[serde(default)]
        expect_fail: bool,
    },
    Flatness {
        omega: String,
        lambdas: Vec<f64>,
        tol: f64,
    },
    Darboux {
        surface: String,
        omega: String,
        m: f64,
        seed: DarbouxSeed,
        out: String,
    },
    Calapso {
        surface: String,
        omega: String,
        lambda: f64,
        out: String,
    },
    /// Ribaucour check of two curves (or sphere curves) by correspondence.
    Ribaucour {
        a: String,
        b: String,
        tol: f64,
        /// Negative control: residual must reach `tol` wherever `|u| >= min_abs_u`.
        #[serde(default)]
        expect_fail: Option<f64>,
    },
    /// Curve-level against tube-level Ribaucour residuals.
    TubeRibaucour {
        a: String,
        b: String,
        radii: Vec<f64>,
        tol: f64,
    },
    CircleCongruence {
        a: String,
        b: String,
        tol: f64,
    },
    RibaucourPartner {
        curve: String,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        initial: SphereDef,
        out: String,
    },
    /// The cyclide congruence `span{s, s', hat s}` of a surface and its transform.
    CyclideCongruence {
        surface: String,
        partner: String,
        tol: f64,
        out: String,
    },
    Dupin {
        spheres: String,
        out: String,
    },
}

// unknown keys are rejected by the flattened, tagged enum
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub id: String,
    #[serde(flatten)]
    pub op: Operation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshRequest {
    pub object: String,
    pub file: String,
    /// Samples per circle for cyclides.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// For cyclide congruences: mesh every `every`-th member.
    #[serde(default)]
    pub every: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub meshes: Vec<MeshRequest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError(pub String);

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid scene: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

impl Operation {
    /// Names read by the stage.
    pub fn inputs(&self) -> Vec<&str> {
        use Operation::*;
        match self {
            Envelope { curve, .. } | CurveLift { curve, .. } | Tube { curve, .. } => vec![curve],
            RibaucourPartner { curve, .. } => vec![curve],
            ParallelTransform { input, .. }
            | Validate { input }
            | Channel { input, .. }
            | LieCyclides { input, .. }
            | SphericalLines { input, .. } => vec![input],
            Omega { surface, .. } => vec![surface],
            ConservedQuantity { omega, .. } | Flatness { omega, .. } => vec![omega],
            Darboux {
                surface,
                omega,
                seed,
                ..
            } => vec![surface, omega, &seed.spheres],
            Calapso { surface, omega, .. } => vec![surface, omega],
            Ribaucour { a, b, .. } | TubeRibaucour { a, b, .. } | CircleCongruence { a, b, .. } => {
                vec![a, b]
            }
            CyclideCongruence {
                surface, partner, ..
            } => vec![surface, partner],
            Dupin { spheres, .. } => vec![spheres],
        }
    }

    /// Name written by the stage, if any.
    pub fn output(&self) -> Option<&str> {
        use Operation::*;
        match self {
            Envelope { out, .. }
            | CurveLift { out, .. }
            | Tube { out, .. }
            | ParallelTransform { out, .. }
            | Omega { out, .. }
            | Darboux { out, .. }
            | Calapso { out, .. }
            | RibaucourPartner { out, .. }
            | CyclideCongruence { out, .. }
            | Dupin { out, .. } => Some(out),
            _ => None,
        }
    }

    fn tolerances(&self) -> Vec<f64> {
        use Operation::*;
        match self {
            SphericalLines { tol, .. }
            | ConservedQuantity { tol, .. }
            | Flatness { tol, .. }
            | Ribaucour { tol, .. }
            | TubeRibaucour { tol, .. }
            | CircleCongruence { tol, .. }
            | CyclideCongruence { tol, .. } => vec![*tol],
            Omega {
                closedness_tol,
                expect_q,
                ..
            } => closedness_tol
                .iter()
                .copied()
                .chain(expect_q.map(|e| e.tol))
                .collect(),
            _ => vec![],
        }
    }
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let cfg: SceneConfig =
            serde_json::from_str(text).map_err(|e| SchemaError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SchemaError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Schema checks beyond parsing: version, unique names, definition before
    /// use, positive tolerances and grid sizes.
    pub fn validate(&self) -> Result<(), SchemaError> {
        let err = |m: String| Err(SchemaError(m));
        if self.version != SCHEMA_VERSION {
            return err(format!(
                "unsupported version {} (expected {SCHEMA_VERSION})",
                self.version
            ));
        }
        let mut defined = BTreeSet::new();
        for o in &self.objects {
            if !defined.insert(o.name.as_str()) {
                return err(format!("object {} defined twice", o.name));
            }
            let sizes: Vec<usize> = match &o.kind {
                ObjectKind::Curve { u, .. } | ObjectKind::SphereCurve { u, .. } => vec![u.n],
                ObjectKind::Surface { n_u, n_theta, .. } => vec![*n_u, *n_theta],
                ObjectKind::Spheres { spheres } => vec![spheres.len()],
            };
            if sizes.iter().any(|&n| n < 2) {
                return err(format!("object {} has fewer than 2 samples", o.name));
            }
            if let ObjectKind::Surface {
                preset: SurfacePreset::Ellipsoid { .. },
                n_u,
                n_theta,
                ..
            } = &o.kind
            {
                if n_u != n_theta {
                    return err(format!("ellipsoid {} needs n_u == n_theta", o.name));
                }
            }
        }
        let mut ids = BTreeSet::new();
        for s in &self.pipeline {
            if !ids.insert(s.id.as_str()) {
                return err(format!("stage id {} used twice", s.id));
            }
            for name in s.op.inputs() {
                if !defined.contains(name) {
                    return err(format!("stage {} uses {name} before it is defined", s.id));
                }
            }
            if s.op.tolerances().iter().any(|t| t.is_nan() || *t <= 0.0) {
                return err(format!("stage {} has a non-positive tolerance", s.id));
            }
            if let Some(out) = s.op.output() {
                if !defined.insert(out) {
                    return err(format!("stage {} redefines {out}", s.id));
                }
            }
        }
        for m in &self.outputs.meshes {
            if !defined.contains(m.object.as_str()) {
                return err(format!("mesh of undefined object {}", m.object));
            }
            let p = Path::new(&m.file);
            if p.is_absolute() || p.components().count() != 1 {
                return err(format!("mesh file {} must be a plain file name", m.file));
            }
        }
        Ok(())
    }
}
