//! Built-in scenes. Each demo is an ordinary [`SceneConfig`], so
//! `demo <name> --emit-config` prints a file that `run` accepts.

use serde_json::json;

use crate::config::SceneConfig;

pub const DEMOS: &[&str] = &[
    "cylinder-darboux",
    "torus-cyclide",
    "channel-detection",
    "cylinder-omega",
    "cylinder-calapso",
    "ribaucour-curves",
];

/// Demo parameters from the command line.
#[derive(Debug, Clone, Copy)]
pub struct DemoParams {
    /// Samples per circle; the cylinder demos use `4 n + 1` samples along the axis.
    pub grid: usize,
    pub seed: u64,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams { grid: 64, seed: 1 }
    }
}

const E6: [f64; 6] = [0.0, 0.0, 0.0, 0.0, 0.0, 1.0];

/// Three spheres spanning a (2,1) subspace away from the unit cylinder.
fn seed_spheres() -> serde_json::Value {
    json!({
        "name": "seed",
        "type": "spheres",
        "spheres": [
            {"center": [3.0, 0.0, 0.0], "radius": 0.5},
            {"center": [-1.5, 2.6, 0.0], "radius": 0.5},
            {"center": [-1.5, -2.6, 0.0], "radius": 0.5}
        ]
    })
}

fn z_axis(n_u: usize) -> serde_json::Value {
    json!({
        "name": "axis",
        "type": "curve",
        "center": {"type": "line", "point": [0.0, 0.0, 0.0], "direction": [0.0, 0.0, 1.0]},
        "u": {"start": -1.0, "end": 1.0, "n": n_u}
    })
}

fn line_tube(n_u: usize) -> serde_json::Value {
    json!({
        "name": "spheres",
        "type": "sphere_curve",
        "center": {"type": "line", "point": [0.0, 0.0, 0.0], "direction": [0.0, 0.0, 1.0]},
        "radius": {"type": "constant", "value": 1.0},
        "u": {"start": -1.0, "end": 1.0, "n": n_u}
    })
}

fn cylinder_darboux(p: DemoParams) -> serde_json::Value {
    let (nt, nu) = (p.grid, 4 * p.grid + 1);
    json!({
        "version": 1,
        "name": "cylinder-darboux",
        "seed": p.seed,
        "objects": [z_axis(nu), seed_spheres()],
        "pipeline": [
            {"id": "zero-tube", "op": "curve_lift", "curve": "axis", "n_theta": nt, "order": "fourth", "out": "zero_tube"},
            {"id": "cylinder", "op": "parallel_transform", "input": "zero_tube", "a": 1.0, "out": "cylinder"},
            {"id": "validate-cylinder", "op": "validate", "input": "cylinder"},
            {"id": "channel-cylinder", "op": "channel", "input": "cylinder", "expect": "both"},
            {"id": "eta", "op": "omega", "surface": "cylinder", "lift": {"type": "against_p", "p": E6},
             "closedness_tol": 1e-6, "expect_q": {"value": -1.0, "tol": 1e-10}, "out": "eta"},
            {"id": "darboux", "op": "darboux", "surface": "cylinder", "omega": "eta", "m": 1.0,
             "seed": {"spheres": "seed"}, "out": "transform"},
            {"id": "cyclides", "op": "cyclide_congruence", "surface": "cylinder", "partner": "transform",
             "tol": 1e-8, "out": "congruence"}
        ],
        "outputs": {"meshes": [
            {"object": "cylinder", "file": "cylinder.obj"},
            {"object": "transform", "file": "darboux.obj"},
            {"object": "congruence", "file": "cyclides.obj", "every": (nu / 8).max(1), "resolution": 32}
        ]}
    })
}

fn torus_cyclide(p: DemoParams) -> serde_json::Value {
    let n = p.grid;
    let third = std::f64::consts::TAU / 3.0;
    let tube_sphere =
        |a: f64| json!({"center": [2.0 * a.cos(), 2.0 * a.sin(), 0.0], "radius": 1.0});
    json!({
        "version": 1,
        "name": "torus-cyclide",
        "seed": p.seed,
        "objects": [
            {"name": "spheres", "type": "sphere_curve",
             "center": {"type": "circle", "center": [0.0, 0.0, 0.0], "radius": 2.0},
             "radius": {"type": "constant", "value": 1.0},
             "u": {"start": 0.0, "end": std::f64::consts::TAU, "n": n, "periodic": true}},
            {"name": "three", "type": "spheres", "spheres": [tube_sphere(0.0), tube_sphere(third), tube_sphere(2.0 * third)]}
        ],
        "pipeline": [
            {"id": "torus", "op": "envelope", "curve": "spheres", "n_theta": n, "order": "fourth", "out": "torus"},
            {"id": "validate", "op": "validate", "input": "torus"},
            {"id": "lie-cyclides", "op": "lie_cyclides", "input": "torus", "expect": "both"},
            {"id": "channel", "op": "channel", "input": "torus", "expect": "both"},
            {"id": "spherical-lines", "op": "spherical_lines", "input": "torus", "tol": 1e-8},
            {"id": "dupin", "op": "dupin", "spheres": "three", "out": "cyclide"}
        ],
        "outputs": {"meshes": [
            {"object": "torus", "file": "torus.obj"},
            {"object": "cyclide", "file": "dupin.obj", "resolution": n}
        ]}
    })
}

fn channel_detection(p: DemoParams) -> serde_json::Value {
    let n = p.grid;
    json!({
        "version": 1,
        "name": "channel-detection",
        "seed": p.seed,
        "objects": [
            {"name": "helix", "type": "sphere_curve",
             "center": {"type": "helix", "radius": 1.0, "pitch": 0.5},
             "radius": {"type": "constant", "value": 0.3},
             "u": {"start": 0.0, "end": 4.0, "n": n}},
            {"name": "torus", "type": "surface", "preset": {"type": "torus", "big_r": 2.0, "r": 1.0}, "n_u": n, "n_theta": n},
            {"name": "ellipsoid", "type": "surface",
             "preset": {"type": "ellipsoid", "axes": [4.0, 2.0, 1.0], "alpha": [0.2, 1.2], "beta": [0.4, 1.3]},
             "n_u": n, "n_theta": n}
        ],
        "pipeline": [
            {"id": "helix-tube", "op": "envelope", "curve": "helix", "n_theta": n, "out": "helix_tube"},
            {"id": "validate-helix", "op": "validate", "input": "helix_tube"},
            {"id": "channel-helix", "op": "channel", "input": "helix_tube", "expect": "dir1"},
            {"id": "channel-torus", "op": "channel", "input": "torus", "expect": "both"},
            {"id": "channel-ellipsoid", "op": "channel", "input": "ellipsoid", "expect": "none"}
        ],
        "outputs": {"meshes": [
            {"object": "helix_tube", "file": "helix.obj"},
            {"object": "ellipsoid", "file": "ellipsoid.obj"}
        ]}
    })
}

fn cylinder_omega(p: DemoParams) -> serde_json::Value {
    let (nt, nu) = (p.grid, 2 * p.grid + 1);
    let lambdas = [-1.0, 1.0, 2.0, 3.0];
    json!({
        "version": 1,
        "name": "cylinder-omega",
        "seed": p.seed,
        "objects": [line_tube(nu)],
        "pipeline": [
            {"id": "cylinder", "op": "envelope", "curve": "spheres", "n_theta": nt, "order": "fourth", "out": "cylinder"},
            {"id": "eta", "op": "omega", "surface": "cylinder", "lift": {"type": "against_p", "p": E6},
             "closedness_tol": 1e-6, "expect_q": {"value": -1.0, "tol": 1e-10}, "out": "eta"},
            {"id": "conserved", "op": "conserved_quantity", "omega": "eta", "p": E6, "lambdas": lambdas, "tol": 1e-8},
            {"id": "flatness", "op": "flatness", "omega": "eta", "lambdas": lambdas, "tol": 1e-6},
            {"id": "eta-unit", "op": "omega", "surface": "cylinder", "lift": {"type": "unit"}, "out": "eta_unit"},
            {"id": "conserved-unit", "op": "conserved_quantity", "omega": "eta_unit", "p": E6, "lambdas": lambdas,
             "tol": 1e-3, "expect_fail": true}
        ]
    })
}

fn cylinder_calapso(p: DemoParams) -> serde_json::Value {
    let (nt, nu) = (p.grid, 2 * p.grid + 1);
    let mut pipeline = vec![
        json!({"id": "cylinder", "op": "envelope", "curve": "spheres", "n_theta": nt, "order": "fourth", "out": "cylinder"}),
        json!({"id": "eta", "op": "omega", "surface": "cylinder", "lift": {"type": "against_p", "p": E6}, "out": "eta"}),
    ];
    for (k, lambda) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        pipeline.push(json!({"id": format!("calapso-{k}"), "op": "calapso", "surface": "cylinder", "omega": "eta",
                             "lambda": lambda, "out": format!("calapso_{k}")}));
    }
    json!({
        "version": 1,
        "name": "cylinder-calapso",
        "seed": p.seed,
        "objects": [line_tube(nu)],
        "pipeline": pipeline,
        "outputs": {"meshes": [{"object": "calapso_1", "file": "calapso.obj"}]}
    })
}

fn ribaucour_curves(p: DemoParams) -> serde_json::Value {
    let n = p.grid + 1;
    let line = |name: &str, x: f64, speed: f64| {
        json!({"name": name, "type": "curve",
               "center": {"type": "line", "point": [x, 0.0, 0.0], "direction": [0.0, 0.0, speed]},
               "u": {"start": -1.0, "end": 1.0, "n": n}})
    };
    json!({
        "version": 1,
        "name": "ribaucour-curves",
        "seed": p.seed,
        "objects": [
            line("base", 0.0, 1.0),
            line("parallel", 2.0, 1.0),
            line("mismatched", 2.0, 2.0),
            {"name": "helix", "type": "sphere_curve",
             "center": {"type": "helix", "radius": 1.0, "pitch": 0.5},
             "radius": {"type": "constant", "value": 0.3},
             "u": {"start": 0.0, "end": 2.0, "n": 2 * p.grid + 1}}
        ],
        "pipeline": [
            {"id": "parallel-lines", "op": "ribaucour", "a": "base", "b": "parallel", "tol": 1e-10},
            {"id": "mismatched-lines", "op": "ribaucour", "a": "base", "b": "mismatched", "tol": 1e-2, "expect_fail": 0.5},
            {"id": "partner", "op": "ribaucour_partner", "curve": "helix", "beta": [1.0, 0.2], "gamma": [0.0, 0.1],
             "initial": {"center": [3.0, 0.0, 0.0], "radius": 0.2}, "out": "helix_partner"},
            {"id": "tubes-parallel", "op": "tube_ribaucour", "a": "base", "b": "parallel", "radii": [0.3, 1.0], "tol": 1e-8},
            {"id": "tubes-mismatched", "op": "tube_ribaucour", "a": "base", "b": "mismatched", "radii": [0.3, 1.0], "tol": 1e-8},
            {"id": "circles", "op": "circle_congruence", "a": "base", "b": "parallel", "tol": 1e-8},
            {"id": "tube", "op": "tube", "curve": "base", "radius": 0.3, "n_theta": p.grid, "out": "tube"},
            {"id": "validate-tube", "op": "validate", "input": "tube"}
        ],
        "outputs": {"meshes": [{"object": "tube", "file": "tube.obj"}]}
    })
}

/// The scene of a named demo.
pub fn demo_config(name: &str, p: DemoParams) -> Option<SceneConfig> {
    let v = match name {
        "cylinder-darboux" => cylinder_darboux(p),
        "torus-cyclide" => torus_cyclide(p),
        "channel-detection" => channel_detection(p),
        "cylinder-omega" => cylinder_omega(p),
        "cylinder-calapso" => cylinder_calapso(p),
        "ribaucour-curves" => ribaucour_curves(p),
        _ => return None,
    };
    let cfg: SceneConfig = serde_json::from_value(v).expect("demo scenes follow the schema");
    cfg.validate().expect("demo scenes validate");
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_builds_and_roundtrips() {
        for name in DEMOS {
            let cfg = demo_config(name, DemoParams::default()).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            assert_eq!(SceneConfig::from_json(&text).unwrap(), cfg);
        }
        assert!(demo_config("nope", DemoParams::default()).is_none());
    }
}
