use std::path::Path;
use std::process::{Command, Output};

use chansurf_cli::RunReport;

fn chansurf(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chansurf"));
    cmd.args(args).env_remove("CHANSURF_OUT");
    if let Some(dir) = env_out {
        cmd.env("CHANSURF_OUT", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn emit(name: &str, grid: &str) -> String {
    let o = chansurf(&["demo", name, "--grid", grid, "--emit-config"], None);
    assert_eq!(code(&o), 0);
    String::from_utf8(o.stdout).unwrap()
}

fn report(dir: &Path) -> RunReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn emitted_demo_config_checks_and_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("scene.json");
    std::fs::write(&scene, emit("ribaucour-curves", "16")).unwrap();
    let o = chansurf(&["check", scene.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    let o = chansurf(
        &[
            "run",
            scene.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert!(r.pass && r.error.is_none());
    assert!(r
        .assertions
        .iter()
        .all(|a| a.tolerance > 0.0 || a.name.starts_with("verdict")));
    assert!(out.join("tube.obj").exists() && out.join("residuals.csv").exists());
}

#[test]
fn malformed_scene_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        "{ not json",
        r#"{"version": 1, "name": "x", "pipeline": [{"id": "v", "op": "validate", "input": "ghost"}]}"#,
        r#"{"version": 1, "name": "x", "pipeline": [], "surprise": true}"#,
    ];
    for (k, text) in cases.iter().enumerate() {
        let scene = tmp.path().join(format!("bad{k}.json"));
        std::fs::write(&scene, text).unwrap();
        assert_eq!(
            code(&chansurf(&["check", scene.to_str().unwrap()], None)),
            2
        );
        let o = chansurf(
            &[
                "run",
                scene.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(code(&o), 2);
        assert!(String::from_utf8_lossy(&o.stderr).contains("invalid scene"));
        assert!(!out.exists());
    }
    assert_eq!(
        code(&chansurf(
            &["run", tmp.path().join("missing.json").to_str().unwrap()],
            None
        )),
        2
    );
    assert_eq!(code(&chansurf(&["demo", "no-such-demo"], None)), 2);
}

#[test]
fn failing_stage_exits_1_and_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let scene = tmp.path().join("scene.json");
    // a tube of radius 2 about a circle of radius 2 is singular
    std::fs::write(
        &scene,
        r#"{"version": 1, "name": "singular", "objects": [
              {"name": "c", "type": "curve", "center": {"type": "circle", "center": [0, 0, 0], "radius": 2.0},
               "u": {"start": 0, "end": 6.283185307179586, "n": 32, "periodic": true}}],
            "pipeline": [{"id": "fat-tube", "op": "tube", "curve": "c", "radius": 2.0, "n_theta": 16, "out": "t"}]}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = chansurf(
        &[
            "run",
            scene.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage fat-tube failed"));
    let r = report(&out);
    assert_eq!(r.error.unwrap().stage, "fat-tube");
    assert!(!r.pass);
}

#[test]
fn failed_assertion_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let text =
        emit("channel-detection", "24").replace(r#""expect": "none""#, r#""expect": "both""#);
    let scene = tmp.path().join("scene.json");
    std::fs::write(&scene, text).unwrap();
    let out = tmp.path().join("out");
    let o = chansurf(
        &[
            "run",
            scene.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&o), 1);
    let r = report(&out);
    assert!(r.error.is_none() && !r.pass);
    assert!(r
        .failed_assertions()
        .all(|a| a.stage == "channel-ellipsoid"));
    let csv = std::fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert!(csv
        .lines()
        .any(|l| l.starts_with("channel-ellipsoid,classification,") && l.ends_with(",false")));
    // meshes are still written
    assert!(out.join("ellipsoid.obj").exists());
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = chansurf(&["demo", "torus-cyclide", "--grid", "16"], Some(tmp.path()));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dir = tmp.path().join("torus-cyclide");
    let r = report(&dir);
    let torus = r.meshes.iter().find(|m| m.file == "torus.obj").unwrap();
    assert_eq!((torus.vertices, torus.faces), (256, 512));
    assert!(dir.join("torus.scalars.csv").exists());
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |sub: &str, seed: &str| {
        let out = tmp.path().join(sub);
        let o = chansurf(
            &[
                "demo",
                "cylinder-darboux",
                "--grid",
                "24",
                "--seed",
                seed,
                "--out",
                out.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out.join("cylinder-darboux")
    };
    let (a, b, c) = (run("a", "7"), run("b", "7"), run("c", "8"));
    for f in [
        "report.json",
        "residuals.csv",
        "darboux.obj",
        "cyclides.obj",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    // the seed draws the initial sphere of the transform
    assert_ne!(
        std::fs::read(a.join("darboux.obj")).unwrap(),
        std::fs::read(c.join("darboux.obj")).unwrap()
    );
}
