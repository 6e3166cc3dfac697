use chansurf::channel::{envelope, VChoice};
use chansurf::grid::StencilOrder;
use chansurf::lie::{sphere_lift, Vec3};
use chansurf::mesh::*;
use chansurf::surfaces::*;
use chansurf::transforms::dupin_from_spheres;

#[test]
fn cylinder_mesh_counts() {
    let s = line_tube_curve(-1.0, 1.0, 64, 1.0).unwrap();
    let g = envelope(&s, 64, VChoice::Osculating, StencilOrder::Second).unwrap();
    let m = mesh_grid(&g).unwrap();
    assert_eq!(m.vertices.len(), 4096);
    assert_eq!(m.faces.len(), 8064);
    assert_eq!((m.dropped_vertices, m.dropped_cells), (0, 0));
}

#[test]
fn torus_mesh_counts() {
    let g = torus_surface(2.0, 1.0, 64, 64, StencilOrder::Second).unwrap();
    let m = mesh_grid(&g).unwrap();
    assert_eq!(m.vertices.len(), 4096);
    assert_eq!(m.faces.len(), 8192);
    assert!(m.faces.iter().flatten().all(|&k| k < 4096));
}

#[test]
fn quad_split_and_obj_text() {
    let m = mesh_from_samples(2, 2, (false, false), |i, j| {
        Some(Vec3::new(i as f64, j as f64, 0.0))
    })
    .unwrap();
    assert_eq!(m.faces, vec![[0, 2, 3], [0, 3, 1]]);
    let obj = m.to_obj();
    let lines: Vec<&str> = obj.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[..4].iter().all(|l| l.starts_with("v ")));
    assert_eq!(&lines[4..], &["f 1 3 4", "f 1 4 2"]);
}

#[test]
fn points_at_infinity_are_dropped() {
    let m = mesh_from_samples(3, 3, (false, false), |i, j| {
        (i != 1 || j != 1).then(|| Vec3::new(i as f64, j as f64, 0.0))
    })
    .unwrap();
    assert_eq!(m.vertices.len(), 8);
    assert_eq!((m.dropped_vertices, m.dropped_cells), (1, 4));
    assert!(m.faces.is_empty());
    assert!(mesh_from_samples(2, 2, (false, false), |_, _| None).is_err());
}

#[test]
fn dupin_torus_mesh_lies_on_torus() {
    let s = |x: f64, y: f64| sphere_lift(&Vec3::new(x, y, 0.0), 1.0);
    let cy = dupin_from_spheres(&s(2.0, 0.0), &s(-2.0, 0.0), &s(0.0, 2.0)).unwrap();
    let m = mesh_cyclide(&cy, 48).unwrap();
    assert_eq!(m.vertices.len(), 48 * 48);
    assert_eq!(m.faces.len(), 2 * 48 * 48);
    for p in &m.vertices {
        let d = (p.x.hypot(p.y) - 2.0).powi(2) + p.z * p.z;
        assert!((d - 1.0).abs() <= 1e-6, "{p:?}");
    }
}

#[test]
fn scalar_fields_must_match_vertices() {
    let mut m = mesh_from_samples(2, 3, (false, true), |i, j| {
        Some(Vec3::new(i as f64, j as f64, 1.0))
    })
    .unwrap();
    assert_eq!(m.faces.len(), 6);
    assert!(m.add_scalar("r", vec![0.0; 6]).is_ok());
    assert!(m.add_scalar("bad", vec![0.0; 5]).is_err());
}

#[test]
fn merge_offsets_faces_and_keeps_shared_fields() {
    let square = |z: f64| {
        mesh_from_samples(2, 2, (false, false), move |i, j| {
            Some(Vec3::new(i as f64, j as f64, z))
        })
        .unwrap()
    };
    let (mut a, mut b) = (square(0.0), square(1.0));
    a.add_scalar("k", vec![0.0; 4]).unwrap();
    b.add_scalar("k", vec![1.0; 4]).unwrap();
    b.add_scalar("only_b", vec![2.0; 4]).unwrap();
    a.merge(&b);
    assert_eq!(a.vertices.len(), 8);
    assert_eq!(a.faces[2..], [[4, 6, 7], [4, 7, 5]]);
    assert_eq!(a.samples[4], [0, 0]);
    assert_eq!(a.scalars.keys().collect::<Vec<_>>(), ["k"]);
    let csv = a.scalars_csv().unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("vertex,k\n1,0.0"));
}
