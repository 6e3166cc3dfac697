//! Triangle meshes of Legendre grids and Dupin cyclides, and OBJ output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Frame, LegendreGrid};
use crate::legendre::surface_point;
use crate::lie::Vec3;
use crate::transforms::DupinCyclide;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeshOutput {
    pub vertices: Vec<Vec3>,
    /// 0-based vertex indices.
    pub faces: Vec<[usize; 3]>,
    /// Per-vertex scalar fields by name.
    pub scalars: BTreeMap<String, Vec<f64>>,
    /// Sample index `(i, j)` each vertex came from.
    pub samples: Vec<[usize; 2]>,
    /// Grid points with no finite point sphere.
    pub dropped_vertices: usize,
    /// Quads dropped because a corner was at infinity.
    pub dropped_cells: usize,
}

/// Meshes `n1 x n2` samples in row-major order. `point(i, j)` returns `None`
/// at infinity; quads split along the `(i, j) -> (i+1, j+1)` diagonal.
pub fn mesh_from_samples(
    n1: usize,
    n2: usize,
    periodic: (bool, bool),
    point: impl Fn(usize, usize) -> Option<Vec3>,
) -> Result<MeshOutput> {
    let mut index = vec![None; n1 * n2];
    let mut vertices = Vec::with_capacity(n1 * n2);
    let mut samples = Vec::with_capacity(n1 * n2);
    let mut dropped_vertices = 0;
    for i in 0..n1 {
        for j in 0..n2 {
            match point(i, j).filter(|p| p.iter().all(|x| x.is_finite())) {
                Some(p) => {
                    index[i * n2 + j] = Some(vertices.len());
                    vertices.push(p);
                    samples.push([i, j]);
                }
                None => dropped_vertices += 1,
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::Invalid("no finite point on the grid".into()));
    }
    let cells = |n: usize, p: bool| if p { n } else { n.saturating_sub(1) };
    let mut faces = Vec::with_capacity(2 * cells(n1, periodic.0) * cells(n2, periodic.1));
    let mut dropped_cells = 0;
    for i in 0..cells(n1, periodic.0) {
        let i1 = (i + 1) % n1;
        for j in 0..cells(n2, periodic.1) {
            let j1 = (j + 1) % n2;
            let corners = [(i, j), (i1, j), (i1, j1), (i, j1)].map(|(a, b)| index[a * n2 + b]);
            match corners {
                [Some(v00), Some(v10), Some(v11), Some(v01)] => {
                    faces.push([v00, v10, v11]);
                    faces.push([v00, v11, v01]);
                }
                _ => dropped_cells += 1,
            }
        }
    }
    Ok(MeshOutput {
        vertices,
        faces,
        scalars: BTreeMap::new(),
        samples,
        dropped_vertices,
        dropped_cells,
    })
}

/// Surface points of a Legendre grid.
pub fn mesh_grid(g: &LegendreGrid) -> Result<MeshOutput> {
    let periodic = (g.grid.u.periodic, g.grid.theta.periodic);
    mesh_from_samples(g.n_u(), g.n_theta(), periodic, |i, j| {
        surface_point(g.frame(i, j))
    })
}

/// A cyclide sampled on an `n x n` grid of circle parameters of `D` and `D^perp`.
pub fn mesh_cyclide(c: &DupinCyclide, n: usize) -> Result<MeshOutput> {
    let t = |k: usize| std::f64::consts::TAU * k as f64 / n as f64;
    mesh_from_samples(n, n, (true, true), |i, j| {
        let f = Frame::normalized(*c.sphere_d(t(i)).rep(), *c.sphere_dperp(t(j)).rep());
        surface_point(&f)
    })
}

impl MeshOutput {
    /// Adds a per-vertex field; its length must match the vertex count.
    pub fn add_scalar(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.vertices.len() {
            return Err(Error::Shape(format!(
                "scalar field {name} has {} values for {} vertices",
                values.len(),
                self.vertices.len()
            )));
        }
        self.scalars.insert(name.to_string(), values);
        Ok(())
    }

    /// Appends `other`, offsetting its face indices. Scalar fields present in
    /// both meshes are concatenated; any other field is dropped.
    pub fn merge(&mut self, other: &MeshOutput) {
        let offset = self.vertices.len();
        let keep: Vec<String> = self
            .scalars
            .keys()
            .filter(|k| other.scalars.contains_key(*k))
            .cloned()
            .collect();
        self.scalars.retain(|k, _| keep.contains(k));
        for (k, v) in self.scalars.iter_mut() {
            v.extend_from_slice(&other.scalars[k]);
        }
        self.vertices.extend_from_slice(&other.vertices);
        self.samples.extend_from_slice(&other.samples);
        self.faces
            .extend(other.faces.iter().map(|f| f.map(|k| k + offset)));
        self.dropped_vertices += other.dropped_vertices;
        self.dropped_cells += other.dropped_cells;
    }

    /// Per-vertex fields as CSV: `vertex,<name>...`, or `None` without fields.
    pub fn scalars_csv(&self) -> Option<String> {
        if self.scalars.is_empty() {
            return None;
        }
        let mut s = String::from("vertex");
        for k in self.scalars.keys() {
            let _ = write!(s, ",{k}");
        }
        s.push('\n');
        for i in 0..self.vertices.len() {
            let _ = write!(s, "{}", i + 1);
            for v in self.scalars.values() {
                let _ = write!(s, ",{:.12e}", v[i]);
            }
            s.push('\n');
        }
        Some(s)
    }

    /// OBJ text: `v` lines, then 1-based `f` lines.
    pub fn to_obj(&self) -> String {
        let mut s = String::with_capacity(40 * (self.vertices.len() + self.faces.len()));
        for v in &self.vertices {
            let _ = writeln!(s, "v {:.12e} {:.12e} {:.12e}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }

    pub fn write_obj(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_obj().as_bytes())?;
        f.flush()
    }
}
