//! Triangle meshes, their mid-edge companions, edge-graph geodesics and
//! farthest point sampling.

mod graph;
mod io;
mod mid_edge;
mod sampling;

pub use graph::{geodesic_distances, EdgeGraph};
pub use io::{load_mesh, save_mesh, MeshFormat};
pub use mid_edge::{build_mid_edge, MidEdgeMesh};
pub use sampling::{farthest_point_sample, farthest_point_sample_graph, fill_distance, SamplePointSet};

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Point3 = Vector3<f64>;

/// Topological class of a connected oriented manifold mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Disk,
    Sphere,
    Other { euler: i64, boundary_loops: usize, components: usize },
}

/// An oriented manifold triangle mesh.
///
/// Edge `k` of face `f` joins `faces[f][k]` and `faces[f][(k + 1) % 3]`.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    edge_faces: Vec<[Option<usize>; 2]>,
    topology: Topology,
}

impl TriangleMesh {
    /// Builds a mesh and checks that it is an oriented 2-manifold (with or
    /// without boundary).
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if faces.is_empty() {
            return Err(Error::Topology("mesh has no faces".into()));
        }
        let mut used = vec![false; nv];
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::Topology(format!("face {f} references vertex {v} of {nv}")));
                }
                used[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0] {
                return Err(Error::Topology(format!("face {f} repeats a vertex")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Topology(format!("vertex {v} is not used by any face")));
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_faces: Vec<[Option<usize>; 2]> = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, tri) in faces.iter().enumerate() {
            let mut fe = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_faces.push([None, None]);
                    edges.len() - 1
                });
                // slot 0 holds the face traversing the edge low -> high
                let slot = if a < b { 0 } else { 1 };
                if edge_faces[e][slot].is_some() {
                    return Err(Error::Topology(format!(
                        "edge ({}, {}) is shared by more than two faces or orientations disagree",
                        key.0, key.1
                    )));
                }
                edge_faces[e][slot] = Some(f);
                fe[k] = e;
            }
            face_edges.push(fe);
        }

        let mut mesh = TriangleMesh {
            vertices,
            faces,
            edges,
            face_edges,
            edge_faces,
            topology: Topology::Disk,
        };
        mesh.check_vertex_fans()?;
        mesh.topology = mesh.classify();
        Ok(mesh)
    }

    /// Every vertex link must be a single path or cycle.
    fn check_vertex_fans(&self) -> Result<()> {
        let nv = self.vertices.len();
        let mut link: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for tri in &self.faces {
            for k in 0..3 {
                link[tri[k]].push((tri[(k + 1) % 3], tri[(k + 2) % 3]));
            }
        }
        for (v, arcs) in link.iter().enumerate() {
            let next: HashMap<usize, usize> = arcs.iter().copied().collect();
            let has_pred: std::collections::HashSet<usize> = arcs.iter().map(|a| a.1).collect();
            let start = arcs
                .iter()
                .map(|a| a.0)
                .find(|a| !has_pred.contains(a))
                .unwrap_or(arcs[0].0);
            let mut cur = start;
            let mut steps = 0;
            while let Some(&n) = next.get(&cur) {
                steps += 1;
                cur = n;
                if cur == start || steps > arcs.len() {
                    break;
                }
            }
            if steps != arcs.len() {
                return Err(Error::Topology(format!("vertex {v} is non-manifold")));
            }
        }
        Ok(())
    }

    fn classify(&self) -> Topology {
        let euler = self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64;
        let components = self.face_components();
        let boundary_loops = self.boundary_loops().len();
        match (euler, boundary_loops, components) {
            (1, 1, 1) => Topology::Disk,
            (2, 0, 1) => Topology::Sphere,
            _ => Topology::Other { euler, boundary_loops, components },
        }
    }

    fn face_components(&self) -> usize {
        let nf = self.faces.len();
        let mut seen = vec![false; nf];
        let mut count = 0;
        for s in 0..nf {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(f) = stack.pop() {
                for &e in &self.face_edges[f] {
                    for g in self.edge_faces[e].iter().flatten() {
                        if !seen[*g] {
                            seen[*g] = true;
                            stack.push(*g);
                        }
                    }
                }
            }
        }
        count
    }

    /// Boundary loops as ordered vertex cycles following face orientation.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        let mut next: HashMap<usize, usize> = HashMap::new();
        for f in 0..self.faces.len() {
            for k in 0..3 {
                if self.is_boundary_edge(self.face_edges[f][k]) {
                    let tri = self.faces[f];
                    next.insert(tri[k], tri[(k + 1) % 3]);
                }
            }
        }
        let mut starts: Vec<usize> = next.keys().copied().collect();
        starts.sort_unstable();
        let mut visited = std::collections::HashSet::new();
        let mut loops = Vec::new();
        for s in starts {
            if visited.contains(&s) {
                continue;
            }
            let mut lp = vec![s];
            visited.insert(s);
            let mut cur = next[&s];
            while cur != s {
                visited.insert(cur);
                lp.push(cur);
                cur = next[&cur];
            }
            loops.push(lp);
        }
        loops
    }

    pub fn require(&self, expected: Topology) -> Result<()> {
        if self.topology == expected {
            Ok(())
        } else {
            Err(Error::Topology(format!("expected {expected:?}, found {:?}", self.topology)))
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    pub fn edge_faces(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        self.edge_faces[e].iter().flatten().copied()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_faces[e][0].is_none() || self.edge_faces[e][1].is_none()
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        (0..self.edges.len()).map(|e| self.is_boundary_edge(e)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[a] - self.vertices[b]).norm()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        let p = &self.vertices;
        0.5 * (p[b] - p[a]).cross(&(p[c] - p[a])).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn face_centroid(&self, f: usize) -> Point3 {
        let [a, b, c] = self.faces[f];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    /// Returns a copy with vertex positions replaced, keeping connectivity.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        TriangleMesh { vertices, ..self.clone() }
    }

    /// Uniformly scales the mesh to unit total area.
    pub fn normalize_area(&self) -> Result<Self> {
        let area = self.total_area();
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::DegenerateMesh(format!("total area {area}")));
        }
        if (area - 1.0).abs() <= 1e-14 {
            return Ok(self.clone());
        }
        let s = 1.0 / area.sqrt();
        Ok(self.with_vertices(self.vertices.iter().map(|p| p * s).collect()))
    }

    /// The vertex graph with 3D edge lengths as weights.
    pub fn edge_graph(&self) -> EdgeGraph {
        let pairs = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &[a, b])| (a, b, self.edge_length(e)));
        EdgeGraph::from_edges(self.vertices.len(), pairs)
    }
}

/// Convenience wrapper for [`TriangleMesh::normalize_area`].
pub fn normalize_area(mesh: &TriangleMesh) -> Result<TriangleMesh> {
    mesh.normalize_area()
}
