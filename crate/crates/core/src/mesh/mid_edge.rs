use super::{EdgeGraph, Point3, TriangleMesh};

/// One vertex at the midpoint of every parent edge and one triangle per
/// parent face. Vertex `r` belongs to parent edge `r`, face `f` to parent
/// face `f`; face `f` lists the midpoints of parent edges `(v0 v1)`,
/// `(v1 v2)`, `(v2 v0)` so orientation is inherited.
#[derive(Clone, Debug)]
pub struct MidEdgeMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    /// Parent edge of each mid-edge vertex lies on the mesh boundary.
    pub boundary: Vec<bool>,
    /// Incident faces of each mid-edge vertex (one on the boundary).
    pub vertex_faces: Vec<Vec<usize>>,
}

pub fn build_mid_edge(mesh: &TriangleMesh) -> MidEdgeMesh {
    let p = mesh.vertices();
    let vertices = mesh.edges().iter().map(|&[a, b]| (p[a] + p[b]) * 0.5).collect();
    let faces = mesh.face_edges().to_vec();
    let boundary = mesh.boundary_flags();
    let vertex_faces = (0..mesh.n_edges()).map(|e| mesh.edge_faces(e).collect()).collect();
    MidEdgeMesh { vertices, faces, boundary, vertex_faces }
}

impl MidEdgeMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f];
        let v = &self.vertices;
        0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Mid-edge vertices joined inside each face, weighted by 3D distance.
    pub fn graph(&self) -> EdgeGraph {
        let v = &self.vertices;
        let edges = self.faces.iter().flat_map(|&[a, b, c]| {
            [(a, b), (b, c), (c, a)].map(|(x, y)| (x, y, (v[x] - v[y]).norm()))
        });
        EdgeGraph::from_edges(self.vertices.len(), edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts() {
        let v = vec![Point3::zeros(), Point3::x(), Point3::y()];
        let tri = TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap();
        let m = build_mid_edge(&tri);
        assert_eq!((m.n_vertices(), m.n_faces()), (3, 1));

        let sq = crate::mesh::tests::unit_square();
        let m = build_mid_edge(&sq);
        assert_eq!((m.n_vertices(), m.n_faces()), (5, 2));
        assert_eq!(m.boundary.iter().filter(|b| !**b).count(), 1);

        let m = build_mid_edge(&crate::synth::icosahedron());
        assert_eq!((m.n_vertices(), m.n_faces()), (30, 20));
        assert!(m.boundary.iter().all(|b| !b));
    }

    #[test]
    fn vertices_are_midpoints_and_orientation_kept() {
        let mesh = crate::synth::jittered_grid(5, 4, 0.2, 3);
        let m = build_mid_edge(&mesh);
        for (f, tri) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let mid = (mesh.vertices()[tri[k]] + mesh.vertices()[tri[(k + 1) % 3]]) * 0.5;
                assert_eq!(m.vertices[m.faces[f][k]], mid);
            }
            let [a, b, c] = m.faces[f];
            let n_mid = (m.vertices[b] - m.vertices[a]).cross(&(m.vertices[c] - m.vertices[a]));
            let p = mesh.vertices();
            let n_par = (p[tri[1]] - p[tri[0]]).cross(&(p[tri[2]] - p[tri[0]]));
            assert!(n_mid.dot(&n_par) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn quarter_area(seed in 0u64..100) {
            let mesh = crate::synth::bumpy_disk(6, 10, 0.3, seed);
            let m = build_mid_edge(&mesh);
            let (a, b) = (m.total_area(), mesh.total_area());
            prop_assert!((a - 0.25 * b).abs() <= 1e-12 * b);
        }
    }
}
