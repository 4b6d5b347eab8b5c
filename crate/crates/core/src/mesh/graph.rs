use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::TriangleMesh;

/// Undirected weighted graph in compressed adjacency form.
#[derive(Clone, Debug)]
pub struct EdgeGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Entry {
    dist: f64,
    label: usize,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // reversed so BinaryHeap pops the smallest (dist, label, node)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.label.cmp(&self.label))
            .then(other.node.cmp(&self.node))
    }
}

impl EdgeGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        let mut degree = vec![0usize; n + 1];
        for &(a, b, _) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for &(a, b, w) in &edges {
            targets[fill[a]] = b;
            weights[fill[a]] = w;
            fill[a] += 1;
            targets[fill[b]] = a;
            weights[fill[b]] = w;
            fill[b] += 1;
        }
        EdgeGraph { offsets, targets, weights }
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    /// Shortest-path distances from `source`.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.multi_source(&[source]).0
    }

    /// Multi-source Dijkstra. Returns distance to the nearest source and the
    /// index (into `sources`) of that source; equal distances go to the lower
    /// source index.
    pub fn multi_source(&self, sources: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let n = self.n_nodes();
        let mut dist = vec![f64::INFINITY; n];
        let mut label = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for (k, &s) in sources.iter().enumerate() {
            if label[s] == usize::MAX {
                dist[s] = 0.0;
                label[s] = k;
            }
        }
        for &s in sources {
            heap.push(Entry { dist: 0.0, label: label[s], node: s });
        }
        while let Some(Entry { dist: d, label: l, node: u }) = heap.pop() {
            if d > dist[u] || (d == dist[u] && l > label[u]) {
                continue;
            }
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < dist[v] || (nd == dist[v] && l < label[v]) {
                    dist[v] = nd;
                    label[v] = l;
                    heap.push(Entry { dist: nd, label: l, node: v });
                }
            }
        }
        (dist, label)
    }

    /// Lowers `field` to `min(field, dist(source, ·))`, exploring only the
    /// region where the new source is strictly closer.
    pub(crate) fn lower_field(&self, source: usize, field: &mut [f64]) {
        let mut heap = BinaryHeap::new();
        if field[source] > 0.0 {
            field[source] = 0.0;
            heap.push(Entry { dist: 0.0, label: 0, node: source });
        }
        while let Some(Entry { dist: d, node: u, .. }) = heap.pop() {
            if d > field[u] {
                continue;
            }
            for (v, w) in self.neighbors(u) {
                let nd = d + w;
                if nd < field[v] {
                    field[v] = nd;
                    heap.push(Entry { dist: nd, label: 0, node: v });
                }
            }
        }
    }
}

/// Edge-graph geodesic distances from `source` to every vertex.
pub fn geodesic_distances(mesh: &TriangleMesh, source: usize) -> Result<Vec<f64>> {
    if source >= mesh.n_vertices() {
        return Err(Error::InvalidParameter(format!("source vertex {source} out of range")));
    }
    let d = mesh.edge_graph().distances_from(source);
    if d.iter().any(|x| x.is_infinite()) {
        return Err(Error::DisconnectedMesh);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Point3;
    use proptest::prelude::*;

    #[test]
    fn path_graph() {
        let g = EdgeGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(g.distances_from(0), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn equilateral_triangle() {
        let s = 0.7;
        let v = vec![
            Point3::zeros(),
            Point3::new(s, 0.0, 0.0),
            Point3::new(0.5 * s, 0.5 * 3f64.sqrt() * s, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2]]).unwrap();
        let d = geodesic_distances(&m, 1).unwrap();
        assert_eq!(d[1], 0.0);
        assert!((d[0] - s).abs() < 1e-15 && (d[2] - s).abs() < 1e-15);
    }

    #[test]
    fn disconnected_mesh_reported() {
        let v = vec![
            Point3::zeros(),
            Point3::x(),
            Point3::y(),
            Point3::new(5.0, 0.0, 0.0),
            Point3::new(6.0, 0.0, 0.0),
            Point3::new(5.0, 1.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        assert_eq!(geodesic_distances(&m, 0).unwrap_err().name(), "DisconnectedMesh");
    }

    #[test]
    fn voronoi_ties_go_to_lower_sample() {
        let g = EdgeGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]);
        let (_, lab) = g.multi_source(&[2, 0]);
        assert_eq!(lab, vec![1, 0, 0]);
    }

    proptest! {
        #[test]
        fn symmetric_and_triangle_inequality(seed in 0u64..200) {
            let m = crate::synth::jittered_grid(7, 6, 0.25, seed);
            let g = m.edge_graph();
            let n = m.n_vertices();
            let a = (seed as usize * 7) % n;
            let b = (seed as usize * 13 + 5) % n;
            let da = g.distances_from(a);
            let db = g.distances_from(b);
            prop_assert!((da[b] - db[a]).abs() <= 1e-12 * da[b].max(1.0));
            for v in 0..n {
                prop_assert!(da[v] <= da[b] + db[v] + 1e-12);
            }
        }

        #[test]
        fn lower_field_matches_full_dijkstra(seed in 0u64..100) {
            let m = crate::synth::jittered_grid(6, 6, 0.2, seed);
            let g = m.edge_graph();
            let s1 = seed as usize % m.n_vertices();
            let s2 = (seed as usize * 11 + 3) % m.n_vertices();
            let mut field = g.distances_from(s1);
            g.lower_field(s2, &mut field);
            let (direct, _) = g.multi_source(&[s1, s2]);
            for (a, b) in field.iter().zip(&direct) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
