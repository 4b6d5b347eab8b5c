use std::io::Write;

use crate::error::{Error, Result};

use super::{EdgeGraph, Point3, TriangleMesh};

/// Farthest-point samples on a graph together with their geodesic Voronoi
/// partition of the graph nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePointSet {
    /// Sampled node ids in selection order.
    pub points: Vec<usize>,
    /// For each graph node, the position in `points` of its nearest sample.
    pub cell: Vec<usize>,
    /// Largest graph distance from a node to its nearest sample.
    pub fill_distance: f64,
}

impl SamplePointSet {
    /// Wraps an explicit list of nodes, computing cells and fill distance.
    pub fn from_points(graph: &EdgeGraph, points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let (dist, cell) = graph.multi_source(&points);
        let fill_distance = dist.iter().copied().fold(0.0, f64::max);
        if fill_distance.is_infinite() {
            return Err(Error::DisconnectedMesh);
        }
        Ok(SamplePointSet { points, cell, fill_distance })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `index,x,y,z,mass_cell_id` rows.
    pub fn write_csv<W: Write>(&self, positions: &[Point3], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "x", "y", "z", "mass_cell_id"])?;
        for (k, &v) in self.points.iter().enumerate() {
            let p = positions[v];
            w.write_record([
                v.to_string(),
                format!("{:?}", p.x),
                format!("{:?}", p.y),
                format!("{:?}", p.z),
                self.cell[v].to_string(),
            ])?;
            debug_assert_eq!(self.cell[v], k);
        }
        w.flush()?;
        Ok(())
    }
}

/// Farthest point sampling on an arbitrary graph.
///
/// The seed is never selected. When `candidates` is given only flagged nodes
/// may be selected, while distances still run over the whole graph.
pub fn farthest_point_sample_graph(
    graph: &EdgeGraph,
    n: usize,
    seed: usize,
    candidates: Option<&[bool]>,
) -> Result<SamplePointSet> {
    let nn = graph.n_nodes();
    if seed >= nn {
        return Err(Error::InvalidParameter(format!("seed {seed} out of range")));
    }
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    let allowed = |v: usize| v != seed && candidates.is_none_or(|c| c[v]);
    let available = (0..nn).filter(|&v| allowed(v)).count();
    if n > available {
        return Err(Error::TooManySamples { requested: n, available });
    }
    let mut field = graph.distances_from(seed);
    if field.iter().any(|d| d.is_infinite()) {
        return Err(Error::DisconnectedMesh);
    }
    let mut chosen = vec![false; nn];
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let mut best = usize::MAX;
        for v in 0..nn {
            if allowed(v) && !chosen[v] && (best == usize::MAX || field[v] > field[best]) {
                best = v;
            }
        }
        chosen[best] = true;
        points.push(best);
        if k == 0 {
            field = graph.distances_from(best);
        } else {
            graph.lower_field(best, &mut field);
        }
    }
    SamplePointSet::from_points(graph, points)
}

pub fn farthest_point_sample(mesh: &TriangleMesh, n: usize, seed: usize) -> Result<SamplePointSet> {
    farthest_point_sample_graph(&mesh.edge_graph(), n, seed, None)
}

/// Largest edge-graph distance from a mesh vertex to its nearest sample.
pub fn fill_distance(mesh: &TriangleMesh, samples: &SamplePointSet) -> Result<f64> {
    Ok(SamplePointSet::from_points(&mesh.edge_graph(), samples.points.clone())?.fill_distance)
}
