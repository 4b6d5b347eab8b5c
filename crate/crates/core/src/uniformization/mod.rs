//! Mid-edge conformal flattening of disk-type meshes onto the unit disk and
//! the resulting conformal densities.

mod density;
mod flatten;
mod harmonic;
mod tps;

pub use density::{conformal_factors, eval_density, image_area, ConformalDensity, Variant, DENSITY_FLOOR};
pub use flatten::{
    conjugate_harmonic, energy_pair, inverse_joukowski, mid_edge_energy, slit_limit, Conjugate, FlatteningMap,
    Stage,
};
pub use harmonic::{dirichlet_energy, dirichlet_solve, HarmonicSolution};
pub use tps::{fit_tps, Tps};


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_mid_edge, farthest_point_sample_graph, MidEdgeMesh, SamplePointSet, Topology, TriangleMesh};
use crate::C64;

/// Face whose vertices are, on average, graph-farthest from `sources`
/// (the boundary when `sources` is empty); ties go to the lowest index.
/// Only faces flagged in `allowed` are considered.
pub fn choose_excised_face(mesh: &TriangleMesh, allowed: &[bool]) -> usize {
    let mut sources: Vec<usize> = mesh.boundary_loops().into_iter().flatten().collect();
    sources.sort_unstable();
    farthest_face_from(mesh, &sources, allowed)
}

pub(crate) fn farthest_face_from(mesh: &TriangleMesh, sources: &[usize], allowed: &[bool]) -> usize {
    let (dist, _) = mesh.edge_graph().multi_source(sources);
    let mut best = usize::MAX;
    let mut best_score = f64::NEG_INFINITY;
    for (f, tri) in mesh.faces().iter().enumerate() {
        if !allowed[f] {
            continue;
        }
        let score = (dist[tri[0]] + dist[tri[1]] + dist[tri[2]]) / 3.0;
        if score > best_score {
            best_score = score;
            best = f;
        }
    }
    best
}

/// Solves for `u` on the flagged faces minus `excised`, anchoring two of
/// the excised face's vertices at 0 and 1, and assembles `Φ = u + i *u`.
pub(crate) fn flatten_masked(
    mesh: &TriangleMesh,
    mid: &MidEdgeMesh,
    mut active: Vec<bool>,
    excised: usize,
    removed: Vec<usize>,
) -> Result<FlatteningMap> {
    active[excised] = false;
    let tri = mesh.faces()[excised];
    let sol = harmonic::solve_masked(mesh, &active, &[(tri[0], 0.0), (tri[1], 1.0)])?;
    flatten::assemble_plane_map(mesh, mid, active, excised, removed, &sol.values)
}

/// Plane-slit map of a disk-type mesh.
pub fn flatten_mid_edge(mesh: &TriangleMesh, excised_face: usize) -> Result<FlatteningMap> {
    if mesh.topology() != Topology::Disk {
        return Err(Error::NonDiskTopology(format!("{:?}", mesh.topology())));
    }
    if excised_face >= mesh.n_faces() {
        return Err(Error::InvalidParameter(format!("face {excised_face} out of range")));
    }
    let mid = build_mid_edge(mesh);
    flatten_masked(mesh, &mid, vec![true; mesh.n_faces()], excised_face, Vec::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformizeParams {
    pub lambda: f64,
    pub tps_centers: usize,
    /// Mid-edge vertex seeding farthest point sampling.
    pub seed: usize,
}

impl Default for UniformizeParams {
    fn default() -> Self {
        UniformizeParams { lambda: 0.97, tps_centers: 200, seed: 0 }
    }
}

/// A disk-type mesh mapped onto the unit disk with its fitted density.
#[derive(Clone, Debug)]
pub struct Uniformized {
    pub mid: MidEdgeMesh,
    pub map: FlatteningMap,
    pub density: ConformalDensity,
    /// TPS centers (farthest point samples over interior mid-edges).
    pub centers: SamplePointSet,
}

impl Uniformized {
    /// Mid-edge vertices eligible as samples: carried by an image face and
    /// strictly inside the disk.
    pub fn interior_mask(&self) -> Vec<bool> {
        interior_mask(&self.mid, &self.map)
    }

    pub fn position(&self, r: usize) -> C64 {
        self.map.phi[r]
    }
}

pub(crate) fn interior_mask(mid: &MidEdgeMesh, map: &FlatteningMap) -> Vec<bool> {
    let mut mask: Vec<bool> = (0..mid.n_vertices())
        .map(|r| mid.vertex_faces[r].iter().any(|&f| map.active[f]))
        .collect();
    for &r in &map.slit_vertices {
        mask[r] = false;
    }
    mask
}

/// Full disk pipeline: excise, flatten, map to the disk, compute factors and
/// fit the spline to `μ^H` at farthest point samples.
pub fn uniformize(mesh: &TriangleMesh, params: &UniformizeParams) -> Result<Uniformized> {
    let all = vec![true; mesh.n_faces()];
    let excised = choose_excised_face(mesh, &all);
    let plane = flatten_mid_edge(mesh, excised)?;
    let map = plane.slit_to_disk()?;
    let mid = build_mid_edge(mesh);
    let mut density = conformal_factors(&mid, &map)?;
    let mask = interior_mask(&mid, &map);
    let centers = farthest_point_sample_graph(&mid.graph(), params.tps_centers, params.seed, Some(&mask))?;
    let z: Vec<C64> = centers.points.iter().map(|&r| map.phi[r]).collect();
    let y: Vec<f64> = centers.points.iter().map(|&r| density.vertex_hyperbolic[r]).collect();
    density.tps = Some(fit_tps(&z, &y, params.lambda)?);
    Ok(Uniformized { mid, map, density, centers })
}
