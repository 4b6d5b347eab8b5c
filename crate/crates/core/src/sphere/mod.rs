//! Genus-zero surfaces: puncture-and-flatten uniformization onto the
//! extended plane, area-based circle neighborhoods and the binned local cost.

mod circle;
mod mobius;

pub use circle::{circle_through, normalize_to_disk, OrientedCircle};
pub use mobius::{cross_ratio, ExtendedMobius};

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_mid_edge, farthest_point_sample_graph, MidEdgeMesh, Point3, Topology, TriangleMesh};
use crate::transport::{transport_masses, TransportPlan};
use crate::uniformization::{flatten_masked, farthest_face_from, FlatteningMap};
use crate::C64;

pub const BINS: usize = 30;
pub const CIRCLE_SAMPLES: usize = 256;

type FaceBox = GeomWithData<Rectangle<[f64; 2]>, usize>;

/// A sphere-type mesh mapped to the extended plane. The punctured face is
/// the point at infinity.
#[derive(Clone, Debug)]
pub struct SphereMap {
    pub punctured_face: usize,
    pub plane: FlatteningMap,
    /// Extended-plane coordinate of every mid-edge.
    pub mid_coords: Vec<C64>,
    /// Extended-plane coordinate of every mesh vertex.
    pub coords: Vec<C64>,
    /// Post-composed Möbius map applied to the plane image.
    pub normalization: ExtendedMobius,
    faces: Vec<[usize; 3]>,
    corners: Vec<[Point3; 3]>,
    tree: RTree<FaceBox>,
}

/// Face with the median area (ties broken by index).
pub fn median_area_face(mesh: &TriangleMesh) -> usize {
    let mut order: Vec<usize> = (0..mesh.n_faces()).collect();
    let area: Vec<f64> = order.iter().map(|&f| mesh.face_area(f)).collect();
    order.sort_by(|&a, &b| area[a].total_cmp(&area[b]).then(a.cmp(&b)));
    order[order.len() / 2]
}

/// Punctures the median-area face, flattens the remaining disk with the
/// mid-edge method and sends the puncture to infinity with `1/(z - c)`,
/// where `c` is the middle of the widest gap between slit points.
pub fn sphere_uniformize(mesh: &TriangleMesh) -> Result<SphereMap> {
    if mesh.topology() != Topology::Sphere {
        return Err(Error::Topology(format!("expected a sphere, got {:?}", mesh.topology())));
    }
    let mid = build_mid_edge(mesh);
    let punctured = median_area_face(mesh);
    let mut active = vec![true; mesh.n_faces()];
    active[punctured] = false;
    let excised = farthest_face_from(mesh, &mesh.faces()[punctured], &active);
    let plane = flatten_masked(mesh, &mid, active, excised, vec![punctured])?;

    let mut xs: Vec<f64> = plane.slit_vertices.iter().map(|&r| plane.phi[r].re).collect();
    xs.sort_by(f64::total_cmp);
    let (gap, at) = xs.windows(2).map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1]))).fold(
        (f64::NEG_INFINITY, 0.0),
        |best, g| if g.0 > best.0 { g } else { best },
    );
    if !(gap > 0.0) {
        return Err(Error::DegenerateMesh("slit collapsed to a point".into()));
    }
    let center = C64::new(at, plane.slit[0].im);
    let one = C64::new(1.0, 0.0);
    let normalization = ExtendedMobius::new(C64::new(0.0, 0.0), one, one, -center)?;
    let mid_coords: Vec<C64> = plane.phi.iter().map(|&z| normalization.apply(z)).collect();
    let coords = vertex_coords(mesh, &mid, &plane, &normalization);
    if coords.iter().chain(&mid_coords).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateMesh("non-finite plane coordinate".into()));
    }

    let faces: Vec<[usize; 3]> =
        (0..mesh.n_faces()).filter(|&f| f != punctured).map(|f| mesh.faces()[f]).collect();
    let corners = faces.iter().map(|t| t.map(|v| mesh.vertices()[v])).collect();
    let boxes = faces
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = t.map(|v| coords[v]);
            let lo = [p[0].re.min(p[1].re).min(p[2].re), p[0].im.min(p[1].im).min(p[2].im)];
            let hi = [p[0].re.max(p[1].re).max(p[2].re), p[0].im.max(p[1].im).max(p[2].im)];
            GeomWithData::new(Rectangle::from_corners(lo, hi), k)
        })
        .collect();
    Ok(SphereMap {
        punctured_face: punctured,
        plane,
        mid_coords,
        coords,
        normalization,
        faces,
        corners,
        tree: RTree::bulk_load(boxes),
    })
}

/// Each active face places its corners at `φ(e_k) + φ(e_{k+2}) - φ(e_{k+1})`
/// (the medial triangle relation); vertices average the Möbius images.
fn vertex_coords(mesh: &TriangleMesh, mid: &MidEdgeMesh, plane: &FlatteningMap, m: &ExtendedMobius) -> Vec<C64> {
    let mut sum = vec![C64::new(0.0, 0.0); mesh.n_vertices()];
    let mut count = vec![0usize; mesh.n_vertices()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        if !plane.active[f] {
            continue;
        }
        let e = mid.faces[f].map(|r| plane.phi[r]);
        for k in 0..3 {
            sum[tri[k]] += e[k] + e[(k + 2) % 3] - e[(k + 1) % 3];
            count[tri[k]] += 1;
        }
    }
    sum.iter().zip(&count).map(|(s, &c)| m.apply(s / c as f64)).collect()
}

impl SphereMap {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// The retained face containing `z` (lowest index on shared edges) and
    /// the barycentric coordinates of `z`.
    pub fn locate(&self, z: C64) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3])> = None;
        for item in self.tree.locate_all_at_point([z.re, z.im]) {
            let k = item.data;
            if best.is_some_and(|b| b.0 < k) {
                continue;
            }
            let p = self.faces[k].map(|v| self.coords[v]);
            let m = Matrix2::new(p[1].re - p[0].re, p[2].re - p[0].re, p[1].im - p[0].im, p[2].im - p[0].im);
            let Some(inv) = m.try_inverse() else { continue };
            let s = inv * Vector2::new(z.re - p[0].re, z.im - p[0].im);
            let bary = [1.0 - s.x - s.y, s.x, s.y];
            if bary.iter().all(|&b| b >= -1e-12) {
                best = Some((k, bary));
            }
        }
        best
    }

    /// Surface point of a plane location via the face's inverse affine map.
    pub fn surface_point(&self, z: C64) -> Option<Point3> {
        let (k, b) = self.locate(z)?;
        let c = &self.corners[k];
        Some(c[0] * b[0] + c[1] * b[1] + c[2] * b[2])
    }

    /// Plane image of the surface point with barycentric coordinates `bary`
    /// in mesh face `f`.
    pub fn image_of(&self, mesh_face: [usize; 3], bary: [f64; 3]) -> C64 {
        (0..3).map(|k| self.coords[mesh_face[k]] * bary[k]).sum()
    }
}

/// Length on the surface of the polyline through `CIRCLE_SAMPLES` equally
/// spaced circle points.
pub fn circle_length_on_surface(circle: &OrientedCircle, map: &SphereMap) -> Result<f64> {
    if circle.is_line() {
        return Err(Error::PunctureCrossing);
    }
    let pts: Vec<Point3> = (0..CIRCLE_SAMPLES)
        .map(|k| {
            let z = circle.point_at(k as f64 / CIRCLE_SAMPLES as f64).expect("proper circle");
            map.surface_point(z).ok_or(Error::PunctureCrossing)
        })
        .collect::<Result<_>>()?;
    Ok((0..CIRCLE_SAMPLES).map(|k| (pts[(k + 1) % CIRCLE_SAMPLES] - pts[k]).norm()).sum())
}

/// `𝔏` points of equal surface mass in extended-plane coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPointCloud {
    pub points: Vec<C64>,
    /// Mid-edge vertex behind each point.
    pub sources: Vec<usize>,
}

impl DensityPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Farthest point samples of the mid-edge graph, in plane coordinates.
pub fn density_cloud(mesh: &TriangleMesh, map: &SphereMap, size: usize, seed: usize) -> Result<DensityPointCloud> {
    let s = farthest_point_sample_graph(&build_mid_edge(mesh).graph(), size, seed, None)?;
    Ok(DensityPointCloud { points: s.points.iter().map(|&r| map.mid_coords[r]).collect(), sources: s.points })
}

/// Fraction of cloud points strictly inside the circle.
pub fn circle_mass(circle: &OrientedCircle, cloud: &DensityPointCloud) -> f64 {
    cloud.points.iter().filter(|&&q| circle.contains(q)).count() as f64 / cloud.len() as f64
}

/// A candidate neighborhood: an oriented circle through three samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub triplet: [usize; 3],
    /// 0 for the bounded (or left) side, 1 for its complement.
    pub orientation: u8,
    pub circle: OrientedCircle,
    pub mass: f64,
    pub length: f64,
}

/// Every oriented circle through three samples whose mass is within `eps`
/// of `area` and whose surface length is measurable, in lexicographic
/// (triplet, orientation) order.
pub fn candidate_circles(
    samples: &[C64],
    cloud: &DensityPointCloud,
    map: &SphereMap,
    area: f64,
    eps: f64,
) -> Vec<Candidate> {
    let n = samples.len();
    let triplets: Vec<[usize; 3]> =
        (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k]))).collect();
    let per: Vec<Vec<Candidate>> = triplets
        .par_iter()
        .map(|&t| {
            let Ok((c0, c1)) = circle_through(samples[t[0]], samples[t[1]], samples[t[2]]) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            for (o, circle) in [c0, c1].into_iter().enumerate() {
                let mass = circle_mass(&circle, cloud);
                if (mass - area).abs() > eps {
                    continue;
                }
                if let Ok(length) = circle_length_on_surface(&circle, map) {
                    out.push(Candidate { triplet: t, orientation: o as u8, circle, mass, length });
                }
            }
            out
        })
        .collect();
    per.into_iter().flatten().collect()
}

/// Shortest candidate strictly containing `z0`; ties go to the mass closest
/// to `area`, then to the earliest candidate. Circles through the sample
/// `own` itself are skipped, since `z0` must be an interior point.
pub fn find_neighborhood(z0: C64, own: Option<usize>, area: f64, candidates: &[Candidate]) -> Option<Candidate> {
    let mut best: Option<&Candidate> = None;
    let eligible = |c: &&Candidate| own.is_none_or(|i| !c.triplet.contains(&i)) && c.circle.contains(z0);
    for c in candidates.iter().filter(eligible) {
        let better = match best {
            None => true,
            Some(b) => c.length < b.length || (c.length == b.length && (c.mass - area).abs() < (b.mass - area).abs()),
        };
        if better {
            best = Some(c);
        }
    }
    best.copied()
}

/// 30 × 30 bins over `[-1, 1]²`, raw and smoothed.
#[derive(Clone, Debug, PartialEq)]
pub struct BinGrid {
    pub counts: Vec<f64>,
    pub smoothed: Vec<f64>,
}

fn bin_index(x: f64) -> Option<usize> {
    if !(-1.0..=1.0).contains(&x) {
        return None;
    }
    Some((((x + 1.0) * 0.5 * BINS as f64) as usize).min(BINS - 1))
}

/// Box-kernel smoothing where each bin spreads a ninth of its content onto
/// its 3 × 3 neighborhood; spill past the border is reflected back in, so
/// the total is conserved.
pub fn smooth_bins(counts: &[f64]) -> Vec<f64> {
    let reflect = |i: isize| -> usize { i.clamp(0, BINS as isize - 1) as usize };
    let mut out = vec![0.0; BINS * BINS];
    for r in 0..BINS {
        for c in 0..BINS {
            let v = counts[r * BINS + c] / 9.0;
            if v == 0.0 {
                continue;
            }
            for dr in -1..=1 {
                for dc in -1..=1 {
                    out[reflect(r as isize + dr) * BINS + reflect(c as isize + dc)] += v;
                }
            }
        }
    }
    out
}

pub fn bin_histogram(points: &[C64]) -> BinGrid {
    let mut counts = vec![0.0; BINS * BINS];
    for z in points {
        if let (Some(c), Some(r)) = (bin_index(z.re), bin_index(z.im)) {
            counts[r * BINS + c] += 1.0;
        }
    }
    let smoothed = smooth_bins(&counts);
    BinGrid { counts, smoothed }
}

/// Cloud points inside `circle`, normalized so `z0 ↦ 0` and the first
/// triplet point `↦ 1`.
pub fn normalized_neighborhood(
    candidate: &Candidate,
    z0: C64,
    anchor: C64,
    cloud: &DensityPointCloud,
) -> Result<Vec<C64>> {
    let m = normalize_to_disk(&candidate.circle, z0, anchor)?;
    Ok(cloud.points.iter().filter(|&&q| candidate.circle.contains(q)).map(|&q| m.apply(q)).collect())
}

fn rotated_grids(points: &[C64], rotations: usize) -> Vec<Vec<f64>> {
    (0..rotations)
        .map(|l| {
            let r = C64::from_polar(1.0, TAU * (l as f64 / rotations as f64));
            let rotated: Vec<C64> = points.iter().map(|&q| r * q).collect();
            bin_histogram(&rotated).smoothed
        })
        .collect()
}

fn best_rotation(rotated: &[Vec<f64>], target: &[f64], cloud_size: usize) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (l, g) in rotated.iter().enumerate() {
        let s: f64 = g.iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<f64>() / cloud_size as f64;
        if s < best.0 {
            best = (s, l);
        }
    }
    best
}

/// Binned local cost between two normalized neighborhoods.
pub fn sphere_local_cost(q: &[C64], p: &[C64], rotations: usize, cloud_size: usize) -> (f64, usize) {
    best_rotation(&rotated_grids(q, rotations), &bin_histogram(p).smoothed, cloud_size)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub area: f64,
    pub rotations: usize,
    pub samples: usize,
    pub cloud: usize,
    pub eps: f64,
    pub seed: usize,
}

impl Default for SphereParams {
    fn default() -> Self {
        SphereParams { area: 0.3, rotations: 64, samples: 50, cloud: 1000, eps: 0.02, seed: 0 }
    }
}

/// A sphere surface with its samples and their neighborhoods.
#[derive(Clone, Debug)]
pub struct PreparedSphere {
    pub map: SphereMap,
    pub cloud: DensityPointCloud,
    pub samples: Vec<usize>,
    pub sample_points: Vec<C64>,
    pub neighborhoods: Vec<Candidate>,
    pub normalized: Vec<Vec<C64>>,
}

pub fn prepare_sphere(mesh: &TriangleMesh, params: &SphereParams) -> Result<PreparedSphere> {
    if params.rotations < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 rotations, got {}", params.rotations)));
    }
    if !(params.area > 0.0 && params.area < 1.0) {
        return Err(Error::InvalidParameter(format!("area fraction {} outside (0, 1)", params.area)));
    }
    let mesh = mesh.normalize_area()?;
    let map = sphere_uniformize(&mesh)?;
    let cloud = density_cloud(&mesh, &map, params.cloud, params.seed)?;
    let graph = build_mid_edge(&mesh).graph();
    let samples = farthest_point_sample_graph(&graph, params.samples, params.seed, None)?.points;
    let sample_points: Vec<C64> = samples.iter().map(|&r| map.mid_coords[r]).collect();
    let candidates = candidate_circles(&sample_points, &cloud, &map, params.area, params.eps);
    let mut neighborhoods = Vec::with_capacity(samples.len());
    let mut normalized = Vec::with_capacity(samples.len());
    for (i, &z0) in sample_points.iter().enumerate() {
        let c = find_neighborhood(z0, Some(i), params.area, &candidates).ok_or(Error::NoCandidate(i))?;
        normalized.push(normalized_neighborhood(&c, z0, sample_points[c.triplet[0]], &cloud)?);
        neighborhoods.push(c);
    }
    Ok(PreparedSphere { map, cloud, samples, sample_points, neighborhoods, normalized })
}

#[derive(Clone, Debug)]
pub struct SphereDistance {
    pub value: f64,
    pub plan: TransportPlan,
    pub costs: Vec<f64>,
    pub argmin: Vec<usize>,
}

pub fn sphere_cost_matrix(a: &PreparedSphere, b: &PreparedSphere, rotations: usize) -> (Vec<f64>, Vec<usize>) {
    let size = a.cloud.len();
    let rotated: Vec<Vec<Vec<f64>>> = a.normalized.par_iter().map(|q| rotated_grids(q, rotations)).collect();
    let targets: Vec<Vec<f64>> = b.normalized.par_iter().map(|p| bin_histogram(p).smoothed).collect();
    let cols = targets.len();
    let entries: Vec<(f64, usize)> = (0..rotated.len() * cols)
        .into_par_iter()
        .map(|idx| best_rotation(&rotated[idx / cols], &targets[idx % cols], size))
        .collect();
    (entries.iter().map(|e| e.0).collect(), entries.iter().map(|e| e.1).collect())
}

pub fn sphere_distance_prepared(a: &PreparedSphere, b: &PreparedSphere, rotations: usize) -> Result<SphereDistance> {
    let (costs, argmin) = sphere_cost_matrix(a, b, rotations);
    let n = a.samples.len();
    let p = b.samples.len();
    let plan = transport_masses(&vec![1.0 / n as f64; n], &vec![1.0 / p as f64; p], &costs)?;
    Ok(SphereDistance { value: plan.objective, plan, costs, argmin })
}

pub fn sphere_distance(a: &TriangleMesh, b: &TriangleMesh, params: &SphereParams) -> Result<SphereDistance> {
    let pa = prepare_sphere(a, params)?;
    let pb = prepare_sphere(b, params)?;
    sphere_distance_prepared(&pa, &pb, params.rotations)
}
