//! Discrete measures, the transportation LP in full and partial form, and the
//! disk distance pipeline built on top of them.

mod simplex;

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{cost_matrix, CostConfig, CostMatrix};
use crate::error::{Error, Result};
use crate::mesh::{farthest_point_sample_graph, SamplePointSet, TriangleMesh};
use crate::uniformization::{uniformize, UniformizeParams, Uniformized};
use crate::C64;

use simplex::Problem;

const MASS_GUARD: f64 = 1e-6;

/// Weighted Dirac masses on the disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub points: Vec<C64>,
    /// Mid-edge vertex behind each support point.
    pub vertices: Vec<usize>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Voronoi-cell masses of `samples`: each mesh face goes to the cell that
/// holds the majority of its three mid-edges (all distinct: lowest cell),
/// and cells accumulate 3D face areas.
pub fn discretize_measure(mesh: &TriangleMesh, u: &Uniformized, samples: &SamplePointSet) -> Result<DiscreteMeasure> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let mut masses = vec![0.0; samples.len()];
    for (f, edges) in mesh.face_edges().iter().enumerate() {
        let [a, b, c] = edges.map(|e| samples.cell[e]);
        let cell = if a == b || a == c {
            a
        } else if b == c {
            b
        } else {
            a.min(b).min(c)
        };
        masses[cell] += mesh.face_area(f);
    }
    if let Some(k) = masses.iter().position(|&m| m <= 0.0) {
        return Err(Error::EmptyCell(k));
    }
    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    Ok(DiscreteMeasure {
        points: samples.points.iter().map(|&r| u.position(r)).collect(),
        vertices: samples.points.clone(),
        masses,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub flows: Vec<f64>,
    pub objective: f64,
    /// Largest violation of the row constraints.
    pub row_residual: f64,
    pub col_residual: f64,
    pub mass_fraction: f64,
}

impl TransportPlan {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.cols + j]
    }

    pub fn total(&self) -> f64 {
        self.flows.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.rows {
            w.write_record((0..self.cols).map(|j| format!("{:?}", self.get(i, j))))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn row_sums(flows: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    (0..rows).map(|i| flows[i * cols..(i + 1) * cols].iter().sum()).collect()
}

fn col_sums(flows: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    (0..cols).map(|j| (0..rows).map(|i| flows[i * cols + j]).sum()).collect()
}

fn objective(flows: &[f64], cost: &[f64]) -> f64 {
    flows.iter().zip(cost).map(|(p, c)| p * c).sum()
}

fn check_shape(mu: &[f64], nu: &[f64], cost: &[f64]) -> Result<()> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if cost.len() != mu.len() * nu.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} costs for {} × {} masses",
            cost.len(),
            mu.len(),
            nu.len()
        )));
    }
    if mu.iter().chain(nu).any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::InvalidParameter("masses must be finite and non-negative".into()));
    }
    Ok(())
}

/// Balanced transport between raw mass vectors; `nu` is rescaled onto the
/// total of `mu` when the totals differ by at most `1e-6`.
pub fn transport_masses(mu: &[f64], nu: &[f64], cost: &[f64]) -> Result<TransportPlan> {
    check_shape(mu, nu, cost)?;
    let (sm, sn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (sm - sn).abs() > MASS_GUARD * sm.max(sn) {
        return Err(Error::InfeasibleMasses(sm, sn));
    }
    let nu: Vec<f64> = if sm == sn { nu.to_vec() } else { nu.iter().map(|v| v * sm / sn).collect() };
    let (m, n) = (mu.len(), nu.len());
    let flows = simplex::solve(&Problem { supply: mu, demand: &nu, cost, forbidden: None })?;
    let rs = row_sums(&flows, m, n);
    let cs = col_sums(&flows, m, n);
    Ok(TransportPlan {
        rows: m,
        cols: n,
        objective: objective(&flows, cost),
        row_residual: rs.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        col_residual: cs.iter().zip(&nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        flows,
        mass_fraction: 1.0,
    })
}

/// Moves exactly `q` units of mass with row and column sums bounded by the
/// marginals.
///
/// A virtual last row absorbs the unused column capacity and a virtual first
/// column absorbs the unused row capacity, both at zero cost. The arc between
/// them is excluded, so every real unit routed to a virtual node is matched
/// by a real unit left in place.
pub fn partial_transport_masses(mu: &[f64], nu: &[f64], cost: &[f64], q: f64) -> Result<TransportPlan> {
    check_shape(mu, nu, cost)?;
    let (sm, sn): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    let cap = sm.min(sn);
    if !(q > 0.0) || q > cap * (1.0 + 1e-12) {
        return Err(Error::QOutOfRange(q));
    }
    let q = q.min(cap);
    let (m, n) = (mu.len(), nu.len());
    let mut supply = mu.to_vec();
    supply.push(sn - q);
    let mut demand = vec![sm - q];
    demand.extend_from_slice(nu);
    let mut big = vec![0.0; (m + 1) * (n + 1)];
    for i in 0..m {
        big[i * (n + 1) + 1..(i + 1) * (n + 1)].copy_from_slice(&cost[i * n..(i + 1) * n]);
    }
    let full = simplex::solve(&Problem { supply: &supply, demand: &demand, cost: &big, forbidden: Some((m, 0)) })?;
    let mut flows = vec![0.0; m * n];
    for i in 0..m {
        flows[i * n..(i + 1) * n].copy_from_slice(&full[i * (n + 1) + 1..(i + 1) * (n + 1)]);
    }
    let rs = row_sums(&flows, m, n);
    let cs = col_sums(&flows, m, n);
    let excess = |s: &[f64], cap: &[f64]| s.iter().zip(cap).map(|(a, b)| (a - b).max(0.0)).fold(0.0, f64::max);
    let total: f64 = flows.iter().sum();
    Ok(TransportPlan {
        rows: m,
        cols: n,
        objective: objective(&flows, cost),
        row_residual: excess(&rs, mu).max((total - q).abs()),
        col_residual: excess(&cs, nu),
        flows,
        mass_fraction: q,
    })
}

pub fn solve_transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: &CostMatrix) -> Result<TransportPlan> {
    check_cost_shape(mu, nu, c)?;
    transport_masses(&mu.masses, &nu.masses, &c.costs)
}

pub fn solve_partial_transport(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: &CostMatrix, q: f64) -> Result<TransportPlan> {
    check_cost_shape(mu, nu, c)?;
    partial_transport_masses(&mu.masses, &nu.masses, &c.costs, q)
}

/// Plan with every sample weighted `1/N` on a square cost matrix; its vertex
/// solution is a permutation (`q = 1`) or a partial one (`q = M/N`).
pub fn uniform_transport(c: &CostMatrix, q: f64) -> Result<TransportPlan> {
    if c.rows != c.cols {
        return Err(Error::ShapeMismatch(format!("uniform matching needs a square matrix, got {} × {}", c.rows, c.cols)));
    }
    let w = vec![1.0 / c.rows as f64; c.rows];
    if q == 1.0 {
        transport_masses(&w, &w, &c.costs)
    } else {
        partial_transport_masses(&w, &w, &c.costs, q)
    }
}

fn check_cost_shape(mu: &DiscreteMeasure, nu: &DiscreteMeasure, c: &CostMatrix) -> Result<()> {
    if c.rows != mu.len() || c.cols != nu.len() {
        return Err(Error::ShapeMismatch(format!(
            "cost matrix is {} × {}, measures have {} and {} points",
            c.rows,
            c.cols,
            mu.len(),
            nu.len()
        )));
    }
    Ok(())
}

/// Matched pairs of a uniform-mass vertex plan, in row order.
pub fn extract_permutation(plan: &TransportPlan) -> Result<Vec<(usize, usize)>> {
    let unit = 1.0 / plan.rows as f64;
    let tol = 1e-6 * unit;
    let mut used_col = vec![false; plan.cols];
    let mut out = Vec::new();
    for i in 0..plan.rows {
        let mut used_row = false;
        for j in 0..plan.cols {
            let x = plan.get(i, j);
            if x > 0.5 * unit {
                if (x - unit).abs() > tol || used_row || used_col[j] {
                    return Err(Error::NonVertexPlan(i, j, x));
                }
                used_row = true;
                used_col[j] = true;
                out.push((i, j));
            } else if x.abs() > tol {
                return Err(Error::NonVertexPlan(i, j, x));
            }
        }
    }
    Ok(out)
}

/// Parameters of the disk distance pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceParams {
    pub radius: f64,
    pub rotations: usize,
    pub quad_h: f64,
    pub samples: usize,
    /// Mid-edge vertex seeding the sample FPS.
    pub seed: usize,
    pub mass_fraction: f64,
    pub uniformize: UniformizeParams,
}

impl Default for DistanceParams {
    fn default() -> Self {
        DistanceParams {
            radius: 0.5,
            rotations: 64,
            quad_h: 0.05,
            samples: 100,
            seed: 0,
            mass_fraction: 1.0,
            uniformize: UniformizeParams::default(),
        }
    }
}

impl DistanceParams {
    pub fn cost_config(&self) -> Result<CostConfig> {
        CostConfig::new(self.radius, self.rotations, self.quad_h)
    }
}

/// A surface scaled to unit area, uniformized, sampled and discretized.
#[derive(Clone, Debug)]
pub struct PreparedSurface {
    pub mesh: TriangleMesh,
    pub uniformized: Uniformized,
    pub samples: SamplePointSet,
    pub measure: DiscreteMeasure,
}

pub fn prepare_surface(mesh: &TriangleMesh, params: &DistanceParams) -> Result<PreparedSurface> {
    let mesh = mesh.normalize_area()?;
    let uniformized = uniformize(&mesh, &params.uniformize)?;
    let samples = sample_disk(&uniformized, params.samples, params.seed)?;
    let measure = discretize_measure(&mesh, &uniformized, &samples)?;
    Ok(PreparedSurface { mesh, uniformized, samples, measure })
}

/// Farthest point samples over the mid-edges whose images lie inside the disk.
pub fn sample_disk(u: &Uniformized, n: usize, seed: usize) -> Result<SamplePointSet> {
    farthest_point_sample_graph(&u.mid.graph(), n, seed, Some(&u.interior_mask()))
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub value: f64,
    pub plan: TransportPlan,
    pub costs: CostMatrix,
}

pub fn distance_prepared(a: &PreparedSurface, b: &PreparedSurface, cfg: &CostConfig, q: f64) -> Result<DistanceResult> {
    let costs = cost_matrix(&a.uniformized.density, &b.uniformized.density, &a.measure.points, &b.measure.points, cfg)?;
    let plan = if q == 1.0 {
        solve_transport(&a.measure, &b.measure, &costs)?
    } else {
        solve_partial_transport(&a.measure, &b.measure, &costs, q)?
    };
    Ok(DistanceResult { value: plan.objective, plan, costs })
}

/// Conformal Wasserstein distance between two disk-type meshes.
pub fn distance(a: &TriangleMesh, b: &TriangleMesh, params: &DistanceParams) -> Result<DistanceResult> {
    let cfg = params.cost_config()?;
    let pa = prepare_surface(a, params)?;
    let pb = prepare_surface(b, params)?;
    distance_prepared(&pa, &pb, &cfg, params.mass_fraction)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dissimilarity {
    pub raw: DMatrix<f64>,
    pub normalized: DMatrix<f64>,
}

/// Off-diagonal entries mapped affinely onto `[0, 1]`; the diagonal is zero.
pub fn normalize_dissimilarity(raw: &DMatrix<f64>) -> DMatrix<f64> {
    let k = raw.nrows();
    let off = (0..k).flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)));
    let (lo, hi) = off.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (i, j)| {
        (lo.min(raw[(i, j)]), hi.max(raw[(i, j)]))
    });
    let span = hi - lo;
    DMatrix::from_fn(k, k, |i, j| {
        if i == j || !(span > 0.0) {
            0.0
        } else {
            (raw[(i, j)] - lo) / span
        }
    })
}

/// Pairwise distances of prepared surfaces. Each unordered pair is solved
/// once, with the lower index as source, and mirrored.
pub fn dissimilarity_prepared(surfaces: &[PreparedSurface], cfg: &CostConfig, q: f64) -> Result<Dissimilarity> {
    let k = surfaces.len();
    if k < 2 {
        return Err(Error::InvalidParameter(format!("need at least two meshes, got {k}")));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| distance_prepared(&surfaces[i], &surfaces[j], cfg, q).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut raw = DMatrix::zeros(k, k);
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        raw[(i, j)] = v;
        raw[(j, i)] = v;
    }
    let normalized = normalize_dissimilarity(&raw);
    Ok(Dissimilarity { raw, normalized })
}

pub fn dissimilarity_matrix(meshes: &[TriangleMesh], params: &DistanceParams) -> Result<Dissimilarity> {
    if meshes.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least two meshes, got {}", meshes.len())));
    }
    let cfg = params.cost_config()?;
    let surfaces: Vec<PreparedSurface> =
        meshes.par_iter().map(|m| prepare_surface(m, params)).collect::<Result<_>>()?;
    dissimilarity_prepared(&surfaces, &cfg, params.mass_fraction)
}

/// Entrywise product of equally shaped matrices.
pub fn combine_scales(matrices: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = matrices.first().ok_or_else(|| Error::InvalidParameter("no matrices to combine".into()))?;
    let mut out = first.clone();
    for m in &matrices[1..] {
        if m.shape() != out.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", m.shape(), out.shape())));
        }
        out.component_mul_assign(m);
    }
    Ok(out)
}

pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| format!("{:?}", m[(i, j)])))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
