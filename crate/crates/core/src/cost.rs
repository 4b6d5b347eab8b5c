//! Quadrature approximation of the Möbius-invariant local cost between two
//! disk densities, minimized over a grid of rotations.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{build_quadrature, MobiusDisk, QuadratureRule};
use crate::uniformization::ConformalDensity;
use crate::C64;

/// A hyperbolic density on the unit disk.
pub trait Density: Sync {
    fn hyperbolic(&self, z: C64) -> f64;
}

impl Density for ConformalDensity {
    fn hyperbolic(&self, z: C64) -> f64 {
        self.hyperbolic_unchecked(z)
    }
}

/// Adapts a closure into a [`Density`].
pub struct FnDensity<F>(pub F);

impl<F: Fn(C64) -> f64 + Sync> Density for FnDensity<F> {
    fn hyperbolic(&self, z: C64) -> f64 {
        (self.0)(z)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostConfig {
    pub radius: f64,
    pub rotations: usize,
    pub quadrature: QuadratureRule,
}

impl CostConfig {
    pub fn new(radius: f64, rotations: usize, pitch: f64) -> Result<Self> {
        Self::with_rule(rotations, build_quadrature(radius, pitch)?)
    }

    pub fn with_rule(rotations: usize, quadrature: QuadratureRule) -> Result<Self> {
        if rotations < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 rotations, got {rotations}")));
        }
        Ok(CostConfig { radius: quadrature.radius, rotations, quadrature })
    }

    /// `e^{2πiℓ/L}`; the angle is formed from `ℓ/L` so that the grid for
    /// `2L` contains the grid for `L` exactly.
    pub fn rotation(&self, l: usize) -> C64 {
        C64::from_polar(1.0, TAU * (l as f64 / self.rotations as f64))
    }
}

/// Costs and minimizing rotations for every sample pair, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub costs: Vec<f64>,
    pub argmin: Vec<usize>,
    pub rotations: usize,
    pub source_anchors: Vec<MobiusDisk>,
    pub target_anchors: Vec<MobiusDisk>,
}

impl CostMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.cols + j]
    }

    pub fn argmin_rotation(&self, i: usize, j: usize) -> usize {
        self.argmin[i * self.cols + j]
    }

    /// `m̃_j ∘ R_{ℓ*} ∘ m̃_i^{-1}`, the disk map realizing entry `(i, j)`.
    pub fn mobius(&self, i: usize, j: usize) -> MobiusDisk {
        let l = self.argmin_rotation(i, j);
        let rot = MobiusDisk::rotation(TAU * (l as f64 / self.rotations as f64));
        self.target_anchors[j].compose(&rot).compose(&self.source_anchors[i].inverse())
    }

    pub fn transpose_costs(&self) -> Vec<f64> {
        let mut t = vec![0.0; self.costs.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn write_costs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.rows {
            w.write_record((0..self.cols).map(|j| format!("{:?}", self.get(i, j))))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_argmin_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.rows {
            w.write_record((0..self.cols).map(|j| self.argmin_rotation(i, j).to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Disk automorphism with `θ = 0` sending 0 to `z0`.
pub fn anchor_map(z0: C64) -> MobiusDisk {
    MobiusDisk::new(0.0, -z0)
}

fn check_point(z: C64) -> Result<()> {
    if z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z))
    }
}

fn sample(density: &dyn Density, z: C64) -> Result<f64> {
    let v = density.hyperbolic(z);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DensityEval(format!("non-finite density {v} at {z}")))
    }
}

/// `μ(m̃(p_k))` for every node.
fn source_values(mu: &dyn Density, z: C64, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let m = anchor_map(z);
    rule.nodes.iter().map(|&p| sample(mu, m.apply(p))).collect()
}

/// `ν(m̃(R_ℓ p_k))` for every rotation (outer) and node (inner).
fn target_table(nu: &dyn Density, w: C64, cfg: &CostConfig) -> Result<Vec<f64>> {
    let m = anchor_map(w);
    let k = cfg.quadrature.len();
    let mut table = Vec::with_capacity(cfg.rotations * k);
    for l in 0..cfg.rotations {
        let rot = cfg.rotation(l);
        for &p in &cfg.quadrature.nodes {
            table.push(sample(nu, m.apply(rot * p))?);
        }
    }
    Ok(table)
}

fn best_rotation(a: &[f64], table: &[f64], weights: &[f64], rotations: usize) -> (f64, usize) {
    let k = weights.len();
    let mut best = (f64::INFINITY, 0);
    for l in 0..rotations {
        let b = &table[l * k..(l + 1) * k];
        let mut s = 0.0;
        for q in 0..k {
            s += weights[q] * (a[q] - b[q]).abs();
        }
        if s < best.0 {
            best = (s, l);
        }
    }
    best
}

/// Approximate local cost between `μ` near `z` and `ν` near `w`, with the
/// index of the minimizing rotation.
pub fn local_cost(mu: &dyn Density, nu: &dyn Density, z: C64, w: C64, cfg: &CostConfig) -> Result<(f64, usize)> {
    check_point(z)?;
    check_point(w)?;
    let a = source_values(mu, z, &cfg.quadrature)?;
    let table = target_table(nu, w, cfg)?;
    Ok(best_rotation(&a, &table, &cfg.quadrature.weights, cfg.rotations))
}

/// Every entry of the cost matrix between samples `zs` of `μ` and `ws` of `ν`.
///
/// Entries are computed independently into fixed slots, so the result does
/// not depend on the number of worker threads.
pub fn cost_matrix(mu: &dyn Density, nu: &dyn Density, zs: &[C64], ws: &[C64], cfg: &CostConfig) -> Result<CostMatrix> {
    for &z in zs.iter().chain(ws) {
        check_point(z)?;
    }
    let sources: Vec<Vec<f64>> =
        zs.par_iter().map(|&z| source_values(mu, z, &cfg.quadrature)).collect::<Result<_>>()?;
    let tables: Vec<Vec<f64>> = ws.par_iter().map(|&w| target_table(nu, w, cfg)).collect::<Result<_>>()?;
    let cols = ws.len();
    let entries: Vec<(f64, usize)> = (0..zs.len() * cols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / cols, idx % cols);
            best_rotation(&sources[i], &tables[j], &cfg.quadrature.weights, cfg.rotations)
        })
        .collect();
    Ok(CostMatrix {
        rows: zs.len(),
        cols,
        costs: entries.iter().map(|e| e.0).collect(),
        argmin: entries.iter().map(|e| e.1).collect(),
        rotations: cfg.rotations,
        source_anchors: zs.iter().map(|&z| anchor_map(z)).collect(),
        target_anchors: ws.iter().map(|&w| anchor_map(w)).collect(),
    })
}
