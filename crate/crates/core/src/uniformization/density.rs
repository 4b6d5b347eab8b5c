use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MidEdgeMesh;
use crate::C64;

use super::flatten::{FlatteningMap, Stage};
use super::tps::Tps;

/// Floor applied to interpolated densities.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Euclidean,
    Hyperbolic,
}

/// Discrete conformal factors of a disk map plus the smooth interpolant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConformalDensity {
    /// Area ratio per mid-edge face (`None` for faces without an image).
    pub face_euclidean: Vec<Option<f64>>,
    pub vertex_euclidean: Vec<f64>,
    pub vertex_hyperbolic: Vec<f64>,
    /// Spline fitted to the hyperbolic factors.
    pub tps: Option<Tps>,
}

fn signed_area(a: C64, b: C64, c: C64) -> f64 {
    0.5 * ((b - a).re * (c - a).im - (b - a).im * (c - a).re)
}

/// Euclidean area of the image triangle of mid-edge face `f`.
pub fn image_area(map: &FlatteningMap, mid: &MidEdgeMesh, f: usize) -> f64 {
    let [a, b, c] = mid.faces[f];
    signed_area(map.phi[a], map.phi[b], map.phi[c]).abs()
}

/// Area ratios `μ^E_f = area_3d(f) / area(Φ(f))`, their per-vertex averages
/// and `μ^H = μ^E (1 - |z|^2)^2`.
pub fn conformal_factors(mid: &MidEdgeMesh, map: &FlatteningMap) -> Result<ConformalDensity> {
    if map.stage != Stage::UnitDisk {
        return Err(Error::WrongStage("conformal factors need the unit-disk map"));
    }
    let mut face_euclidean = vec![None; mid.n_faces()];
    for f in 0..mid.n_faces() {
        if !map.active[f] {
            continue;
        }
        let img = image_area(map, mid, f);
        let mu = mid.face_area(f) / img;
        if !(img > 0.0) || !mu.is_finite() {
            return Err(Error::ZeroImageArea(f));
        }
        face_euclidean[f] = Some(mu);
    }
    let mut vertex_euclidean = vec![0.0; mid.n_vertices()];
    let mut vertex_hyperbolic = vec![0.0; mid.n_vertices()];
    for r in 0..mid.n_vertices() {
        let vals: Vec<f64> = mid.vertex_faces[r].iter().filter_map(|&f| face_euclidean[f]).collect();
        if vals.is_empty() {
            continue;
        }
        let mu = vals.iter().sum::<f64>() / vals.len() as f64;
        vertex_euclidean[r] = mu;
        vertex_hyperbolic[r] = mu * (1.0 - map.phi[r].norm_sqr()).max(0.0).powi(2);
    }
    Ok(ConformalDensity { face_euclidean, vertex_euclidean, vertex_hyperbolic, tps: None })
}

impl ConformalDensity {
    /// `∑_f μ^E_f · area(Φ(f))`, which must equal the 3D area of the
    /// retained mid-edge faces.
    pub fn pushed_area(&self, mid: &MidEdgeMesh, map: &FlatteningMap) -> f64 {
        (0..mid.n_faces())
            .filter_map(|f| self.face_euclidean[f].map(|mu| mu * image_area(map, mid, f)))
            .sum()
    }

    pub fn eval(&self, z: C64, variant: Variant) -> Result<f64> {
        let r2 = z.norm_sqr();
        if r2 >= 1.0 {
            return Err(Error::OutsideDisk(z));
        }
        let tps = self.tps.as_ref().ok_or_else(|| Error::DensityEval("no spline fitted".into()))?;
        let h = tps.eval(z);
        let v = match variant {
            Variant::Hyperbolic => h,
            Variant::Euclidean => h / (1.0 - r2).powi(2),
        };
        if v.is_nan() {
            return Err(Error::DensityEval(format!("NaN at {z}")));
        }
        Ok(v.max(DENSITY_FLOOR))
    }

    /// Hyperbolic density without the disk check, for hot loops over
    /// points already known to be inside.
    #[inline]
    pub(crate) fn hyperbolic_unchecked(&self, z: C64) -> f64 {
        let tps = self.tps.as_ref().expect("spline fitted");
        tps.eval(z).max(DENSITY_FLOOR)
    }
}

/// Free-function form of [`ConformalDensity::eval`].
pub fn eval_density(density: &ConformalDensity, z: C64, variant: Variant) -> Result<f64> {
    density.eval(z, variant)
}
