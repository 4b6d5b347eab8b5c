use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{MidEdgeMesh, Point3, TriangleMesh};
use crate::C64;

use super::harmonic::{corner_gradient, dirichlet_energy, face_gradient};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    PlaneSlit,
    UnitDisk,
}

/// Complex coordinates of the mid-edge vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlatteningMap {
    pub phi: Vec<C64>,
    pub excised_face: usize,
    /// Faces cut out to open a closed surface (empty for disks).
    pub removed_faces: Vec<usize>,
    /// Mid-edge faces that carry an image.
    pub active: Vec<bool>,
    /// Mid-edge vertices on the outer boundary, which the plane map sends
    /// onto the slit.
    pub slit_vertices: Vec<usize>,
    /// For each slit vertex, whether its face lies above the slit.
    pub slit_side_above: Vec<bool>,
    pub slit: [C64; 2],
    pub stage: Stage,
}

/// Conjugate of the discrete harmonic `u` on the mid-edge vertices of the
/// flagged faces: the per-face gradient of `*u` is `n × ∇u`.
#[derive(Clone, Debug)]
pub struct Conjugate {
    pub values: Vec<f64>,
    /// Largest mismatch found when closing integration loops.
    pub loop_residual: f64,
}

pub fn conjugate_harmonic(mesh: &TriangleMesh, active: &[bool], u: &[f64]) -> Result<Conjugate> {
    let mid = crate::mesh::build_mid_edge(mesh);
    conjugate_on(mesh, &mid, active, u)
}

pub(crate) fn conjugate_on(
    mesh: &TriangleMesh,
    mid: &MidEdgeMesh,
    active: &[bool],
    u: &[f64],
) -> Result<Conjugate> {
    let nf = mesh.n_faces();
    let rot: Vec<Point3> = (0..nf)
        .map(|f| {
            if active[f] {
                let (g, n, _) = face_gradient(mesh, f, u);
                n.cross(&g)
            } else {
                Point3::zeros()
            }
        })
        .collect();
    let mut value = vec![f64::NAN; mid.n_vertices()];
    let mut scale: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut visited = vec![false; nf];
    let Some(start) = (0..nf).find(|&f| active[f]) else {
        return Err(Error::NonDiskTopology("no active faces".into()));
    };
    value[mid.faces[start][0]] = 0.0;
    let mut queue = VecDeque::from([start]);
    visited[start] = true;
    while let Some(f) = queue.pop_front() {
        let m = mid.faces[f];
        let known = *m.iter().find(|&&r| !value[r].is_nan()).expect("face reached through a known vertex");
        for &r in &m {
            let delta = rot[f].dot(&(mid.vertices[r] - mid.vertices[known]));
            scale = scale.max(delta.abs());
            let predicted = value[known] + delta;
            if value[r].is_nan() {
                value[r] = predicted;
            } else {
                residual = residual.max((value[r] - predicted).abs());
            }
        }
        for &r in &m {
            for &g in &mid.vertex_faces[r] {
                if active[g] && !visited[g] {
                    visited[g] = true;
                    queue.push_back(g);
                }
            }
        }
    }
    if (0..nf).any(|f| active[f] && !visited[f]) {
        return Err(Error::NonDiskTopology("active faces are disconnected".into()));
    }
    // rounding in the gradients is relative to the magnitude of u itself
    let magnitude = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tolerance = 1e-9 * scale.max(magnitude).max(f64::MIN_POSITIVE);
    if residual > tolerance {
        return Err(Error::NonHarmonicInput { residual, tolerance });
    }
    Ok(Conjugate { values: value, loop_residual: residual / scale.max(f64::MIN_POSITIVE) })
}

/// Dirichlet energy of a non-conforming (mid-edge linear) function.
pub fn mid_edge_energy(mesh: &TriangleMesh, mid: &MidEdgeMesh, active: &[bool], w: &[f64]) -> f64 {
    // ψ_k = 1 - 2 φ_k is the mid-edge basis function of the edge opposite
    // corner k, so ∇ = -2 ∑ w(opp k) ∇φ_k
    let mut total = 0.0;
    for f in 0..mesh.n_faces() {
        if !active[f] {
            continue;
        }
        let m = mid.faces[f];
        // edge opposite corner k is edge (k+1, k+2), i.e. mid-edge slot k+1
        let mut per_corner = [0.0; 3];
        for k in 0..3 {
            per_corner[k] = -2.0 * w[m[(k + 1) % 3]];
        }
        let (g, _, a) = corner_gradient(mesh, f, per_corner);
        total += a * g.norm_squared();
    }
    total
}

/// `(E(u), E(*u))` for checking that conjugation preserves energy.
pub fn energy_pair(mesh: &TriangleMesh, active: &[bool], u: &[f64], conj: &[f64]) -> (f64, f64) {
    let mid = crate::mesh::build_mid_edge(mesh);
    (dirichlet_energy(mesh, active, u), mid_edge_energy(mesh, &mid, active, conj))
}

/// Builds the plane-slit map `Φ = u + i *u` from a harmonic solution.
pub(crate) fn assemble_plane_map(
    mesh: &TriangleMesh,
    mid: &MidEdgeMesh,
    active: Vec<bool>,
    excised_face: usize,
    removed_faces: Vec<usize>,
    u: &[f64],
) -> Result<FlatteningMap> {
    let conj = conjugate_on(mesh, mid, &active, u)?;
    let phi: Vec<C64> = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(r, &[a, b])| C64::new(0.5 * (u[a] + u[b]), conj.values[r]))
        .collect();

    let excised_edges = mesh.face_edges()[excised_face];
    let mut slit_vertices = Vec::new();
    let mut slit_face = Vec::new();
    for r in 0..mid.n_vertices() {
        let faces: Vec<usize> = mid.vertex_faces[r].iter().copied().filter(|&f| active[f]).collect();
        if faces.len() == 1 && !excised_edges.contains(&r) {
            slit_vertices.push(r);
            slit_face.push(faces[0]);
        }
    }
    if slit_vertices.is_empty() {
        return Err(Error::NonDiskTopology("no outer boundary".into()));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y = 0.0;
    for &r in &slit_vertices {
        lo = lo.min(phi[r].re);
        hi = hi.max(phi[r].re);
        y += phi[r].im;
    }
    y /= slit_vertices.len() as f64;
    let slit_side_above = slit_vertices
        .iter()
        .zip(&slit_face)
        .map(|(&r, &f)| {
            let c: C64 = mid.faces[f].iter().filter(|&&s| s != r).map(|&s| phi[s]).sum::<C64>() * 0.5;
            c.im > y
        })
        .collect();
    Ok(FlatteningMap {
        phi,
        excised_face,
        removed_faces,
        active,
        slit_vertices,
        slit_side_above,
        slit: [C64::new(lo, y), C64::new(hi, y)],
        stage: Stage::PlaneSlit,
    })
}

impl FlatteningMap {
    pub fn slit_length(&self) -> f64 {
        (self.slit[1] - self.slit[0]).norm()
    }

    /// Spread of the imaginary parts on the slit.
    pub fn slit_spread(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &r in &self.slit_vertices {
            lo = lo.min(self.phi[r].im);
            hi = hi.max(self.phi[r].im);
        }
        hi - lo
    }

    /// Largest relative mismatch of the per-face similarity test: the complex
    /// ratio fixed by two edges must carry the third.
    pub fn similarity_residual(&self, mid: &MidEdgeMesh) -> f64 {
        let mut worst: f64 = 0.0;
        for (f, m) in mid.faces.iter().enumerate() {
            if !self.active[f] {
                continue;
            }
            let z = local_coords(mid, *m);
            let w = m.map(|r| self.phi[r]);
            let alpha = (w[1] - w[0]) / (z[1] - z[0]);
            let predicted = w[0] + alpha * (z[2] - z[0]);
            worst = worst.max((predicted - w[2]).norm() / (w[1] - w[0]).norm());
        }
        worst
    }

    /// Affine normalization sending the slit to `[-2, 2]`.
    pub fn slit_normalization(&self) -> (C64, f64) {
        let center = (self.slit[0] + self.slit[1]) * 0.5;
        (center, 4.0 / (self.slit[1].re - self.slit[0].re))
    }

    /// Maps the plane-slit picture onto the unit disk through the inverse of
    /// `z = w + 1/w`.
    pub fn slit_to_disk(&self) -> Result<FlatteningMap> {
        if self.stage != Stage::PlaneSlit {
            return Err(Error::WrongStage("slit_to_disk expects a plane-slit map"));
        }
        let (center, scale) = self.slit_normalization();
        let mut phi: Vec<C64> = self.phi.iter().map(|&z| inverse_joukowski((z - center) * scale)).collect();
        for (&r, &above) in self.slit_vertices.iter().zip(&self.slit_side_above) {
            let x = ((self.phi[r].re - center.re) * scale).clamp(-2.0, 2.0);
            phi[r] = slit_limit(x, above);
        }
        Ok(FlatteningMap {
            phi,
            slit: [C64::new(-1.0, 0.0), C64::new(1.0, 0.0)],
            stage: Stage::UnitDisk,
            ..self.clone()
        })
    }
}

/// Coordinates of a mid-edge triangle in its own plane, orientation kept.
pub(crate) fn local_coords(mid: &MidEdgeMesh, m: [usize; 3]) -> [C64; 3] {
    let p = m.map(|r| mid.vertices[r]);
    let e1 = (p[1] - p[0]).normalize();
    let n = (p[1] - p[0]).cross(&(p[2] - p[0])).normalize();
    let e2 = n.cross(&e1);
    p.map(|q| {
        let d = q - p[0];
        C64::new(d.dot(&e1), d.dot(&e2))
    })
}

/// Root of `w^2 - z w + 1 = 0` inside the closed unit disk.
pub fn inverse_joukowski(z: C64) -> C64 {
    let s = (z * z - 4.0).sqrt();
    // the larger root has no cancellation; its reciprocal is the one we want
    let big = if (z + s).norm() >= (z - s).norm() { z + s } else { z - s };
    C64::new(2.0, 0.0) / big
}

/// Image of a point `x ∈ [-2, 2]` of the slit approached from above
/// (`above`) or below. Upper half plane corresponds to the lower half disk.
pub fn slit_limit(x: f64, above: bool) -> C64 {
    let c = 0.5 * x;
    let s = (1.0 - c * c).max(0.0).sqrt();
    C64::new(c, if above { -s } else { s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joukowski_examples() {
        assert!((inverse_joukowski(C64::new(2.5, 0.0)) - C64::new(0.5, 0.0)).norm() < 1e-15);
        let w = inverse_joukowski(C64::new(2.0, 0.0));
        assert!((w - C64::new(1.0, 0.0)).norm() < 1e-7);
        let z = C64::new(0.0, 5.0);
        let w = inverse_joukowski(z);
        // oracle: quadratic formula, root of smaller modulus
        let disc = (z * z - 4.0).sqrt();
        let roots = [(z - disc) / 2.0, (z + disc) / 2.0];
        let inside = if roots[0].norm() < roots[1].norm() { roots[0] } else { roots[1] };
        assert!((w - inside).norm() < 1e-14);
        assert!((w - C64::new(0.0, -0.19258)).norm() < 1e-5);
        assert!((w + 1.0 / w - z).norm() < 1e-12);
    }

    #[test]
    fn slit_limits_on_circle() {
        for k in 0..=20 {
            let x = -2.0 + 0.2 * k as f64;
            for above in [true, false] {
                let w = slit_limit(x, above);
                assert!((w.norm() - 1.0).abs() < 1e-15);
                assert!((w + 1.0 / w - x).norm() < 1e-12);
                // consistent with the one-sided limit of the interior branch
                let eps = if above { 1e-9 } else { -1e-9 };
                let near = inverse_joukowski(C64::new(x, eps));
                assert!((near - w).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn far_points_go_near_origin() {
        let w = inverse_joukowski(C64::new(1e8, -3e7));
        assert!(w.norm() < 1e-7);
        let z = C64::new(1e8, -3e7);
        assert!(((w + 1.0 / w - z) / z).norm() < 1e-12);
    }
}
