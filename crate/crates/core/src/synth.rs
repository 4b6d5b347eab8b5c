//! Deterministic synthetic surfaces: disks, height fields, spheres.
//!
//! Each generator also returns the parameter-domain position of every
//! vertex so that independently tessellated copies of one surface can be
//! matched against a known ground truth.

use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Point3, TriangleMesh};

/// A mesh plus the parameter point each vertex was sampled from
/// (`z = 0` for disk parameters, unit vectors for sphere parameters).
#[derive(Clone, Debug)]
pub struct SynthMesh {
    pub mesh: TriangleMesh,
    pub param: Vec<Point3>,
}

/// Triangulation of the closed unit disk by concentric rings; ring `k` has
/// `6k` vertices. `jitter` perturbs interior vertices by that fraction of
/// the ring spacing; `seed` also randomizes the angular phase of each ring.
pub fn disk_param(rings: usize, jitter: f64, seed: u64) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    assert!(rings >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    let mut phases = vec![0.0];
    let dr = 1.0 / rings as f64;
    for k in 1..=rings {
        ring_start.push(pts.len());
        let n = 6 * k;
        let phase = if jitter > 0.0 { rng.random::<f64>() * TAU / n as f64 } else { 0.0 };
        phases.push(phase);
        for j in 0..n {
            let mut t = phase + TAU * j as f64 / n as f64;
            let mut r = k as f64 * dr;
            if k < rings && jitter > 0.0 {
                r += jitter * dr * (rng.random::<f64>() - 0.5);
                t += jitter * (TAU / n as f64) * (rng.random::<f64>() - 0.5);
            }
            pts.push([r * t.cos(), r * t.sin()]);
        }
    }
    let mut faces = Vec::new();
    for j in 0..6 {
        faces.push([0, 1 + j, 1 + (j + 1) % 6]);
    }
    for k in 2..=rings {
        let (m, n) = (6 * (k - 1), 6 * k);
        let (si, so) = (ring_start[k - 1], ring_start[k]);
        let ang_in = |i: usize| phases[k - 1] + TAU * i as f64 / m as f64;
        let ang_out = |j: usize| phases[k] + TAU * j as f64 / n as f64;
        // start the zipper from the outer vertex nearest in angle to inner 0
        let j0 = ((phases[k - 1] - phases[k]) / (TAU / n as f64)).round().rem_euclid(n as f64) as usize;
        let base_out = ang_out(j0) - if ang_out(j0) > ang_in(0) + PI { TAU } else { 0.0 };
        let (mut i, mut j) = (0usize, 0usize);
        while i < m || j < n {
            let next_in = ang_in(i + 1);
            let next_out = base_out + TAU * (j + 1) as f64 / n as f64;
            let a = si + i % m;
            let b = so + (j0 + j) % n;
            if j < n && (i == m || next_out <= next_in) {
                faces.push([a, b, so + (j0 + j + 1) % n]);
                j += 1;
            } else {
                faces.push([a, b, si + (i + 1) % m]);
                i += 1;
            }
        }
    }
    (pts, faces)
}

fn build(vertices: Vec<Point3>, faces: Vec<[usize; 3]>, param: Vec<Point3>) -> SynthMesh {
    let mesh = TriangleMesh::new(vertices, faces).expect("synthetic mesh is valid");
    SynthMesh { mesh, param }
}

/// Disk parameterization lifted by an arbitrary embedding.
pub fn embedded_disk(
    rings: usize,
    jitter: f64,
    seed: u64,
    embed: impl Fn(f64, f64) -> Point3,
) -> SynthMesh {
    let (pts, faces) = disk_param(rings, jitter, seed);
    let vertices = pts.iter().map(|p| embed(p[0], p[1])).collect();
    let param = pts.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
    build(vertices, faces, param)
}

pub fn height_disk(rings: usize, jitter: f64, seed: u64, h: impl Fn(f64, f64) -> f64) -> SynthMesh {
    embedded_disk(rings, jitter, seed, |x, y| Point3::new(x, y, h(x, y)))
}

pub fn flat_disk(rings: usize) -> TriangleMesh {
    height_disk(rings, 0.0, 0, |_, _| 0.0).mesh
}

/// Upper unit hemisphere; the parameter radius is the polar angle scaled
/// to `[0, 1]`.
pub fn hemisphere(rings: usize, jitter: f64, seed: u64) -> SynthMesh {
    embedded_disk(rings, jitter, seed, |x, y| {
        let r = (x * x + y * y).sqrt();
        let phi = r * PI / 2.0;
        let (c, s) = if r > 0.0 { (x / r, y / r) } else { (1.0, 0.0) };
        Point3::new(phi.sin() * c, phi.sin() * s, phi.cos())
    })
}

/// Gaussian bump `height * exp(-|p - center|^2 / (2 width^2))`.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    pub center: [f64; 2],
    pub height: f64,
    pub width: f64,
}

impl Bump {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        self.height * (-(dx * dx + dy * dy) / (2.0 * self.width * self.width)).exp()
    }
}

fn bump_sum(bumps: &[Bump], x: f64, y: f64) -> f64 {
    bumps.iter().map(|b| b.eval(x, y)).sum()
}

/// `n` Gaussian bumps with random centers within radius 0.7, heights in
/// `[0.5, 1.5) × amplitude` and widths in `[0.1, 0.25)`.
pub fn random_bumps(n: usize, amplitude: f64, seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..n)
        .map(|_| {
            let r = 0.7 * rng.random::<f64>().sqrt();
            let t = TAU * rng.random::<f64>();
            Bump {
                center: [r * t.cos(), r * t.sin()],
                height: amplitude * (0.5 + rng.random::<f64>()),
                width: 0.1 + 0.15 * rng.random::<f64>(),
            }
        })
        .collect()
}

/// Height field of `bumps` over a disk tessellated with the given jitter.
pub fn bump_surface(rings: usize, jitter: f64, seed: u64, bumps: &[Bump]) -> SynthMesh {
    height_disk(rings, jitter, seed, |x, y| bump_sum(bumps, x, y))
}

/// Disk with `n_bumps` random Gaussian bumps of the given amplitude.
pub fn bumpy_disk(rings: usize, n_bumps: usize, amplitude: f64, seed: u64) -> TriangleMesh {
    bump_surface(rings, 0.2, seed, &random_bumps(n_bumps, amplitude, seed)).mesh
}

/// A crown-like patch: four cusps around a central fissure on a dome.
pub fn tooth_patch(rings: usize, jitter: f64, seed: u64) -> SynthMesh {
    let cusps = [
        Bump { center: [0.35, 0.35], height: 0.35, width: 0.18 },
        Bump { center: [-0.35, 0.3], height: 0.3, width: 0.2 },
        Bump { center: [-0.3, -0.35], height: 0.28, width: 0.17 },
        Bump { center: [0.32, -0.3], height: 0.33, width: 0.19 },
    ];
    height_disk(rings, jitter, seed, move |x, y| {
        let dome = 0.25 * (1.0 - x * x - y * y);
        let fissure = -0.08 * (-(x * x) / 0.01).exp() * (1.0 - y * y);
        dome + fissure + bump_sum(&cusps, x, y)
    })
}

/// Three-bump disk models `0..5`, differing in where the bumps sit.
pub fn bump_model_bumps(model: usize) -> [Bump; 3] {
    let polar = |r: f64, deg: f64| [r * deg.to_radians().cos(), r * deg.to_radians().sin()];
    let b = |c: [f64; 2]| Bump { center: c, height: 0.22, width: 0.11 };
    match model {
        0 => [b(polar(0.45, 90.0)), b(polar(0.45, 210.0)), b(polar(0.45, 330.0))],
        1 => [b(polar(0.45, 90.0)), b(polar(0.45, 150.0)), b(polar(0.45, 330.0))],
        2 => [b(polar(0.45, 90.0)), b(polar(0.45, 210.0)), b(polar(0.1, 0.0))],
        3 => [b(polar(0.2, 90.0)), b(polar(0.2, 210.0)), b(polar(0.2, 330.0))],
        4 => [b(polar(0.45, 90.0)), b(polar(0.6, 200.0)), b(polar(0.6, 340.0))],
        _ => panic!("bump model index {model} out of range"),
    }
}

pub fn bump_model(model: usize, rings: usize, jitter: f64, seed: u64) -> SynthMesh {
    let bumps = bump_model_bumps(model);
    height_disk(rings, jitter, seed, move |x, y| bump_sum(&bumps, x, y))
}

/// Planar `[0,1]^2` grid with `nx * ny` cells, alternating diagonals and
/// interior vertices jittered by up to `jitter` cell widths.
pub fn jittered_grid(nx: usize, ny: usize, jitter: f64, seed: u64) -> TriangleMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let mut x = i as f64 / nx as f64;
            let mut y = j as f64 / ny as f64;
            if i > 0 && i < nx && j > 0 && j < ny {
                x += jitter * (rng.random::<f64>() - 0.5) / nx as f64;
                y += jitter * (rng.random::<f64>() - 0.5) / ny as f64;
            }
            v.push(Point3::new(x, y, 0.0));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut f = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                f.push([a, b, c]);
                f.push([a, c, d]);
            } else {
                f.push([a, b, d]);
                f.push([b, c, d]);
            }
        }
    }
    TriangleMesh::new(v, f).expect("grid is valid")
}

/// Annulus with inner radius `r_in` (two boundary loops).
pub fn annulus(n_theta: usize, n_r: usize, r_in: f64) -> TriangleMesh {
    let mut v = Vec::new();
    for k in 0..=n_r {
        let r = r_in + (1.0 - r_in) * k as f64 / n_r as f64;
        for j in 0..n_theta {
            let t = TAU * j as f64 / n_theta as f64;
            v.push(Point3::new(r * t.cos(), r * t.sin(), 0.0));
        }
    }
    let id = |k: usize, j: usize| k * n_theta + j % n_theta;
    let mut f = Vec::new();
    for k in 0..n_r {
        for j in 0..n_theta {
            f.push([id(k, j), id(k + 1, j), id(k + 1, j + 1)]);
            f.push([id(k, j), id(k + 1, j + 1), id(k, j + 1)]);
        }
    }
    TriangleMesh::new(v, f).expect("annulus is valid")
}

pub fn icosahedron() -> TriangleMesh {
    let (v, f) = icosahedron_soup();
    TriangleMesh::new(v, f).expect("icosahedron is valid")
}

fn icosahedron_soup() -> (Vec<Point3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let v = raw.iter().map(|p| Point3::new(p[0], p[1], p[2]).normalize()).collect();
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v, f)
}

/// Unit icosphere after `subdiv` rounds of 4-to-1 subdivision
/// (`20 * 4^subdiv` faces).
pub fn icosphere(subdiv: usize) -> TriangleMesh {
    let (mut v, mut f) = icosahedron_soup();
    for _ in 0..subdiv {
        let mut cache = std::collections::HashMap::new();
        let mut mid = |a: usize, b: usize, v: &mut Vec<Point3>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                v.push(((v[a] + v[b]) * 0.5).normalize());
                v.len() - 1
            })
        };
        let mut nf = Vec::with_capacity(4 * f.len());
        for &[a, b, c] in &f {
            let ab = mid(a, b, &mut v);
            let bc = mid(b, c, &mut v);
            let ca = mid(c, a, &mut v);
            nf.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        f = nf;
    }
    TriangleMesh::new(v, f).expect("icosphere is valid")
}

/// Radial bump on the unit sphere centered at direction `center`.
#[derive(Clone, Copy, Debug)]
pub struct SphereBump {
    pub center: [f64; 3],
    pub height: f64,
    pub width: f64,
}

/// Icosphere whose tessellation is rotated by `tess_rotation` before the
/// surface `r(u) = 1 + sum of bumps` is sampled, then stretched by
/// `stretch` along the axes and moved by `pose`.
pub fn bumped_sphere(
    subdiv: usize,
    bumps: &[SphereBump],
    tess_rotation: Rotation3<f64>,
    stretch: [f64; 3],
    pose: Rotation3<f64>,
) -> SynthMesh {
    let base = icosphere(subdiv);
    let param: Vec<Point3> = base.vertices().iter().map(|p| tess_rotation * p).collect();
    let vertices = param
        .iter()
        .map(|u| {
            let r = 1.0
                + bumps
                    .iter()
                    .map(|b| {
                        let c = Vector3::from(b.center).normalize();
                        let d2 = (u - c).norm_squared();
                        b.height * (-d2 / (2.0 * b.width * b.width)).exp()
                    })
                    .sum::<f64>();
            let p = u * r;
            pose * Point3::new(p.x * stretch[0], p.y * stretch[1], p.z * stretch[2])
        })
        .collect();
    build(vertices, base.faces().to_vec(), param)
}

/// Applies a rotation (axis-angle vector) and translation to every vertex.
pub fn rigid_motion(mesh: &TriangleMesh, axis_angle: [f64; 3], translation: [f64; 3]) -> TriangleMesh {
    let r = Rotation3::from_scaled_axis(Vector3::from(axis_angle));
    let t = Vector3::from(translation);
    mesh.with_vertices(mesh.vertices().iter().map(|p| r * p + t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Topology;

    #[test]
    fn disk_param_is_a_disk() {
        for rings in [1, 2, 5, 12] {
            for (jitter, seed) in [(0.0, 0), (0.3, 7)] {
                let (pts, faces) = disk_param(rings, jitter, seed);
                assert_eq!(faces.len(), 6 * rings * rings);
                let v = pts.iter().map(|p| Point3::new(p[0], p[1], 0.0)).collect();
                let m = TriangleMesh::new(v, faces.clone()).unwrap();
                assert_eq!(m.topology(), Topology::Disk);
                for &[a, b, c] in &faces {
                    let (p, q, r) = (pts[a], pts[b], pts[c]);
                    let cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
                    assert!(cross > 0.0, "rings {rings} face {a} {b} {c} has area {cross}");
                }
                let area = m.total_area();
                assert!(area < PI && area > 0.82 * PI);
            }
        }
    }

    #[test]
    fn icosphere_counts() {
        let m = icosphere(2);
        assert_eq!(m.n_faces(), 320);
        assert_eq!(m.topology(), Topology::Sphere);
    }

    #[test]
    fn surfaces_are_disks() {
        assert_eq!(hemisphere(6, 0.2, 1).mesh.topology(), Topology::Disk);
        assert_eq!(tooth_patch(6, 0.2, 1).mesh.topology(), Topology::Disk);
        assert_eq!(bumpy_disk(6, 3, 0.2, 1).topology(), Topology::Disk);
        for k in 0..5 {
            assert_eq!(bump_model(k, 6, 0.0, 0).mesh.topology(), Topology::Disk);
        }
    }
}
