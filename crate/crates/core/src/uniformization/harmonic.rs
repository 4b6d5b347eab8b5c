use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::mesh::{Point3, Topology, TriangleMesh};

/// Cotangents of the three corner angles of face `f` (corner `k` sits at
/// `faces[f][k]`).
pub(crate) fn corner_cotangents(mesh: &TriangleMesh, f: usize) -> Result<[f64; 3]> {
    let tri = mesh.faces()[f];
    let p = mesh.vertices();
    let mut cot = [0.0; 3];
    for k in 0..3 {
        let e1 = p[tri[(k + 1) % 3]] - p[tri[k]];
        let e2 = p[tri[(k + 2) % 3]] - p[tri[k]];
        let cross = e1.cross(&e2).norm();
        if !(cross > 0.0) {
            return Err(Error::SingularSystem(format!("face {f} is degenerate")));
        }
        cot[k] = e1.dot(&e2) / cross;
    }
    Ok(cot)
}

/// Per-face constant gradient of the piecewise linear function `u`.
pub(crate) fn face_gradient(mesh: &TriangleMesh, f: usize, u: &[f64]) -> (Point3, Point3, f64) {
    let tri = mesh.faces()[f];
    corner_gradient(mesh, f, tri.map(|v| u[v]))
}

/// Gradient, unit normal and area of face `f` for the linear function with
/// the given corner values.
pub(crate) fn corner_gradient(mesh: &TriangleMesh, f: usize, corner: [f64; 3]) -> (Point3, Point3, f64) {
    let tri = mesh.faces()[f];
    let p = mesh.vertices();
    let nrm = (p[tri[1]] - p[tri[0]]).cross(&(p[tri[2]] - p[tri[0]]));
    let twice_area = nrm.norm();
    let n = nrm / twice_area;
    let mut g = Point3::zeros();
    for k in 0..3 {
        let opp = p[tri[(k + 2) % 3]] - p[tri[(k + 1) % 3]];
        g += n.cross(&opp) * (corner[k] / twice_area);
    }
    (g, n, 0.5 * twice_area)
}

/// Dirichlet energy `∑_f area_f |∇u_f|^2` over the flagged faces.
pub fn dirichlet_energy(mesh: &TriangleMesh, active: &[bool], u: &[f64]) -> f64 {
    (0..mesh.n_faces())
        .filter(|&f| active[f])
        .map(|f| {
            let (g, _, a) = face_gradient(mesh, f, u);
            a * g.norm_squared()
        })
        .sum()
}

/// Result of a harmonic solve.
#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    pub values: Vec<f64>,
    /// `‖K_FF u_F - b‖ / ‖b‖` for the reduced system.
    pub relative_residual: f64,
}

/// Harmonic function on the mesh minus `excised_face`, with two anchored
/// vertices of that face and natural boundary conditions elsewhere.
pub fn dirichlet_solve(
    mesh: &TriangleMesh,
    excised_face: usize,
    anchors: [(usize, f64); 2],
) -> Result<HarmonicSolution> {
    if mesh.topology() != Topology::Disk {
        return Err(Error::NonDiskTopology(format!("{:?}", mesh.topology())));
    }
    if excised_face >= mesh.n_faces() {
        return Err(Error::InvalidParameter(format!("face {excised_face} out of range")));
    }
    let tri = mesh.faces()[excised_face];
    if !anchors.iter().all(|(v, _)| tri.contains(v)) || anchors[0].0 == anchors[1].0 {
        return Err(Error::InvalidParameter("anchors must be two vertices of the excised face".into()));
    }
    let mut active = vec![true; mesh.n_faces()];
    active[excised_face] = false;
    solve_masked(mesh, &active, &anchors)
}

/// Minimizes the Dirichlet energy of the flagged faces with the given
/// vertices held fixed.
pub(crate) fn solve_masked(
    mesh: &TriangleMesh,
    active: &[bool],
    anchors: &[(usize, f64)],
) -> Result<HarmonicSolution> {
    let nv = mesh.n_vertices();
    let mut fixed = vec![None; nv];
    for &(v, val) in anchors {
        fixed[v] = Some(val);
    }
    let mut free_id = vec![usize::MAX; nv];
    let mut n_free = 0;
    for v in 0..nv {
        if fixed[v].is_none() {
            free_id[v] = n_free;
            n_free += 1;
        }
    }

    let mut coo = CooMatrix::new(n_free, n_free);
    let mut rhs = vec![0.0; n_free];
    let mut touched = vec![false; nv];
    for f in 0..mesh.n_faces() {
        if !active[f] {
            continue;
        }
        let tri = mesh.faces()[f];
        let cot = corner_cotangents(mesh, f)?;
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            touched[i] = true;
            touched[j] = true;
            let w = 0.5 * cot[k];
            for (a, b) in [(i, j), (j, i)] {
                if free_id[a] == usize::MAX {
                    continue;
                }
                coo.push(free_id[a], free_id[a], w);
                match fixed[b] {
                    Some(val) => rhs[free_id[a]] += w * val,
                    None => coo.push(free_id[a], free_id[b], -w),
                }
            }
        }
    }
    if let Some(v) = (0..nv).find(|&v| !touched[v] && fixed[v].is_none()) {
        return Err(Error::SingularSystem(format!("vertex {v} has no active face")));
    }
    let k = CscMatrix::from(&coo);
    let chol = CscCholesky::factor(&k).map_err(|e| Error::SingularSystem(e.to_string()))?;
    let b = DVector::from_vec(rhs);
    let mut x = DVector::from_column_slice(chol.solve(&b).as_slice());
    // one step of iterative refinement
    let r = &b - &k * &x;
    let dx = chol.solve(&r);
    x += DVector::from_column_slice(dx.as_slice());
    let r = &b - &k * &x;
    let bn = b.norm();
    let relative_residual = if bn > 0.0 { r.norm() / bn } else { r.norm() };
    if !relative_residual.is_finite() || relative_residual > 1e-10 {
        return Err(Error::SingularSystem(format!("relative residual {relative_residual:e}")));
    }

    let values = (0..nv)
        .map(|v| fixed[v].unwrap_or_else(|| x[free_id[v]]))
        .collect();
    Ok(HarmonicSolution { values, relative_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn anchored_face(mesh: &TriangleMesh) -> (usize, [(usize, f64); 2]) {
        let f = crate::uniformization::choose_excised_face(mesh, &vec![true; mesh.n_faces()]);
        let tri = mesh.faces()[f];
        (f, [(tri[0], 0.0), (tri[1], 1.0)])
    }

    #[test]
    fn residual_small_on_flat_disk() {
        let mesh = crate::synth::flat_disk(8);
        let (f, anchors) = anchored_face(&mesh);
        let sol = dirichlet_solve(&mesh, f, anchors).unwrap();
        assert!(sol.relative_residual <= 1e-10);
        assert_eq!(sol.values[anchors[0].0], 0.0);
        assert_eq!(sol.values[anchors[1].0], 1.0);
        assert!(sol.values.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn symmetric_stencil_mean_value() {
        // hexagon ring around one interior vertex, boundary values fixed by
        // a linear function
        let mesh = crate::synth::flat_disk(1);
        let lin = |p: &Point3| 0.3 + 2.0 * p.x - 0.7 * p.y;
        let anchors: Vec<(usize, f64)> = (1..7).map(|v| (v, lin(&mesh.vertices()[v]))).collect();
        let active = vec![true; mesh.n_faces()];
        let sol = solve_masked(&mesh, &active, &anchors).unwrap();
        assert!((sol.values[0] - lin(&mesh.vertices()[0])).abs() < 1e-14);
    }

    #[test]
    fn planar_affine_reproduced() {
        // with every boundary vertex fixed to an affine function the
        // interior solution is that function
        let mesh = crate::synth::jittered_grid(6, 6, 0.4, 9);
        let lin = |p: &Point3| 1.0 - 0.5 * p.x + 1.5 * p.y;
        let mut anchors = Vec::new();
        for lp in mesh.boundary_loops() {
            for v in lp {
                anchors.push((v, lin(&mesh.vertices()[v])));
            }
        }
        let sol = solve_masked(&mesh, &vec![true; mesh.n_faces()], &anchors).unwrap();
        for (v, p) in mesh.vertices().iter().enumerate() {
            assert!((sol.values[v] - lin(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_is_minimal() {
        let mesh = crate::synth::bumpy_disk(6, 3, 0.3, 4);
        let (f, anchors) = anchored_face(&mesh);
        let sol = dirichlet_solve(&mesh, f, anchors).unwrap();
        let mut active = vec![true; mesh.n_faces()];
        active[f] = false;
        let e0 = dirichlet_energy(&mesh, &active, &sol.values);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let mut v = sol.values.clone();
            for (i, x) in v.iter_mut().enumerate() {
                if i != anchors[0].0 && i != anchors[1].0 {
                    *x += 1e-3 * (rng.random::<f64>() - 0.5);
                }
            }
            assert!(dirichlet_energy(&mesh, &active, &v) >= e0);
        }
    }

    #[test]
    fn rejects_non_disk() {
        let ico = crate::synth::icosahedron();
        let tri = ico.faces()[0];
        let err = dirichlet_solve(&ico, 0, [(tri[0], 0.0), (tri[1], 1.0)]).unwrap_err();
        assert_eq!(err.name(), "NonDiskTopology");
    }
}
