use std::f64::consts::TAU;

use nalgebra::Matrix2;

use crate::C64;

pub type Mat2 = Matrix2<C64>;

/// Disk automorphism `m(z) = e^{iθ} (z - a) / (1 - conj(a) z)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MobiusDisk {
    pub theta: f64,
    pub a: C64,
}

impl MobiusDisk {
    pub fn new(theta: f64, a: C64) -> Self {
        assert!(a.norm_sqr() < 1.0, "pole {a} must lie inside the unit disk");
        MobiusDisk { theta: theta.rem_euclid(TAU), a }
    }

    pub fn identity() -> Self {
        MobiusDisk { theta: 0.0, a: C64::new(0.0, 0.0) }
    }

    pub fn rotation(theta: f64) -> Self {
        MobiusDisk::new(theta, C64::new(0.0, 0.0))
    }

    pub fn apply(&self, z: C64) -> C64 {
        let num = z - self.a;
        let den = C64::new(1.0, 0.0) - self.a.conj() * z;
        C64::from_polar(1.0, self.theta) * num / den
    }

    pub fn inverse(&self) -> Self {
        MobiusDisk::new(-self.theta, -self.a * C64::from_polar(1.0, self.theta))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusDisk) -> Self {
        MobiusDisk::from_matrix(&(self.matrix() * other.matrix()))
    }

    /// Determinant-one matrix with the canonical sign.
    pub fn matrix(&self) -> Mat2 {
        let h = C64::from_polar(1.0, self.theta / 2.0);
        let s = 1.0 / (1.0 - self.a.norm_sqr()).sqrt();
        let m = Mat2::new(h, -h * self.a, -self.a.conj() / h, C64::new(1.0, 0.0) / h) * C64::new(s, 0.0);
        canonical_sign(m)
    }

    /// Recovers `(θ, a)` from any nonzero multiple of a disk automorphism
    /// matrix `[[A, B], [C, D]]`.
    pub fn from_matrix(m: &Mat2) -> Self {
        let (a11, a12, a22) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        let rot = a11 / a22;
        MobiusDisk::new(rot.arg(), -a12 / a11)
    }
}

/// Flips the sign of a matrix so the top-left entry has non-negative real
/// part (ties: non-negative imaginary part).
pub fn canonical_sign(m: Mat2) -> Mat2 {
    let a = m[(0, 0)];
    let flip = a.re < 0.0 || (a.re == 0.0 && a.im < 0.0);
    if flip {
        -m
    } else {
        m
    }
}

pub fn mat_close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    (a - b).iter().all(|e| e.norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::hyperbolic_distance;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_and_pole() {
        let z = C64::new(0.2, -0.7);
        assert_eq!(MobiusDisk::identity().apply(z), z);
        let m = MobiusDisk::new(0.0, C64::new(0.5, 0.0));
        assert_eq!(m.apply(C64::new(0.5, 0.0)), C64::new(0.0, 0.0));
        assert_eq!(MobiusDisk::identity().matrix(), Mat2::identity());
    }

    #[test]
    fn compose_inverse_is_identity() {
        let m = MobiusDisk::new(1.3, C64::new(-0.4, 0.5));
        let id = m.compose(&m.inverse());
        assert!(id.a.norm() < 1e-14);
        assert!(id.theta < 1e-12 || TAU - id.theta < 1e-12);
        let same = m.compose(&MobiusDisk::identity());
        assert!((same.theta - m.theta).abs() < 1e-12 && close(same.a, m.a, 1e-12));
    }

    fn disk_point() -> impl Strategy<Value = C64> {
        (0.0..0.9f64, 0.0..TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    fn disk_map() -> impl Strategy<Value = MobiusDisk> {
        (0.0..TAU, disk_point()).prop_map(|(t, a)| MobiusDisk::new(t, a))
    }

    proptest! {
        #[test]
        fn preserves_disk_and_circle(m in disk_map(), z in disk_point(), t in 0.0..TAU) {
            prop_assert!(m.apply(z).norm() < 1.0);
            let b = m.apply(C64::from_polar(1.0, t));
            prop_assert!((b.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn isometry(m in disk_map(), z in disk_point(), w in disk_point()) {
            let d0 = hyperbolic_distance(z, w).unwrap();
            let d1 = hyperbolic_distance(m.apply(z), m.apply(w)).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-12 * (1.0 + d0) * 10.0);
        }

        #[test]
        fn composition_and_inverse(m1 in disk_map(), m2 in disk_map(), z in disk_point()) {
            let c = m1.compose(&m2);
            prop_assert!(close(c.apply(z), m1.apply(m2.apply(z)), 1e-12));
            prop_assert!(close(m1.inverse().apply(m1.apply(z)), z, 1e-12));
        }

        #[test]
        fn associativity(m1 in disk_map(), m2 in disk_map(), m3 in disk_map(), z in disk_point()) {
            let left = m1.compose(&m2).compose(&m3);
            let right = m1.compose(&m2.compose(&m3));
            prop_assert!(close(left.apply(z), right.apply(z), 1e-12));
        }

        #[test]
        fn matrix_representation(m1 in disk_map(), m2 in disk_map(), z in disk_point()) {
            let a = m1.matrix();
            prop_assert!(close(a.determinant(), C64::new(1.0, 0.0), 1e-12));
            prop_assert!(a[(0, 0)].re >= 0.0);
            let w = (a[(0, 0)] * z + a[(0, 1)]) / (a[(1, 0)] * z + a[(1, 1)]);
            prop_assert!(close(w, m1.apply(z), 1e-12));
            let prod = canonical_sign(a * m2.matrix());
            prop_assert!(mat_close(&prod, &m1.compose(&m2).matrix(), 1e-11));
        }
    }
}
