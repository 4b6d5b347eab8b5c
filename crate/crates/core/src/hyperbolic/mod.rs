//! The Poincaré disk: its Möbius isometries, hyperbolic distance and the
//! fixed quadrature rule over the disk of hyperbolic radius `R`.

mod mobius;
mod quadrature;

pub use mobius::{canonical_sign, mat_close, Mat2, MobiusDisk};
pub use quadrature::{build_quadrature, QuadratureRule};

use crate::error::{Error, Result};
use crate::C64;

fn check_inside(z: C64) -> Result<()> {
    if z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(z))
    }
}

/// Hyperbolic distance for the metric `(1 - |z|^2)^-2 |dz|^2`, so
/// `d(0, r) = artanh(r)`.
pub fn hyperbolic_distance(z: C64, w: C64) -> Result<f64> {
    check_inside(z)?;
    check_inside(w)?;
    let t = (z - w).norm() / (C64::new(1.0, 0.0) - w.conj() * z).norm();
    Ok(t.min(1.0).atanh())
}

/// Whether `z` lies in the closed geodesic disk of radius `radius` about `z0`.
pub fn geodesic_disk_contains(z0: C64, radius: f64, z: C64) -> Result<bool> {
    Ok(hyperbolic_distance(z0, z)? <= radius)
}

/// Hyperbolic area of the geodesic disk of radius `radius`.
pub fn hyperbolic_disk_area(radius: f64) -> f64 {
    std::f64::consts::PI * radius.sinh().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_closed_forms() {
        let d = hyperbolic_distance(C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap();
        assert!((d - 0.5f64.atanh()).abs() < 1e-15);
        assert!((d - 0.549306).abs() < 1e-6);
        let z = C64::new(0.3, -0.2);
        assert_eq!(hyperbolic_distance(z, z).unwrap(), 0.0);
        for r in [0.3f64, 0.5, 1.0] {
            let d = hyperbolic_distance(C64::new(0.0, 0.0), C64::new(r.tanh(), 0.0)).unwrap();
            assert!((d - r).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_tanh() {
        let mut t = 0.01f64;
        while t <= 5.0 {
            let d = hyperbolic_distance(C64::new(0.0, 0.0), C64::new(t.tanh(), 0.0)).unwrap();
            // artanh loses digits once tanh(t) is within a few ulps of 1
            let tol = 1e-12_f64.max(f64::EPSILON / (1.0 - t.tanh()));
            assert!((d - t).abs() <= tol, "t = {t}: {d}");
            t += 0.01;
        }
    }

    #[test]
    fn boundary_input_rejected() {
        let err = hyperbolic_distance(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap_err();
        assert_eq!(err.name(), "OutsideDisk");
    }

    #[test]
    fn contains_at_origin() {
        let r = 0.7f64;
        for x in [0.0, 0.3, 0.6, 0.604, 0.61, 0.9] {
            let z = C64::new(0.0, x);
            assert_eq!(geodesic_disk_contains(C64::new(0.0, 0.0), r, z).unwrap(), x <= r.tanh());
        }
        let z0 = C64::new(0.4, 0.4);
        assert!(geodesic_disk_contains(z0, 1e-9, z0).unwrap());
    }

    fn disk_point() -> impl Strategy<Value = C64> {
        (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn contains_is_mobius_equivariant(z0 in disk_point(), z in disk_point(), a in disk_point(), th in 0.0..6.28f64, r in 0.1..2.0f64) {
            let m = MobiusDisk::new(th, a);
            let d = hyperbolic_distance(z0, z).unwrap();
            prop_assume!((d - r).abs() > 1e-9);
            prop_assert_eq!(
                geodesic_disk_contains(z0, r, z).unwrap(),
                geodesic_disk_contains(m.apply(z0), r, m.apply(z)).unwrap()
            );
        }
    }
}
