use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::ExtendedMobius;
use crate::C64;

/// Generalized circle `A|z|² + Bz + conj(Bz) + D = 0` whose inside is the
/// region where the left-hand side is negative. Lines have `A = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedCircle {
    pub a: f64,
    pub b: C64,
    pub d: f64,
}

impl OrientedCircle {
    pub fn eval(&self, z: C64) -> f64 {
        self.a * z.norm_sqr() + 2.0 * (self.b * z).re + self.d
    }

    pub fn contains(&self, z: C64) -> bool {
        self.eval(z) < 0.0
    }

    pub fn flip(&self) -> Self {
        OrientedCircle { a: -self.a, b: -self.b, d: -self.d }
    }

    pub fn is_line(&self) -> bool {
        self.a == 0.0
    }

    /// Center and radius for proper circles.
    pub fn center_radius(&self) -> Option<(C64, f64)> {
        if self.is_line() {
            return None;
        }
        let c = -self.b.conj() / self.a;
        let r2 = c.norm_sqr() - self.d / self.a;
        Some((c, r2.max(0.0).sqrt()))
    }

    /// Reflection of `z` across the circle (`None` when `z` is the center).
    pub fn reflect(&self, z: C64) -> Option<C64> {
        match self.center_radius() {
            Some((c, r)) => {
                let w = z - c;
                if w.norm() <= 1e-15 * r {
                    None
                } else {
                    Some(c + r * r / w.conj())
                }
            }
            None => {
                // line 2 Re(Bz) + D = 0 with normal conj(B)
                let n = self.b.conj();
                let t = self.eval(z) / (2.0 * n.norm_sqr());
                Some(z - 2.0 * t * n)
            }
        }
    }

    /// Points at parameter `t ∈ [0, 1)` along the circle; `None` for lines.
    pub fn point_at(&self, t: f64) -> Option<C64> {
        let (c, r) = self.center_radius()?;
        Some(c + C64::from_polar(r, std::f64::consts::TAU * t))
    }
}

/// The two oriented circles through three points: the first has the bounded
/// side inside (for lines, the side left of `q1 → q2`).
pub fn circle_through(q1: C64, q2: C64, q3: C64) -> Result<(OrientedCircle, OrientedCircle)> {
    let scale = q1.norm().max(q2.norm()).max(q3.norm()).max(1.0);
    let tol = 1e-14 * scale;
    if (q1 - q2).norm() <= tol || (q1 - q3).norm() <= tol || (q2 - q3).norm() <= tol {
        return Err(Error::DuplicatePoints);
    }
    let (u, v) = (q2 - q1, q3 - q1);
    let cross = (u.conj() * v).im;
    let c = if cross.abs() <= 1e-12 * u.norm() * v.norm() {
        // left normal n = i u; inside where Re(conj(n)(z - q1)) > 0
        let n = C64::new(0.0, 1.0) * u / u.norm();
        let b = -0.5 * n.conj();
        OrientedCircle { a: 0.0, b, d: (n.conj() * q1).re }
    } else {
        let (uu, vv) = (u.norm_sqr(), v.norm_sqr());
        let center = q1 + C64::new(0.0, -1.0) * (uu * v - vv * u) / (2.0 * cross);
        let r2 = (q1 - center).norm_sqr();
        let k = 1.0 / r2.sqrt();
        OrientedCircle { a: k, b: -center.conj() * k, d: (center.norm_sqr() - r2) * k }
    };
    Ok((c, c.flip()))
}

/// Möbius map sending `circle` onto the unit circle, its inside onto the
/// unit disk, `z0` to 0 and the point `t` on the circle to 1.
pub fn normalize_to_disk(circle: &OrientedCircle, z0: C64, t: C64) -> Result<ExtendedMobius> {
    if !circle.contains(z0) {
        return Err(Error::OutsideCircle);
    }
    let one = C64::new(1.0, 0.0);
    match circle.reflect(z0) {
        Some(star) => {
            let k = (t - star) / (t - z0);
            ExtendedMobius::new(k, -k * z0, one, -star)
        }
        None => {
            let k = one / (t - z0);
            ExtendedMobius::new(k, -k * z0, C64::new(0.0, 0.0), one)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_circle() {
        let (inside, outside) = circle_through(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)).unwrap();
        let (center, r) = inside.center_radius().unwrap();
        assert!(center.norm() < 1e-15 && (r - 1.0).abs() < 1e-15);
        assert!(inside.contains(c(0.1, 0.2)) && !inside.contains(c(2.0, 0.0)));
        assert!(outside.contains(c(2.0, 0.0)) && !outside.contains(c(0.1, 0.2)));
    }

    #[test]
    fn collinear_is_line() {
        let (l, _) = circle_through(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!(l.is_line());
        assert!(l.eval(c(5.0, 0.0)).abs() < 1e-15);
        assert!(l.contains(c(0.3, 1.0)) && !l.contains(c(0.3, -1.0)));
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(circle_through(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)).unwrap_err().name(), "DuplicatePoints");
    }

    #[test]
    fn unit_disk_normalization_is_rotation() {
        let (circle, _) = circle_through(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)).unwrap();
        let m = normalize_to_disk(&circle, c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        let z = c(0.3, 0.2);
        let w = m.apply(z);
        assert!((w.norm() - z.norm()).abs() < 1e-14);
        assert!((m.apply(c(0.0, 1.0)) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(normalize_to_disk(&circle, c(2.0, 0.0), c(1.0, 0.0)).unwrap_err().name(), "OutsideCircle");
    }

    proptest! {
        #[test]
        fn through_points_and_normalizes(
            p in prop::array::uniform6(-3.0f64..3.0),
            s in prop::array::uniform2(0.0f64..1.0),
        ) {
            let q = [c(p[0], p[1]), c(p[2], p[3]), c(p[4], p[5])];
            prop_assume!((q[0] - q[1]).norm() > 0.05 && (q[0] - q[2]).norm() > 0.05 && (q[1] - q[2]).norm() > 0.05);
            let (inside, outside) = circle_through(q[0], q[1], q[2]).unwrap();
            for z in q {
                prop_assert!(inside.eval(z).abs() <= 1e-10);
            }
            // a point strictly inside one of the two orientations
            let probe = c(6.0 * s[0] - 3.0, 6.0 * s[1] - 3.0);
            prop_assume!(inside.eval(probe).abs() > 1e-3);
            let circle = if inside.contains(probe) { inside } else { outside };
            let m = normalize_to_disk(&circle, probe, q[0]).unwrap();
            prop_assert!(m.apply(probe).norm() < 1e-9);
            prop_assert!((m.apply(q[0]) - c(1.0, 0.0)).norm() < 1e-9);
            for z in &q[1..] {
                prop_assert!((m.apply(*z).norm() - 1.0).abs() < 1e-8);
            }
            let back = m.inverse().apply(m.apply(q[1]));
            prop_assert!((back - q[1]).norm() < 1e-10 * q[1].norm().max(1.0));
        }
    }
}
