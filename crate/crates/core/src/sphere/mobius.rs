use crate::error::{Error, Result};
use crate::hyperbolic::{canonical_sign, Mat2};
use crate::C64;

/// Fractional linear map of the extended plane, stored with determinant one
/// and the canonical sign. Infinity is represented by a complex infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedMobius {
    pub m: Mat2,
}

fn is_infinite(z: C64) -> bool {
    z.re.is_infinite() || z.im.is_infinite()
}

impl ExtendedMobius {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        Self::from_matrix(Mat2::new(a, b, c, d))
    }

    pub fn from_matrix(m: Mat2) -> Result<Self> {
        let det = m.determinant();
        let scale = (m[(0, 0)] * m[(1, 1)]).norm() + (m[(0, 1)] * m[(1, 0)]).norm();
        if !(det.norm() > 1e-14 * scale) {
            return Err(Error::InvalidParameter("singular Möbius matrix".into()));
        }
        Ok(ExtendedMobius { m: canonical_sign(m / det.sqrt()) })
    }

    pub fn identity() -> Self {
        ExtendedMobius { m: Mat2::identity() }
    }

    pub fn apply(&self, z: C64) -> C64 {
        let (a, b, c, d) = (self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]);
        if is_infinite(z) {
            return if c == C64::new(0.0, 0.0) { C64::new(f64::INFINITY, 0.0) } else { a / c };
        }
        let den = c * z + d;
        if den == C64::new(0.0, 0.0) {
            C64::new(f64::INFINITY, 0.0)
        } else {
            (a * z + b) / den
        }
    }

    pub fn inverse(&self) -> Self {
        let (a, b, c, d) = (self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]);
        ExtendedMobius { m: canonical_sign(Mat2::new(d, -b, -c, a)) }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ExtendedMobius) -> Self {
        ExtendedMobius { m: canonical_sign(self.m * other.m) }
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }
}

/// Cross-ratio `(z1, z2; z3, z4)` of four finite points.
pub fn cross_ratio(z: [C64; 4]) -> C64 {
    (z[0] - z[2]) * (z[1] - z[3]) / ((z[0] - z[3]) * (z[1] - z[2]))
}
