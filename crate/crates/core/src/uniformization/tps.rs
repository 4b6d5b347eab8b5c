use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// `ψ(r) = r^2 log r^2` written in terms of `r^2`.
#[inline]
fn psi(r2: f64) -> f64 {
    if r2 > 0.0 {
        r2 * r2.ln()
    } else {
        0.0
    }
}

/// Smoothing thin-plate spline `γ(z) = ∑ b_i ψ(|z - z_i|) + a0 + a1 x + a2 y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tps {
    pub centers: Vec<C64>,
    pub weights: Vec<f64>,
    pub affine: [f64; 3],
    pub lambda: f64,
}

/// Fits the spline minimizing
/// `λ ∑ (y_i - γ(z_i))^2 + (1 - λ) ∫ (γ_xx^2 + 2 γ_xy^2 + γ_yy^2)`.
pub fn fit_tps(centers: &[C64], values: &[f64], lambda: f64) -> Result<Tps> {
    let n = centers.len();
    if values.len() != n {
        return Err(Error::ShapeMismatch(format!("{n} centers, {} values", values.len())));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} not in (0, 1]")));
    }
    if n < 3 {
        return Err(Error::CollinearCenters);
    }
    let p = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => centers[i].re,
        _ => centers[i].im,
    });
    let sv = p.clone().singular_values();
    if sv.min() <= 1e-10 * sv.max() {
        return Err(Error::CollinearCenters);
    }
    // ψ = 16π G for the biharmonic Green function G, hence the factor
    let alpha = 16.0 * std::f64::consts::PI * (1.0 - lambda) / lambda;
    let mut a = DMatrix::zeros(n + 3, n + 3);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = psi((centers[i] - centers[j]).norm_sqr());
        }
        a[(i, i)] += alpha;
        for k in 0..3 {
            a[(i, n + k)] = p[(i, k)];
            a[(n + k, i)] = p[(i, k)];
        }
    }
    let mut rhs = DVector::zeros(n + 3);
    rhs.rows_mut(0, n).copy_from_slice(values);
    let sol = a.lu().solve(&rhs).ok_or(Error::SingularSystem("TPS system".into()))?;
    Ok(Tps {
        centers: centers.to_vec(),
        weights: sol.rows(0, n).iter().copied().collect(),
        affine: [sol[n], sol[n + 1], sol[n + 2]],
        lambda,
    })
}

impl Tps {
    pub fn eval(&self, z: C64) -> f64 {
        let mut s = self.affine[0] + self.affine[1] * z.re + self.affine[2] * z.im;
        for (c, &b) in self.centers.iter().zip(&self.weights) {
            let dx = z.re - c.re;
            let dy = z.im - c.im;
            s += b * psi(dx * dx + dy * dy);
        }
        s
    }
}
