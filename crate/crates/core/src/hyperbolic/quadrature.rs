use std::f64::consts::{FRAC_PI_6, PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Nodes and hyperbolic cell areas covering the disk `|z| <= tanh(R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub radius: f64,
    pub pitch: f64,
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    /// Largest Euclidean distance from a point of the disk to its nearest node.
    pub fill_distance: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(C64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    /// Loads the rule cached at `path` when it was built for the same
    /// `(radius, pitch)`; otherwise builds it and refreshes the cache.
    pub fn load_or_build(path: &Path, radius: f64, pitch: f64) -> Result<Self> {
        if let Ok(text) = std::fs::read_to_string(path) {
            if let Ok(rule) = serde_json::from_str::<QuadratureRule>(&text) {
                if rule.radius == radius && rule.pitch == pitch {
                    return Ok(rule);
                }
            }
        }
        let rule = build_quadrature(radius, pitch)?;
        std::fs::write(path, serde_json::to_string(&rule)?)?;
        Ok(rule)
    }
}

/// Antiderivative of `s (1 - s^2)^-2` as a function of `s^2`.
fn radial(s2: f64) -> f64 {
    0.5 * s2 / (1.0 - s2)
}

/// `∮ radial(|z|^2) dφ` along the straight segment `p -> q`.
fn segment_integral(p: C64, q: C64) -> f64 {
    let d = q - p;
    let len = d.norm();
    if len < 1e-300 {
        return 0.0;
    }
    let u = d / len;
    // signed distance of the supporting line from the origin
    let h = (p.re * q.im - p.im * q.re) / len;
    let w = (1.0 - h * h).sqrt();
    let s1 = p.re * u.re + p.im * u.im;
    let s2 = q.re * u.re + q.im * u.im;
    0.5 * h / w * ((s2 / w).atanh() - (s1 / w).atanh())
}

/// Exact `∫ (1 - |z|^2)^-2 dA` over `polygon ∩ {|z| <= r}` for a convex
/// counterclockwise polygon, via the boundary form `radial(|z|^2) dφ`.
fn clipped_polygon_integral(poly: &[C64], r: f64) -> f64 {
    struct Piece {
        start: C64,
        end: C64,
        enters: bool,
        exits: bool,
    }
    let r2 = r * r;
    let mut pieces = Vec::new();
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let d = q - p;
        let a = d.norm_sqr();
        let b = p.re * d.re + p.im * d.im;
        let c = p.norm_sqr() - r2;
        let disc = b * b - a * c;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let t0 = ((-b - sq) / a).max(0.0);
        let t1 = ((-b + sq) / a).min(1.0);
        if t1 - t0 <= 1e-15 {
            continue;
        }
        pieces.push(Piece { start: p + d * t0, end: p + d * t1, enters: t0 > 0.0, exits: t1 < 1.0 });
    }
    if pieces.is_empty() {
        // either disjoint from the disk or the disk sits inside the polygon
        let inside = (0..poly.len()).all(|k| {
            let p = poly[k];
            let q = poly[(k + 1) % poly.len()];
            p.re * q.im - p.im * q.re > 0.0
        });
        return if inside { TAU * radial(r2) } else { 0.0 };
    }
    let mut total: f64 = pieces.iter().map(|s| segment_integral(s.start, s.end)).sum();
    for k in 0..pieces.len() {
        if !pieces[k].exits {
            continue;
        }
        let next = &pieces[(k + 1) % pieces.len()];
        debug_assert!(next.enters);
        let from = pieces[k].end;
        let to = next.start;
        if (to - from).norm() < 1e-15 {
            continue;
        }
        let dphi = (to.arg() - from.arg()).rem_euclid(TAU);
        total += radial(r2) * dphi;
    }
    total
}

fn hexagon(center: C64, pitch: f64) -> [C64; 6] {
    let rc = pitch / 3f64.sqrt();
    std::array::from_fn(|k| center + C64::from_polar(rc, FRAC_PI_6 + k as f64 * PI / 3.0))
}

/// Hexagonal-lattice rule on `|z| <= tanh(radius)` whose weights are the
/// exact hyperbolic areas of the lattice cells clipped to the disk.
pub fn build_quadrature(radius: f64, pitch: f64) -> Result<QuadratureRule> {
    if !(radius > 0.0) || !(pitch > 0.0) || !radius.is_finite() || !pitch.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {radius}, pitch {pitch}")));
    }
    let r = radius.tanh();
    let dy = pitch * 3f64.sqrt() / 2.0;
    let jmax = (r / dy).floor() as i64;
    let mut nodes = Vec::new();
    for j in -jmax..=jmax {
        let shift = 0.5 * j as f64;
        let lo = (-r / pitch - shift).floor() as i64 - 1;
        let hi = (r / pitch - shift).ceil() as i64 + 1;
        for i in lo..=hi {
            let p = C64::new(pitch * (i as f64 + shift), dy * j as f64);
            if p.norm() <= r {
                nodes.push(p);
            }
        }
    }
    if nodes.len() < 7 {
        return Err(Error::QuadratureTooCoarse(nodes.len()));
    }
    let weights = nodes.iter().map(|&p| clipped_polygon_integral(&hexagon(p, pitch), r)).collect();
    let fill_distance = measure_fill(&nodes, pitch, r);
    Ok(QuadratureRule { radius, pitch, nodes, weights, fill_distance })
}

/// Lattice coordinates `(i, j)` with `p = pitch (i + j/2, j √3/2)`.
fn lattice_coords(z: C64, pitch: f64) -> (f64, f64) {
    let j = z.im / (pitch * 3f64.sqrt() / 2.0);
    let i = z.re / pitch - 0.5 * j;
    (i, j)
}

/// Probes hexagon vertices, the rim and a band inside it; returns the largest
/// distance from a probe to the nearest node.
fn measure_fill(nodes: &[C64], pitch: f64, r: f64) -> f64 {
    let mut index = std::collections::HashMap::new();
    for &p in nodes {
        let (i, j) = lattice_coords(p, pitch);
        index.insert((i.round() as i64, j.round() as i64), p);
    }
    let nearest = |z: C64| -> f64 {
        let (fi, fj) = lattice_coords(z, pitch);
        let (ci, cj) = (fi.round() as i64, fj.round() as i64);
        let mut best = f64::INFINITY;
        for span in [2i64, 4, 8] {
            for dj in -span..=span {
                for di in -span..=span {
                    if let Some(p) = index.get(&(ci + di, cj + dj)) {
                        best = best.min((z - p).norm());
                    }
                }
            }
            if best <= 0.5 * span as f64 * pitch {
                break;
            }
        }
        best
    };
    let mut fill: f64 = 0.0;
    for &p in nodes {
        for v in hexagon(p, pitch) {
            if v.norm() <= r {
                fill = fill.max(nearest(v));
            }
        }
    }
    let n_rim = ((TAU * r) / (pitch / 64.0)).ceil() as usize;
    for k in 0..n_rim {
        fill = fill.max(nearest(C64::from_polar(r, TAU * k as f64 / n_rim as f64)));
    }
    let step = pitch / 8.0;
    let band = 2.0 * pitch;
    let mut rho = (r - band).max(0.0);
    while rho < r {
        let n = ((TAU * rho) / step).ceil().max(1.0) as usize;
        for k in 0..n {
            fill = fill.max(nearest(C64::from_polar(rho, TAU * k as f64 / n as f64)));
        }
        rho += step;
    }
    fill
}
