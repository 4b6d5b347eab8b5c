//! Consistency filtering of matches through the spread of their minimizing
//! Möbius transformations, plus CSV and SVG output.

use std::fmt::Write as _;
use std::io::Write;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::hyperbolic::Mat2;
use crate::transport::DiscreteMeasure;
use crate::uniformization::Uniformized;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyScore {
    pub scores: Vec<f64>,
    /// Determinant-one matrices with the canonical sign, one per match.
    pub matrices: Vec<Mat2>,
}

fn frobenius(m: &Mat2) -> f64 {
    m.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance up to the sign ambiguity of `SL(2)` representatives.
pub fn matrix_distance(a: &Mat2, b: &Mat2) -> f64 {
    frobenius(&(a - b)).min(frobenius(&(a + b)))
}

/// `E(i, j) = ∑ₖ d(m_ij, m_k)` over all matches.
pub fn consistency_scores(matches: &[(usize, usize)], cost: &CostMatrix) -> Result<ConsistencyScore> {
    let matrices: Vec<Mat2> = matches
        .iter()
        .map(|&(i, j)| {
            if i >= cost.rows || j >= cost.cols || cost.argmin_rotation(i, j) >= cost.rotations {
                return Err(Error::MissingArgmin(i, j));
            }
            Ok(cost.mobius(i, j).matrix())
        })
        .collect::<Result<_>>()?;
    Ok(ConsistencyScore { scores: scores_of(&matrices), matrices })
}

pub fn scores_of(matrices: &[Mat2]) -> Vec<f64> {
    matrices.iter().map(|a| matrices.iter().map(|b| matrix_distance(a, b)).sum()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Keep {
    Count(usize),
    Fraction(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredMatch {
    pub src: usize,
    pub dst: usize,
    pub score: f64,
}

/// The `keep` most consistent matches, by ascending score with ties broken
/// by `(i, j)`. Fractions round to the nearest count.
pub fn filter_top(matches: &[(usize, usize)], scores: &[f64], keep: Keep) -> Result<Vec<ScoredMatch>> {
    if matches.len() != scores.len() {
        return Err(Error::ShapeMismatch(format!("{} matches, {} scores", matches.len(), scores.len())));
    }
    let count = match keep {
        Keep::Count(k) => k,
        Keep::Fraction(f) if (0.0..=1.0).contains(&f) => (f * matches.len() as f64).round() as usize,
        Keep::Fraction(f) => return Err(Error::InvalidParameter(format!("keep fraction {f}"))),
    };
    if count > matches.len() {
        return Err(Error::InvalidParameter(format!("keep {count} of {} matches", matches.len())));
    }
    let mut all: Vec<ScoredMatch> =
        matches.iter().zip(scores).map(|(&(src, dst), &score)| ScoredMatch { src, dst, score }).collect();
    all.sort_by(|a, b| a.score.total_cmp(&b.score).then((a.src, a.dst).cmp(&(b.src, b.dst))));
    all.truncate(count);
    Ok(all)
}

/// Writes `src_vertex,dst_vertex,score` rows, translating sample indices
/// through the given vertex ids.
pub fn write_correspondences_csv<W: Write>(
    matches: &[ScoredMatch],
    src_vertex: &[usize],
    dst_vertex: &[usize],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["src_vertex", "dst_vertex", "score"])?;
    for m in matches {
        w.write_record([src_vertex[m.src].to_string(), dst_vertex[m.dst].to_string(), format!("{:?}", m.score)])?;
    }
    w.flush()?;
    Ok(())
}

const DISK_PX: f64 = 200.0;

fn density_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()) * 0.8) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn draw_disk(svg: &mut String, u: &Uniformized, measure: &DiscreteMeasure, cx: f64, cy: f64) {
    let to_px = |z: C64| (cx + DISK_PX * z.re, cy - DISK_PX * z.im);
    let values: Vec<f64> = u
        .mid
        .faces
        .iter()
        .map(|f| f.iter().map(|&r| u.density.vertex_hyperbolic[r]).sum::<f64>() / 3.0)
        .collect();
    let logs: Vec<f64> = values.iter().map(|v| v.max(1e-12).ln()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{DISK_PX}" fill="none" stroke="black"/>"#);
    for (f, tri) in u.mid.faces.iter().enumerate() {
        if !u.map.active[f] {
            continue;
        }
        let pts: Vec<String> = tri
            .iter()
            .map(|&r| {
                let (x, y) = to_px(u.position(r));
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(svg, r#"<polygon points="{}" fill="{}"/>"#, pts.join(" "), density_color((logs[f] - lo) / span));
    }
    for &z in &measure.points {
        let (x, y) = to_px(z);
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="black"/>"#);
    }
}

/// Both flattened disks colored by log density, their samples, and a line
/// for every correspondence.
pub fn plot_svg(
    a: (&Uniformized, &DiscreteMeasure),
    b: (&Uniformized, &DiscreteMeasure),
    matches: &[ScoredMatch],
) -> String {
    let (ca, cb, cy) = (DISK_PX + 20.0, 3.0 * DISK_PX + 60.0, DISK_PX + 20.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}">"#,
        4.0 * DISK_PX + 80.0,
        2.0 * DISK_PX + 40.0
    );
    draw_disk(&mut svg, a.0, a.1, ca, cy);
    draw_disk(&mut svg, b.0, b.1, cb, cy);
    for m in matches {
        let (p, q) = (a.1.points[m.src], b.1.points[m.dst]);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="green" stroke-width="0.8"/>"#,
            ca + DISK_PX * p.re,
            cy - DISK_PX * p.im,
            cb + DISK_PX * q.re,
            cy - DISK_PX * q.im
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::MobiusDisk;

    fn mats(ms: &[MobiusDisk]) -> Vec<Mat2> {
        ms.iter().map(|m| m.matrix()).collect()
    }

    #[test]
    fn shared_map_scores_zero() {
        let m = MobiusDisk::new(0.4, C64::new(0.1, -0.2));
        assert!(scores_of(&mats(&[m; 5])).iter().all(|&s| s < 1e-14));
    }

    #[test]
    fn outlier_structure() {
        let m = MobiusDisk::new(0.4, C64::new(0.1, -0.2));
        let o = MobiusDisk::new(2.0, C64::new(-0.3, 0.3));
        let k = 4;
        let mut list = vec![m; k];
        list.push(o);
        let s = scores_of(&mats(&list));
        let d = matrix_distance(&m.matrix(), &o.matrix());
        assert!((s[k] - k as f64 * d).abs() < 1e-12);
        assert!(s[..k].iter().all(|&x| (x - d).abs() < 1e-12));
    }

    #[test]
    fn sign_ambiguity_ignored() {
        let a = MobiusDisk::new(0.4, C64::new(0.1, -0.2)).matrix();
        assert_eq!(matrix_distance(&a, &(-a)), 0.0);
    }

    #[test]
    fn order_invariant() {
        let list: Vec<MobiusDisk> =
            (0..6).map(|k| MobiusDisk::new(0.3 * k as f64, C64::new(0.05 * k as f64, 0.1))).collect();
        let s = scores_of(&mats(&list));
        let mut rev = list.clone();
        rev.reverse();
        let r = scores_of(&mats(&rev));
        for k in 0..6 {
            assert!((s[k] - r[5 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn filtering() {
        let matches = [(0, 1), (1, 0), (2, 2), (3, 3)];
        let scores = [0.5, 0.1, 0.5, 0.2];
        let all = filter_top(&matches, &scores, Keep::Fraction(1.0)).unwrap();
        assert_eq!(all.len(), 4);
        let order: Vec<(usize, usize)> = all.iter().map(|m| (m.src, m.dst)).collect();
        assert_eq!(order, vec![(1, 0), (3, 3), (0, 1), (2, 2)]);
        let one = filter_top(&matches, &scores, Keep::Count(1)).unwrap();
        assert_eq!((one[0].src, one[0].dst), (1, 0));
        assert!(filter_top(&matches, &scores, Keep::Count(5)).is_err());
    }

    #[test]
    fn duplicate_improves_rank() {
        let list: Vec<MobiusDisk> =
            (0..6).map(|k| MobiusDisk::new(0.5 * k as f64, C64::new(0.07 * k as f64, -0.1))).collect();
        let s = scores_of(&mats(&list));
        let rank = |s: &[f64], k: usize| s.iter().filter(|&&x| x < s[k]).count();
        let mut dup = list.clone();
        dup.push(list[4]);
        let sd = scores_of(&mats(&dup));
        assert!(rank(&sd, 4) <= rank(&s, 4));
    }

    #[test]
    fn csv_layout() {
        let m = [ScoredMatch { src: 1, dst: 0, score: 0.25 }];
        let mut buf = Vec::new();
        write_correspondences_csv(&m, &[10, 11], &[20, 21], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "src_vertex,dst_vertex,score\n11,20,0.25\n");
    }
}
