use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Point3, TriangleMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path)?;
    let (v, f) = match format {
        MeshFormat::Off => parse_off(&text, path)?,
        MeshFormat::Obj => parse_obj(&text, path)?,
    };
    TriangleMesh::new(v, f)
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let text = match format {
        MeshFormat::Off => to_off(mesh),
        MeshFormat::Obj => to_obj(mesh),
    };
    std::fs::write(path, text)?;
    Ok(())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

type Soup = (Vec<Point3>, Vec<[usize; 3]>);

pub(crate) fn parse_off(text: &str, path: &Path) -> Result<Soup> {
    // (line number, token) stream with comments stripped
    let mut tokens = text.lines().enumerate().flat_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        l.split_whitespace().map(move |t| (i + 1, t))
    });
    let mut lines: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.split('#').next().unwrap_or("").trim();
        if !l.is_empty() {
            lines.push((i + 1, l.split_whitespace().collect()));
        }
    }
    let Some((hl, header)) = tokens.next() else {
        return Err(parse_err(path, 1, "empty file"));
    };
    if header != "OFF" {
        return Err(parse_err(path, hl, format!("expected OFF header, found {header:?}")));
    }
    let mut next_usize = |what: &str| -> Result<(usize, usize)> {
        let (l, t) = tokens.next().ok_or_else(|| parse_err(path, hl, format!("missing {what}")))?;
        t.parse::<usize>()
            .map(|v| (l, v))
            .map_err(|_| parse_err(path, l, format!("bad {what} {t:?}")))
    };
    let (_, nv) = next_usize("vertex count")?;
    let (count_line, nf) = next_usize("face count")?;
    let _ = next_usize("edge count")?;

    // After the counts, records are line-oriented.
    let body: Vec<&(usize, Vec<&str>)> = lines.iter().filter(|(l, _)| *l > count_line).collect();
    if body.len() < nv + nf {
        return Err(parse_err(path, count_line, format!("expected {} records, found {}", nv + nf, body.len())));
    }
    let mut vertices = Vec::with_capacity(nv);
    for (l, toks) in &body[..nv] {
        if toks.len() < 3 {
            return Err(parse_err(path, *l, "vertex needs three coordinates"));
        }
        let mut c = [0.0; 3];
        for k in 0..3 {
            c[k] = toks[k]
                .parse::<f64>()
                .map_err(|_| parse_err(path, *l, format!("bad coordinate {:?}", toks[k])))?;
        }
        vertices.push(Point3::new(c[0], c[1], c[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for (l, toks) in &body[nv..nv + nf] {
        let k: usize = toks[0].parse().map_err(|_| parse_err(path, *l, "bad face arity"))?;
        if k != 3 {
            return Err(parse_err(path, *l, format!("face with {k} vertices; only triangles are supported")));
        }
        if toks.len() < 4 {
            return Err(parse_err(path, *l, "truncated face"));
        }
        let mut f = [0usize; 3];
        for j in 0..3 {
            f[j] = toks[1 + j]
                .parse::<usize>()
                .map_err(|_| parse_err(path, *l, format!("bad index {:?}", toks[1 + j])))?;
            if f[j] >= nv {
                return Err(parse_err(path, *l, format!("index {} out of range", f[j])));
            }
        }
        faces.push(f);
    }
    Ok((vertices, faces))
}

pub(crate) fn parse_obj(text: &str, path: &Path) -> Result<Soup> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|_| parse_err(path, l, format!("bad coordinate {t:?}"))))
                    .collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(parse_err(path, l, "vertex needs three coordinates"));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let v: i64 = head.parse().map_err(|_| parse_err(path, l, format!("bad index {t:?}")))?;
                        let n = vertices.len() as i64;
                        let r = if v > 0 { v - 1 } else { n + v };
                        if r < 0 || r >= n {
                            return Err(parse_err(path, l, format!("index {v} out of range")));
                        }
                        Ok(r as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(
                        path,
                        l,
                        format!("face with {} vertices; only triangles are supported", idx.len()),
                    ));
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

fn to_off(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF\n{} {} {}", mesh.n_vertices(), mesh.n_faces(), mesh.n_edges());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

fn to_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(s, "v {:?} {:?} {:?}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Topology;

    #[test]
    fn off_single_triangle() {
        let text = "OFF\n# comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let (v, f) = parse_off(text, Path::new("t.off")).unwrap();
        let m = TriangleMesh::new(v, f).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (3, 3, 1));
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn off_counts_on_header_line() {
        let text = "OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let (v, f) = parse_off(text, Path::new("t.off")).unwrap();
        assert_eq!((v.len(), f.len()), (3, 1));
    }

    #[test]
    fn off_quad_rejected() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = parse_off(text, Path::new("q.off")).unwrap_err();
        assert_eq!(err.name(), "ParseError");
    }

    #[test]
    fn obj_quad_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let err = parse_obj(text, Path::new("q.obj")).unwrap_err();
        assert_eq!(err.name(), "ParseError");
    }

    #[test]
    fn obj_slashes_and_negative_indices() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n";
        let (v, f) = parse_obj(text, Path::new("t.obj")).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(f, vec![[0, 1, 2]]);
    }

    #[test]
    fn malformed_coordinate() {
        let text = "OFF\n3 1 0\n0 0 zero\n1 0 0\n0 1 0\n3 0 1 2\n";
        let err = parse_off(text, Path::new("bad.off")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn round_trip_icosahedron() {
        let dir = tempfile::tempdir().unwrap();
        let ico = crate::synth::icosahedron();
        for (name, fmt) in [("a.off", MeshFormat::Off), ("a.obj", MeshFormat::Obj)] {
            let p = dir.path().join(name);
            save_mesh(&ico, &p, fmt).unwrap();
            assert_eq!(MeshFormat::from_path(&p), Some(fmt));
            let back = load_mesh(&p, fmt).unwrap();
            assert_eq!(back.vertices(), ico.vertices());
            assert_eq!(back.faces(), ico.faces());
            assert_eq!(back.topology(), Topology::Sphere);
        }
    }
}
