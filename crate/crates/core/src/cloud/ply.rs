//! ASCII PLY reading and writing.

use std::fmt::Write as _;
use std::path::Path;

use super::{estimate_normals, PointCloud, DEFAULT_K_NEIGHBORS};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

/// Loads an ASCII PLY file. Normals are estimated when the vertex element
/// has no `nx ny nz` properties.
pub fn load_ply<T: Real>(path: impl AsRef<Path>) -> Result<PointCloud<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_ply(&text, path)
}

pub fn parse_ply<T: Real>(text: &str, path: &Path) -> Result<PointCloud<T>> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(err(1, "missing `ply` magic".into())),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut last_line = 1;
    let mut saw_format = false;
    loop {
        let Some((no, line)) = lines.next() else {
            return Err(err(last_line + 1, "unexpected end of file inside header".into()));
        };
        last_line = no;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(err(no, "only `format ascii 1.0` is supported".into()));
                }
                saw_format = true;
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok.next().ok_or_else(|| err(no, "element without a name".into()))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| err(no, "element without a valid count".into()))?;
                elements.push(Element { name: name.to_string(), count, properties: Vec::new(), has_list: false });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| err(no, "property before any element".into()))?;
                let parts: Vec<&str> = tok.collect();
                match parts.as_slice() {
                    ["list", _, _, name] => {
                        el.has_list = true;
                        el.properties.push(name.to_string());
                    }
                    [_ty, name] => el.properties.push(name.to_string()),
                    _ => return Err(err(no, format!("malformed property `{line}`"))),
                }
            }
            Some("end_header") => break,
            Some(other) => return Err(err(no, format!("unknown header keyword `{other}`"))),
        }
    }
    if !saw_format {
        return Err(err(last_line, "header has no format line".into()));
    }

    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut found_vertex = false;
    for el in &elements {
        if el.name != "vertex" {
            for _ in 0..el.count {
                lines.next().ok_or_else(|| err(last_line + 1, format!("truncated `{}` element", el.name)))?;
            }
            continue;
        }
        found_vertex = true;
        if el.has_list {
            return Err(err(last_line, "list properties on vertices are not supported".into()));
        }
        let idx = |name: &str| el.properties.iter().position(|p| p == name);
        let (Some(ix), Some(iy), Some(iz)) = (idx("x"), idx("y"), idx("z")) else {
            return Err(err(last_line, "vertex element needs x, y and z".into()));
        };
        let nidx = match (idx("nx"), idx("ny"), idx("nz")) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            (None, None, None) => None,
            _ => return Err(err(last_line, "partial normal properties".into())),
        };
        for read in 0..el.count {
            let Some((no, line)) = lines.next() else {
                return Err(err(
                    last_line + 1,
                    format!("expected {} vertices, found {read}", el.count),
                ));
            };
            last_line = no;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(no, format!("bad number: {e}")))?;
            if vals.len() != el.properties.len() {
                return Err(err(no, format!("expected {} values, found {}", el.properties.len(), vals.len())));
            }
            points.push(Vec3::from_f64([vals[ix], vals[iy], vals[iz]]));
            if let Some([a, b, c]) = nidx {
                let n = Vec3::<T>::from_f64([vals[a], vals[b], vals[c]]);
                let n = n.try_normalize(T::epsilon()).ok_or_else(|| err(no, "zero-length normal".into()))?;
                normals.push(n);
            }
        }
        break;
    }
    if !found_vertex {
        return Err(err(last_line, "no vertex element".into()));
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if normals.len() == points.len() {
        return PointCloud::new(points, normals);
    }
    let n = points.len();
    let placeholder = PointCloud::new(points, vec![Vec3::unit(2); n])?;
    if n < 3 {
        return Err(Error::DegenerateGeometry("too few points to estimate normals".into()));
    }
    Ok(estimate_normals(&placeholder, DEFAULT_K_NEIGHBORS.min(n))?.cloud)
}

/// Serializes a cloud with normals and optional per-vertex colors.
pub fn write_ply_string<T: Real>(cloud: &PointCloud<T>, colors: Option<&[[u8; 3]]>) -> String {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "element vertex {}", cloud.len());
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    s.push_str("property float nx\nproperty float ny\nproperty float nz\n");
    if colors.is_some() {
        s.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    s.push_str("end_header\n");
    for i in 0..cloud.len() {
        let p = cloud.point(i).to_f64();
        let n = cloud.normal(i).to_f64();
        let _ = write!(s, "{} {} {} {} {} {}", p[0], p[1], p[2], n[0], n[1], n[2]);
        if let Some(c) = colors {
            let _ = write!(s, " {} {} {}", c[i][0], c[i][1], c[i][2]);
        }
        s.push('\n');
    }
    s
}

pub fn write_ply<T: Real>(path: impl AsRef<Path>, cloud: &PointCloud<T>, colors: Option<&[[u8; 3]]>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_ply_string(cloud, colors)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "ply
format ascii 1.0
comment unit cube corners
element vertex 8
property float x
property float y
property float z
property float nx
property float ny
property float nz
element face 0
property list uchar int vertex_indices
end_header
0 0 0 -1 0 0
1 0 0 1 0 0
0 1 0 0 1 0
1 1 0 0 1 0
0 0 1 0 0 1
1 0 1 0 0 1
0 1 1 -1 0 0
1 1 1 1 0 0
";

    #[test]
    fn cube_with_normals_passes_through() {
        let c: PointCloud<f64> = parse_ply(CUBE, Path::new("cube.ply")).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.normal(1), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(c.point(7), Vec3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn truncated_body_names_line() {
        let text = CUBE.replace("1 1 1 1 0 0\n", "");
        match parse_ply::<f64>(&text, Path::new("t.ply")) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 21);
                assert!(msg.contains("expected 8 vertices, found 7"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_ply::<f64>("plx\n", Path::new("a")), Err(Error::Parse { line: 1, .. })));
        let bin = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(matches!(parse_ply::<f64>(bin, Path::new("a")), Err(Error::Parse { line: 2, .. })));
        let bad = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 zz\n";
        assert!(matches!(parse_ply::<f64>(bad, Path::new("a")), Err(Error::Parse { line: 8, .. })));
        let empty = "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
        assert!(matches!(parse_ply::<f64>(empty, Path::new("a")), Err(Error::EmptyCloud)));
    }

    #[test]
    fn write_then_read() {
        let c: PointCloud<f64> = parse_ply(CUBE, Path::new("cube.ply")).unwrap();
        let colors = vec![[255u8, 0, 0]; 8];
        let text = write_ply_string(&c, Some(&colors));
        assert!(text.contains("property uchar red"));
        let back: PointCloud<f64> = parse_ply(&text, Path::new("back.ply")).unwrap();
        assert_eq!(back.points(), c.points());
    }
}
