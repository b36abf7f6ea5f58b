//! OFF, OBJ and ASCII PLY readers; OFF and ASCII PLY writers.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{Point, TriangleMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            other => Err(Error::InvalidArgument(format!("unknown mesh format {other:?}"))),
        }
    }
}

/// A loaded mesh plus the non-fatal issues met while reading it.
#[derive(Debug, Clone)]
pub struct MeshImport {
    pub mesh: TriangleMesh,
    pub warnings: Vec<String>,
}

/// Loads a mesh; `format = None` picks the reader from the file extension and
/// falls back to sniffing the header.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<MeshImport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let format = match format.or_else(|| MeshFormat::from_path(path)) {
        Some(f) => f,
        None => sniff(&text)?,
    };
    read_mesh(&text, format)
}

fn sniff(text: &str) -> Result<MeshFormat> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    if first.starts_with("ply") {
        Ok(MeshFormat::Ply)
    } else if first.ends_with("OFF") {
        Ok(MeshFormat::Off)
    } else if text.lines().any(|l| l.trim_start().starts_with("v ")) {
        Ok(MeshFormat::Obj)
    } else {
        Err(Error::Parse {
            line: 1,
            message: "cannot determine mesh format".into(),
        })
    }
}

pub fn read_mesh(text: &str, format: MeshFormat) -> Result<MeshImport> {
    let mut faces = FaceCollector::default();
    let vertices = match format {
        MeshFormat::Off => read_off(text, &mut faces)?,
        MeshFormat::Obj => read_obj(text, &mut faces)?,
        MeshFormat::Ply => read_ply(text, &mut faces)?,
    };
    let mesh = TriangleMesh::new(vertices, faces.triangles)?;
    Ok(MeshImport {
        mesh,
        warnings: faces.warnings,
    })
}

#[derive(Default)]
struct FaceCollector {
    triangles: Vec<[usize; 3]>,
    warnings: Vec<String>,
}

impl FaceCollector {
    fn push(&mut self, face: &[usize], line: usize) -> Result<()> {
        match face.len() {
            3 => self.triangles.push([face[0], face[1], face[2]]),
            4 => {
                self.triangles.push([face[0], face[1], face[2]]);
                self.triangles.push([face[0], face[2], face[3]]);
                self.warnings
                    .push(format!("line {line}: quad face fan-triangulated"));
            }
            k => {
                return Err(Error::UnsupportedFeature(format!(
                    "line {line}: face with {k} vertices (only triangles and quads are accepted)"
                )))
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

/// Non-empty, comment-stripped lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn read_off(text: &str, faces: &mut FaceCollector) -> Result<Vec<Point>> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let rest = header
        .strip_prefix("OFF")
        .ok_or_else(|| parse_err(hline, "missing OFF header"))?
        .trim();
    // counts may share the header line
    let (cline, counts) = if rest.is_empty() {
        lines.next().ok_or_else(|| parse_err(hline, "missing counts"))?
    } else {
        (hline, rest)
    };
    let mut toks = counts.split_whitespace();
    let nv: usize = parse_num(toks.next(), cline, "vertex count")?;
    let nf: usize = parse_num(toks.next(), cline, "face count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in vertex list"))?;
        let mut t = l.split_whitespace();
        vertices.push([
            parse_num(t.next(), ln, "coordinate")?,
            parse_num(t.next(), ln, "coordinate")?,
            parse_num(t.next(), ln, "coordinate")?,
        ]);
    }
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in face list"))?;
        let mut t = l.split_whitespace();
        let k: usize = parse_num(t.next(), ln, "face size")?;
        let face = (0..k)
            .map(|_| parse_num(t.next(), ln, "vertex index"))
            .collect::<Result<Vec<usize>>>()?;
        faces.push(&face, ln)?;
    }
    Ok(vertices)
}

fn read_obj(text: &str, faces: &mut FaceCollector) -> Result<Vec<Point>> {
    let mut vertices = Vec::new();
    for (ln, l) in content_lines(text) {
        let mut t = l.split_whitespace();
        match t.next() {
            Some("v") => vertices.push([
                parse_num(t.next(), ln, "coordinate")?,
                parse_num(t.next(), ln, "coordinate")?,
                parse_num(t.next(), ln, "coordinate")?,
            ]),
            Some("f") => {
                let face = t
                    .map(|tok| {
                        let idx = tok.split('/').next().unwrap_or("");
                        let i: i64 = parse_num(Some(idx), ln, "vertex index")?;
                        let n = vertices.len() as i64;
                        let resolved = if i > 0 { i - 1 } else { n + i };
                        if i == 0 || resolved < 0 {
                            return Err(parse_err(ln, format!("invalid vertex index {i}")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<Vec<usize>>>()?;
                faces.push(&face, ln)?;
            }
            // normals, texture coordinates, groups and materials are ignored
            _ => {}
        }
    }
    Ok(vertices)
}

fn read_ply(text: &str, faces: &mut FaceCollector) -> Result<Vec<Point>> {
    struct Element {
        name: String,
        count: usize,
        props: Vec<(String, bool)>, // (name, is_list)
    }
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing ply magic")),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut last = 1;
    loop {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(last, "unterminated header"))?;
        last = ln;
        let mut t = l.split_whitespace();
        match t.next() {
            Some("format") => {
                let f = t.next().unwrap_or("");
                if f != "ascii" {
                    return Err(Error::UnsupportedFeature(format!("PLY format {f}")));
                }
            }
            Some("element") => {
                let name = t.next().unwrap_or("").to_string();
                let count = parse_num(t.next(), ln, "element count")?;
                elements.push(Element {
                    name,
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(ln, "property before element"))?;
                let toks: Vec<&str> = t.collect();
                let is_list = toks.first() == Some(&"list");
                let name = toks.last().copied().unwrap_or("").to_string();
                el.props.push((name, is_list));
            }
            Some("end_header") => break,
            _ => {}
        }
    }

    let mut vertices = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let (ln, l) = lines
                .by_ref()
                .find(|(_, l)| !l.is_empty())
                .ok_or_else(|| parse_err(last, format!("missing {} data", el.name)))?;
            last = ln;
            let toks: Vec<&str> = l.split_whitespace().collect();
            let mut pos = 0;
            match el.name.as_str() {
                "vertex" => {
                    let mut p = [f64::NAN; 3];
                    for (name, is_list) in &el.props {
                        if *is_list {
                            let k: usize = parse_num(toks.get(pos).copied(), ln, "list size")?;
                            pos += 1 + k;
                            continue;
                        }
                        let axis = match name.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            _ => None,
                        };
                        if let Some(a) = axis {
                            p[a] = parse_num(toks.get(pos).copied(), ln, "coordinate")?;
                        }
                        pos += 1;
                    }
                    if p.iter().any(|c| c.is_nan()) {
                        return Err(parse_err(ln, "vertex lacks x/y/z"));
                    }
                    vertices.push(p);
                }
                "face" => {
                    for (name, is_list) in &el.props {
                        if *is_list {
                            let k: usize = parse_num(toks.get(pos).copied(), ln, "list size")?;
                            let idx = (0..k)
                                .map(|i| parse_num(toks.get(pos + 1 + i).copied(), ln, "vertex index"))
                                .collect::<Result<Vec<usize>>>()?;
                            pos += 1 + k;
                            if name == "vertex_indices" || name == "vertex_index" {
                                faces.push(&idx, ln)?;
                            }
                        } else {
                            pos += 1;
                        }
                    }
                }
                _ => {}
            }
        }
    }
    Ok(vertices)
}

/// Formats `x` with nine significant digits.
fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_off<W: Write>(mesh: &TriangleMesh, mut w: W) -> Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.num_vertices(), mesh.num_triangles())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", fmt9(p[0]), fmt9(p[1]), fmt9(p[2]))?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Writes an ASCII PLY, optionally with per-vertex RGB colours.
pub fn write_ply<W: Write>(mesh: &TriangleMesh, colors: Option<&[[u8; 3]]>, mut w: W) -> Result<()> {
    if let Some(c) = colors {
        if c.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_vertices(),
                got: c.len(),
            });
        }
    }
    writeln!(w, "ply\nformat ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.num_vertices())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if colors.is_some() {
        writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue")?;
    }
    writeln!(w, "element face {}", mesh.num_triangles())?;
    writeln!(w, "property list uchar int vertex_indices\nend_header")?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        write!(w, "{} {} {}", fmt9(p[0]), fmt9(p[1]), fmt9(p[2]))?;
        if let Some(c) = colors {
            write!(w, " {} {} {}", c[i][0], c[i][1], c[i][2])?;
        }
        writeln!(w)?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;

    const SQUARE_OFF: &str = "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n";

    #[test]
    fn reads_square_off() {
        let m = read_mesh(SQUARE_OFF, MeshFormat::Off).unwrap();
        assert_eq!(m.mesh.num_vertices(), 4);
        assert_eq!(m.mesh.num_triangles(), 2);
        assert!(m.warnings.is_empty());
        assert_eq!(m.mesh.vertex(2), [1., 1., 0.]);
    }

    #[test]
    fn obj_quad_is_fan_triangulated_with_warning() {
        let obj = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
        let m = read_mesh(obj, MeshFormat::Obj).unwrap();
        assert_eq!(m.mesh.num_triangles(), 2);
        assert_eq!(m.mesh.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert_eq!(m.warnings.len(), 1);
    }

    #[test]
    fn obj_negative_indices() {
        let obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        let m = read_mesh(obj, MeshFormat::Obj).unwrap();
        assert_eq!(m.mesh.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn pentagon_is_rejected() {
        let off = "OFF\n5 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 2 0\n5 0 1 2 3 4\n";
        assert!(matches!(
            read_mesh(off, MeshFormat::Off),
            Err(Error::UnsupportedFeature(_))
        ));
    }

    #[test]
    fn malformed_off_is_a_parse_error() {
        let off = "OFF\n4 2 0\n0 0 0\n1 0 x\n";
        assert!(matches!(read_mesh(off, MeshFormat::Off), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn binary_ply_is_unsupported() {
        let ply = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(
            read_mesh(ply, MeshFormat::Ply),
            Err(Error::UnsupportedFeature(_))
        ));
    }

    #[test]
    fn ply_roundtrip_with_colors() {
        let m = shapes::icosphere(1, 1.0);
        let colors = vec![[10u8, 20, 30]; m.num_vertices()];
        let mut buf = Vec::new();
        write_ply(&m, Some(&colors), &mut buf).unwrap();
        let back = read_mesh(std::str::from_utf8(&buf).unwrap(), MeshFormat::Ply).unwrap();
        assert_eq!(back.mesh.num_vertices(), m.num_vertices());
        assert_eq!(back.mesh.triangles(), m.triangles());
    }

    #[test]
    fn icosphere_off_counts_follow_euler() {
        let m = shapes::icosphere(4, 1.0);
        let mut buf = Vec::new();
        write_off(&m, &mut buf).unwrap();
        let back = read_mesh(std::str::from_utf8(&buf).unwrap(), MeshFormat::Off).unwrap();
        assert_eq!(back.mesh.num_vertices(), 2562);
        assert_eq!(back.mesh.num_triangles(), 2 * 2562 - 4);
    }

    #[test]
    fn sniffing_detects_formats() {
        assert_eq!(sniff(SQUARE_OFF).unwrap(), MeshFormat::Off);
        assert_eq!(sniff("ply\nformat ascii 1.0\n").unwrap(), MeshFormat::Ply);
        assert_eq!(sniff("v 0 0 0\n").unwrap(), MeshFormat::Obj);
    }
}
