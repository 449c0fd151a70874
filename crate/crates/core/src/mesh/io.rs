use std::path::Path;

use crate::geometry::Vec3;

use super::{MeshError, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
}

impl MeshFormat {
    /// Picks the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self, MeshError> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::PlyAscii),
            other => Err(MeshError::UnsupportedFormat(format!(
                "extension {:?} of {}",
                other.unwrap_or(""),
                path.display()
            ))),
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh, MeshError> {
    let text = std::fs::read(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = String::from_utf8(text).map_err(|_| {
        MeshError::UnsupportedFormat(format!("{} is not UTF-8 text (binary meshes are not supported)", path.display()))
    })?;
    match format {
        MeshFormat::Obj => parse_obj(&text),
        MeshFormat::PlyAscii => parse_ply(&text),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_coords<'a>(line: usize, mut it: impl Iterator<Item = &'a str>) -> Result<Vec3, MeshError> {
    let mut c = [0.0; 3];
    for slot in &mut c {
        let tok = it.next().ok_or_else(|| parse_err(line, "vertex needs three coordinates"))?;
        *slot = tok
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("invalid coordinate {tok:?}")))?;
    }
    Ok(Vec3::from(c))
}

fn fan(polygon: &[usize], out: &mut Vec<[usize; 3]>) {
    for k in 1..polygon.len() - 1 {
        out.push([polygon[0], polygon[k], polygon[k + 1]]);
    }
}

/// Parses ASCII Wavefront OBJ (`v` and `f` records; polygons fan-triangulated).
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                vertices.push(parse_coords(line_no, it)?);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let idx_str = tok.split('/').next().unwrap_or("");
                    let idx: i64 = idx_str
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("invalid face index {tok:?}")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(line_no, "face index 0 is invalid (OBJ indices start at 1)"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(
                            line_no,
                            format!("face index {idx} out of range ({} vertices defined)", vertices.len()),
                        ));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(parse_err(line_no, "face needs at least three vertices"));
                }
                fan(&poly, &mut triangles);
            }
            _ => {}
        }
    }
    if let Some(bad) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
        return Err(MeshError::NonFiniteVertex { index: bad });
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    TriMesh::new(vertices, triangles)
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

#[derive(Debug)]
struct PlyProperty {
    name: String,
    is_list: bool,
}

/// Parses ASCII PLY with `vertex` (x, y, z) and `face` (index list) elements.
pub fn parse_ply(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing 'ply' magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    loop {
        let (no, line) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of header"))?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("format") => {
                let fmt = it.next().unwrap_or("");
                if fmt != "ascii" {
                    return Err(MeshError::UnsupportedFormat(format!("PLY format {fmt:?} (only ascii is supported)")));
                }
                saw_format = true;
            }
            Some("element") => {
                let name = it.next().ok_or_else(|| parse_err(no, "element without name"))?;
                let count = it
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(no, "element without valid count"))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(no, "property before any element"))?;
                let toks: Vec<&str> = it.collect();
                let (is_list, name) = match toks.as_slice() {
                    ["list", _, _, name] => (true, *name),
                    [_, name] => (false, *name),
                    _ => return Err(parse_err(no, "malformed property")),
                };
                el.properties.push(PlyProperty {
                    name: name.to_string(),
                    is_list,
                });
            }
            Some("end_header") => break,
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => return Err(parse_err(no, format!("unknown header keyword {other:?}"))),
        }
    }
    if !saw_format {
        return Err(parse_err(1, "missing format line"));
    }

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for el in &elements {
        for _ in 0..el.count {
            let (no, line) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("unexpected end of file in element {}", el.name)))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let mut cursor = 0;
            let mut xyz = [None; 3];
            let mut face: Option<Vec<usize>> = None;
            for prop in &el.properties {
                if prop.is_list {
                    let n: usize = toks
                        .get(cursor)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(no, "missing list length"))?;
                    cursor += 1;
                    let items = toks
                        .get(cursor..cursor + n)
                        .ok_or_else(|| parse_err(no, "list shorter than its length"))?;
                    cursor += n;
                    if el.name == "face" && (prop.name == "vertex_indices" || prop.name == "vertex_index") {
                        let idx = items
                            .iter()
                            .map(|t| t.parse::<usize>().map_err(|_| parse_err(no, format!("invalid index {t:?}"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        face = Some(idx);
                    }
                } else {
                    let tok = toks.get(cursor).ok_or_else(|| parse_err(no, "too few values"))?;
                    cursor += 1;
                    if el.name == "vertex" {
                        let slot = match prop.name.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            _ => None,
                        };
                        if let Some(k) = slot {
                            xyz[k] = Some(
                                tok.parse::<f64>()
                                    .map_err(|_| parse_err(no, format!("invalid coordinate {tok:?}")))?,
                            );
                        }
                    }
                }
            }
            if el.name == "vertex" {
                match xyz {
                    [Some(x), Some(y), Some(z)] => vertices.push(Vec3::new(x, y, z)),
                    _ => return Err(parse_err(no, "vertex element lacks x, y, z")),
                }
            } else if let Some(poly) = face {
                if poly.len() < 3 {
                    return Err(parse_err(no, "face needs at least three vertices"));
                }
                if let Some(bad) = poly.iter().find(|&&i| i >= vertex_count(&elements)) {
                    return Err(parse_err(no, format!("face index {bad} out of range")));
                }
                fan(&poly, &mut triangles);
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    TriMesh::new(vertices, triangles)
}

fn vertex_count(elements: &[PlyElement]) -> usize {
    elements.iter().find(|e| e.name == "vertex").map_or(0, |e| e.count)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE_OBJ: &str = "\
# unit cube
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    #[test]
    fn obj_cube() {
        let m = parse_obj(CUBE_OBJ).unwrap();
        assert_eq!(m.triangle_count(), 12);
        assert!((m.total_area() - 6.0).abs() < 1e-12);
        assert!(m.is_watertight());
    }

    #[test]
    fn obj_quads_and_slashes() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangle_count(), 2);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        let neg = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(neg.triangle_count(), 1);
    }

    #[test]
    fn obj_index_out_of_range_names_line() {
        let text = CUBE_OBJ.replace("f 4 5 8", "f 4 5 9");
        match parse_obj(&text) {
            Err(MeshError::Parse { line, message }) => {
                assert_eq!(line, 21);
                assert!(message.contains('9'));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn obj_errors() {
        assert!(matches!(parse_obj("v 0 0 0\n"), Err(MeshError::EmptyMesh)));
        assert!(matches!(parse_obj("v 0 zero 0\n"), Err(MeshError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_obj("v 0 0 0\nv nan 0 0\nv 0 1 0\nf 1 2 3\n"),
            Err(MeshError::NonFiniteVertex { index: 1 })
        ));
    }

    #[test]
    fn ply_ascii() {
        let text = "ply\nformat ascii 1.0\ncomment tetra\nelement vertex 4\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face 4\nproperty list uchar int vertex_indices\nend_header\n0 0 0 1\n1 0 0 1\n0 1 0 1\n0 0 1 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        let m = parse_ply(text).unwrap();
        assert_eq!(m.triangle_count(), 4);
        assert!(m.is_watertight());
    }

    #[test]
    fn ply_rejects_binary_and_bad_index() {
        let bin = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(parse_ply(bin), Err(MeshError::UnsupportedFormat(_))));
        let bad = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n";
        assert!(matches!(parse_ply(bad), Err(MeshError::Parse { line: 13, .. })));
    }
}
