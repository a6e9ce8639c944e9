//! Reader for the legacy ASCII Gmsh format (version 2.2).
//!
//! Supported element types: 2-node lines (boundary edges, tagged by their
//! physical group), 3-node triangles and 1-node points (ignored). Physical
//! groups without a `$PhysicalNames` entry are tagged by their number.

use std::collections::HashMap;
use std::path::Path;

use super::{BoundaryEdge, TriMesh};
use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn import_gmsh(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gmsh(&text)
}

struct Sections<'a> {
    lines: std::iter::Peekable<std::iter::Map<std::str::Lines<'a>, fn(&str) -> &str>>,
}

impl<'a> Sections<'a> {
    fn next_section(&mut self) -> Option<(String, Vec<&'a str>)> {
        let head = loop {
            let l = self.lines.next()?;
            if !l.is_empty() {
                break l;
            }
        };
        let name = head.trim_start_matches('$').to_string();
        let end = format!("$End{name}");
        let mut body = Vec::new();
        for l in self.lines.by_ref() {
            if l == end {
                return Some((name, body));
            }
            body.push(l);
        }
        Some((format!("unterminated:{name}"), body))
    }
}

fn count(body: &[&str], what: &str) -> Result<usize> {
    body.first()
        .and_then(|l| l.parse().ok())
        .ok_or_else(|| bad(format!("missing entry count in ${what}")))
}

pub fn parse_gmsh(text: &str) -> Result<TriMesh> {
    let mut sections = Sections {
        lines: text.lines().map(str::trim as fn(&str) -> &str).peekable(),
    };
    let mut names: HashMap<i64, String> = HashMap::new();
    let mut nodes: HashMap<i64, [f64; 2]> = HashMap::new();
    let mut node_order: Vec<i64> = Vec::new();
    let mut raw_tris: Vec<[i64; 3]> = Vec::new();
    let mut raw_lines: Vec<([i64; 2], i64)> = Vec::new();
    let mut saw_format = false;

    while let Some((name, body)) = sections.next_section() {
        match name.as_str() {
            "MeshFormat" => {
                let mut it = body
                    .first()
                    .map(|l| l.split_whitespace())
                    .ok_or_else(|| bad("empty $MeshFormat"))?;
                let version = it.next().unwrap_or("");
                if !version.starts_with("2.") {
                    return Err(bad(format!(
                        "unsupported MSH version {version}; expected 2.2"
                    )));
                }
                if it.next() != Some("0") {
                    return Err(bad("binary MSH files are not supported"));
                }
                saw_format = true;
            }
            "PhysicalNames" => {
                let n = count(&body, "PhysicalNames")?;
                for l in body.iter().skip(1).take(n) {
                    let mut it = l.splitn(3, char::is_whitespace);
                    let _dim = it.next();
                    let tag: i64 = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(format!("bad physical name line '{l}'")))?;
                    let label = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                    names.insert(tag, label);
                }
            }
            "Nodes" => {
                let n = count(&body, "Nodes")?;
                if body.len() < n + 1 {
                    return Err(bad("$Nodes section truncated"));
                }
                for l in &body[1..=n] {
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() < 3 {
                        return Err(bad(format!("bad node line '{l}'")));
                    }
                    let id: i64 = f[0]
                        .parse()
                        .map_err(|_| bad(format!("bad node id in '{l}'")))?;
                    let x: f64 = f[1]
                        .parse()
                        .map_err(|_| bad(format!("bad coordinate in '{l}'")))?;
                    let y: f64 = f[2]
                        .parse()
                        .map_err(|_| bad(format!("bad coordinate in '{l}'")))?;
                    if nodes.insert(id, [x, y]).is_some() {
                        return Err(bad(format!("duplicate node id {id}")));
                    }
                    node_order.push(id);
                }
            }
            "Elements" => {
                let n = count(&body, "Elements")?;
                if body.len() < n + 1 {
                    return Err(bad("$Elements section truncated"));
                }
                for l in &body[1..=n] {
                    let f: Vec<i64> = l
                        .split_whitespace()
                        .map(|w| {
                            w.parse()
                                .map_err(|_| bad(format!("bad element line '{l}'")))
                        })
                        .collect::<Result<_>>()?;
                    if f.len() < 3 {
                        return Err(bad(format!("bad element line '{l}'")));
                    }
                    let (etype, ntags) = (f[1], f[2] as usize);
                    let physical = if ntags > 0 {
                        f.get(3).copied().unwrap_or(0)
                    } else {
                        0
                    };
                    let conn = f.get(3 + ntags..).unwrap_or(&[]);
                    let need = match etype {
                        1 => 2,
                        2 => 3,
                        15 => 1,
                        other => {
                            return Err(bad(format!(
                            "unsupported element type {other} (only lines, triangles and points)"
                        )))
                        }
                    };
                    if conn.len() != need {
                        return Err(bad(format!(
                            "element '{l}' has {} nodes, expected {need}",
                            conn.len()
                        )));
                    }
                    match etype {
                        1 => raw_lines.push(([conn[0], conn[1]], physical)),
                        2 => raw_tris.push([conn[0], conn[1], conn[2]]),
                        _ => {}
                    }
                }
            }
            other if other.starts_with("unterminated:") => {
                return Err(bad(format!("section ${} is not terminated", &other[13..])));
            }
            _ => {}
        }
    }
    if !saw_format {
        return Err(bad("missing $MeshFormat section"));
    }
    if raw_tris.is_empty() {
        return Err(bad("mesh contains no triangles"));
    }

    // Keep only nodes used by triangles, in file order.
    let mut used: HashMap<i64, usize> = HashMap::new();
    for t in &raw_tris {
        for id in t {
            if !nodes.contains_key(id) {
                return Err(bad(format!("triangle references unknown node {id}")));
            }
            used.insert(*id, usize::MAX);
        }
    }
    let mut vertices = Vec::new();
    for id in &node_order {
        if let Some(slot) = used.get_mut(id) {
            *slot = vertices.len();
            vertices.push(nodes[id]);
        }
    }
    let triangles = raw_tris
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|id| used[&id]);
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            let area = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
            if area < 0.0 {
                [a, c, b]
            } else {
                [a, b, c]
            }
        })
        .collect();
    let boundary = raw_lines
        .iter()
        .map(|(ends, phys)| {
            let v = ends.map(|id| used.get(&id).copied());
            match v {
                [Some(a), Some(b)] => Ok(BoundaryEdge {
                    vertices: [a, b],
                    tag: names.get(phys).cloned().unwrap_or_else(|| phys.to_string()),
                }),
                _ => Err(bad(format!(
                    "line element {ends:?} does not touch the triangulation"
                ))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    TriMesh::new(vertices, triangles, boundary, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 \"wall\"
2 2 \"fluid\"
$EndPhysicalNames
$Nodes
5
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
9 0.5 0.5 0
$EndNodes
$Elements
9
1 15 2 0 1 1
2 1 2 1 1 1 2
3 1 2 1 2 2 3
4 1 2 1 3 3 4
5 1 2 1 4 4 1
6 2 2 2 1 1 2 9
7 2 2 2 1 2 3 9
8 2 2 2 1 3 9 4
9 2 2 2 1 4 1 9
$EndElements
";

    #[test]
    fn parses_square_with_flipped_triangle() {
        let m = parse_gmsh(SQUARE).unwrap();
        assert_eq!(m.n_vertices(), 5);
        assert_eq!(m.n_triangles(), 4);
        assert_eq!(m.boundary_tags(), vec!["wall".to_string()]);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn rejects_quads() {
        let text = SQUARE.replace("9 2 2 2 1 4 1 9", "9 3 2 2 1 4 1 9 2");
        let err = parse_gmsh(&text).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn rejects_version_4() {
        let err = parse_gmsh(&SQUARE.replace("2.2 0 8", "4.1 0 8")).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn rejects_missing_tags() {
        let text = SQUARE.replace("5 1 2 1 4 4 1\n", "5 15 2 0 1 1\n");
        let err = parse_gmsh(&text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
