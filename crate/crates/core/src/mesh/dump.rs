//! Plain-text mesh dump used for test fixtures and debugging.
//!
//! ```text
//! emacfem-mesh 1
//! vertices <n>
//! <x> <y>
//! triangles <m>
//! <a> <b> <c>
//! boundary <k>
//! <a> <b> <tag>
//! periodic <p> <period>
//! <slave> <master>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryEdge, PeriodicX, TriMesh};
use crate::error::{Error, Result};

pub fn write_dump(mesh: &TriMesh) -> String {
    let mut s = String::from("emacfem-mesh 1\n");
    let _ = writeln!(s, "vertices {}", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e}", v[0], v[1]);
    }
    let _ = writeln!(s, "triangles {}", mesh.n_triangles());
    for t in mesh.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "boundary {}", mesh.boundary_edges().len());
    for be in mesh.boundary_edges() {
        let _ = writeln!(s, "{} {} {}", be.vertices[0], be.vertices[1], be.tag);
    }
    if let Some(p) = mesh.periodic() {
        let _ = writeln!(s, "periodic {} {:e}", p.pairs.len(), p.period);
        for (a, b) in &p.pairs {
            let _ = writeln!(s, "{a} {b}");
        }
    }
    s
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<TriMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dump(&text)
}

pub(crate) fn parse_dump(text: &str) -> Result<TriMesh> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("emacfem-mesh 1") {
        return Err(bad("missing 'emacfem-mesh 1' header"));
    }
    let mut section = |name: &str| -> Result<Vec<String>> {
        let head = lines
            .next()
            .ok_or_else(|| bad(format!("missing section '{name}'")))?;
        let mut it = head.split_whitespace();
        if it.next() != Some(name) {
            return Err(bad(format!("expected section '{name}', found '{head}'")));
        }
        let n: usize = it
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| bad(format!("bad count in '{head}'")))?;
        let mut out = vec![head.to_string()];
        for _ in 0..n {
            out.push(
                lines
                    .next()
                    .ok_or_else(|| bad(format!("section '{name}' truncated")))?
                    .to_string(),
            );
        }
        Ok(out)
    };
    fn nums<T: std::str::FromStr>(line: &str, k: usize) -> Result<Vec<T>> {
        let v: Vec<T> = line
            .split_whitespace()
            .take(k)
            .map(|w| w.parse().map_err(|_| bad(format!("cannot parse '{line}'"))))
            .collect::<Result<_>>()?;
        if v.len() != k {
            return Err(bad(format!("expected {k} fields in '{line}'")));
        }
        Ok(v)
    }
    let vertices = section("vertices")?[1..]
        .iter()
        .map(|l| nums::<f64>(l, 2).map(|v| [v[0], v[1]]))
        .collect::<Result<Vec<_>>>()?;
    let triangles = section("triangles")?[1..]
        .iter()
        .map(|l| nums::<usize>(l, 3).map(|v| [v[0], v[1], v[2]]))
        .collect::<Result<Vec<_>>>()?;
    let boundary = section("boundary")?[1..]
        .iter()
        .map(|l| {
            let v = nums::<usize>(l, 2)?;
            let tag = l
                .split_whitespace()
                .nth(2)
                .ok_or_else(|| bad(format!("missing tag in '{l}'")))?;
            Ok(BoundaryEdge {
                vertices: [v[0], v[1]],
                tag: tag.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let periodic = match section("periodic") {
        Ok(sec) => {
            let period: f64 = sec[0]
                .split_whitespace()
                .nth(2)
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| bad("missing period"))?;
            let pairs = sec[1..]
                .iter()
                .map(|l| nums::<usize>(l, 2).map(|v| (v[0], v[1])))
                .collect::<Result<Vec<_>>>()?;
            Some(PeriodicX { period, pairs })
        }
        Err(_) => None,
    };
    TriMesh::new(vertices, triangles, boundary, periodic)
}
