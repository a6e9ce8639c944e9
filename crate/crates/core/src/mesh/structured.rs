use super::{BoundaryEdge, PeriodicX, TriMesh};
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rectangle {
    pub const UNIT: Rectangle = Rectangle {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Uniform `n x n` quad grid, each quad split along its lower-left to
/// upper-right diagonal. Boundary tags are `bottom`, `right`, `top`, `left`.
///
/// With `periodic_x` the right column of vertices is paired with the left one.
pub fn build_structured_square(n: usize, domain: Rectangle, periodic_x: bool) -> Result<TriMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "structured mesh needs at least 2 subdivisions per side, got {n}"
        )));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rectangle must have positive width and height: {domain:?}"
        )));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        // Endpoints are pinned so that boundary coordinates are exact.
        let y = if j == n {
            domain.y1
        } else {
            domain.y0 + domain.height() * j as f64 / n as f64
        };
        for i in 0..=n {
            let x = if i == n {
                domain.x1
            } else {
                domain.x0 + domain.width() * i as f64 / n as f64
            };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * n);
    let mut tag = |a: usize, b: usize, name: &str| {
        boundary_edges.push(BoundaryEdge {
            vertices: [a, b],
            tag: name.to_string(),
        })
    };
    for i in 0..n {
        tag(id(i, 0), id(i + 1, 0), "bottom");
    }
    for j in 0..n {
        tag(id(n, j), id(n, j + 1), "right");
    }
    for i in (0..n).rev() {
        tag(id(i + 1, n), id(i, n), "top");
    }
    for j in (0..n).rev() {
        tag(id(0, j + 1), id(0, j), "left");
    }
    let periodic = periodic_x.then(|| PeriodicX {
        period: domain.width(),
        pairs: (0..=n).map(|j| (id(n, j), id(0, j))).collect(),
    });
    TriMesh::new(vertices, triangles, boundary_edges, periodic)
}
