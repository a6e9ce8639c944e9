//! Conforming triangulations, subdomain markers and degree-of-freedom maps.

mod dofmap;
mod dump;
mod gmsh;
mod structured;
mod subdomain;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use dofmap::{BoundaryFn, DirichletDof, DirichletSpec, DofMap, SpaceKind};
pub use dump::{read_dump, write_dump};
pub use gmsh::{import_gmsh, parse_gmsh};
pub use structured::{build_structured_square, Rectangle};
pub use subdomain::{mark_subdomain, SubdomainMarker};

/// Local edge `k` of a triangle joins local vertices `EDGE_VERTICES[k]`.
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: String,
}

/// Identification of right-edge vertices with left-edge vertices for an
/// x-periodic domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicX {
    pub period: f64,
    /// `(slave, master)` vertex pairs; masters lie at `x - period`.
    pub pairs: Vec<(usize, usize)>,
}

/// A conforming, counterclockwise-oriented triangulation.
#[derive(Clone, Debug)]
pub struct TriMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    periodic: Option<PeriodicX>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    edge_triangles: Vec<Vec<usize>>,
    edge_index: HashMap<(usize, usize), usize>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriMesh {
    /// Builds a mesh and checks every structural invariant.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        periodic: Option<PeriodicX>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::Validation(format!(
                    "triangle {t} references a vertex outside 0..{nv}"
                )));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::Validation(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0; 3];
            for (k, [a, b]) in EDGE_VERTICES.iter().enumerate() {
                let key = edge_key(tri[*a], tri[*b]);
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[e].push(t);
                te[k] = e;
            }
            triangle_edges.push(te);
        }

        for (e, tris) in edge_triangles.iter().enumerate() {
            if tris.len() > 2 {
                return Err(Error::Validation(format!(
                    "edge {:?} is shared by {} triangles",
                    edges[e],
                    tris.len()
                )));
            }
        }
        let mut tagged = vec![false; edges.len()];
        for be in &boundary_edges {
            let key = edge_key(be.vertices[0], be.vertices[1]);
            match edge_index.get(&key) {
                Some(&e) if edge_triangles[e].len() == 1 => tagged[e] = true,
                Some(_) => {
                    return Err(Error::Validation(format!(
                        "tagged edge {:?} ({}) is an interior edge",
                        be.vertices, be.tag
                    )))
                }
                None => {
                    return Err(Error::Validation(format!(
                        "tagged edge {:?} ({}) is not an edge of the triangulation",
                        be.vertices, be.tag
                    )))
                }
            }
        }
        if let Some(e) = (0..edges.len()).find(|&e| edge_triangles[e].len() == 1 && !tagged[e]) {
            return Err(Error::Validation(format!(
                "boundary edge {:?} carries no tag (non-conforming or incompletely tagged mesh)",
                edges[e]
            )));
        }

        if let Some(p) = &periodic {
            for &(s, m) in &p.pairs {
                if s >= nv || m >= nv {
                    return Err(Error::Validation(format!(
                        "periodic pair ({s}, {m}) out of range"
                    )));
                }
                let (xs, xm) = (vertices[s], vertices[m]);
                let tol = 1e-12 * p.period.abs().max(1.0);
                if (xs[1] - xm[1]).abs() > tol || (xs[0] - xm[0] - p.period).abs() > tol {
                    return Err(Error::Validation(format!(
                        "periodic pair ({s}, {m}) is not separated by the period {}",
                        p.period
                    )));
                }
            }
        }

        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            periodic,
            edges,
            triangle_edges,
            edge_triangles,
            edge_index,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn periodic(&self) -> Option<&PeriodicX> {
        self.periodic.as_ref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    /// Triangles adjacent to edge `e` (one for boundary edges, two otherwise).
    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_triangles[e]
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangle_coords(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Number of P2 nodes (vertices followed by edge midpoints).
    pub fn n_p2_nodes(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    /// The six P2 node ids of triangle `t`: vertices, then the midpoints of
    /// local edges (0,1), (1,2), (2,0).
    pub fn p2_nodes(&self, t: usize) -> [usize; 6] {
        let [a, b, c] = self.triangles[t];
        let nv = self.vertices.len();
        let [e0, e1, e2] = self.triangle_edges[t];
        [a, b, c, nv + e0, nv + e1, nv + e2]
    }

    pub fn p2_node_coords(&self, node: usize) -> [f64; 2] {
        let nv = self.vertices.len();
        if node < nv {
            self.vertices[node]
        } else {
            let [a, b] = self.edges[node - nv];
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }
    }

    /// Distinct boundary tags in first-appearance order.
    pub fn boundary_tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = Vec::new();
        for be in &self.boundary_edges {
            if !tags.contains(&be.tag) {
                tags.push(be.tag.clone());
            }
        }
        tags
    }

    /// Global edge id joining vertices `a` and `b`, if any.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&edge_key(a, b)).copied()
    }

    /// Map from P2 node to its periodic master node (identity without periodicity).
    pub fn p2_node_masters(&self) -> Vec<usize> {
        let nv = self.vertices.len();
        let mut master: Vec<usize> = (0..self.n_p2_nodes()).collect();
        let Some(p) = &self.periodic else {
            return master;
        };
        let mut vmaster: Vec<usize> = (0..nv).collect();
        for &(s, m) in &p.pairs {
            vmaster[s] = m;
        }
        for &(s, m) in &p.pairs {
            master[s] = m;
        }
        for (e, [a, b]) in self.edges.iter().enumerate() {
            let (ma, mb) = (vmaster[*a], vmaster[*b]);
            if ma != *a && mb != *b {
                if let Some(me) = self.find_edge(ma, mb) {
                    master[nv + e] = nv + me;
                }
            }
        }
        master
    }

    /// Vertices lying on some tagged boundary edge.
    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for be in &self.boundary_edges {
            on[be.vertices[0]] = true;
            on[be.vertices[1]] = true;
        }
        on
    }

    /// Vertices minus edges plus triangles.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }
}
