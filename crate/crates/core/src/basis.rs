//! P1/P2 Lagrange bases on triangles and affine element geometry.
//!
//! Local P2 order: vertices 0, 1, 2, then midpoints of edges (0,1), (1,2),
//! (2,0). Barycentric coordinates are `l = [1 - xi - eta, xi, eta]`.

use crate::mesh::{SpaceKind, TriMesh};

/// Reference gradients (d/dxi, d/deta) of the barycentric coordinates.
const REF_GRAD_L: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// P2 gradients given the gradients `g` of the barycentric coordinates
/// (reference or physical).
fn p2_grads_from(l: [f64; 3], g: [[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let vertex = |i: usize| {
        let s = 4.0 * l[i] - 1.0;
        [s * g[i][0], s * g[i][1]]
    };
    let edge = |a: usize, b: usize| {
        [
            4.0 * (l[a] * g[b][0] + l[b] * g[a][0]),
            4.0 * (l[a] * g[b][1] + l[b] * g[a][1]),
        ]
    };
    [
        vertex(0),
        vertex(1),
        vertex(2),
        edge(0, 1),
        edge(1, 2),
        edge(2, 0),
    ]
}

/// Basis values and reference-coordinate gradients at barycentric point `l`.
/// Vector spaces use the scalar basis of each component.
pub fn eval_basis(kind: SpaceKind, l: [f64; 3]) -> (Vec<f64>, Vec<[f64; 2]>) {
    match kind {
        SpaceKind::P1Scalar => (p1_values(l).to_vec(), REF_GRAD_L.to_vec()),
        _ => (p2_values(l).to_vec(), p2_grads_from(l, REF_GRAD_L).to_vec()),
    }
}

/// Affine map from the reference triangle onto a mesh triangle.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub vertices: [[f64; 2]; 3],
    /// Columns are the images of the reference axes.
    pub jacobian: [[f64; 2]; 2],
    pub inv_transpose: [[f64; 2]; 2],
    pub det: f64,
    /// Physical gradients of the barycentric coordinates.
    pub grad_l: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [a, b, c] = vertices;
        let jacobian = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let inv_transpose = [
            [jacobian[1][1] / det, -jacobian[1][0] / det],
            [-jacobian[0][1] / det, jacobian[0][0] / det],
        ];
        let map = |g: [f64; 2]| {
            [
                inv_transpose[0][0] * g[0] + inv_transpose[0][1] * g[1],
                inv_transpose[1][0] * g[0] + inv_transpose[1][1] * g[1],
            ]
        };
        let grad_l = REF_GRAD_L.map(map);
        Self {
            vertices,
            jacobian,
            inv_transpose,
            det,
            grad_l,
        }
    }

    pub fn of(mesh: &TriMesh, t: usize) -> Self {
        Self::new(mesh.triangle_coords(t))
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    /// Physical gradients of the P2 basis at `l`.
    pub fn p2_grads(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        p2_grads_from(l, self.grad_l)
    }

    /// Physical gradients of the P1 basis (constant on the element).
    pub fn p1_grads(&self) -> [[f64; 2]; 3] {
        self.grad_l
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let a = self.vertices[0];
        let d = [x[0] - a[0], x[1] - a[1]];
        let l1 = self.inv_transpose[0][0] * d[0] + self.inv_transpose[1][0] * d[1];
        let l2 = self.inv_transpose[0][1] * d[0] + self.inv_transpose[1][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Reference-space point and barycentric coordinates of the six P2 nodes.
pub const P2_NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
