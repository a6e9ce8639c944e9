//! Dense reference implementations used as oracles by the integration tests.
//!
//! Everything here is written against physical coordinates with a collapsed
//! Gauss-Legendre rule, independently of the library's reference-element
//! machinery and symmetric quadrature tables.
#![allow(dead_code)]

use std::sync::Arc;

use emacfem::field::FemField;
use emacfem::forms::NonlinearForm;
use emacfem::mesh::{BoundaryEdge, DirichletSpec, DofMap, SpaceKind, TriMesh};
use rand::Rng;

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Collapsed (Duffy) rule on the triangle `v`, returning physical points
/// and weights. Exact for polynomials of degree `2n - 2`.
pub fn triangle_rule(v: [[f64; 2]; 3], n: usize) -> Vec<([f64; 2], f64)> {
    let gl = gauss_legendre(n);
    let det = ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
        .abs();
    let mut out = Vec::new();
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            let (a, b) = (s, (1.0 - s) * t);
            let x = [
                v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]),
            ];
            out.push((x, ws * wt * (1.0 - s) * det));
        }
    }
    out
}

/// Barycentric coordinates of `x` and their gradients by solving the
/// 3x3 affine system directly.
pub fn barycentric(v: [[f64; 2]; 3], x: [f64; 2]) -> ([f64; 3], [[f64; 2]; 3]) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let mut l = [0.0; 3];
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(v[j][1] - v[k][1]) / det, (v[k][0] - v[j][0]) / det];
        l[i] = ((v[j][0] - x[0]) * (v[k][1] - x[1]) - (v[k][0] - x[0]) * (v[j][1] - x[1])) / det;
    }
    (l, g)
}

/// P2 basis in the local order v0, v1, v2, m01, m12, m20.
pub fn p2_basis(v: [[f64; 2]; 3], x: [f64; 2]) -> ([f64; 6], [[f64; 2]; 6]) {
    let (l, g) = barycentric(v, x);
    let mut val = [0.0; 6];
    let mut grad = [[0.0; 2]; 6];
    for i in 0..3 {
        val[i] = l[i] * (2.0 * l[i] - 1.0);
        grad[i] = [(4.0 * l[i] - 1.0) * g[i][0], (4.0 * l[i] - 1.0) * g[i][1]];
    }
    for (m, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
        val[3 + m] = 4.0 * l[i] * l[j];
        grad[3 + m] = [
            4.0 * (l[i] * g[j][0] + l[j] * g[i][0]),
            4.0 * (l[i] * g[j][1] + l[j] * g[i][1]),
        ];
    }
    (val, grad)
}

pub fn p1_basis(v: [[f64; 2]; 3], x: [f64; 2]) -> ([f64; 3], [[f64; 2]; 3]) {
    barycentric(v, x)
}

pub const RULE_POINTS: usize = 8;

pub struct VectorAt {
    pub u: [f64; 2],
    pub g: [[f64; 2]; 2],
}

fn vector_at(
    map: &DofMap,
    coeffs: &[f64],
    t: usize,
    val: &[f64; 6],
    grad: &[[f64; 2]; 6],
) -> VectorAt {
    let mut out = VectorAt {
        u: [0.0; 2],
        g: [[0.0; 2]; 2],
    };
    for (k, &s) in map.element_scalar_dofs(t).iter().enumerate() {
        for c in 0..2 {
            let a = coeffs[2 * s + c];
            out.u[c] += a * val[k];
            out.g[c][0] += a * grad[k][0];
            out.g[c][1] += a * grad[k][1];
        }
    }
    out
}

/// Dense vector mass matrix.
pub fn mass(mesh: &TriMesh, map: &DofMap) -> Dense {
    let n = map.n_dofs();
    let mut m = zeros(n, n);
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        let dofs = map.element_scalar_dofs(t);
        for (x, w) in triangle_rule(v, RULE_POINTS) {
            let (val, _) = p2_basis(v, x);
            for (a, &i) in dofs.iter().enumerate() {
                for (b, &j) in dofs.iter().enumerate() {
                    for c in 0..2 {
                        m[2 * i + c][2 * j + c] += w * val[a] * val[b];
                    }
                }
            }
        }
    }
    m
}

/// Dense `2 nu (D(u), D(v))`.
pub fn viscous(mesh: &TriMesh, map: &DofMap, nu: f64) -> Dense {
    let n = map.n_dofs();
    let mut m = zeros(n, n);
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        let dofs = map.element_scalar_dofs(t);
        for (x, w) in triangle_rule(v, RULE_POINTS) {
            let (_, grad) = p2_basis(v, x);
            for (a, &i) in dofs.iter().enumerate() {
                for ci in 0..2 {
                    // D of the basis function phi_a e_ci.
                    let di = sym(ci, grad[a]);
                    for (b, &j) in dofs.iter().enumerate() {
                        for cj in 0..2 {
                            let dj = sym(cj, grad[b]);
                            let mut s = 0.0;
                            for p in 0..2 {
                                for q in 0..2 {
                                    s += di[p][q] * dj[p][q];
                                }
                            }
                            m[2 * i + ci][2 * j + cj] += w * 2.0 * nu * s;
                        }
                    }
                }
            }
        }
    }
    m
}

fn sym(c: usize, g: [f64; 2]) -> [[f64; 2]; 2] {
    let mut gr = [[0.0; 2]; 2];
    gr[c] = g;
    [
        [gr[0][0], 0.5 * (gr[0][1] + gr[1][0])],
        [0.5 * (gr[0][1] + gr[1][0]), gr[1][1]],
    ]
}

/// Dense `B[q][v] = (div phi_v, psi_q)`.
pub fn divergence(mesh: &TriMesh, vmap: &DofMap, pmap: &DofMap) -> Dense {
    let mut m = zeros(pmap.n_dofs(), vmap.n_dofs());
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        for (x, w) in triangle_rule(v, RULE_POINTS) {
            let (_, g2) = p2_basis(v, x);
            let (p1, _) = p1_basis(v, x);
            for (a, &q) in pmap.element_scalar_dofs(t).iter().enumerate() {
                for (b, &s) in vmap.element_scalar_dofs(t).iter().enumerate() {
                    for c in 0..2 {
                        m[q][2 * s + c] += w * p1[a] * g2[b][c];
                    }
                }
            }
        }
    }
    m
}

/// Pointwise nonlinear term `N(u)` tested with `v`, plus the flux `F` tested
/// with `grad v`, written out from the textbook definitions.
fn nonlinear_terms(
    form: NonlinearForm,
    u: [f64; 2],
    g: [[f64; 2]; 2],
) -> ([f64; 2], [[f64; 2]; 2]) {
    let div = g[0][0] + g[1][1];
    // (u . grad) u
    let conv = [
        g[0][0] * u[0] + g[0][1] * u[1],
        g[1][0] * u[0] + g[1][1] * u[1],
    ];
    match form {
        NonlinearForm::Conv => (conv, [[0.0; 2]; 2]),
        NonlinearForm::Skew => (
            [conv[0] + 0.5 * div * u[0], conv[1] + 0.5 * div * u[1]],
            [[0.0; 2]; 2],
        ),
        NonlinearForm::Emac => {
            // 2 D(u) u + (div u) u
            let d = [
                [g[0][0], 0.5 * (g[0][1] + g[1][0])],
                [0.5 * (g[0][1] + g[1][0]), g[1][1]],
            ];
            let du = [
                d[0][0] * u[0] + d[0][1] * u[1],
                d[1][0] * u[0] + d[1][1] * u[1],
            ];
            (
                [2.0 * du[0] + div * u[0], 2.0 * du[1] + div * u[1]],
                [[0.0; 2]; 2],
            )
        }
        NonlinearForm::Rot => {
            let w = g[1][0] - g[0][1];
            ([-w * u[1], w * u[0]], [[0.0; 2]; 2])
        }
        // -(u u^T, grad v)
        NonlinearForm::Cons => (
            [0.0; 2],
            [[-u[0] * u[0], -u[0] * u[1]], [-u[1] * u[0], -u[1] * u[1]]],
        ),
    }
}

pub fn nonlinear_residual(
    mesh: &TriMesh,
    map: &DofMap,
    form: NonlinearForm,
    coeffs: &[f64],
) -> Vec<f64> {
    let mut r = vec![0.0; map.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        for (x, w) in triangle_rule(v, RULE_POINTS) {
            let (val, grad) = p2_basis(v, x);
            let at = vector_at(map, coeffs, t, &val, &grad);
            let (nv, f) = nonlinear_terms(form, at.u, at.g);
            for (k, &s) in map.element_scalar_dofs(t).iter().enumerate() {
                for c in 0..2 {
                    r[2 * s + c] +=
                        w * (nv[c] * val[k] + f[c][0] * grad[k][0] + f[c][1] * grad[k][1]);
                }
            }
        }
    }
    r
}

/// Jacobian columns by exact polarization of the quadratic residual:
/// `J(u) w = r(u + w) - r(u) - r(w)`.
pub fn nonlinear_jacobian(
    mesh: &TriMesh,
    map: &DofMap,
    form: NonlinearForm,
    coeffs: &[f64],
) -> Dense {
    let n = map.n_dofs();
    let ru = nonlinear_residual(mesh, map, form, coeffs);
    let mut jac = zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let sum: Vec<f64> = coeffs.iter().zip(&e).map(|(a, b)| a + b).collect();
        let rs = nonlinear_residual(mesh, map, form, &sum);
        let re = nonlinear_residual(mesh, map, form, &e);
        for i in 0..n {
            jac[i][j] = rs[i] - ru[i] - re[i];
        }
        e[j] = 0.0;
    }
    jac
}

/// Dense `C[i][j] = (u . grad s_j, s_i)` on a scalar P1 or P2 space.
pub fn transport(mesh: &TriMesh, vmap: &DofMap, u: &[f64], smap: &DofMap) -> Dense {
    let n = smap.n_dofs();
    let mut c = zeros(n, n);
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        for (x, w) in triangle_rule(v, RULE_POINTS) {
            let (val, grad) = p2_basis(v, x);
            let at = vector_at(vmap, u, t, &val, &grad);
            let (sv, sg): (Vec<f64>, Vec<[f64; 2]>) = match smap.kind() {
                SpaceKind::P1Scalar => {
                    let (a, b) = p1_basis(v, x);
                    (a.to_vec(), b.to_vec())
                }
                _ => (val.to_vec(), grad.to_vec()),
            };
            let dofs = smap.element_scalar_dofs(t);
            for (a, &i) in dofs.iter().enumerate() {
                for (b, &j) in dofs.iter().enumerate() {
                    c[i][j] += w * (at.u[0] * sg[b][0] + at.u[1] * sg[b][1]) * sv[a];
                }
            }
        }
    }
    c
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn vec_max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Five-vertex, four-triangle mesh around a perturbed center point.
pub fn fan_mesh(center: [f64; 2]) -> TriMesh {
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], center];
    let tris = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
    let be = [[0, 1], [1, 2], [2, 3], [3, 0]]
        .iter()
        .map(|&vertices| BoundaryEdge {
            vertices,
            tag: "outer".into(),
        })
        .collect();
    TriMesh::new(v, tris, be, None).unwrap()
}

/// Two triangles sharing an edge, with a skewed fourth vertex.
pub fn two_triangle_mesh() -> TriMesh {
    let v = vec![[0.0, 0.0], [1.3, 0.1], [0.2, 0.9], [1.4, 1.2]];
    let tris = vec![[0, 1, 2], [1, 3, 2]];
    let be = [[0, 1], [1, 3], [3, 2], [2, 0]]
        .iter()
        .map(|&vertices| BoundaryEdge {
            vertices,
            tag: "outer".into(),
        })
        .collect();
    TriMesh::new(v, tris, be, None).unwrap()
}

pub fn unconstrained(mesh: &TriMesh, kind: SpaceKind) -> Arc<DofMap> {
    Arc::new(DofMap::build(mesh, kind, &DirichletSpec::new()).unwrap())
}

pub fn random_coeffs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Random field vanishing on every constrained dof of `map`.
pub fn random_zero_trace(rng: &mut impl Rng, map: &Arc<DofMap>) -> FemField {
    let mut c = random_coeffs(rng, map.n_dofs());
    for d in map.dirichlet_dofs() {
        c[d.dof] = 0.0;
    }
    FemField::from_coeffs(map.clone(), c).unwrap()
}
pub mod manufactured;

/// Copy of `h` with every pressure variable shifted by its own random constant.
pub fn shifted_history(
    h: &emacfem::solver::SolverHistory,
    rng: &mut impl Rng,
) -> emacfem::solver::SolverHistory {
    use emacfem::solver::{SolverHistory, SolverState};
    let mut states: Vec<SolverState> = (0..h.len())
        .rev()
        .map(|i| h.get(i).unwrap().clone())
        .collect();
    for s in &mut states {
        let c: f64 = rng.gen_range(-10.0..10.0);
        for p in s.p_hat.coeffs_mut() {
            *p += c;
        }
    }
    let mut it = states.into_iter();
    let mut out = SolverHistory::new(it.next().unwrap());
    for s in it {
        out.push(s).unwrap();
    }
    out
}
