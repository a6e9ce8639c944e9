//! Bilinear and trilinear forms of the scheme, assembled elementwise.
//!
//! Vector P2 element dofs are ordered `a = 2 * k + c` (node `k`,
//! component `c`), matching the interleaved global numbering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::basis::{p1_values, p2_values, ElementGeometry};
use crate::error::{Error, Result};
use crate::field::FemField;
use crate::mesh::{DofMap, SpaceKind, TriMesh};
use crate::quadrature::{rule, QuadratureRule};
use crate::sparse::SparseMatrix;

/// Default exactness degree for every form and diagnostic.
pub const DEFAULT_QUADRATURE_DEGREE: usize = 6;

/// Treatment of the inertia term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NonlinearForm {
    /// `2 D(u) u + (div u) u`
    Emac,
    /// `(grad u) u`
    Conv,
    /// `(grad u) u + 1/2 (div u) u`
    Skew,
    /// `(curl u) x u`
    Rot,
    /// `div(u u^T)`, assembled as `-(u u^T, grad v)`
    Cons,
}

impl NonlinearForm {
    pub const ALL: [NonlinearForm; 5] = [
        NonlinearForm::Emac,
        NonlinearForm::Conv,
        NonlinearForm::Skew,
        NonlinearForm::Rot,
        NonlinearForm::Cons,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NonlinearForm::Emac => "EMAC",
            NonlinearForm::Conv => "CONV",
            NonlinearForm::Skew => "SKEW",
            NonlinearForm::Rot => "ROT",
            NonlinearForm::Cons => "CONS",
        }
    }

    /// Coefficient `a` in the physical pressure `p = p_solved + a/2 |u|^2`.
    pub fn kinetic_pressure_factor(self) -> f64 {
        match self {
            NonlinearForm::Emac => 1.0,
            NonlinearForm::Rot => -1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for NonlinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NonlinearForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NonlinearForm::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown nonlinearity form '{s}'")))
    }
}

/// Pointwise integrand of a trilinear form: tested as `n . v + f : grad v`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integrand {
    pub n: [f64; 2],
    pub f: [[f64; 2]; 2],
}

fn div(g: &[[f64; 2]; 2]) -> f64 {
    g[0][0] + g[1][1]
}

fn matvec(g: &[[f64; 2]; 2], u: [f64; 2]) -> [f64; 2] {
    [
        g[0][0] * u[0] + g[0][1] * u[1],
        g[1][0] * u[0] + g[1][1] * u[1],
    ]
}

fn transpose_matvec(g: &[[f64; 2]; 2], u: [f64; 2]) -> [f64; 2] {
    [
        g[0][0] * u[0] + g[1][0] * u[1],
        g[0][1] * u[0] + g[1][1] * u[1],
    ]
}

/// Nonlinear integrand at a point with velocity `u` and gradient
/// `g[c][d] = d u_c / d x_d`.
pub fn nonlinear_integrand(form: NonlinearForm, u: [f64; 2], g: &[[f64; 2]; 2]) -> Integrand {
    let gu = matvec(g, u);
    let dv = div(g);
    let n = match form {
        NonlinearForm::Emac => {
            let gtu = transpose_matvec(g, u);
            [gu[0] + gtu[0] + dv * u[0], gu[1] + gtu[1] + dv * u[1]]
        }
        NonlinearForm::Conv => gu,
        NonlinearForm::Skew => [gu[0] + 0.5 * dv * u[0], gu[1] + 0.5 * dv * u[1]],
        NonlinearForm::Rot => {
            let w = g[1][0] - g[0][1];
            [-w * u[1], w * u[0]]
        }
        NonlinearForm::Cons => {
            return Integrand {
                n: [0.0; 2],
                f: [[-u[0] * u[0], -u[0] * u[1]], [-u[1] * u[0], -u[1] * u[1]]],
            }
        }
    };
    Integrand {
        n,
        f: [[0.0; 2]; 2],
    }
}

/// Directional derivative of [`nonlinear_integrand`] at `(u, g)` along `(w, h)`.
pub fn nonlinear_derivative(
    form: NonlinearForm,
    u: [f64; 2],
    g: &[[f64; 2]; 2],
    w: [f64; 2],
    h: &[[f64; 2]; 2],
) -> Integrand {
    let add = |a: [f64; 2], b: [f64; 2]| [a[0] + b[0], a[1] + b[1]];
    let scale = |s: f64, a: [f64; 2]| [s * a[0], s * a[1]];
    let n = match form {
        NonlinearForm::Emac => {
            let sym_h = add(matvec(h, u), transpose_matvec(h, u));
            let sym_g = add(matvec(g, w), transpose_matvec(g, w));
            add(add(sym_h, sym_g), add(scale(div(h), u), scale(div(g), w)))
        }
        NonlinearForm::Conv => add(matvec(h, u), matvec(g, w)),
        NonlinearForm::Skew => add(
            add(matvec(h, u), matvec(g, w)),
            scale(0.5, add(scale(div(h), u), scale(div(g), w))),
        ),
        NonlinearForm::Rot => {
            let om = g[1][0] - g[0][1];
            let dom = h[1][0] - h[0][1];
            [-dom * u[1] - om * w[1], dom * u[0] + om * w[0]]
        }
        NonlinearForm::Cons => {
            let mut f = [[0.0; 2]; 2];
            for c in 0..2 {
                for d in 0..2 {
                    f[c][d] = -(w[c] * u[d] + u[c] * w[d]);
                }
            }
            return Integrand { n: [0.0; 2], f };
        }
    };
    Integrand {
        n,
        f: [[0.0; 2]; 2],
    }
}

/// Basis tables of a quadrature rule on the reference triangle.
#[derive(Clone, Debug)]
pub struct Tables {
    pub rule: &'static QuadratureRule,
    pub p2: Vec<[f64; 6]>,
    pub p1: Vec<[f64; 3]>,
}

impl Tables {
    pub fn new(degree: usize) -> Result<Self> {
        let rule = rule(degree)?;
        Ok(Self {
            rule,
            p2: rule.points.iter().map(|&l| p2_values(l)).collect(),
            p1: rule.points.iter().map(|&l| p1_values(l)).collect(),
        })
    }

    pub fn n_points(&self) -> usize {
        self.rule.len()
    }
}

/// Per-element quadrature data: physical weights, points and P2 gradients.
#[derive(Clone, Debug)]
pub struct ElementQuad {
    pub geo: ElementGeometry,
    pub jw: Vec<f64>,
    pub x: Vec<[f64; 2]>,
    pub p2_grads: Vec<[[f64; 2]; 6]>,
}

impl ElementQuad {
    pub fn new(mesh: &TriMesh, t: usize, tables: &Tables) -> Self {
        let geo = ElementGeometry::of(mesh, t);
        let pts = &tables.rule.points;
        Self {
            jw: tables.rule.weights.iter().map(|w| w * geo.det).collect(),
            x: pts.iter().map(|&l| geo.point(l)).collect(),
            p2_grads: pts.iter().map(|&l| geo.p2_grads(l)).collect(),
            geo,
        }
    }

    /// Velocity and gradient at quadrature point `q` from local P2 vector
    /// coefficients `loc[k][c]`.
    pub fn vector_at(
        &self,
        tables: &Tables,
        q: usize,
        loc: &[[f64; 2]; 6],
    ) -> ([f64; 2], [[f64; 2]; 2]) {
        let (v, gr) = (&tables.p2[q], &self.p2_grads[q]);
        let mut u = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for k in 0..6 {
            for c in 0..2 {
                u[c] += loc[k][c] * v[k];
                g[c][0] += loc[k][c] * gr[k][0];
                g[c][1] += loc[k][c] * gr[k][1];
            }
        }
        (u, g)
    }

    /// Scalar value and gradient of a P2 (`p2 = true`) or P1 field.
    pub fn scalar_at(&self, tables: &Tables, q: usize, loc: &[f64], p2: bool) -> (f64, [f64; 2]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        if p2 {
            for k in 0..6 {
                v += loc[k] * tables.p2[q][k];
                g[0] += loc[k] * self.p2_grads[q][k][0];
                g[1] += loc[k] * self.p2_grads[q][k][1];
            }
        } else {
            let gl = self.geo.p1_grads();
            for k in 0..3 {
                v += loc[k] * tables.p1[q][k];
                g[0] += loc[k] * gl[k][0];
                g[1] += loc[k] * gl[k][1];
            }
        }
        (v, g)
    }

    /// Scalar basis values and gradients for a space at point `q`.
    pub fn scalar_basis(
        &self,
        tables: &Tables,
        q: usize,
        kind: SpaceKind,
    ) -> (Vec<f64>, Vec<[f64; 2]>) {
        match kind {
            SpaceKind::P1Scalar => (tables.p1[q].to_vec(), self.geo.p1_grads().to_vec()),
            _ => (tables.p2[q].to_vec(), self.p2_grads[q].to_vec()),
        }
    }
}

/// Local 12x12 viscous matrix `2 nu (D phi_b, D phi_a)`.
pub fn local_viscous(eq: &ElementQuad, nu: f64) -> [[f64; 12]; 12] {
    let mut a = [[0.0; 12]; 12];
    for (q, jw) in eq.jw.iter().enumerate() {
        let g = &eq.p2_grads[q];
        for k in 0..6 {
            for l in 0..6 {
                let dot = g[k][0] * g[l][0] + g[k][1] * g[l][1];
                for c in 0..2 {
                    for d in 0..2 {
                        let mut v = g[k][d] * g[l][c];
                        if c == d {
                            v += dot;
                        }
                        a[2 * k + c][2 * l + d] += nu * jw * v;
                    }
                }
            }
        }
    }
    a
}

/// Local 6x6 scalar P2 mass matrix.
pub fn local_mass_p2(eq: &ElementQuad, tables: &Tables) -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (q, jw) in eq.jw.iter().enumerate() {
        let v = &tables.p2[q];
        for k in 0..6 {
            for l in 0..6 {
                m[k][l] += jw * v[k] * v[l];
            }
        }
    }
    m
}

/// Local 3x12 divergence matrix `(div phi_b, psi_q)`.
pub fn local_divergence(eq: &ElementQuad, tables: &Tables) -> [[f64; 12]; 3] {
    let mut b = [[0.0; 12]; 3];
    for (q, jw) in eq.jw.iter().enumerate() {
        let (g, psi) = (&eq.p2_grads[q], &tables.p1[q]);
        for i in 0..3 {
            for k in 0..6 {
                for c in 0..2 {
                    b[i][2 * k + c] += jw * psi[i] * g[k][c];
                }
            }
        }
    }
    b
}

/// Tests an integrand against every local vector basis function.
fn test_integrand(out: &mut [f64; 12], it: &Integrand, jw: f64, v: &[f64; 6], g: &[[f64; 2]; 6]) {
    for k in 0..6 {
        for c in 0..2 {
            out[2 * k + c] += jw * (it.n[c] * v[k] + it.f[c][0] * g[k][0] + it.f[c][1] * g[k][1]);
        }
    }
}

/// Local nonlinear residual.
pub fn local_nonlinear_residual(
    form: NonlinearForm,
    eq: &ElementQuad,
    tables: &Tables,
    loc: &[[f64; 2]; 6],
) -> [f64; 12] {
    let mut r = [0.0; 12];
    for q in 0..tables.n_points() {
        let (u, g) = eq.vector_at(tables, q, loc);
        let it = nonlinear_integrand(form, u, &g);
        test_integrand(&mut r, &it, eq.jw[q], &tables.p2[q], &eq.p2_grads[q]);
    }
    r
}

/// Local nonlinear Jacobian; `j[a][b]` is the derivative of residual `a`
/// with respect to coefficient `b`.
pub fn local_nonlinear_jacobian(
    form: NonlinearForm,
    eq: &ElementQuad,
    tables: &Tables,
    loc: &[[f64; 2]; 6],
) -> [[f64; 12]; 12] {
    let mut j = [[0.0; 12]; 12];
    for q in 0..tables.n_points() {
        let (u, g) = eq.vector_at(tables, q, loc);
        let (v, gr) = (&tables.p2[q], &eq.p2_grads[q]);
        for l in 0..6 {
            for e in 0..2 {
                let mut w = [0.0; 2];
                let mut h = [[0.0; 2]; 2];
                w[e] = v[l];
                h[e] = gr[l];
                let it = nonlinear_derivative(form, u, &g, w, &h);
                let mut col = [0.0; 12];
                test_integrand(&mut col, &it, eq.jw[q], v, gr);
                for (a, val) in col.iter().enumerate() {
                    j[a][2 * l + e] += val;
                }
            }
        }
    }
    j
}

/// Local transport matrix `(u . grad psi_w, psi_v)` on a scalar space.
pub fn local_transport(
    eq: &ElementQuad,
    tables: &Tables,
    loc_u: &[[f64; 2]; 6],
    kind: SpaceKind,
) -> Vec<Vec<f64>> {
    let n = kind.local_nodes();
    let mut c = vec![vec![0.0; n]; n];
    for q in 0..tables.n_points() {
        let (u, _) = eq.vector_at(tables, q, loc_u);
        let (v, g) = eq.scalar_basis(tables, q, kind);
        for a in 0..n {
            for b in 0..n {
                c[a][b] += eq.jw[q] * (u[0] * g[b][0] + u[1] * g[b][1]) * v[a];
            }
        }
    }
    c
}

/// Local scalar mass matrix on a P1 or P2 space.
pub fn local_scalar_mass(eq: &ElementQuad, tables: &Tables, kind: SpaceKind) -> Vec<Vec<f64>> {
    let n = kind.local_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for q in 0..tables.n_points() {
        let (v, _) = eq.scalar_basis(tables, q, kind);
        for a in 0..n {
            for b in 0..n {
                m[a][b] += eq.jw[q] * v[a] * v[b];
            }
        }
    }
    m
}

/// Global assembly of the scheme's operators on one mesh.
pub struct Forms<'m> {
    mesh: &'m TriMesh,
    tables: Tables,
}

fn vector_dofs(map: &DofMap, t: usize) -> [usize; 12] {
    let mut out = [0; 12];
    for (k, &s) in map.element_scalar_dofs(t).iter().enumerate() {
        out[2 * k] = 2 * s;
        out[2 * k + 1] = 2 * s + 1;
    }
    out
}

fn require_vector(map: &DofMap) -> Result<()> {
    if map.kind() == SpaceKind::P2Vector {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "expected a P2 vector space, got {:?}",
            map.kind()
        )))
    }
}

impl<'m> Forms<'m> {
    pub fn new(mesh: &'m TriMesh) -> Self {
        Self::with_degree(mesh, DEFAULT_QUADRATURE_DEGREE).expect("default degree is tabulated")
    }

    pub fn with_degree(mesh: &'m TriMesh, degree: usize) -> Result<Self> {
        Ok(Self {
            mesh,
            tables: Tables::new(degree)?,
        })
    }

    pub fn mesh(&self) -> &'m TriMesh {
        self.mesh
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn element(&self, t: usize) -> ElementQuad {
        ElementQuad::new(self.mesh, t, &self.tables)
    }

    /// Gram matrix of the basis of `map` (block diagonal for vectors).
    pub fn assemble_mass(&self, map: &DofMap) -> SparseMatrix {
        let comps = map.components();
        let mut trip = Vec::new();
        for t in 0..self.mesh.n_triangles() {
            let eq = self.element(t);
            let kind = if map.kind() == SpaceKind::P1Scalar {
                SpaceKind::P1Scalar
            } else {
                SpaceKind::P2Scalar
            };
            let m = local_scalar_mass(&eq, &self.tables, kind);
            let dofs = map.element_scalar_dofs(t);
            for (a, &i) in dofs.iter().enumerate() {
                for (b, &j) in dofs.iter().enumerate() {
                    for c in 0..comps {
                        trip.push((comps * i + c, comps * j + c, m[a][b]));
                    }
                }
            }
        }
        SparseMatrix::from_triplets(map.n_dofs(), map.n_dofs(), &trip).expect("indices in range")
    }

    pub fn assemble_viscous(&self, map: &DofMap, nu: f64) -> Result<SparseMatrix> {
        require_vector(map)?;
        let mut trip = Vec::new();
        for t in 0..self.mesh.n_triangles() {
            let a = local_viscous(&self.element(t), nu);
            let dofs = vector_dofs(map, t);
            for (i, &gi) in dofs.iter().enumerate() {
                for (j, &gj) in dofs.iter().enumerate() {
                    trip.push((gi, gj, a[i][j]));
                }
            }
        }
        SparseMatrix::from_triplets(map.n_dofs(), map.n_dofs(), &trip)
    }

    /// `B[q, v] = (div phi_v, psi_q)`.
    pub fn assemble_divergence(&self, vmap: &DofMap, pmap: &DofMap) -> Result<SparseMatrix> {
        require_vector(vmap)?;
        if pmap.kind() != SpaceKind::P1Scalar {
            return Err(Error::InvalidArgument("pressure space must be P1".into()));
        }
        let mut trip = Vec::new();
        for t in 0..self.mesh.n_triangles() {
            let b = local_divergence(&self.element(t), &self.tables);
            let vd = vector_dofs(vmap, t);
            for (i, &p) in pmap.element_scalar_dofs(t).iter().enumerate() {
                for (j, &v) in vd.iter().enumerate() {
                    trip.push((p, v, b[i][j]));
                }
            }
        }
        SparseMatrix::from_triplets(pmap.n_dofs(), vmap.n_dofs(), &trip)
    }

    pub fn nonlinear_residual(&self, form: NonlinearForm, u: &FemField) -> Result<Vec<f64>> {
        let map = u.map();
        require_vector(map)?;
        let mut r = vec![0.0; map.n_dofs()];
        for t in 0..self.mesh.n_triangles() {
            let rl = local_nonlinear_residual(form, &self.element(t), &self.tables, &u.local(t));
            for (a, g) in vector_dofs(map, t).iter().enumerate() {
                r[*g] += rl[a];
            }
        }
        Ok(r)
    }

    pub fn nonlinear_jacobian(&self, form: NonlinearForm, u: &FemField) -> Result<SparseMatrix> {
        let map = u.map();
        require_vector(map)?;
        let mut trip = Vec::new();
        for t in 0..self.mesh.n_triangles() {
            let j = local_nonlinear_jacobian(form, &self.element(t), &self.tables, &u.local(t));
            let dofs = vector_dofs(map, t);
            for (a, &ga) in dofs.iter().enumerate() {
                for (b, &gb) in dofs.iter().enumerate() {
                    trip.push((ga, gb, j[a][b]));
                }
            }
        }
        SparseMatrix::from_triplets(map.n_dofs(), map.n_dofs(), &trip)
    }

    /// `C[v, w] = (u . grad psi_w, psi_v)` on a scalar space.
    pub fn assemble_transport(&self, u: &FemField, smap: &DofMap) -> Result<SparseMatrix> {
        require_vector(u.map())?;
        if smap.kind() == SpaceKind::P2Vector {
            return Err(Error::InvalidArgument(
                "transport needs a scalar space".into(),
            ));
        }
        let mut trip = Vec::new();
        for t in 0..self.mesh.n_triangles() {
            let c = local_transport(&self.element(t), &self.tables, &u.local(t), smap.kind());
            let dofs = smap.element_scalar_dofs(t);
            for (a, &ga) in dofs.iter().enumerate() {
                for (b, &gb) in dofs.iter().enumerate() {
                    trip.push((ga, gb, c[a][b]));
                }
            }
        }
        SparseMatrix::from_triplets(smap.n_dofs(), smap.n_dofs(), &trip)
    }

    /// Load vector `(f(., t), phi_v)` on the P2 vector space.
    pub fn assemble_load(
        &self,
        map: &DofMap,
        f: &dyn Fn([f64; 2], f64) -> [f64; 2],
        time: f64,
    ) -> Result<Vec<f64>> {
        require_vector(map)?;
        let mut r = vec![0.0; map.n_dofs()];
        for t in 0..self.mesh.n_triangles() {
            let eq = self.element(t);
            let dofs = vector_dofs(map, t);
            for q in 0..self.tables.n_points() {
                let fv = f(eq.x[q], time);
                for k in 0..6 {
                    for c in 0..2 {
                        r[dofs[2 * k + c]] += eq.jw[q] * fv[c] * self.tables.p2[q][k];
                    }
                }
            }
        }
        Ok(r)
    }
}

pub(crate) fn element_vector_dofs(map: &DofMap, t: usize) -> [usize; 12] {
    vector_dofs(map, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_square, DirichletSpec, Rectangle};
    use std::sync::Arc;

    fn unit(n: usize, kind: SpaceKind) -> (TriMesh, Arc<DofMap>) {
        let m = build_structured_square(n, Rectangle::UNIT, false).unwrap();
        let d = Arc::new(DofMap::build(&m, kind, &DirichletSpec::new()).unwrap());
        (m, d)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn form_names_roundtrip() {
        for f in NonlinearForm::ALL {
            assert_eq!(f.name().parse::<NonlinearForm>().unwrap(), f);
        }
        assert!("UPWIND".parse::<NonlinearForm>().is_err());
    }

    #[test]
    fn p1_mass_sums_to_area() {
        let (m, d) = unit(3, SpaceKind::P1Scalar);
        let mass = Forms::new(&m).assemble_mass(&d);
        let total: f64 = mass.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(mass.is_symmetric(1e-14));
    }

    #[test]
    fn vector_mass_constant_energy() {
        let (m, d) = unit(3, SpaceKind::P2Vector);
        let mass = Forms::new(&m).assemble_mass(&d);
        let u = FemField::interpolate(d, |_| [1.0, 0.0]);
        assert!((dot(u.coeffs(), &mass.matvec(u.coeffs())) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn viscous_kernel_and_shear_energy() {
        let (m, d) = unit(3, SpaceKind::P2Vector);
        let a = Forms::new(&m).assemble_viscous(&d, 1.0).unwrap();
        assert!(a.is_symmetric(1e-12));
        for f in [|x: [f64; 2]| [x[1], -x[0]], |_: [f64; 2]| [0.3, -0.7]] {
            let u = FemField::interpolate(d.clone(), f);
            assert!(a.matvec(u.coeffs()).iter().all(|v| v.abs() < 1e-12));
        }
        let u = FemField::interpolate(d, |x| [x[1], 0.0]);
        assert!((dot(u.coeffs(), &a.matvec(u.coeffs())) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn divergence_examples() {
        let m = build_structured_square(3, Rectangle::UNIT, false).unwrap();
        let vd = DofMap::build(&m, SpaceKind::P2Vector, &DirichletSpec::new()).unwrap();
        let pd = DofMap::build(&m, SpaceKind::P1Scalar, &DirichletSpec::new()).unwrap();
        let b = Forms::new(&m).assemble_divergence(&vd, &pd).unwrap();
        let vd = Arc::new(vd);
        let rot = FemField::interpolate(vd.clone(), |x| [x[1], -x[0]]);
        assert!(b.matvec(rot.coeffs()).iter().all(|v| v.abs() < 1e-13));
        let radial = FemField::interpolate(vd, |x| [x[0], x[1]]);
        let total: f64 = b.matvec(radial.coeffs()).iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn constant_field_has_zero_nonlinearity() {
        let (m, d) = unit(2, SpaceKind::P2Vector);
        let u = FemField::interpolate(d, |_| [0.4, -1.1]);
        let f = Forms::new(&m);
        for form in NonlinearForm::ALL {
            if form == NonlinearForm::Cons {
                continue; // weak form of a constant flux only cancels in the interior
            }
            let r = f.nonlinear_residual(form, &u).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-13), "{form}");
        }
    }

    #[test]
    fn rotation_emac_vanishes_conv_does_not() {
        let (m, d) = unit(2, SpaceKind::P2Vector);
        let f = Forms::new(&m);
        let u = FemField::interpolate(d.clone(), |x| [x[1], -x[0]]);
        let r = f.nonlinear_residual(NonlinearForm::Emac, &u).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-13));
        // (grad u) u = (-x, -y) for this field.
        let rc = f.nonlinear_residual(NonlinearForm::Conv, &u).unwrap();
        let mass = f.assemble_mass(&d);
        let w = FemField::interpolate(d, |x| [-x[0], -x[1]]);
        let expect = mass.matvec(w.coeffs());
        assert!(rc.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-13));
        assert!(rc.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn zero_velocity_has_zero_jacobian() {
        let (m, d) = unit(2, SpaceKind::P2Vector);
        let u = FemField::zeros(d);
        for form in NonlinearForm::ALL {
            let j = Forms::new(&m).nonlinear_jacobian(form, &u).unwrap();
            assert!(j.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn transport_zero_velocity() {
        let (m, d) = unit(2, SpaceKind::P2Vector);
        let s = DofMap::build(&m, SpaceKind::P2Scalar, &DirichletSpec::new()).unwrap();
        let c = Forms::new(&m)
            .assemble_transport(&FemField::zeros(d), &s)
            .unwrap();
        assert!(c.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn load_of_constant_force() {
        let (m, d) = unit(2, SpaceKind::P2Vector);
        let f = Forms::new(&m);
        let r = f.assemble_load(&d, &|_, _| [1.0, 2.0], 0.0).unwrap();
        let ones = FemField::interpolate(d, |_| [1.0, 1.0]);
        assert!((dot(&r, ones.coeffs()) - 3.0).abs() < 1e-14);
    }
}
