//! Manufactured solutions for convergence studies.

use std::f64::consts::PI;
use std::sync::Arc;

use emacfem::field::FemField;
use emacfem::forms::NonlinearForm;
use emacfem::mesh::{
    build_structured_square, BoundaryFn, DirichletSpec, DofMap, Rectangle, SpaceKind, TriMesh,
};
use emacfem::solver::{scheduled_order, NseSolver, SolverHistory, SolverParams};

use super::{barycentric, triangle_rule};

const SIDES: [&str; 4] = ["bottom", "right", "top", "left"];

/// L2 norm of `u_h - u` using a collapsed Gauss rule on every triangle.
pub fn l2_error(mesh: &TriMesh, u: &FemField, exact: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let mut s = 0.0;
    for t in 0..mesh.n_triangles() {
        let v = mesh.triangle_coords(t);
        for (x, w) in triangle_rule(v, 7) {
            let (l, _) = barycentric(v, x);
            let uh = u.eval(mesh, t, l).value;
            let ue = exact(x);
            s += w * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
        }
    }
    s.sqrt()
}

fn setup(n: usize, dirichlet: DirichletSpec) -> (Arc<TriMesh>, Arc<DofMap>, Arc<DofMap>) {
    let mesh = Arc::new(build_structured_square(n, Rectangle::UNIT, false).unwrap());
    let v = Arc::new(DofMap::build(&mesh, SpaceKind::P2Vector, &dirichlet).unwrap());
    let p = Arc::new(DofMap::build(&mesh, SpaceKind::P1Scalar, &DirichletSpec::new()).unwrap());
    (mesh, v, p)
}

/// `u = sin(t) (x^2, -2xy)` with zero EMAC pressure variable. Returns the
/// L2 error at `t_end` of a BDF`k` run with `steps` steps.
pub fn temporal_error(k: usize, steps: usize, t_end: f64) -> f64 {
    let nu = 1.0;
    let shape = |x: [f64; 2]| [x[0] * x[0], -2.0 * x[0] * x[1]];
    let bc: BoundaryFn = Arc::new(move |x, t| {
        let s = shape(x);
        [t.sin() * s[0], t.sin() * s[1]]
    });
    let spec = SIDES
        .iter()
        .fold(DirichletSpec::new(), |d, s| d.with(*s, bc.clone()));
    let (mesh, v, p) = setup(4, spec);
    let dt = t_end / steps as f64;
    // 2 D(U) U = (4x^3 + 4xy^2, 6x^2 y), div U = 0, div D(U) = (1, 0).
    let force = Arc::new(move |x: [f64; 2], t: f64| {
        let (g, dg) = (t.sin(), t.cos());
        let s = shape(x);
        let n = [
            4.0 * x[0].powi(3) + 4.0 * x[0] * x[1] * x[1],
            6.0 * x[0] * x[0] * x[1],
        ];
        [
            dg * s[0] + g * g * n[0] - 2.0 * nu * g,
            dg * s[1] + g * g * n[1],
        ]
    });
    let mut solver = NseSolver::new(
        mesh.clone(),
        v.clone(),
        p,
        SolverParams::new(nu, dt, NonlinearForm::Emac),
    )
    .unwrap()
    .with_force(force);
    let u0 = FemField::zeros(v);
    let mut h = SolverHistory::new(solver.initial_state(u0, 0.0));
    for n in 1..=steps {
        let s = solver.step(&h, scheduled_order(k, n)).unwrap();
        h.push(s).unwrap();
    }
    let g = t_end.sin();
    l2_error(&mesh, &h.latest().u, |x| {
        let s = shape(x);
        [g * s[0], g * s[1]]
    })
}

fn a0(x: f64) -> f64 {
    (PI * x).sin().powi(2)
}
fn a1(x: f64) -> f64 {
    PI * (2.0 * PI * x).sin()
}
fn a2(x: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * x).cos()
}
fn a3(x: f64) -> f64 {
    -4.0 * PI.powi(3) * (2.0 * PI * x).sin()
}

/// Velocity `(d_y psi, -d_x psi)` of the stream function
/// `psi = sin^2(pi x) sin^2(pi y)`.
pub fn stream_velocity(x: [f64; 2]) -> [f64; 2] {
    [a0(x[0]) * a1(x[1]), -a1(x[0]) * a0(x[1])]
}

/// Gradient `g[c][d] = d u_c / d x_d` of [`stream_velocity`].
pub fn stream_gradient(x: [f64; 2]) -> [[f64; 2]; 2] {
    let (px, py) = (x[0], x[1]);
    [
        [a1(px) * a1(py), a0(px) * a2(py)],
        [-a2(px) * a0(py), -a1(px) * a1(py)],
    ]
}

fn stream_laplacian(x: [f64; 2]) -> [f64; 2] {
    let (px, py) = (x[0], x[1]);
    [
        a2(px) * a1(py) + a0(px) * a3(py),
        -a3(px) * a0(py) - a1(px) * a2(py),
    ]
}

/// Pressure variable `cos(pi x) cos(pi y)` and its gradient.
fn pressure_gradient(x: [f64; 2]) -> [f64; 2] {
    [
        -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
        -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
    ]
}

/// Steady EMAC forcing for the stream-function flow with viscosity `nu`.
pub fn stream_force(x: [f64; 2], nu: f64) -> [f64; 2] {
    let u = stream_velocity(x);
    let g = stream_gradient(x);
    let lap = stream_laplacian(x);
    let gp = pressure_gradient(x);
    let mut f = [0.0; 2];
    for c in 0..2 {
        // (G + G^T) u
        let sym = (g[c][0] + g[0][c]) * u[0] + (g[c][1] + g[1][c]) * u[1];
        f[c] = sym - nu * lap[c] + gp[c];
    }
    f
}

/// L2 velocity error of one huge BDF1 step (a steady solve) on an `n x n` mesh.
pub fn spatial_error(n: usize) -> f64 {
    let nu = 1.0;
    let (mesh, v, p) = setup(n, DirichletSpec::zero_on(&SIDES));
    let mut solver = NseSolver::new(
        mesh.clone(),
        v.clone(),
        p,
        SolverParams::new(nu, 1e8, NonlinearForm::Emac),
    )
    .unwrap()
    .with_force(Arc::new(move |x, _| stream_force(x, nu)));
    let u0 = FemField::interpolate(v, stream_velocity);
    let h = SolverHistory::new(solver.initial_state(u0, 0.0));
    let s = solver.step(&h, 1).unwrap();
    l2_error(&mesh, &s.u, stream_velocity)
}

/// Observed orders `log2(e_i / e_{i+1})` for successive halvings.
pub fn rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
