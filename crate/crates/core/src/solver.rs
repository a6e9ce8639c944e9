//! Implicit BDF time stepping of the Navier-Stokes system with Newton's method.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FemField;
use crate::forms::{
    element_vector_dofs, local_divergence, local_mass_p2, local_nonlinear_jacobian,
    local_nonlinear_residual, local_viscous, Forms, NonlinearForm,
};
use crate::mesh::{DofMap, TriMesh};
use crate::sparse::{norm2, LuSolver, SparseMatrix};

/// Backward differentiation formula `(sum_i a_i f^{n-i}) / dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct BdfScheme {
    pub order: usize,
    /// `a_0, ..., a_k`.
    pub coeffs: Vec<f64>,
}

pub fn bdf_coefficients(k: usize) -> Result<BdfScheme> {
    let coeffs = match k {
        1 => vec![1.0, -1.0],
        2 => vec![1.5, -2.0, 0.5],
        3 => vec![11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "BDF order {k} not in 1..=3"
            )))
        }
    };
    Ok(BdfScheme { order: k, coeffs })
}

impl BdfScheme {
    /// Discrete derivative from values ordered newest first.
    pub fn apply(&self, values: &[f64], dt: f64) -> f64 {
        assert!(
            values.len() > self.order,
            "BDF{} needs {} values",
            self.order,
            self.order + 1
        );
        self.coeffs
            .iter()
            .zip(values)
            .map(|(a, v)| a * v)
            .sum::<f64>()
            / dt
    }
}

/// BDF order used at step `n` (1-based) for target order `k`.
pub fn scheduled_order(k: usize, n: usize) -> usize {
    match n {
        0 | 1 => 1,
        2 => k.min(2),
        _ => k,
    }
}

/// Per-step orders of the first `n_steps` steps.
pub fn startup_schedule(k: usize, n_steps: usize) -> Vec<usize> {
    (1..=n_steps).map(|n| scheduled_order(k, n)).collect()
}

/// Body force `f(x, t)`.
pub type BodyForce = Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone, Debug)]
pub struct SolverState {
    pub time: f64,
    pub u: FemField,
    /// Pressure variable of the discrete system, mean zero.
    pub p_hat: FemField,
    /// BDF order that produced this state; 0 for initial data.
    pub order: usize,
    pub newton_iterations: usize,
    pub newton_residual: f64,
}

/// The most recent states, newest first.
#[derive(Clone, Debug, Default)]
pub struct SolverHistory {
    states: VecDeque<SolverState>,
}

pub const HISTORY_DEPTH: usize = 4;

impl SolverHistory {
    pub fn new(initial: SolverState) -> Self {
        let mut states = VecDeque::with_capacity(HISTORY_DEPTH);
        states.push_front(initial);
        Self { states }
    }

    pub fn push(&mut self, s: SolverState) -> Result<()> {
        let last = self.latest().time;
        if !(s.time > last) {
            return Err(Error::InvalidState(format!(
                "time {} does not follow {last}",
                s.time
            )));
        }
        if self.states.len() >= 2 {
            let dt = last - self.states[1].time;
            if ((s.time - last) - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::InvalidState(
                    "non-uniform time step in history".into(),
                ));
            }
        }
        if self.states.len() == HISTORY_DEPTH {
            self.states.pop_back();
        }
        self.states.push_front(s);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State `i` steps back (0 = newest).
    pub fn get(&self, i: usize) -> Option<&SolverState> {
        self.states.get(i)
    }

    pub fn latest(&self) -> &SolverState {
        &self.states[0]
    }

    /// The `count` newest states, erroring when the history is too short.
    pub fn newest(&self, count: usize) -> Result<Vec<&SolverState>> {
        if self.states.len() < count {
            return Err(Error::InvalidState(format!(
                "need {count} states, history holds {}",
                self.states.len()
            )));
        }
        Ok(self.states.iter().take(count).collect())
    }

    /// States `n, n-1, ..., n-k` for a BDF`k` derivative at the newest state.
    pub fn window(&self, k: usize) -> Result<Vec<&SolverState>> {
        self.newest(k + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub nu: f64,
    pub dt: f64,
    pub form: NonlinearForm,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl SolverParams {
    pub fn new(nu: f64, dt: f64, form: NonlinearForm) -> Self {
        Self {
            nu,
            dt,
            form,
            newton_tol: 1e-12,
            max_newton: 25,
        }
    }
}

/// Saddle-point system layout `[u (velocity dofs), p (pressure dofs)]` with
/// a fixed sparsity pattern and cached element scatter positions.
struct SystemPattern {
    matrix: SparseMatrix,
    nv: usize,
    vv: Vec<[[u32; 12]; 12]>,
    vp: Vec<[[u32; 3]; 12]>,
    pv: Vec<[[u32; 12]; 3]>,
}

impl SystemPattern {
    fn build(mesh: &TriMesh, vmap: &DofMap, pmap: &DofMap) -> Self {
        let nv = vmap.n_dofs();
        let n = nv + pmap.n_dofs();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for t in 0..mesh.n_triangles() {
            let vd = element_vector_dofs(vmap, t);
            let pd = pmap.element_scalar_dofs(t);
            for &a in &vd {
                rows[a].extend(vd.iter().copied());
                rows[a].extend(pd.iter().map(|p| nv + p));
            }
            for &p in pd {
                rows[nv + p].extend(vd.iter().copied());
            }
        }
        let matrix = SparseMatrix::from_pattern(n, &rows);
        drop(rows);
        let pos = |r: usize, c: usize| matrix.find(r, c).expect("in pattern") as u32;
        let mut vv = Vec::with_capacity(mesh.n_triangles());
        let mut vp = Vec::with_capacity(mesh.n_triangles());
        let mut pv = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let vd = element_vector_dofs(vmap, t);
            let pd = pmap.element_scalar_dofs(t);
            vv.push(std::array::from_fn(|a| {
                std::array::from_fn(|b| pos(vd[a], vd[b]))
            }));
            vp.push(std::array::from_fn(|a| {
                std::array::from_fn(|i| pos(vd[a], nv + pd[i]))
            }));
            pv.push(std::array::from_fn(|i| {
                std::array::from_fn(|b| pos(nv + pd[i], vd[b]))
            }));
        }
        Self {
            matrix,
            nv,
            vv,
            vp,
            pv,
        }
    }
}

/// Navier-Stokes stepper on a fixed mesh and spaces.
pub struct NseSolver {
    mesh: Arc<TriMesh>,
    vmap: Arc<DofMap>,
    pmap: Arc<DofMap>,
    params: SolverParams,
    force: Option<BodyForce>,
    quadrature_degree: usize,
    pattern: SystemPattern,
    /// Velocity mass matrix in the system pattern.
    mass: SparseMatrix,
    /// Viscous and pressure-coupling blocks in the system pattern.
    linear: SparseMatrix,
    pressure_weights: Vec<f64>,
    pinned: usize,
    lu: LuSolver,
}

impl NseSolver {
    pub fn new(
        mesh: Arc<TriMesh>,
        vmap: Arc<DofMap>,
        pmap: Arc<DofMap>,
        params: SolverParams,
    ) -> Result<Self> {
        Self::with_quadrature(
            mesh,
            vmap,
            pmap,
            params,
            crate::forms::DEFAULT_QUADRATURE_DEGREE,
        )
    }

    pub fn with_quadrature(
        mesh: Arc<TriMesh>,
        vmap: Arc<DofMap>,
        pmap: Arc<DofMap>,
        params: SolverParams,
        quadrature_degree: usize,
    ) -> Result<Self> {
        if !(params.dt > 0.0) || !params.dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "time step {} must be positive",
                params.dt
            )));
        }
        if !(params.nu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "viscosity {} must be positive",
                params.nu
            )));
        }
        let forms = Forms::with_degree(&mesh, quadrature_degree)?;
        let pattern = SystemPattern::build(&mesh, &vmap, &pmap);
        let mut mass = pattern.matrix.zeroed();
        let mut linear = pattern.matrix.zeroed();
        let mut pressure_weights = vec![0.0; pmap.n_dofs()];
        for t in 0..mesh.n_triangles() {
            let eq = forms.element(t);
            let m = local_mass_p2(&eq, forms.tables());
            let a = local_viscous(&eq, params.nu);
            let b = local_divergence(&eq, forms.tables());
            let (vv, vp, pv) = (&pattern.vv[t], &pattern.vp[t], &pattern.pv[t]);
            for i in 0..12 {
                for j in 0..12 {
                    if i % 2 == j % 2 {
                        mass.values_mut()[vv[i][j] as usize] += m[i / 2][j / 2];
                    }
                    linear.values_mut()[vv[i][j] as usize] += a[i][j];
                }
                for q in 0..3 {
                    linear.values_mut()[vp[i][q] as usize] -= b[q][i];
                    linear.values_mut()[pv[q][i] as usize] -= b[q][i];
                }
            }
            for (q, &p) in pmap.element_scalar_dofs(t).iter().enumerate() {
                pressure_weights[p] += eq
                    .jw
                    .iter()
                    .zip(&forms.tables().p1)
                    .map(|(w, v)| w * v[q])
                    .sum::<f64>();
            }
        }
        Ok(Self {
            mesh,
            vmap,
            pmap,
            params,
            force: None,
            quadrature_degree,
            pattern,
            mass,
            linear,
            pressure_weights,
            pinned: 0,
            lu: LuSolver::new(),
        })
    }

    pub fn with_force(mut self, f: BodyForce) -> Self {
        self.force = Some(f);
        self
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn velocity_map(&self) -> &Arc<DofMap> {
        &self.vmap
    }

    pub fn pressure_map(&self) -> &Arc<DofMap> {
        &self.pmap
    }

    /// `integral of psi_j` for every pressure basis function.
    pub fn pressure_weights(&self) -> &[f64] {
        &self.pressure_weights
    }

    /// Initial state from a velocity field; Dirichlet values at `t0` are imposed.
    pub fn initial_state(&self, mut u: FemField, t0: f64) -> SolverState {
        u.apply_dirichlet(t0);
        SolverState {
            time: t0,
            u,
            p_hat: FemField::zeros(self.pmap.clone()),
            order: 0,
            newton_iterations: 0,
            newton_residual: 0.0,
        }
    }

    fn nonlinear_into(
        &self,
        x: &[f64],
        residual: Option<&mut [f64]>,
        jac: Option<&mut SparseMatrix>,
    ) {
        let forms_tables =
            crate::forms::Tables::new(self.quadrature_degree).expect("validated degree");
        let form = self.params.form;
        let mut residual = residual;
        let mut jac = jac;
        for t in 0..self.mesh.n_triangles() {
            let eq = crate::forms::ElementQuad::new(&self.mesh, t, &forms_tables);
            let vd = element_vector_dofs(&self.vmap, t);
            let loc: [[f64; 2]; 6] = std::array::from_fn(|k| [x[vd[2 * k]], x[vd[2 * k + 1]]]);
            if let Some(r) = residual.as_deref_mut() {
                let rl = local_nonlinear_residual(form, &eq, &forms_tables, &loc);
                for a in 0..12 {
                    r[vd[a]] += rl[a];
                }
            }
            if let Some(j) = jac.as_deref_mut() {
                let jl = local_nonlinear_jacobian(form, &eq, &forms_tables, &loc);
                let pos = &self.pattern.vv[t];
                let vals = j.values_mut();
                for a in 0..12 {
                    for b in 0..12 {
                        vals[pos[a][b] as usize] += jl[a][b];
                    }
                }
            }
        }
    }

    /// Constrained residual at `x` with the history term `hist` (already
    /// divided by dt) and load `load`.
    fn residual(
        &self,
        x: &[f64],
        a0: f64,
        hist: &[f64],
        load: &[f64],
        dirichlet: &[(usize, f64)],
    ) -> Vec<f64> {
        let dt = self.params.dt;
        let mut r = self.linear.matvec(x);
        let mu = self.mass.matvec(x);
        for i in 0..self.pattern.nv {
            r[i] += a0 / dt * mu[i] + hist[i] - load[i];
        }
        self.nonlinear_into(x, Some(&mut r), None);
        for &(d, g) in dirichlet {
            r[d] = x[d] - g;
        }
        r[self.pattern.nv + self.pinned] = 0.0;
        r
    }

    /// Advances one step with BDF order `order` from `history`.
    pub fn step(&mut self, history: &SolverHistory, order: usize) -> Result<SolverState> {
        let scheme = bdf_coefficients(order)?;
        // Previous states u^{n-1}, ..., u^{n-k}.
        let window = history.newest(order)?;
        let dt = self.params.dt;
        let t_new = window[0].time + dt;
        let nv = self.pattern.nv;
        let n = self.pattern.matrix.n_rows();

        let mut hist_u = vec![0.0; nv];
        for (a, s) in scheme.coeffs[1..].iter().zip(&window) {
            for (h, u) in hist_u.iter_mut().zip(s.u.coeffs()) {
                *h += a * u;
            }
        }
        let hist: Vec<f64> = self.mass.matvec(&[hist_u, vec![0.0; n - nv]].concat())[..nv]
            .iter()
            .map(|v| v / dt)
            .collect();
        let load = match &self.force {
            Some(f) => Forms::with_degree(&self.mesh, self.quadrature_degree)?.assemble_load(
                &self.vmap,
                &|x, t| f(x, t),
                t_new,
            )?,
            None => vec![0.0; nv],
        };

        // Initial guess: linear extrapolation when two states are available.
        let mut x = vec![0.0; n];
        let u1 = window[0].u.coeffs();
        match history.get(1) {
            Some(prev) => {
                for i in 0..nv {
                    x[i] = 2.0 * u1[i] - prev.u.coeffs()[i];
                }
            }
            None => x[..nv].copy_from_slice(u1),
        }
        x[nv..].copy_from_slice(window[0].p_hat.coeffs());
        let dirichlet = self.vmap.dirichlet_values(t_new);
        for &(d, g) in &dirichlet {
            x[d] = g;
        }

        let a0 = scheme.coeffs[0];
        let mut iterations = 0;
        let mut res = self.residual(&x, a0, &hist, &load, &dirichlet);
        let mut rnorm = norm2(&res);
        while rnorm > self.params.newton_tol {
            if iterations >= self.params.max_newton {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: rnorm,
                });
            }
            let mut jac = self.linear.clone();
            jac.add_scaled(a0 / dt, &self.mass);
            self.nonlinear_into(&x, None, Some(&mut jac));
            for &(d, _) in &dirichlet {
                jac.set_identity_row(d);
            }
            jac.set_identity_row(nv + self.pinned);
            let (delta, _) = self.lu.solve(&jac, &res)?;
            for (xi, di) in x.iter_mut().zip(&delta) {
                *xi -= di;
            }
            iterations += 1;
            res = self.residual(&x, a0, &hist, &load, &dirichlet);
            rnorm = norm2(&res);
            log::debug!("t={t_new:.6} newton {iterations}: residual {rnorm:e}");
            if !rnorm.is_finite() {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: rnorm,
                });
            }
        }

        let area: f64 = self.pressure_weights.iter().sum();
        let mean = x[nv..]
            .iter()
            .zip(&self.pressure_weights)
            .map(|(p, w)| p * w)
            .sum::<f64>()
            / area;
        for p in &mut x[nv..] {
            *p -= mean;
        }
        let p_hat = FemField::from_coeffs(self.pmap.clone(), x[nv..].to_vec())?;
        x.truncate(nv);
        Ok(SolverState {
            time: t_new,
            u: FemField::from_coeffs(self.vmap.clone(), x)?,
            p_hat,
            order,
            newton_iterations: iterations,
            newton_residual: rnorm,
        })
    }

    /// Weak divergence `(div u, psi_q)` for every pressure basis function.
    pub fn weak_divergence(&self, u: &FemField) -> Vec<f64> {
        let nv = self.pattern.nv;
        let mut x = u.coeffs().to_vec();
        x.resize(self.pattern.matrix.n_rows(), 0.0);
        self.linear.matvec(&x)[nv..].iter().map(|v| -v).collect()
    }

    /// Mean of a pressure field with respect to the domain area.
    pub fn pressure_mean(&self, p: &FemField) -> f64 {
        let area: f64 = self.pressure_weights.iter().sum();
        p.coeffs()
            .iter()
            .zip(&self.pressure_weights)
            .map(|(a, w)| a * w)
            .sum::<f64>()
            / area
    }
}
