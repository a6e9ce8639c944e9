//! Run orchestration: mesh and spaces, the time loop, per-step diagnostics
//! and output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;

use crate::balances::{BalanceIntegrator, BalanceReport, Diagnostics};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::field::FemField;
use crate::mesh::{
    build_structured_square, import_gmsh, mark_subdomain, read_dump, DirichletSpec, DofMap,
    SpaceKind, TriMesh,
};
use crate::output::{csv_header, csv_row, write_atomic, write_vtk, CSV_COLUMNS};
use crate::problems::{DomainSpec, ProblemSpec};
use crate::solver::{scheduled_order, NseSolver, SolverHistory, SolverParams};
use crate::transport::{build_indicators, IndicatorPair, Transport};

/// Loads a mesh by extension: `.msh` is Gmsh, anything else the native dump.
pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("msh") => import_gmsh(path),
        _ => read_dump(path),
    }
}

fn problem_spec(config: &RunConfig) -> ProblemSpec {
    match (config.problem, config.re) {
        (crate::problems::ProblemKind::KelvinHelmholtz, Some(re)) => {
            crate::problems::kelvin_helmholtz(re)
        }
        _ => ProblemSpec::by_kind(config.problem),
    }
}

/// A time-stepping session with diagnostics after every step.
pub struct Simulation {
    config: RunConfig,
    spec: ProblemSpec,
    mesh: Arc<TriMesh>,
    solver: NseSolver,
    history: SolverHistory,
    diagnostics: Diagnostics,
    transport: Option<(Transport, IndicatorPair)>,
    step: usize,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let spec = problem_spec(config);
        let mesh = match (&spec.domain, &config.mesh_path) {
            (
                DomainSpec::Structured {
                    rect, periodic_x, ..
                },
                _,
            ) => build_structured_square(config.n.unwrap_or(2), *rect, *periodic_x)?,
            (DomainSpec::Imported, Some(p)) => load_mesh(p)?,
            (DomainSpec::Imported, None) => {
                return Err(Error::Config(format!(
                    "problem '{}' requires 'mesh_path'",
                    config.problem
                )))
            }
        };
        Self::with_mesh(config, Arc::new(mesh))
    }

    /// Same as [`Simulation::new`] on a caller-supplied mesh.
    pub fn with_mesh(config: &RunConfig, mesh: Arc<TriMesh>) -> Result<Self> {
        config.validate()?;
        let spec = problem_spec(config);
        let vmap = Arc::new(DofMap::build(&mesh, SpaceKind::P2Vector, &spec.dirichlet)?);
        let pmap = Arc::new(DofMap::build(
            &mesh,
            SpaceKind::P1Scalar,
            &DirichletSpec::new(),
        )?);
        let zero_trace = spec.dirichlet.homogeneous();
        let phi_map = Arc::new(DofMap::build(&mesh, SpaceKind::P2Scalar, &zero_trace)?);
        let psi_map = Arc::new(DofMap::build(&mesh, SpaceKind::P1Scalar, &zero_trace)?);

        let omega = config.omega;
        let marker = mark_subdomain(&mesh, |x| omega.contains(x))?;
        let pair = build_indicators(
            &mesh,
            &marker,
            phi_map.clone(),
            psi_map.clone(),
            config.transport_order,
        )?;

        let mut params = SolverParams::new(config.nu, config.dt, config.form);
        params.newton_tol = config.newton_tol;
        params.max_newton = config.max_newton;
        let solver = NseSolver::with_quadrature(
            mesh.clone(),
            vmap.clone(),
            pmap,
            params,
            config.quadrature_degree,
        )?;
        let u0 = FemField::interpolate(vmap, |x| (spec.initial_velocity)(x));
        let history = SolverHistory::new(solver.initial_state(u0, 0.0));

        let integrator = BalanceIntegrator::with_degree(
            mesh.clone(),
            config.nu,
            config.form,
            config.quadrature_degree,
        )?;
        let diagnostics = Diagnostics {
            integrator,
            marker,
            phi: pair.phi().clone(),
            psi: pair.psi().clone(),
        };
        let transport = if config.lagrangian {
            Some((
                Transport::new(mesh.clone(), phi_map, psi_map, config.quadrature_degree)?,
                pair,
            ))
        } else {
            None
        };
        Ok(Self {
            config: config.clone(),
            spec,
            mesh,
            solver,
            history,
            diagnostics,
            transport,
            step: 0,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn solver(&self) -> &NseSolver {
        &self.solver
    }

    pub fn history(&self) -> &SolverHistory {
        &self.history
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn indicators(&self) -> Option<&IndicatorPair> {
        self.transport.as_ref().map(|(_, p)| p)
    }

    /// Steps taken so far.
    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.config.n_steps()
    }

    /// Advances one step and returns its diagnostics.
    pub fn step(&mut self) -> Result<BalanceReport> {
        let n = self.step + 1;
        let order = scheduled_order(self.config.bdf_order, n);
        let state = self.solver.step(&self.history, order)?;
        log::info!(
            "step {n}: t = {:.6}, BDF{order}, {} Newton iterations, residual {:e}",
            state.time,
            state.newton_iterations,
            state.newton_residual
        );
        self.history.push(state)?;
        if let Some((tr, pair)) = self.transport.as_mut() {
            tr.advance(pair, &self.history.latest().u, self.config.dt)?;
        }
        self.step = n;
        let pair = self.transport.as_ref().map(|(_, p)| p);
        self.diagnostics.report(n, &self.history, pair)
    }
}

/// Result of [`run`].
#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<BalanceReport>,
    pub output_dir: PathBuf,
}

fn metadata(sim: &Simulation, steps: usize, failure: Option<&Error>) -> serde_json::Value {
    let c = &sim.config;
    let mesh = &sim.mesh;
    let solver = &sim.solver;
    let marker = &sim.diagnostics.marker;
    json!({
        "program": "emacfem",
        "version": env!("CARGO_PKG_VERSION"),
        "status": if failure.is_some() { "failed" } else { "completed" },
        "failure": failure.map(|e| e.to_string()),
        "steps_completed": steps,
        "steps_planned": c.n_steps(),
        "config": c,
        "problem_notes": sim.spec.notes,
        "mesh": {
            "vertices": mesh.n_vertices(),
            "triangles": mesh.n_triangles(),
            "periodic_x": mesh.periodic().is_some(),
            "boundary_tags": mesh.boundary_tags(),
        },
        "spaces": {
            "velocity": "P2 vector",
            "pressure": "P1",
            "velocity_dofs": solver.velocity_map().n_dofs(),
            "pressure_dofs": solver.pressure_map().n_dofs(),
        },
        "subdomain": {
            "elements": marker.element_set.len(),
            "interior_p2_nodes": marker.interior_p2_nodes.len(),
            "interior_p1_nodes": marker.interior_p1_nodes.len(),
            "boundary_edges": marker.boundary_faces.len(),
            "selection": "triangles whose barycenter lies in omega",
        },
        "solver": {
            "newton_tolerance": c.newton_tol,
            "newton_norm": "absolute 2-norm of the constrained residual",
            "max_newton_iterations": c.max_newton,
            "jacobian": "exact",
            "initial_guess": "linear extrapolation of the two newest states",
            "linear_solver": "sparse LU with cached symbolic factorization",
            "startup": "BDF1 on step 1, BDF2 on step 2, then the target order",
            "pressure_gauge": "pressure dof 0 pinned during Newton, then mean zero",
            "quadrature_degree": c.quadrature_degree,
        },
        "conventions": {
            "recovered_pressure": format!("p = p_hat + {} |u|^2 / 2", c.form.kinetic_pressure_factor()),
            "angular_momentum": "u . w with w = (y, -x)",
            "weak_normal": "-grad(phi)",
            "traditional_trace": "values taken from inside the subdomain, 4-point Gauss per edge",
            "transport": format!(
                "Galerkin BDF{} with zero trace, BDF1 first step",
                c.transport_order
            ),
            "lagrangian": c.lagrangian,
        },
        "columns": CSV_COLUMNS,
    })
}

fn write_outputs(
    dir: &Path,
    sim: &Simulation,
    csv: &str,
    steps: usize,
    failure: Option<&Error>,
) -> Result<()> {
    write_atomic(&dir.join("balances.csv"), csv.as_bytes())?;
    let meta = serde_json::to_string_pretty(&metadata(sim, steps, failure)).expect("json value");
    write_atomic(&dir.join("metadata.json"), meta.as_bytes())
}

/// Runs the configured simulation to `t_end`, writing `balances.csv`,
/// `metadata.json` and VTK snapshots into the output directory.
///
/// On a solver failure the rows computed so far are written, the metadata
/// records the failure, and the error is returned.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut sim = Simulation::new(config)?;
    let snapshot = |sim: &Simulation, n: usize| -> Result<()> {
        if config.snapshot_stride > 0 && n % config.snapshot_stride == 0 {
            write_vtk(
                &sim.mesh,
                sim.history.latest(),
                config.form,
                &dir.join(format!("snapshot_{n:06}.vtk")),
            )?;
        }
        Ok(())
    };
    snapshot(&sim, 0)?;

    let mut csv = csv_header();
    csv.push('\n');
    let mut reports = Vec::new();
    for _ in 0..sim.n_steps() {
        match sim.step() {
            Ok(r) => {
                csv.push_str(&csv_row(&r, config.form));
                csv.push('\n');
                reports.push(r);
                snapshot(&sim, sim.steps_taken())?;
            }
            Err(e) => {
                log::error!("step {} failed: {e}", sim.steps_taken() + 1);
                write_outputs(&dir, &sim, &csv, sim.steps_taken(), Some(&e))?;
                return Err(e);
            }
        }
    }
    write_outputs(&dir, &sim, &csv, sim.steps_taken(), None)?;
    Ok(RunOutcome {
        reports,
        output_dir: dir,
    })
}
