//! C interface to the emacfem solver.
//!
//! Every function returns an [`EmacStatus`]. On failure a message for the
//! calling thread is available from [`emac_last_error`]. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use emacfem::balances::BalanceReport;
use emacfem::config::{parse_config, parse_config_str};
use emacfem::mesh::{build_structured_square, Rectangle, TriMesh};
use emacfem::output::vertex_fields;
use emacfem::run::{load_mesh, run, Simulation};
use emacfem::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    MeshFormat = 5,
    MeshValidation = 6,
    SingularMatrix = 7,
    NonConvergence = 8,
    InvalidState = 9,
    /// The buffer passed in is too small; the required length was written.
    BufferTooSmall = 10,
    Finished = 11,
    Panic = 12,
    InvalidRegion = 13,
}

impl From<&Error> for EmacStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => EmacStatus::InvalidArgument,
            Error::InvalidRegion(_) => EmacStatus::InvalidRegion,
            Error::Format(_) => EmacStatus::MeshFormat,
            Error::Validation(_) => EmacStatus::MeshValidation,
            Error::Config(_) => EmacStatus::Config,
            Error::InvalidState(_) => EmacStatus::InvalidState,
            Error::SingularMatrix { .. } => EmacStatus::SingularMatrix,
            Error::NonConvergence { .. } => EmacStatus::NonConvergence,
            Error::Io { .. } => EmacStatus::Io,
        }
    }
}

/// Opaque mesh handle.
pub struct EmacMesh(TriMesh);

/// Opaque time-stepping session.
pub struct EmacSimulation(Simulation);

/// Diagnostics of one time step. Lagrangian entries are NaN when the
/// Lagrangian diagnostics are disabled.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmacStepReport {
    pub step: usize,
    pub time: f64,
    pub order: usize,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    pub e_e_mom: [f64; 2],
    pub e_e_am: f64,
    pub e_l_mom: [f64; 2],
    pub e_l_am: f64,
    pub e_trad_mom: [f64; 2],
    pub e_trad_am: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
    pub angular_momentum: f64,
}

impl From<&BalanceReport> for EmacStepReport {
    fn from(r: &BalanceReport) -> Self {
        Self {
            step: r.step,
            time: r.time,
            order: r.order,
            newton_iterations: r.newton_iterations,
            newton_residual: r.newton_residual,
            e_e_mom: r.e_e_mom,
            e_e_am: r.e_e_am,
            e_l_mom: r.e_l_mom.unwrap_or([f64::NAN; 2]),
            e_l_am: r.e_l_am.unwrap_or(f64::NAN),
            e_trad_mom: r.e_trad_mom,
            e_trad_am: r.e_trad_am,
            energy: r.energy,
            momentum: r.momentum,
            angular_momentum: r.angular,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(EmacStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(EmacStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(EmacStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EmacStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmacStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            EmacStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Failure(
            EmacStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn emac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn emac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a Gmsh 2.2 ASCII (`.msh`) or native dump mesh.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emac_mesh_load(
    path: *const c_char,
    out: *mut *mut EmacMesh,
) -> EmacStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let mesh = load_mesh(Path::new(path))?;
        *out = Box::into_raw(Box::new(EmacMesh(mesh)));
        Ok(())
    })
}

/// Builds an `n` by `n` structured mesh of a rectangle.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emac_mesh_structured(
    n: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    periodic_x: bool,
    out: *mut *mut EmacMesh,
) -> EmacStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let mesh = build_structured_square(n, Rectangle { x0, x1, y0, y1 }, periodic_x)?;
        *out = Box::into_raw(Box::new(EmacMesh(mesh)));
        Ok(())
    })
}

/// Vertex, triangle and edge counts. Any output pointer may be null.
///
/// # Safety
/// `mesh` must come from this library; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn emac_mesh_counts(
    mesh: *const EmacMesh,
    vertices: *mut usize,
    triangles: *mut usize,
    edges: *mut usize,
) -> EmacStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        for (p, v) in [
            (vertices, m.n_vertices()),
            (triangles, m.n_triangles()),
            (edges, m.n_edges()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Copies vertex coordinates as interleaved x, y pairs. `len` is the buffer
/// length in doubles; on `BufferTooSmall` it receives the required length.
///
/// # Safety
/// `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn emac_mesh_vertices(
    mesh: *const EmacMesh,
    buf: *mut f64,
    len: *mut usize,
) -> EmacStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.0;
        let flat: Vec<f64> = m.vertices().iter().flatten().copied().collect();
        copy_out(&flat, buf, len)
    })
}

/// Releases a mesh. Null is ignored.
///
/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn emac_mesh_free(mesh: *mut EmacMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Creates a session from JSON configuration text. A relative `mesh_path` is
/// resolved against the working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_from_json(
    json: *const c_char,
    out: *mut *mut EmacSimulation,
) -> EmacStatus {
    guard(|| {
        let cfg = parse_config_str(str_arg(json, "json")?)?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(EmacSimulation(Simulation::new(&cfg)?)));
        Ok(())
    })
}

/// Creates a session from a JSON configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_from_file(
    path: *const c_char,
    out: *mut *mut EmacSimulation,
) -> EmacStatus {
    guard(|| {
        let cfg = parse_config(Path::new(str_arg(path, "path")?))?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(EmacSimulation(Simulation::new(&cfg)?)));
        Ok(())
    })
}

/// Advances one time step. Returns `Finished` without stepping once the
/// configured end time is reached.
///
/// # Safety
/// `sim` must come from this library; `report` may be null.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_step(
    sim: *mut EmacSimulation,
    report: *mut EmacStepReport,
) -> EmacStatus {
    guard(|| {
        let s = &mut sim.as_mut().ok_or_else(|| null("sim"))?.0;
        if s.steps_taken() >= s.n_steps() {
            return Err(Failure(EmacStatus::Finished, "end time reached".into()));
        }
        let r = s.step()?;
        if let Some(out) = report.as_mut() {
            *out = EmacStepReport::from(&r);
        }
        Ok(())
    })
}

/// Steps taken so far and the total number of steps. Either output may be
/// null.
///
/// # Safety
/// `sim` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_progress(
    sim: *const EmacSimulation,
    taken: *mut usize,
    total: *mut usize,
) -> EmacStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| null("sim"))?.0;
        if let Some(p) = taken.as_mut() {
            *p = s.steps_taken();
        }
        if let Some(p) = total.as_mut() {
            *p = s.n_steps();
        }
        Ok(())
    })
}

/// Time of the newest state.
///
/// # Safety
/// `sim` and `time` must be valid.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_time(
    sim: *const EmacSimulation,
    time: *mut f64,
) -> EmacStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| null("sim"))?.0;
        *out_arg(time, "time")? = s.history().latest().time;
        Ok(())
    })
}

/// Number of mesh vertices of the session's mesh.
///
/// # Safety
/// `sim` and `n` must be valid.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_vertex_count(
    sim: *const EmacSimulation,
    n: *mut usize,
) -> EmacStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| null("sim"))?.0;
        *out_arg(n, "n")? = s.mesh().n_vertices();
        Ok(())
    })
}

/// Velocity at the mesh vertices as interleaved x, y pairs. Buffer handling
/// follows [`emac_mesh_vertices`].
///
/// # Safety
/// `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_vertex_velocity(
    sim: *const EmacSimulation,
    buf: *mut f64,
    len: *mut usize,
) -> EmacStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| null("sim"))?.0;
        let (vel, _, _) = vertex_fields(s.mesh(), s.history().latest(), s.config().form);
        let flat: Vec<f64> = vel.iter().flatten().copied().collect();
        copy_out(&flat, buf, len)
    })
}

/// Physical pressure at the mesh vertices.
///
/// # Safety
/// `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_vertex_pressure(
    sim: *const EmacSimulation,
    buf: *mut f64,
    len: *mut usize,
) -> EmacStatus {
    guard(|| {
        let s = &sim.as_ref().ok_or_else(|| null("sim"))?.0;
        let (_, pres, _) = vertex_fields(s.mesh(), s.history().latest(), s.config().form);
        copy_out(&pres, buf, len)
    })
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn emac_simulation_free(sim: *mut EmacSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs a configuration file to completion and writes the usual output
/// directory. `steps` may be null.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn emac_run_file(path: *const c_char, steps: *mut usize) -> EmacStatus {
    guard(|| {
        let cfg = parse_config(Path::new(str_arg(path, "path")?))?;
        let outcome = run(&cfg)?;
        if let Some(p) = steps.as_mut() {
            *p = outcome.reports.len();
        }
        Ok(())
    })
}

unsafe fn copy_out(data: &[f64], buf: *mut f64, len: *mut usize) -> Result<(), Failure> {
    let len = out_arg(len, "len")?;
    if *len < data.len() || buf.is_null() {
        let need = data.len();
        *len = need;
        return Err(Failure(
            EmacStatus::BufferTooSmall,
            format!("buffer needs {need} doubles"),
        ));
    }
    ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    *len = data.len();
    Ok(())
}
