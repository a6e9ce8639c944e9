//! Report and snapshot serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::balances::BalanceReport;
use crate::error::{Error, Result};
use crate::forms::NonlinearForm;
use crate::mesh::TriMesh;
use crate::solver::SolverState;

/// Column set of `balances.csv`, in order.
pub const CSV_COLUMNS: [&str; 19] = [
    "step",
    "t",
    "scheme",
    "order",
    "newton_iterations",
    "newton_residual",
    "e_E_mom_x",
    "e_E_mom_y",
    "e_E_am",
    "e_L_mom_x",
    "e_L_mom_y",
    "e_L_am",
    "e_trad_mom_x",
    "e_trad_mom_y",
    "e_trad_am",
    "energy",
    "momentum_x",
    "momentum_y",
    "angular_momentum",
];

/// Floats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Scheme tag such as `EMAC-BDF2`.
pub fn scheme_tag(form: NonlinearForm, order: usize) -> String {
    format!("{}-BDF{order}", form.name())
}

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// One CSV data row. Lagrangian columns are empty when not computed.
pub fn csv_row(r: &BalanceReport, form: NonlinearForm) -> String {
    let fields = [
        r.step.to_string(),
        fmt_f64(r.time),
        scheme_tag(form, r.order),
        r.order.to_string(),
        r.newton_iterations.to_string(),
        fmt_f64(r.newton_residual),
        fmt_f64(r.e_e_mom[0]),
        fmt_f64(r.e_e_mom[1]),
        fmt_f64(r.e_e_am),
        opt(r.e_l_mom.map(|m| m[0])),
        opt(r.e_l_mom.map(|m| m[1])),
        opt(r.e_l_am),
        fmt_f64(r.e_trad_mom[0]),
        fmt_f64(r.e_trad_mom[1]),
        fmt_f64(r.e_trad_am),
        fmt_f64(r.energy),
        fmt_f64(r.momentum[0]),
        fmt_f64(r.momentum[1]),
        fmt_f64(r.angular),
    ];
    fields.join(",")
}

/// Writes `contents` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Vertex values of velocity, recovered pressure and vorticity. Derivatives
/// at a vertex come from the lowest-numbered triangle containing it.
pub fn vertex_fields(
    mesh: &TriMesh,
    state: &SolverState,
    form: NonlinearForm,
) -> (Vec<[f64; 2]>, Vec<f64>, Vec<f64>) {
    let nv = mesh.n_vertices();
    let mut done = vec![false; nv];
    let mut vel = vec![[0.0; 2]; nv];
    let mut pres = vec![0.0; nv];
    let mut vort = vec![0.0; nv];
    let alpha = form.kinetic_pressure_factor();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for (k, &v) in tri.iter().enumerate() {
            if done[v] {
                continue;
            }
            done[v] = true;
            let mut l = [0.0; 3];
            l[k] = 1.0;
            let u = state.u.eval(mesh, t, l);
            let p = state.p_hat.eval(mesh, t, l).value[0];
            vel[v] = u.value;
            pres[v] = p + 0.5 * alpha * (u.value[0] * u.value[0] + u.value[1] * u.value[1]);
            vort[v] = u.grad[1][0] - u.grad[0][1];
        }
    }
    (vel, pres, vort)
}

/// Legacy VTK ASCII unstructured grid of the P1 skeleton with vertex data.
pub fn vtk_string(mesh: &TriMesh, state: &SolverState, form: NonlinearForm) -> String {
    let (vel, pres, vort) = vertex_fields(mesh, state, form);
    let nv = mesh.n_vertices();
    let nt = mesh.n_triangles();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "velocity and pressure at t = {}", fmt_f64(state.time));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for x in mesh.vertices() {
        let _ = writeln!(s, "{} {} 0", fmt_f64(x[0]), fmt_f64(x[1]));
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    s.push_str("VECTORS velocity double\n");
    for u in &vel {
        let _ = writeln!(s, "{} {} 0", fmt_f64(u[0]), fmt_f64(u[1]));
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for p in &pres {
        let _ = writeln!(s, "{}", fmt_f64(*p));
    }
    s.push_str("SCALARS vorticity double 1\nLOOKUP_TABLE default\n");
    for w in &vort {
        let _ = writeln!(s, "{}", fmt_f64(*w));
    }
    s
}

pub fn write_vtk(
    mesh: &TriMesh,
    state: &SolverState,
    form: NonlinearForm,
    path: &Path,
) -> Result<()> {
    write_atomic(path, vtk_string(mesh, state, form).as_bytes())
}

/// Largest absolute difference per numeric column of two CSV files with the
/// same header and row count. Non-numeric columns must match exactly.
pub fn diff_csv(a: &Path, b: &Path) -> Result<Vec<(String, f64)>> {
    let read = |p: &Path| -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
        let mut r = csv::Reader::from_path(p).map_err(|e| csv_error(p, e))?;
        let header = r
            .headers()
            .map_err(|e| csv_error(p, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        let rows = r
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| csv_error(p, e))?;
        Ok((header, rows))
    };
    let (ha, ra) = read(a)?;
    let (hb, rb) = read(b)?;
    if ha != hb {
        return Err(Error::InvalidArgument(format!(
            "column sets differ: {ha:?} vs {hb:?}"
        )));
    }
    if ra.len() != rb.len() {
        return Err(Error::InvalidArgument(format!(
            "row counts differ: {} vs {}",
            ra.len(),
            rb.len()
        )));
    }
    let mut out: Vec<(String, f64)> = ha.iter().map(|h| (h.clone(), 0.0)).collect();
    for (row, (x, y)) in ra.iter().zip(&rb).enumerate() {
        for (c, (u, v)) in x.iter().zip(y.iter()).enumerate() {
            match (u.parse::<f64>(), v.parse::<f64>()) {
                (Ok(u), Ok(v)) => {
                    let d = (u - v).abs();
                    if d > out[c].1 || d.is_nan() {
                        out[c].1 = d;
                    }
                }
                _ if u == v => {}
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "row {} column '{}': '{u}' vs '{v}'",
                        row + 1,
                        ha[c]
                    )))
                }
            }
        }
    }
    Ok(out)
}

fn csv_error(p: &Path, e: csv::Error) -> Error {
    Error::InvalidArgument(format!("{}: {e}", p.display()))
}
