//! Benchmark flows: initial data, boundary data, parameters and subdomains.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryFn, DirichletSpec, Rectangle};

pub type VelocityFn = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Gresho,
    Cylinder,
    KelvinHelmholtz,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Gresho => "gresho",
            ProblemKind::Cylinder => "cylinder",
            ProblemKind::KelvinHelmholtz => "kelvin_helmholtz",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gresho" => Ok(ProblemKind::Gresho),
            "cylinder" => Ok(ProblemKind::Cylinder),
            "kelvin_helmholtz" | "kh" => Ok(ProblemKind::KelvinHelmholtz),
            _ => Err(Error::Config(format!("unknown problem '{s}'"))),
        }
    }
}

/// Geometric description of a subdomain, tested on element barycenters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Disk { center: [f64; 2], radius: f64 },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Region {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match *self {
            Region::Disk { center, radius } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                dx * dx + dy * dy < radius * radius
            }
            Region::Box { x0, x1, y0, y1 } => x[0] > x0 && x[0] < x1 && x[1] > y0 && x[1] < y1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    /// Structured triangulation of a rectangle with `n` cells per side.
    Structured {
        rect: Rectangle,
        periodic_x: bool,
        n: usize,
    },
    /// Mesh read from a file supplied by the caller.
    Imported,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub domain: DomainSpec,
    pub nu: f64,
    pub initial_velocity: VelocityFn,
    pub initial_pressure: Option<ScalarFn>,
    pub dirichlet: DirichletSpec,
    pub omega: Region,
    pub dt: f64,
    pub t_end: f64,
    pub bdf_order: usize,
    pub transport_order: usize,
    /// Whether the Lagrangian diagnostics are meaningful (no outflow).
    pub lagrangian: bool,
    /// Human-readable notes recorded in run metadata.
    pub notes: Vec<String>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("kind", &self.kind)
            .field("domain", &self.domain)
            .field("nu", &self.nu)
            .field("dirichlet", &self.dirichlet)
            .field("omega", &self.omega)
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl ProblemSpec {
    pub fn by_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Gresho => gresho(0.2, 0.4),
            ProblemKind::Cylinder => cylinder(),
            ProblemKind::KelvinHelmholtz => kelvin_helmholtz(100.0),
        }
    }
}

/// Pressure constants of the Gresho vortex fixed by continuity at `r1` and
/// `p(r2) = 0`.
pub fn gresho_constants(r1: f64, r2: f64) -> (f64, f64) {
    let ring = |r: f64| 12.5 * r * r - 20.0 * r + 4.0 * r.ln();
    let c2 = -ring(r2);
    let c1 = ring(r1) + c2 - 12.5 * r1 * r1;
    (c1, c2)
}

pub fn gresho_velocity(x: [f64; 2], r1: f64, r2: f64) -> [f64; 2] {
    let r = x[0].hypot(x[1]);
    if r < r1 {
        [-5.0 * x[1], 5.0 * x[0]]
    } else if r <= r2 {
        let s = (2.0 - 5.0 * r) / r;
        [-s * x[1], s * x[0]]
    } else {
        [0.0, 0.0]
    }
}

pub fn gresho_pressure(x: [f64; 2], r1: f64, r2: f64) -> f64 {
    let (c1, c2) = gresho_constants(r1, r2);
    let r = x[0].hypot(x[1]);
    if r < r1 {
        12.5 * r * r + c1
    } else if r <= r2 {
        12.5 * r * r - 20.0 * r + 4.0 * r.ln() + c2
    } else {
        0.0
    }
}

const SQUARE_TAGS: [&str; 4] = ["bottom", "right", "top", "left"];

pub fn gresho(r1: f64, r2: f64) -> ProblemSpec {
    let (c1, c2) = gresho_constants(r1, r2);
    ProblemSpec {
        kind: ProblemKind::Gresho,
        domain: DomainSpec::Structured {
            rect: Rectangle {
                x0: -0.5,
                x1: 0.5,
                y0: -0.5,
                y1: 0.5,
            },
            periodic_x: false,
            n: 64,
        },
        nu: 1e-10,
        initial_velocity: Arc::new(move |x| gresho_velocity(x, r1, r2)),
        initial_pressure: Some(Arc::new(move |x| gresho_pressure(x, r1, r2))),
        dirichlet: DirichletSpec::zero_on(&SQUARE_TAGS),
        omega: Region::Disk {
            center: [0.2, 0.09],
            radius: 0.05,
        },
        dt: 0.01,
        t_end: 1.0,
        bdf_order: 2,
        transport_order: 1,
        lagrangian: true,
        notes: vec![
            format!("ring velocity (2 - 5r)(-y, x)/r on [{r1}, {r2}]"),
            format!("pressure constants from continuity: C1 = {c1:.17e}, C2 = {c2:.17e}"),
        ],
    }
}

pub const CYLINDER_TAGS: [&str; 4] = ["inflow", "outflow", "walls", "cylinder"];

/// Parabolic channel profile with peak 1.5 and mean 1 on `0 <= y <= 0.41`.
pub fn channel_profile(y: f64) -> f64 {
    6.0 / (0.41 * 0.41) * y * (0.41 - y)
}

pub fn cylinder() -> ProblemSpec {
    let profile: BoundaryFn = Arc::new(|x, _| [channel_profile(x[1]), 0.0]);
    let zero: BoundaryFn = Arc::new(|_, _| [0.0, 0.0]);
    ProblemSpec {
        kind: ProblemKind::Cylinder,
        domain: DomainSpec::Imported,
        nu: 0.001,
        initial_velocity: Arc::new(|_| [0.0, 0.0]),
        initial_pressure: None,
        // Walls first so corner nodes of the inflow/outflow segments are no-slip.
        dirichlet: DirichletSpec::new()
            .with("walls", zero.clone())
            .with("cylinder", zero)
            .with("inflow", profile.clone())
            .with("outflow", profile),
        omega: Region::Disk {
            center: [0.35, 0.16],
            radius: 0.05,
        },
        dt: 0.01,
        t_end: 5.0,
        bdf_order: 3,
        transport_order: 1,
        lagrangian: false,
        notes: vec!["inflow and outflow both carry the parabolic profile".into()],
    }
}

pub const KH_DELTA0: f64 = 1.0 / 28.0;
pub const KH_NOISE: f64 = 1e-3;

pub fn kelvin_helmholtz_velocity(x: [f64; 2]) -> [f64; 2] {
    let (d, uinf) = (KH_DELTA0, 1.0);
    let (xx, y) = (x[0], x[1]);
    let g = (-(y - 0.5).powi(2) / (d * d)).exp();
    let c = (8.0 * PI * xx).cos() + (20.0 * PI * xx).cos();
    let s = -8.0 * PI * (8.0 * PI * xx).sin() - 20.0 * PI * (20.0 * PI * xx).sin();
    let dpsi_dy = uinf * g * (-2.0 * (y - 0.5) / (d * d)) * c;
    let dpsi_dx = uinf * g * s;
    [
        uinf * ((2.0 * y - 1.0) / d).tanh() + KH_NOISE * dpsi_dy,
        -KH_NOISE * dpsi_dx,
    ]
}

pub fn kelvin_helmholtz(re: f64) -> ProblemSpec {
    ProblemSpec {
        kind: ProblemKind::KelvinHelmholtz,
        domain: DomainSpec::Structured {
            rect: Rectangle::UNIT,
            periodic_x: true,
            n: 128,
        },
        nu: 1.0 / (28.0 * re),
        initial_velocity: Arc::new(kelvin_helmholtz_velocity),
        initial_pressure: None,
        dirichlet: DirichletSpec::zero_on(&["bottom", "top"]),
        omega: Region::Box {
            x0: 0.125,
            x1: 0.25,
            y0: 0.125,
            y1: 0.25,
        },
        dt: 0.01,
        t_end: 5.0,
        bdf_order: 2,
        transport_order: 1,
        lagrangian: true,
        notes: vec![format!("Re = {re}, nu = 1/(28 Re)")],
    }
}
