//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{NonlinearForm, DEFAULT_QUADRATURE_DEGREE};
use crate::problems::{DomainSpec, ProblemKind, ProblemSpec, Region};

/// Configuration as written by the user. Every field except `problem` is
/// optional and falls back to the problem defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub problem: Option<String>,
    pub nu: Option<f64>,
    pub re: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub n: Option<usize>,
    pub mesh_path: Option<PathBuf>,
    pub form: Option<String>,
    pub bdf_order: Option<usize>,
    pub transport_order: Option<usize>,
    pub omega: Option<Region>,
    pub lagrangian: Option<bool>,
    pub newton_tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub quadrature_degree: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub snapshot_stride: Option<usize>,
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub nu: f64,
    /// Only meaningful for the Kelvin-Helmholtz problem.
    pub re: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    /// Cells per side for structured meshes.
    pub n: Option<usize>,
    pub mesh_path: Option<PathBuf>,
    pub form: NonlinearForm,
    pub bdf_order: usize,
    pub transport_order: usize,
    pub omega: Region,
    pub lagrangian: bool,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub quadrature_degree: usize,
    pub output_dir: PathBuf,
    /// Write a VTK snapshot every this many steps; 0 disables snapshots.
    pub snapshot_stride: usize,
}

impl RunConfig {
    /// Defaults of `kind` with no overrides.
    pub fn defaults(kind: ProblemKind) -> Self {
        Self::resolve(RawConfig {
            problem: Some(kind.name().into()),
            ..Default::default()
        })
        .expect("problem defaults are valid")
    }

    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let kind: ProblemKind = raw
            .problem
            .as_deref()
            .ok_or_else(|| Error::Config("missing required key 'problem'".into()))?
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        if raw.re.is_some() && kind != ProblemKind::KelvinHelmholtz {
            return Err(Error::Config(
                "'re' only applies to kelvin_helmholtz".into(),
            ));
        }
        if raw.re.is_some() && raw.nu.is_some() {
            return Err(Error::Config("give at most one of 're' and 'nu'".into()));
        }
        if let Some(re) = raw.re {
            if !(re > 0.0) {
                return Err(Error::Config(format!("re must be positive, got {re}")));
            }
        }
        let spec = match (kind, raw.re) {
            (ProblemKind::KelvinHelmholtz, Some(re)) => crate::problems::kelvin_helmholtz(re),
            _ => ProblemSpec::by_kind(kind),
        };
        let re = match kind {
            ProblemKind::KelvinHelmholtz => {
                Some(raw.re.unwrap_or(1.0 / (28.0 * raw.nu.unwrap_or(spec.nu))))
            }
            _ => None,
        };
        let n = match spec.domain {
            DomainSpec::Structured { n, .. } => {
                if raw.mesh_path.is_some() {
                    return Err(Error::Config(format!(
                        "problem '{kind}' builds its own mesh; remove 'mesh_path'"
                    )));
                }
                Some(raw.n.unwrap_or(n))
            }
            DomainSpec::Imported => {
                if raw.n.is_some() {
                    return Err(Error::Config(format!(
                        "problem '{kind}' uses an imported mesh; 'n' does not apply"
                    )));
                }
                if raw.mesh_path.is_none() {
                    return Err(Error::Config(format!(
                        "problem '{kind}' requires 'mesh_path'"
                    )));
                }
                None
            }
        };
        let form = match raw.form.as_deref() {
            Some(s) => s.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            None => NonlinearForm::Emac,
        };
        let cfg = Self {
            problem: kind,
            nu: raw.nu.unwrap_or(spec.nu),
            re,
            dt: raw.dt.unwrap_or(spec.dt),
            t_end: raw.t_end.unwrap_or(spec.t_end),
            n,
            mesh_path: raw.mesh_path,
            form,
            bdf_order: raw.bdf_order.unwrap_or(spec.bdf_order),
            transport_order: raw.transport_order.unwrap_or(spec.transport_order),
            omega: raw.omega.unwrap_or(spec.omega),
            lagrangian: raw.lagrangian.unwrap_or(spec.lagrangian),
            newton_tol: raw.newton_tol.unwrap_or(1e-12),
            max_newton: raw.max_newton.unwrap_or(25),
            quadrature_degree: raw.quadrature_degree.unwrap_or(DEFAULT_QUADRATURE_DEGREE),
            output_dir: raw
                .output_dir
                .unwrap_or_else(|| PathBuf::from(format!("out-{kind}"))),
            snapshot_stride: raw.snapshot_stride.unwrap_or(0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad(format!(
                "t_end must be at least dt, got t_end = {} and dt = {}",
                self.t_end, self.dt
            ));
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return bad(format!("nu must be nonnegative, got {}", self.nu));
        }
        if !(1..=3).contains(&self.bdf_order) {
            return bad(format!(
                "bdf_order must be 1, 2 or 3, got {}",
                self.bdf_order
            ));
        }
        if !(1..=2).contains(&self.transport_order) {
            return bad(format!(
                "transport_order must be 1 or 2, got {}",
                self.transport_order
            ));
        }
        if let Some(n) = self.n {
            if n == 0 {
                return bad("n must be positive".into());
            }
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        if self.max_newton == 0 {
            return bad("max_newton must be positive".into());
        }
        if !(1..=10).contains(&self.quadrature_degree) {
            return bad(format!(
                "quadrature_degree must be in 1..=10, got {}",
                self.quadrature_degree
            ));
        }
        match self.omega {
            Region::Disk { radius, .. } if !(radius > 0.0) => {
                bad(format!("omega radius must be positive, got {radius}"))
            }
            Region::Box { x0, x1, y0, y1 } if !(x0 < x1 && y0 < y1) => {
                bad("omega box has empty extent".into())
            }
            _ => Ok(()),
        }
    }

    /// Number of time steps: `round(t_end / dt)`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    RunConfig::resolve(raw)
}

/// Reads and resolves a JSON configuration. Relative mesh paths are taken
/// relative to the configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let (Some(m), Some(dir)) = (&raw.mesh_path, path.parent()) {
        if m.is_relative() {
            raw.mesh_path = Some(dir.join(m));
        }
    }
    RunConfig::resolve(raw)
}
