//! Local and global conservation diagnostics.
//!
//! Angular quantities use the planar convention `(a x x)_3 = a . w` with
//! `w(x, y) = (y, -x)`. Wherever a normal weighted by `|grad phi|` appears it
//! is evaluated as `-grad phi`.

use std::sync::Arc;

use serde::Serialize;

use crate::basis::ElementGeometry;
use crate::error::{Error, Result};
use crate::field::FemField;
use crate::forms::{ElementQuad, NonlinearForm, Tables, DEFAULT_QUADRATURE_DEGREE};
use crate::mesh::{SpaceKind, SubdomainMarker, TriMesh, EDGE_VERTICES};
use crate::solver::{bdf_coefficients, SolverHistory};
use crate::transport::IndicatorPair;

/// One row of diagnostics for a time step.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BalanceReport {
    pub step: usize,
    pub time: f64,
    pub order: usize,
    pub newton_iterations: usize,
    pub newton_residual: f64,
    pub e_e_mom: [f64; 2],
    pub e_e_am: f64,
    /// Absent when the Lagrangian diagnostics are disabled.
    pub e_l_mom: Option<[f64; 2]>,
    pub e_l_am: Option<f64>,
    pub e_trad_mom: [f64; 2],
    pub e_trad_am: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
    pub angular: f64,
}

fn w_of(x: [f64; 2]) -> [f64; 2] {
    [x[1], -x[0]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Flux terms of the weak balances for a weight `phi`, split by origin.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Fluxes {
    /// `2 nu int D(u)(-grad phi)`
    pub visc: [f64; 2],
    /// `-int p (-grad phi)`
    pub pres: [f64; 2],
    /// `-int u (u . (-grad phi))`
    pub conv: [f64; 2],
    pub visc_am: f64,
    pub pres_am: f64,
    pub conv_am: f64,
}

impl Fluxes {
    pub fn momentum(&self) -> [f64; 2] {
        [
            self.visc[0] + self.pres[0] + self.conv[0],
            self.visc[1] + self.pres[1] + self.conv[1],
        ]
    }

    pub fn angular(&self) -> f64 {
        self.visc_am + self.pres_am + self.conv_am
    }
}

/// Evaluates the balance integrals on one mesh with a fixed quadrature.
pub struct BalanceIntegrator {
    mesh: Arc<TriMesh>,
    tables: Tables,
    nu: f64,
    pressure_factor: f64,
}

impl BalanceIntegrator {
    pub fn new(mesh: Arc<TriMesh>, nu: f64, form: NonlinearForm) -> Self {
        Self::with_degree(mesh, nu, form, DEFAULT_QUADRATURE_DEGREE)
            .expect("default degree is tabulated")
    }

    pub fn with_degree(
        mesh: Arc<TriMesh>,
        nu: f64,
        form: NonlinearForm,
        degree: usize,
    ) -> Result<Self> {
        Ok(Self {
            mesh,
            tables: Tables::new(degree)?,
            nu,
            pressure_factor: form.kinetic_pressure_factor(),
        })
    }

    pub fn mesh(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    /// Recovered physical pressure from the solved pressure and velocity.
    pub fn recovered_pressure(&self, p_hat: f64, u: [f64; 2]) -> f64 {
        p_hat + 0.5 * self.pressure_factor * dot(u, u)
    }

    fn weight_local(weight: &FemField, t: usize) -> (Vec<f64>, bool) {
        let loc: Vec<f64> = weight
            .local(t)
            .iter()
            .take(weight.map().kind().local_nodes())
            .map(|v| v[0])
            .collect();
        let nonzero = loc.iter().any(|v| *v != 0.0);
        (loc, nonzero)
    }

    /// `(int phi u, int phi u . w)`.
    pub fn moments(&self, weight: &FemField, u: &FemField) -> ([f64; 2], f64) {
        let p2 = weight.map().kind() == SpaceKind::P2Scalar;
        let mut mom = [0.0; 2];
        let mut am = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let (wl, nonzero) = Self::weight_local(weight, t);
            if !nonzero {
                continue;
            }
            let eq = ElementQuad::new(&self.mesh, t, &self.tables);
            let ul = u.local(t);
            for q in 0..self.tables.n_points() {
                let (phi, _) = eq.scalar_at(&self.tables, q, &wl, p2);
                let (uq, _) = eq.vector_at(&self.tables, q, &ul);
                let jw = eq.jw[q] * phi;
                mom[0] += jw * uq[0];
                mom[1] += jw * uq[1];
                am += jw * dot(uq, w_of(eq.x[q]));
            }
        }
        (mom, am)
    }

    /// Flux integrals for weight `phi` at the state `(u, p_hat)`.
    pub fn fluxes(&self, weight: &FemField, u: &FemField, p_hat: &FemField) -> Fluxes {
        let p2 = weight.map().kind() == SpaceKind::P2Scalar;
        let mut f = Fluxes::default();
        for t in 0..self.mesh.n_triangles() {
            let (wl, nonzero) = Self::weight_local(weight, t);
            if !nonzero {
                continue;
            }
            let eq = ElementQuad::new(&self.mesh, t, &self.tables);
            let ul = u.local(t);
            let pl: Vec<f64> = p_hat.local(t)[..3].iter().map(|v| v[0]).collect();
            for q in 0..self.tables.n_points() {
                let (_, gphi) = eq.scalar_at(&self.tables, q, &wl, p2);
                let m = [-gphi[0], -gphi[1]];
                let (uq, g) = eq.vector_at(&self.tables, q, &ul);
                let (ph, _) = eq.scalar_at(&self.tables, q, &pl, false);
                let p = self.recovered_pressure(ph, uq);
                let d = [
                    [g[0][0], 0.5 * (g[0][1] + g[1][0])],
                    [0.5 * (g[0][1] + g[1][0]), g[1][1]],
                ];
                let dm = [dot(d[0], m), dot(d[1], m)];
                let un = dot(uq, m);
                let w = w_of(eq.x[q]);
                let jw = eq.jw[q];
                for i in 0..2 {
                    f.visc[i] += jw * 2.0 * self.nu * dm[i];
                    f.pres[i] -= jw * p * m[i];
                    f.conv[i] -= jw * uq[i] * un;
                }
                f.visc_am += jw * 2.0 * self.nu * dot(dm, w);
                f.pres_am -= jw * p * dot(m, w);
                f.conv_am -= jw * dot(uq, w) * un;
            }
        }
        f
    }

    /// Kinetic energy, momentum and angular momentum of `u` over the domain.
    pub fn global_balances(&self, u: &FemField) -> (f64, [f64; 2], f64) {
        let mut e = 0.0;
        let mut mom = [0.0; 2];
        let mut am = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let eq = ElementQuad::new(&self.mesh, t, &self.tables);
            let ul = u.local(t);
            for q in 0..self.tables.n_points() {
                let (uq, _) = eq.vector_at(&self.tables, q, &ul);
                let jw = eq.jw[q];
                e += 0.5 * jw * dot(uq, uq);
                mom[0] += jw * uq[0];
                mom[1] += jw * uq[1];
                am += jw * dot(uq, w_of(eq.x[q]));
            }
        }
        (e, mom, am)
    }

    /// `(int_omega u, int_omega u . w)` over the selected elements.
    pub fn region_moments(&self, marker: &SubdomainMarker, u: &FemField) -> ([f64; 2], f64) {
        let mut mom = [0.0; 2];
        let mut am = 0.0;
        for &t in &marker.element_set {
            let eq = ElementQuad::new(&self.mesh, t, &self.tables);
            let ul = u.local(t);
            for q in 0..self.tables.n_points() {
                let (uq, _) = eq.vector_at(&self.tables, q, &ul);
                let jw = eq.jw[q];
                mom[0] += jw * uq[0];
                mom[1] += jw * uq[1];
                am += jw * dot(uq, w_of(eq.x[q]));
            }
        }
        (mom, am)
    }

    /// Boundary flux integrals over the subdomain boundary with outward
    /// normal `n`, using the trace from the selected element.
    pub fn boundary_fluxes(
        &self,
        marker: &SubdomainMarker,
        u: &FemField,
        p_hat: &FemField,
    ) -> Fluxes {
        const GAUSS: [(f64, f64); 4] = [
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
            (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        ];
        let mut f = Fluxes::default();
        for &(t, k) in &marker.boundary_faces {
            let geo = ElementGeometry::of(&self.mesh, t);
            let [i, j] = EDGE_VERTICES[k];
            let (a, b) = (geo.vertices[i], geo.vertices[j]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
            for (s, wg) in GAUSS {
                let s = 0.5 * (s + 1.0);
                let mut l = [0.0; 3];
                l[i] = 1.0 - s;
                l[j] = s;
                let pu = u.eval(&self.mesh, t, l);
                let pp = p_hat.eval(&self.mesh, t, l);
                let (uq, g) = (pu.value, pu.grad);
                let p = self.recovered_pressure(pp.value[0], uq);
                let x = geo.point(l);
                let w = w_of(x);
                let d = [
                    [g[0][0], 0.5 * (g[0][1] + g[1][0])],
                    [0.5 * (g[0][1] + g[1][0]), g[1][1]],
                ];
                let dn = [dot(d[0], n), dot(d[1], n)];
                let un = dot(uq, n);
                let ds = 0.5 * wg * len;
                for c in 0..2 {
                    f.visc[c] += ds * 2.0 * self.nu * dn[c];
                    f.pres[c] -= ds * p * n[c];
                    f.conv[c] -= ds * uq[c] * un;
                }
                f.visc_am += ds * 2.0 * self.nu * dot(dn, w);
                f.pres_am -= ds * p * dot(n, w);
                f.conv_am -= ds * dot(uq, w) * un;
            }
        }
        f
    }
}

fn bdf_combine(order: usize, dt: f64, values: &[([f64; 2], f64)]) -> Result<([f64; 2], f64)> {
    let s = bdf_coefficients(order)?;
    let xs: Vec<f64> = values.iter().map(|v| v.0[0]).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.0[1]).collect();
    let am: Vec<f64> = values.iter().map(|v| v.1).collect();
    Ok(([s.apply(&xs, dt), s.apply(&ys, dt)], s.apply(&am, dt)))
}

fn step_info(history: &SolverHistory) -> Result<(usize, f64)> {
    let k = history.latest().order;
    if k == 0 {
        return Err(Error::InvalidState("history holds no time step yet".into()));
    }
    let w = history.window(k)?;
    Ok((k, w[0].time - w[1].time))
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Eulerian momentum and angular momentum errors for static weights `phi`
/// (P2) and `psi` (P1) at the newest state of `history`.
pub fn eulerian_errors(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    phi: &FemField,
    psi: &FemField,
) -> Result<([f64; 2], f64)> {
    let (k, dt) = step_info(history)?;
    let w = history.window(k)?;
    let mom: Vec<([f64; 2], f64)> = w
        .iter()
        .map(|s| (integ.moments(phi, &s.u).0, 0.0))
        .collect();
    let am: Vec<([f64; 2], f64)> = w
        .iter()
        .map(|s| ([0.0; 2], integ.moments(psi, &s.u).1))
        .collect();
    let (dmom, _) = bdf_combine(k, dt, &mom)?;
    let (_, dam) = bdf_combine(k, dt, &am)?;
    let fm = integ.fluxes(phi, &w[0].u, &w[0].p_hat);
    let fa = integ.fluxes(psi, &w[0].u, &w[0].p_hat);
    Ok((sub(dmom, fm.momentum()), dam - fa.angular()))
}

pub fn eulerian_momentum_error(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    phi: &FemField,
) -> Result<[f64; 2]> {
    let (k, dt) = step_info(history)?;
    let w = history.window(k)?;
    let mom: Vec<([f64; 2], f64)> = w
        .iter()
        .map(|s| (integ.moments(phi, &s.u).0, 0.0))
        .collect();
    let (d, _) = bdf_combine(k, dt, &mom)?;
    Ok(sub(d, integ.fluxes(phi, &w[0].u, &w[0].p_hat).momentum()))
}

pub fn eulerian_angular_error(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    psi: &FemField,
) -> Result<f64> {
    let (k, dt) = step_info(history)?;
    let w = history.window(k)?;
    let am: Vec<([f64; 2], f64)> = w
        .iter()
        .map(|s| ([0.0; 2], integ.moments(psi, &s.u).1))
        .collect();
    let (_, d) = bdf_combine(k, dt, &am)?;
    Ok(d - integ.fluxes(psi, &w[0].u, &w[0].p_hat).angular())
}

fn transported_terms(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    pair: &IndicatorPair,
    p2: bool,
) -> Result<([f64; 2], f64, Fluxes)> {
    let (k, dt) = step_info(history)?;
    let j = pair.last_order();
    if j == 0 {
        return Err(Error::InvalidState(
            "indicators have not been advanced".into(),
        ));
    }
    let w = history.window(k)?;
    let weight = |i: usize| {
        if p2 {
            pair.phi_back(i)
        } else {
            pair.psi_back(i)
        }
    };
    let newest = weight(0).expect("current indicator");
    // int phi^n BDFk(u)
    let a: Vec<([f64; 2], f64)> = w.iter().map(|s| integ.moments(newest, &s.u)).collect();
    let (da, dam_a) = bdf_combine(k, dt, &a)?;
    // int BDFj(phi) u^n
    let b = (0..=j)
        .map(|i| {
            weight(i).map(|f| integ.moments(f, &w[0].u)).ok_or_else(|| {
                Error::InvalidState(format!("indicator history shorter than {}", j + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (db, dam_b) = bdf_combine(j, dt, &b)?;
    let fl = integ.fluxes(newest, &w[0].u, &w[0].p_hat);
    Ok(([da[0] + db[0], da[1] + db[1]], dam_a + dam_b, fl))
}

/// Lagrangian momentum error with the transported P2 indicator.
pub fn lagrangian_momentum_error(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    pair: &IndicatorPair,
) -> Result<[f64; 2]> {
    let (d, _, fl) = transported_terms(integ, history, pair, true)?;
    Ok([
        d[0] - fl.visc[0] - fl.pres[0],
        d[1] - fl.visc[1] - fl.pres[1],
    ])
}

/// Lagrangian angular momentum error with the transported P1 indicator.
pub fn lagrangian_angular_error(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    pair: &IndicatorPair,
) -> Result<f64> {
    let (_, d, fl) = transported_terms(integ, history, pair, false)?;
    Ok(d - fl.visc_am - fl.pres_am)
}

/// Traditional Eulerian errors over the subdomain and its edge boundary.
pub fn traditional_eulerian_errors(
    integ: &BalanceIntegrator,
    history: &SolverHistory,
    marker: &SubdomainMarker,
) -> Result<([f64; 2], f64)> {
    let (k, dt) = step_info(history)?;
    let w = history.window(k)?;
    let vals: Vec<([f64; 2], f64)> = w
        .iter()
        .map(|s| integ.region_moments(marker, &s.u))
        .collect();
    let (dm, da) = bdf_combine(k, dt, &vals)?;
    let f = integ.boundary_fluxes(marker, &w[0].u, &w[0].p_hat);
    Ok((sub(dm, f.momentum()), da - f.angular()))
}

/// Everything needed to produce a [`BalanceReport`] per step.
pub struct Diagnostics {
    pub integrator: BalanceIntegrator,
    pub marker: SubdomainMarker,
    /// Static Eulerian indicators.
    pub phi: FemField,
    pub psi: FemField,
}

impl Diagnostics {
    pub fn report(
        &self,
        step: usize,
        history: &SolverHistory,
        pair: Option<&IndicatorPair>,
    ) -> Result<BalanceReport> {
        let s = history.latest();
        let (e_e_mom, e_e_am) = eulerian_errors(&self.integrator, history, &self.phi, &self.psi)?;
        let (e_trad_mom, e_trad_am) =
            traditional_eulerian_errors(&self.integrator, history, &self.marker)?;
        let (e_l_mom, e_l_am) = match pair {
            Some(p) => (
                Some(lagrangian_momentum_error(&self.integrator, history, p)?),
                Some(lagrangian_angular_error(&self.integrator, history, p)?),
            ),
            None => (None, None),
        };
        let (energy, momentum, angular) = self.integrator.global_balances(&s.u);
        Ok(BalanceReport {
            step,
            time: s.time,
            order: s.order,
            newton_iterations: s.newton_iterations,
            newton_residual: s.newton_residual,
            e_e_mom,
            e_e_am,
            e_l_mom,
            e_l_am,
            e_trad_mom,
            e_trad_am,
            energy,
            momentum,
            angular,
        })
    }
}
