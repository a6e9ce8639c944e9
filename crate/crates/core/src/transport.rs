//! Indicator functions of a subdomain and their Galerkin transport.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FemField;
use crate::forms::Forms;
use crate::mesh::{DofMap, SpaceKind, SubdomainMarker, TriMesh};
use crate::solver::{bdf_coefficients, scheduled_order};
use crate::sparse::{LuSolver, SparseMatrix};

/// P2 indicator `phi` and P1 indicator `psi`, newest value first.
#[derive(Clone, Debug)]
pub struct IndicatorPair {
    order: usize,
    steps: usize,
    last_order: usize,
    phi: VecDeque<FemField>,
    psi: VecDeque<FemField>,
}

impl IndicatorPair {
    /// Transport order `j`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Order used by the most recent advance (0 before any step).
    pub fn last_order(&self) -> usize {
        self.last_order
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn phi(&self) -> &FemField {
        &self.phi[0]
    }

    pub fn psi(&self) -> &FemField {
        &self.psi[0]
    }

    /// `phi` values `i` steps back.
    pub fn phi_back(&self, i: usize) -> Option<&FemField> {
        self.phi.get(i)
    }

    pub fn psi_back(&self, i: usize) -> Option<&FemField> {
        self.psi.get(i)
    }

    fn push(&mut self, phi: FemField, psi: FemField, order: usize) {
        self.phi.push_front(phi);
        self.psi.push_front(psi);
        self.phi.truncate(3);
        self.psi.truncate(3);
        self.steps += 1;
        self.last_order = order;
    }
}

/// Nodal 0/1 indicators of the interior nodes of `marker`.
pub fn build_indicators(
    mesh: &TriMesh,
    marker: &SubdomainMarker,
    phi_map: Arc<DofMap>,
    psi_map: Arc<DofMap>,
    order: usize,
) -> Result<IndicatorPair> {
    if phi_map.kind() != SpaceKind::P2Scalar || psi_map.kind() != SpaceKind::P1Scalar {
        return Err(Error::InvalidArgument(
            "indicators need P2 and P1 scalar spaces".into(),
        ));
    }
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "transport order {order} not in 1..=2"
        )));
    }
    if marker.interior_p2_nodes.is_empty() || marker.interior_p1_nodes.is_empty() {
        return Err(Error::InvalidRegion(
            "subdomain has no interior nodes".into(),
        ));
    }
    let _ = mesh;
    let mut phi = FemField::zeros(phi_map.clone());
    for &n in &marker.interior_p2_nodes {
        phi.coeffs_mut()[phi_map.node_dof(n)] = 1.0;
    }
    let mut psi = FemField::zeros(psi_map.clone());
    for &n in &marker.interior_p1_nodes {
        psi.coeffs_mut()[psi_map.node_dof(n)] = 1.0;
    }
    Ok(IndicatorPair {
        order,
        steps: 0,
        last_order: 0,
        phi: VecDeque::from([phi]),
        psi: VecDeque::from([psi]),
    })
}

struct ScalarTransport {
    map: Arc<DofMap>,
    mass: SparseMatrix,
    lu: LuSolver,
}

impl ScalarTransport {
    fn advance(
        &mut self,
        forms: &Forms,
        u: &FemField,
        history: &VecDeque<FemField>,
        order: usize,
        dt: f64,
    ) -> Result<FemField> {
        let scheme = bdf_coefficients(order)?;
        let mut combo = vec![0.0; self.map.n_dofs()];
        for (a, f) in scheme.coeffs[1..].iter().zip(history) {
            for (c, v) in combo.iter_mut().zip(f.coeffs()) {
                *c += a * v;
            }
        }
        let mut rhs: Vec<f64> = self.mass.matvec(&combo).iter().map(|v| -v / dt).collect();
        let mut a = forms.assemble_transport(u, &self.map)?;
        a.add_scaled(scheme.coeffs[0] / dt, &self.mass);
        for d in self.map.dirichlet_dofs() {
            a.set_identity_row(d.dof);
            rhs[d.dof] = 0.0;
        }
        let (x, _) = self.lu.solve(&a, &rhs)?;
        FemField::from_coeffs(self.map.clone(), x)
    }
}

/// Galerkin transport of an [`IndicatorPair`] by a discrete velocity.
pub struct Transport {
    mesh: Arc<TriMesh>,
    quadrature_degree: usize,
    phi: ScalarTransport,
    psi: ScalarTransport,
}

impl Transport {
    pub fn new(
        mesh: Arc<TriMesh>,
        phi_map: Arc<DofMap>,
        psi_map: Arc<DofMap>,
        quadrature_degree: usize,
    ) -> Result<Self> {
        let forms = Forms::with_degree(&mesh, quadrature_degree)?;
        let phi = ScalarTransport {
            mass: forms.assemble_mass(&phi_map),
            map: phi_map,
            lu: LuSolver::new(),
        };
        let psi = ScalarTransport {
            mass: forms.assemble_mass(&psi_map),
            map: psi_map,
            lu: LuSolver::new(),
        };
        Ok(Self {
            mesh,
            quadrature_degree,
            phi,
            psi,
        })
    }

    /// Solves the transport step to the time level of `u`. The first step of
    /// an order-2 pair uses backward Euler.
    pub fn advance(&mut self, pair: &mut IndicatorPair, u: &FemField, dt: f64) -> Result<()> {
        let order = scheduled_order(pair.order, pair.steps + 1);
        let forms = Forms::with_degree(&self.mesh, self.quadrature_degree)?;
        let phi = self.phi.advance(&forms, u, &pair.phi, order, dt)?;
        let psi = self.psi.advance(&forms, u, &pair.psi, order, dt)?;
        pair.push(phi, psi, order);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_square, mark_subdomain, DirichletSpec, Rectangle};

    fn setup(periodic: bool) -> (Arc<TriMesh>, Arc<DofMap>, Arc<DofMap>, Arc<DofMap>) {
        let mesh = Arc::new(build_structured_square(8, Rectangle::UNIT, periodic).unwrap());
        let tags: &[&str] = if periodic {
            &["bottom", "top"]
        } else {
            &["bottom", "right", "top", "left"]
        };
        let spec = DirichletSpec::zero_on(tags);
        let v = Arc::new(DofMap::build(&mesh, SpaceKind::P2Vector, &spec).unwrap());
        let s2 = Arc::new(DofMap::build(&mesh, SpaceKind::P2Scalar, &spec).unwrap());
        let s1 = Arc::new(DofMap::build(&mesh, SpaceKind::P1Scalar, &spec).unwrap());
        (mesh, v, s2, s1)
    }

    #[test]
    fn vertex_patch_indicators() {
        let (mesh, _, s2, s1) = setup(false);
        // Patch of the six triangles around vertex (0.5, 0.5).
        let marker = mark_subdomain(&mesh, |x| {
            (x[0] - 0.5).abs() < 0.125 && (x[1] - 0.5).abs() < 0.125 && {
                let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
                dx * dy > 0.0 || (dx.abs() < 0.06 && dy.abs() < 0.06)
            }
        })
        .unwrap();
        let pair = build_indicators(&mesh, &marker, s2.clone(), s1.clone(), 1).unwrap();
        let ones = |f: &FemField| f.coeffs().iter().filter(|v| **v == 1.0).count();
        assert_eq!(ones(pair.psi()), 1);
        assert_eq!(ones(pair.phi()), marker.interior_p2_nodes.len());
        assert!(pair.phi().coeffs().iter().all(|v| *v == 0.0 || *v == 1.0));
        let forms = Forms::new(&mesh);
        let m = forms.assemble_mass(&s2);
        let one = vec![1.0; s2.n_dofs()];
        let integral: f64 = m
            .matvec(pair.phi().coeffs())
            .iter()
            .zip(&one)
            .map(|(a, b)| a * b)
            .sum();
        assert!(integral > 0.0);
        for t in (0..mesh.n_triangles()).filter(|t| !marker.contains(*t)) {
            let loc = pair.phi().local(t);
            let outside_all = mesh
                .p2_nodes(t)
                .iter()
                .all(|n| !marker.interior_p2_nodes.contains(n));
            if outside_all {
                assert!(loc.iter().all(|v| v[0] == 0.0));
            }
        }
    }

    #[test]
    fn zero_velocity_keeps_indicator() {
        let (mesh, v, s2, s1) = setup(false);
        let marker = mark_subdomain(&mesh, |x| {
            (x[0] - 0.5).abs() < 0.25 && (x[1] - 0.5).abs() < 0.25
        })
        .unwrap();
        for order in [1, 2] {
            let mut pair = build_indicators(&mesh, &marker, s2.clone(), s1.clone(), order).unwrap();
            let start = pair.phi().coeffs().to_vec();
            let mut tr = Transport::new(mesh.clone(), s2.clone(), s1.clone(), 6).unwrap();
            let u = FemField::zeros(v.clone());
            for _ in 0..3 {
                tr.advance(&mut pair, &u, 0.1).unwrap();
                for (a, b) in pair.phi().coeffs().iter().zip(&start) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
            assert_eq!(pair.last_order(), order);
        }
    }

    #[test]
    fn periodic_translation_preserves_integral() {
        // Unconstrained indicator spaces so that v = 1 is an admissible test function.
        let (mesh, v, _, _) = setup(true);
        let s2 =
            Arc::new(DofMap::build(&mesh, SpaceKind::P2Scalar, &DirichletSpec::new()).unwrap());
        let s1 =
            Arc::new(DofMap::build(&mesh, SpaceKind::P1Scalar, &DirichletSpec::new()).unwrap());
        let marker = mark_subdomain(&mesh, |x| {
            (x[0] - 0.5).abs() < 0.25 && (x[1] - 0.5).abs() < 0.25
        })
        .unwrap();
        let mut pair = build_indicators(&mesh, &marker, s2.clone(), s1.clone(), 2).unwrap();
        let forms = Forms::new(&mesh);
        let m = forms.assemble_mass(&s2);
        let integral = |f: &FemField| m.matvec(f.coeffs()).iter().sum::<f64>();
        let before = integral(pair.phi());
        let u = FemField::interpolate(v, |_| [0.7, 0.0]);
        let mut tr = Transport::new(mesh.clone(), s2, s1, 6).unwrap();
        for _ in 0..4 {
            tr.advance(&mut pair, &u, 0.01).unwrap();
        }
        let drift = (integral(pair.phi()) - before).abs();
        assert!(drift < 1e-12, "drift {drift:e}");
    }
}
