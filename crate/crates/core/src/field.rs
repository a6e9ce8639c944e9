//! Finite element functions: a coefficient vector over a [`DofMap`].

use std::sync::Arc;

use crate::basis::{p1_values, p2_values, ElementGeometry};
use crate::error::{Error, Result};
use crate::mesh::{DofMap, SpaceKind, TriMesh};

#[derive(Clone, Debug)]
pub struct FemField {
    map: Arc<DofMap>,
    coeffs: Vec<f64>,
}

/// Value and physical gradient of a field at a point. Scalar fields use
/// component 0; `grad[c][d]` is the derivative of component `c` along `x_d`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointValue {
    pub value: [f64; 2],
    pub grad: [[f64; 2]; 2],
}

impl FemField {
    pub fn zeros(map: Arc<DofMap>) -> Self {
        let n = map.n_dofs();
        Self {
            map,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_coeffs(map: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != map.n_dofs() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                map.n_dofs()
            )));
        }
        Ok(Self { map, coeffs })
    }

    /// Nodal interpolant. Scalar spaces read component 0 of `f`.
    pub fn interpolate(map: Arc<DofMap>, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let comps = map.components();
        let mut coeffs = vec![0.0; map.n_dofs()];
        for s in 0..map.n_scalar_dofs() {
            let v = f(map.scalar_dof_point(s));
            for c in 0..comps {
                coeffs[s * comps + c] = v[c];
            }
        }
        Self { map, coeffs }
    }

    pub fn map(&self) -> &Arc<DofMap> {
        &self.map
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Overwrites constrained dofs with their prescribed values at time `t`.
    pub fn apply_dirichlet(&mut self, t: f64) {
        for (dof, v) in self.map.dirichlet_values(t) {
            self.coeffs[dof] = v;
        }
    }

    /// Local coefficients of triangle `t`, laid out `[node][component]`.
    pub fn local(&self, t: usize) -> [[f64; 2]; 6] {
        let comps = self.map.components();
        let mut out = [[0.0; 2]; 6];
        for (k, &s) in self.map.element_scalar_dofs(t).iter().enumerate() {
            for c in 0..comps {
                out[k][c] = self.coeffs[s * comps + c];
            }
        }
        out
    }

    /// Evaluates the field on triangle `t` at barycentric point `l`.
    pub fn eval(&self, mesh: &TriMesh, t: usize, l: [f64; 3]) -> PointValue {
        let geo = ElementGeometry::of(mesh, t);
        let loc = self.local(t);
        let mut pv = PointValue::default();
        match self.map.kind() {
            SpaceKind::P1Scalar => {
                let (v, g) = (p1_values(l), geo.p1_grads());
                for k in 0..3 {
                    accumulate(&mut pv, loc[k], v[k], g[k]);
                }
            }
            _ => {
                let (v, g) = (p2_values(l), geo.p2_grads(l));
                for k in 0..6 {
                    accumulate(&mut pv, loc[k], v[k], g[k]);
                }
            }
        }
        pv
    }
}

fn accumulate(pv: &mut PointValue, coef: [f64; 2], v: f64, g: [f64; 2]) {
    for c in 0..2 {
        pv.value[c] += coef[c] * v;
        pv.grad[c][0] += coef[c] * g[0];
        pv.grad[c][1] += coef[c] * g[1];
    }
}

/// Free-function form of [`FemField::eval`].
pub fn eval_field(field: &FemField, mesh: &TriMesh, t: usize, l: [f64; 3]) -> PointValue {
    field.eval(mesh, t, l)
}
