use std::fmt;
use std::sync::Arc;

use super::TriMesh;
use crate::error::{Error, Result};

/// Finite element space on a triangulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SpaceKind {
    P1Scalar,
    P2Scalar,
    P2Vector,
}

impl SpaceKind {
    pub fn components(self) -> usize {
        match self {
            SpaceKind::P2Vector => 2,
            _ => 1,
        }
    }

    /// Scalar basis functions per triangle.
    pub fn local_nodes(self) -> usize {
        match self {
            SpaceKind::P1Scalar => 3,
            _ => 6,
        }
    }
}

/// Prescribed boundary value as a function of position and time. Scalar
/// spaces read component 0.
pub type BoundaryFn = Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;

/// Boundary tag to prescribed-value assignments. Earlier entries win at
/// nodes shared by several tags.
#[derive(Clone, Default)]
pub struct DirichletSpec {
    entries: Vec<(String, BoundaryFn)>,
}

impl fmt::Debug for DirichletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.entries.iter().map(|(t, _)| t))
            .finish()
    }
}

impl DirichletSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: impl Into<String>, value: BoundaryFn) -> Self {
        self.entries.push((tag.into(), value));
        self
    }

    /// Homogeneous data on each listed tag.
    pub fn zero_on<S: AsRef<str>>(tags: &[S]) -> Self {
        let zero: BoundaryFn = Arc::new(|_, _| [0.0, 0.0]);
        tags.iter()
            .fold(Self::new(), |s, t| s.with(t.as_ref(), zero.clone()))
    }

    /// Same tags, all with homogeneous data.
    pub fn homogeneous(&self) -> Self {
        let tags: Vec<&str> = self.entries.iter().map(|(t, _)| t.as_str()).collect();
        Self::zero_on(&tags)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A constrained degree of freedom.
#[derive(Clone, Copy, Debug)]
pub struct DirichletDof {
    pub dof: usize,
    pub component: usize,
    pub point: [f64; 2],
    /// Index into the boundary functions of the owning map.
    pub source: usize,
}

/// Degree-of-freedom numbering for P1/P2 spaces with Dirichlet and periodic
/// constraints.
///
/// Vector dofs interleave components: dof `2 * s + c` is component `c` of
/// scalar dof `s`.
#[derive(Clone)]
pub struct DofMap {
    kind: SpaceKind,
    node_to_dof: Vec<usize>,
    node_master: Vec<usize>,
    n_scalar_dofs: usize,
    scalar_points: Vec<[f64; 2]>,
    element_nodes: Vec<[usize; 6]>,
    dirichlet: Vec<DirichletDof>,
    constrained: Vec<bool>,
    boundary_fns: Vec<BoundaryFn>,
}

impl fmt::Debug for DofMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DofMap")
            .field("kind", &self.kind)
            .field("n_dofs", &self.n_dofs())
            .field("n_dirichlet", &self.dirichlet.len())
            .finish()
    }
}

impl DofMap {
    /// Numbers the dofs of `kind` on `mesh`. Periodic slaves are mapped to
    /// their masters before Dirichlet marking.
    pub fn build(mesh: &TriMesh, kind: SpaceKind, dirichlet: &DirichletSpec) -> Result<Self> {
        let known = mesh.boundary_tags();
        for tag in dirichlet.tags() {
            if !known.iter().any(|k| k == tag) {
                return Err(Error::Config(format!(
                    "Dirichlet data references unknown boundary tag '{tag}' (mesh has {known:?})"
                )));
            }
        }

        let nv = mesh.n_vertices();
        let n_nodes = match kind {
            SpaceKind::P1Scalar => nv,
            _ => mesh.n_p2_nodes(),
        };
        let node_master: Vec<usize> = mesh.p2_node_masters().into_iter().take(n_nodes).collect();

        let mut node_to_dof = vec![usize::MAX; n_nodes];
        let mut scalar_points = Vec::new();
        for n in 0..n_nodes {
            if node_master[n] == n {
                node_to_dof[n] = scalar_points.len();
                scalar_points.push(mesh.p2_node_coords(n));
            }
        }
        for n in 0..n_nodes {
            if node_master[n] != n {
                node_to_dof[n] = node_to_dof[node_master[n]];
            }
        }
        let n_scalar_dofs = scalar_points.len();
        let comps = kind.components();

        let element_nodes = (0..mesh.n_triangles())
            .map(|t| {
                let nodes = mesh.p2_nodes(t);
                let mut out = [0; 6];
                for k in 0..kind.local_nodes() {
                    out[k] = node_to_dof[nodes[k]];
                }
                out
            })
            .collect();

        let mut constrained = vec![false; n_scalar_dofs * comps];
        let mut records = Vec::new();
        let mut boundary_fns = Vec::new();
        for (source, (tag, f)) in dirichlet.entries.iter().enumerate() {
            boundary_fns.push(f.clone());
            for be in mesh.boundary_edges().iter().filter(|be| &be.tag == tag) {
                let [a, b] = be.vertices;
                let mut nodes = vec![a, b];
                if kind != SpaceKind::P1Scalar {
                    let e = mesh.find_edge(a, b).ok_or_else(|| {
                        Error::Validation(format!("boundary edge {:?} missing", be.vertices))
                    })?;
                    nodes.push(nv + e);
                }
                for node in nodes {
                    let s = node_to_dof[node];
                    for c in 0..comps {
                        let dof = s * comps + c;
                        if !constrained[dof] {
                            constrained[dof] = true;
                            records.push(DirichletDof {
                                dof,
                                component: c,
                                point: mesh.p2_node_coords(node),
                                source,
                            });
                        }
                    }
                }
            }
        }
        records.sort_by_key(|d| d.dof);

        Ok(Self {
            kind,
            node_to_dof,
            node_master,
            n_scalar_dofs,
            scalar_points,
            element_nodes,
            dirichlet: records,
            constrained,
            boundary_fns,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn n_dofs(&self) -> usize {
        self.n_scalar_dofs * self.kind.components()
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_scalar_dofs
    }

    pub fn components(&self) -> usize {
        self.kind.components()
    }

    /// Scalar dof of a mesh node (vertex, or `n_vertices + edge` for P2).
    pub fn node_dof(&self, node: usize) -> usize {
        self.node_to_dof[node]
    }

    /// Periodic master of a node; masters map to themselves.
    pub fn periodic_master(&self, node: usize) -> usize {
        self.node_master[node]
    }

    /// Coordinates of the master node carrying scalar dof `s`.
    pub fn scalar_dof_point(&self, s: usize) -> [f64; 2] {
        self.scalar_points[s]
    }

    /// Scalar dofs of triangle `t`; only the first `local_nodes()` entries
    /// are meaningful.
    pub fn element_scalar_dofs(&self, t: usize) -> &[usize] {
        &self.element_nodes[t][..self.kind.local_nodes()]
    }

    pub fn component_of(&self, dof: usize) -> usize {
        dof % self.kind.components()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn dirichlet_dofs(&self) -> &[DirichletDof] {
        &self.dirichlet
    }

    /// Prescribed values of every constrained dof at time `t`.
    pub fn dirichlet_values(&self, t: f64) -> Vec<(usize, f64)> {
        self.dirichlet
            .iter()
            .map(|d| {
                (
                    d.dof,
                    (self.boundary_fns[d.source])(d.point, t)[d.component],
                )
            })
            .collect()
    }
}
