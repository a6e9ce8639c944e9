use std::collections::VecDeque;

use super::TriMesh;
use crate::error::{Error, Result};

/// A mesh-aligned subdomain: a union of triangles plus the node sets
/// strictly inside it.
#[derive(Clone, Debug)]
pub struct SubdomainMarker {
    /// Selected triangles, ascending.
    pub element_set: Vec<usize>,
    /// P2 node ids (vertex ids, then `n_vertices + edge`) strictly inside.
    pub interior_p2_nodes: Vec<usize>,
    /// Vertex ids strictly inside.
    pub interior_p1_nodes: Vec<usize>,
    /// `(triangle, local edge)` pairs forming the boundary of the subdomain,
    /// each seen from the selected triangle.
    pub boundary_faces: Vec<(usize, usize)>,
    selected: Vec<bool>,
}

impl SubdomainMarker {
    pub fn contains(&self, t: usize) -> bool {
        self.selected[t]
    }

    /// P2 nodes of selected triangles that lie on the subdomain boundary.
    pub fn boundary_p2_nodes(&self, mesh: &TriMesh) -> Vec<usize> {
        let masters = mesh.p2_node_masters();
        let mut seen = vec![false; mesh.n_p2_nodes()];
        for &n in &self.interior_p2_nodes {
            seen[n] = true;
        }
        let mut out = Vec::new();
        for &t in &self.element_set {
            for n in mesh.p2_nodes(t) {
                let n = masters[n];
                if !seen[n] {
                    seen[n] = true;
                    out.push(n);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Selects every triangle whose barycenter satisfies `region`.
///
/// The selection must be nonempty, edge-connected, and must not touch the
/// domain boundary.
pub fn mark_subdomain<F>(mesh: &TriMesh, region: F) -> Result<SubdomainMarker>
where
    F: Fn([f64; 2]) -> bool,
{
    let nt = mesh.n_triangles();
    let selected: Vec<bool> = (0..nt).map(|t| region(mesh.barycenter(t))).collect();
    let element_set: Vec<usize> = (0..nt).filter(|&t| selected[t]).collect();
    if element_set.is_empty() {
        return Err(Error::InvalidRegion(
            "predicate selects no triangles".into(),
        ));
    }

    let on_boundary = mesh.boundary_vertex_flags();
    for &t in &element_set {
        if mesh.triangles()[t].iter().any(|&v| on_boundary[v]) {
            return Err(Error::InvalidRegion(format!(
                "selected triangle {t} touches the domain boundary"
            )));
        }
    }

    // Edge connectivity by breadth-first search through shared edges.
    let mut reached = vec![false; nt];
    let mut queue = VecDeque::from([element_set[0]]);
    reached[element_set[0]] = true;
    let mut count = 1;
    while let Some(t) = queue.pop_front() {
        for e in mesh.triangle_edges(t) {
            for &nb in mesh.edge_triangles(e) {
                if selected[nb] && !reached[nb] {
                    reached[nb] = true;
                    count += 1;
                    queue.push_back(nb);
                }
            }
        }
    }
    if count != element_set.len() {
        return Err(Error::InvalidRegion(format!(
            "selection is not edge-connected ({count} of {} triangles reachable)",
            element_set.len()
        )));
    }

    let masters = mesh.p2_node_masters();
    let nv = mesh.n_vertices();
    let mut touched_outside = vec![false; mesh.n_p2_nodes()];
    let mut inside = vec![false; mesh.n_p2_nodes()];
    for t in 0..nt {
        for n in mesh.p2_nodes(t) {
            let n = masters[n];
            if selected[t] {
                inside[n] = true;
            } else {
                touched_outside[n] = true;
            }
        }
    }
    let interior_p2_nodes: Vec<usize> = (0..mesh.n_p2_nodes())
        .filter(|&n| inside[n] && !touched_outside[n])
        .collect();
    let interior_p1_nodes: Vec<usize> = interior_p2_nodes
        .iter()
        .copied()
        .filter(|&n| n < nv)
        .collect();

    let mut boundary_faces = Vec::new();
    for &t in &element_set {
        for (k, e) in mesh.triangle_edges(t).into_iter().enumerate() {
            let outside = mesh.edge_triangles(e).iter().any(|&nb| !selected[nb]);
            if outside {
                boundary_faces.push((t, k));
            }
        }
    }

    Ok(SubdomainMarker {
        element_set,
        interior_p2_nodes,
        interior_p1_nodes,
        boundary_faces,
        selected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_square, Rectangle};

    fn in_box(p: [f64; 2], lo: f64, hi: f64) -> bool {
        p[0] > lo && p[0] < hi && p[1] > lo && p[1] < hi
    }

    #[test]
    fn centered_square_selects_eight() {
        let m = build_structured_square(4, Rectangle::UNIT, false).unwrap();
        let s = mark_subdomain(&m, |p| in_box(p, 0.25, 0.75)).unwrap();
        assert_eq!(s.element_set.len(), 8);
        // Only the center vertex is strictly inside.
        assert_eq!(s.interior_p1_nodes.len(), 1);
        assert_eq!(m.vertices()[s.interior_p1_nodes[0]], [0.5, 0.5]);
        assert_eq!(s.boundary_faces.len(), 8);
    }

    #[test]
    fn whole_domain_touches_boundary() {
        let m = build_structured_square(4, Rectangle::UNIT, false).unwrap();
        let err = mark_subdomain(&m, |_| true).unwrap_err();
        assert!(matches!(err, Error::InvalidRegion(_)));
    }

    #[test]
    fn empty_selection_rejected() {
        let m = build_structured_square(4, Rectangle::UNIT, false).unwrap();
        assert!(matches!(
            mark_subdomain(&m, |_| false),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn disconnected_selection_rejected() {
        let m = build_structured_square(8, Rectangle::UNIT, false).unwrap();
        let err =
            mark_subdomain(&m, |p| in_box(p, 0.125, 0.375) || in_box(p, 0.625, 0.875)).unwrap_err();
        assert!(err.to_string().contains("edge-connected"));
    }

    #[test]
    fn vertex_patch_interior_nodes() {
        // Patch of all triangles around the vertex (0.5, 0.5) on a 4x4 grid.
        let m = build_structured_square(4, Rectangle::UNIT, false).unwrap();
        let center = m.vertices().iter().position(|v| *v == [0.5, 0.5]).unwrap();
        let patch: Vec<usize> = (0..m.n_triangles())
            .filter(|&t| m.triangles()[t].contains(&center))
            .collect();
        let s = mark_subdomain(&m, |p| patch.iter().any(|&t| m.barycenter(t) == p)).unwrap();
        assert_eq!(s.element_set, patch);
        assert_eq!(s.interior_p1_nodes, vec![center]);
        // The vertex plus the midpoints of the six spokes emanating from it.
        let mut expected = vec![center];
        for (e, [a, b]) in m.edges().iter().enumerate() {
            if *a == center || *b == center {
                expected.push(m.n_vertices() + e);
            }
        }
        expected.sort_unstable();
        assert_eq!(s.interior_p2_nodes, expected);
        assert_eq!(expected.len(), 7);
    }

    #[test]
    fn p2_nodes_classified_once() {
        let m = build_structured_square(12, Rectangle::UNIT, false).unwrap();
        let s = mark_subdomain(&m, |p| {
            (p[0] - 0.4).powi(2) + (p[1] - 0.55).powi(2) < 0.2f64.powi(2)
        })
        .unwrap();
        let bnd = s.boundary_p2_nodes(&m);
        let mut all: Vec<usize> = s
            .interior_p2_nodes
            .iter()
            .chain(bnd.iter())
            .copied()
            .collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
        let mut from_elems: Vec<usize> =
            s.element_set.iter().flat_map(|&t| m.p2_nodes(t)).collect();
        from_elems.sort_unstable();
        from_elems.dedup();
        assert_eq!(all, from_elems);
    }
}
