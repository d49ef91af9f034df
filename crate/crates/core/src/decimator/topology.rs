//! Optional validity checks applied before a collapse when topology
//! preservation is requested.

use std::collections::BTreeSet;

use crate::core_types::{EdgeId, SimplicialComplex2, VertexId};
use crate::geometry::{triangle_cross, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    /// The endpoints share a neighbor that is not opposite the edge.
    LinkCondition,
    /// Both endpoints are on the boundary but the edge is not.
    BoundaryPinch,
    /// The collapse would produce two faces on the same vertex triple.
    DuplicateFace,
    /// A surviving face would turn by more than 90 degrees or vanish.
    NormalFlip,
}

fn neighbors(mesh: &SimplicialComplex2, v: VertexId) -> BTreeSet<VertexId> {
    mesh.vertex_edges(v)
        .iter()
        .map(|&e| mesh.edge(e).other(v))
        .collect()
}

fn on_boundary(mesh: &SimplicialComplex2, v: VertexId) -> bool {
    mesh.vertex_edges(v)
        .iter()
        .any(|&e| mesh.edge_faces(e).len() == 1)
}

/// Checks collapsing `e` with the surviving vertex moved to `x`.
pub fn check_collapse(mesh: &SimplicialComplex2, e: EdgeId, x: &Point3) -> Result<(), Rejection> {
    let [i, j] = mesh.edge(e).vertices;

    let opposite: BTreeSet<VertexId> = mesh
        .edge_faces(e)
        .iter()
        .flat_map(|&f| mesh.face(f).vertices)
        .filter(|&v| v != i && v != j)
        .collect();
    let ni = neighbors(mesh, i);
    let common: BTreeSet<VertexId> = neighbors(mesh, j).intersection(&ni).copied().collect();
    if common != opposite {
        return Err(Rejection::LinkCondition);
    }
    if mesh.edge_faces(e).len() != 1 && on_boundary(mesh, i) && on_boundary(mesh, j) {
        return Err(Rejection::BoundaryPinch);
    }

    for &f in mesh.vertex_faces(j) {
        let v = mesh.face(f).vertices;
        if v.contains(&i) {
            continue;
        }
        let moved = v.map(|w| if w == j { i } else { w });
        if mesh.find_face(moved).is_some() {
            return Err(Rejection::DuplicateFace);
        }
    }

    for (center, other) in [(i, j), (j, i)] {
        for &f in mesh.vertex_faces(center) {
            let v = mesh.face(f).vertices;
            if v.contains(&other) {
                continue;
            }
            let before = mesh.face_positions(f);
            let after = v.map(|w| if w == center { *x } else { mesh.position(w) });
            let n0 = triangle_cross(&before[0], &before[1], &before[2]);
            let n1 = triangle_cross(&after[0], &after[1], &after[2]);
            if n1.norm_squared() == 0.0 || n0.dot(&n1) < 0.0 {
                return Err(Rejection::NormalFlip);
            }
        }
    }
    Ok(())
}
