use std::collections::HashMap;

use rayon::prelude::*;

use super::{face_distance, Bvh, ComponentLabels};
use crate::core_types::{EdgeKind, FaceId, SimplicialComplex2, VertexId};
use crate::geometry::{Aabb, Point3};

pub const DEFAULT_VIRTUAL_EDGE_CAP: usize = 32;

/// A vertex pair joining two components whose triangles come within the
/// virtual-edge threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualEdge {
    /// Sorted endpoint ids.
    pub vertices: [VertexId; 2],
    /// Distance between the two endpoints.
    pub length: f64,
    /// The face pair that produced the edge (lowest such pair).
    pub faces: [FaceId; 2],
    /// Triangle-to-triangle distance of that pair.
    pub distance: f64,
}

/// Vertex of face `f` nearest `p`; ties go to the lower vertex id.
fn nearest_corner(mesh: &SimplicialComplex2, f: FaceId, p: &Point3) -> VertexId {
    let mut corners = mesh.face(f).vertices;
    corners.sort_unstable();
    corners
        .into_iter()
        .map(|v| (v, (mesh.position(v) - p).norm_squared()))
        .fold((usize::MAX, f64::INFINITY), |best, c| {
            if c.1 < best.1 {
                c
            } else {
                best
            }
        })
        .0
}

/// One candidate per qualifying face pair `f1 < f2`.
fn candidate(mesh: &SimplicialComplex2, f1: FaceId, f2: FaceId, eps: f64) -> Option<VirtualEdge> {
    let d = face_distance(mesh, f1, f2);
    if d.distance.is_nan() || d.distance > eps {
        return None;
    }
    let a = nearest_corner(mesh, f1, &d.p1);
    let b = nearest_corner(mesh, f2, &d.p2);
    if a == b || mesh.find_edge(a, b).is_some() {
        return None;
    }
    Some(VirtualEdge {
        vertices: [a.min(b), a.max(b)],
        length: (mesh.position(a) - mesh.position(b)).norm(),
        faces: [f1, f2],
        distance: d.distance,
    })
}

/// Deduplicates by vertex pair (keeping the lowest face pair), then keeps
/// edges shortest first while both endpoints are under `cap`. Output is
/// sorted by vertex pair.
pub(super) fn finalize(mut cands: Vec<VirtualEdge>, cap: usize) -> Vec<VirtualEdge> {
    cands.sort_unstable_by(|x, y| x.vertices.cmp(&y.vertices).then(x.faces.cmp(&y.faces)));
    cands.dedup_by(|x, y| x.vertices == y.vertices);
    cands.sort_unstable_by(|x, y| {
        x.length
            .total_cmp(&y.length)
            .then(x.vertices.cmp(&y.vertices))
    });
    let mut degree: HashMap<VertexId, usize> = HashMap::new();
    let mut kept = Vec::with_capacity(cands.len());
    for c in cands {
        let [a, b] = c.vertices;
        if degree.get(&a).copied().unwrap_or(0) < cap && degree.get(&b).copied().unwrap_or(0) < cap
        {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
            kept.push(c);
        }
    }
    kept.sort_unstable_by_key(|x| x.vertices);
    kept
}

/// Virtual edges between faces of different components whose triangle
/// distance is at most `eps`. Candidate face pairs come from a BVH range
/// query; the result is deterministic.
pub fn build_virtual_edges(
    mesh: &SimplicialComplex2,
    labels: &ComponentLabels,
    eps: f64,
    cap: usize,
) -> Vec<VirtualEdge> {
    if eps.is_nan() || eps <= 0.0 || labels.count < 2 {
        return Vec::new();
    }
    let bvh = Bvh::over_faces(mesh);
    let faces: Vec<FaceId> = mesh.live_faces().collect();
    let label = |f: FaceId| labels.of(mesh.face(f).vertices[0]);
    let cands: Vec<VirtualEdge> = faces
        .par_iter()
        .flat_map_iter(|&f1| {
            let query = Aabb::from_points(mesh.face_positions(f1).iter()).expanded(eps);
            let mut near = Vec::new();
            bvh.visit_overlapping(&query, |f2| {
                if f2 > f1 && label(f2) != label(f1) {
                    near.push(f2);
                }
            });
            near.into_iter()
                .filter_map(move |f2| candidate(mesh, f1, f2, eps))
        })
        .collect();
    finalize(cands, cap)
}

/// Adds the edges as virtual edges; returns how many were new.
pub fn insert_virtual_edges(mesh: &mut SimplicialComplex2, edges: &[VirtualEdge]) -> usize {
    let before = mesh.edge_count();
    for e in edges {
        mesh.add_edge(e.vertices[0], e.vertices[1], EdgeKind::Virtual);
    }
    mesh.edge_count() - before
}
