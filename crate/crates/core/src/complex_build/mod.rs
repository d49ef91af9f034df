//! Raw mesh to simplicial complex: vertex welding, physical edges,
//! component labels and virtual edges between nearby components.

mod bvh;
mod virtual_edges;

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

pub use bvh::Bvh;
pub use virtual_edges::{
    build_virtual_edges, insert_virtual_edges, VirtualEdge, DEFAULT_VIRTUAL_EDGE_CAP,
};

use crate::core_types::{EdgeKind, FaceId, SimplicialComplex2, VertexId};
use crate::geometry::{Point3, TrianglePairDistance};
use crate::mesh_io::RawMesh;

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("nothing to simplify: input has no faces")]
    NothingToSimplify,
    #[error("weld tolerance must be a finite non-negative number, got {0}")]
    BadWeldTolerance(f64),
}

/// Where each complex element came from in the raw input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceMap {
    /// Raw vertex index to complex vertex.
    pub raw_to_vertex: Vec<VertexId>,
    /// Complex vertex to the first raw vertex welded into it.
    pub vertex_to_raw: Vec<usize>,
    /// Complex face to raw face index.
    pub face_to_raw: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BuiltComplex {
    pub complex: SimplicialComplex2,
    pub source: SourceMap,
    /// Raw faces skipped because welding made them degenerate or duplicate.
    pub dropped_faces: usize,
}

/// Maps each raw vertex to its weld representative (the lowest raw index
/// within `eps`; exact bitwise duplicates when `eps == 0`).
fn weld(positions: &[Point3], eps: f64) -> Vec<usize> {
    let key = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
    if eps == 0.0 {
        let mut first: HashMap<[u64; 3], usize> = HashMap::with_capacity(positions.len());
        return positions
            .iter()
            .enumerate()
            .map(|(i, p)| *first.entry([key(p.x), key(p.y), key(p.z)]).or_insert(i))
            .collect();
    }
    let cell = |p: &Point3| {
        [
            (p.x / eps).floor() as i64,
            (p.y / eps).floor() as i64,
            (p.z / eps).floor() as i64,
        ]
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut rep = Vec::with_capacity(positions.len());
    for (i, p) in positions.iter().enumerate() {
        let c = cell(p);
        let mut found: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &r in list {
                            if (positions[r] - p).norm() <= eps && found.is_none_or(|f| r < f) {
                                found = Some(r);
                            }
                        }
                    }
                }
            }
        }
        match found {
            Some(r) => rep.push(r),
            None => {
                grid.entry(c).or_default().push(i);
                rep.push(i);
            }
        }
    }
    rep
}

/// Welds vertices, inserts faces (skipping degenerate and duplicate ones)
/// with their physical side edges, and adds raw line elements as physical
/// edges.
pub fn build_complex(raw: &RawMesh, weld_eps: f64) -> Result<BuiltComplex, BuildError> {
    if !(weld_eps >= 0.0 && weld_eps.is_finite()) {
        return Err(BuildError::BadWeldTolerance(weld_eps));
    }
    if raw.faces.is_empty() {
        return Err(BuildError::NothingToSimplify);
    }
    let rep = weld(&raw.positions, weld_eps);
    let mut complex = SimplicialComplex2::new();
    let mut source = SourceMap {
        raw_to_vertex: vec![usize::MAX; raw.positions.len()],
        ..SourceMap::default()
    };
    for (i, &r) in rep.iter().enumerate() {
        if r == i {
            source.raw_to_vertex[i] = complex.add_vertex(raw.positions[i]);
            source.vertex_to_raw.push(i);
        } else {
            source.raw_to_vertex[i] = source.raw_to_vertex[r];
        }
    }
    let mut dropped = 0;
    for (k, f) in raw.faces.iter().enumerate() {
        match complex.add_face(f.map(|v| source.raw_to_vertex[v])) {
            Some(_) => source.face_to_raw.push(k),
            None => dropped += 1,
        }
    }
    for l in &raw.lines {
        let [a, b] = l.map(|v| source.raw_to_vertex[v]);
        complex.add_edge(a, b, EdgeKind::Physical);
    }
    if complex.live_face_count() == 0 {
        return Err(BuildError::NothingToSimplify);
    }
    if dropped > 0 {
        log::info!("{dropped} faces dropped as degenerate or duplicate after welding");
    }
    Ok(BuiltComplex {
        complex,
        source,
        dropped_faces: dropped,
    })
}

/// Per-vertex connected component ids, numbered from 0 in order of first
/// appearance. Dead vertices get their own label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub labels: Vec<usize>,
    pub count: usize,
}

impl ComponentLabels {
    pub fn of(&self, v: VertexId) -> usize {
        self.labels[v]
    }
}

/// Components over live physical edges, plus virtual edges when
/// `include_virtual`.
pub fn component_labels(mesh: &SimplicialComplex2, include_virtual: bool) -> ComponentLabels {
    let n = mesh.vertex_count();
    let mut uf = UnionFind::<usize>::new(n);
    for e in mesh.live_edges() {
        let edge = mesh.edge(e);
        if include_virtual || edge.kind == EdgeKind::Physical {
            uf.union(edge.vertices[0], edge.vertices[1]);
        }
    }
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    let mut live_roots = std::collections::HashSet::new();
    for v in 0..n {
        let root = uf.find(v);
        let next = ids.len();
        labels.push(*ids.entry(root).or_insert(next));
        if mesh.is_vertex_alive(v) {
            live_roots.insert(root);
        }
    }
    ComponentLabels {
        labels,
        count: live_roots.len(),
    }
}

/// Distance between two faces of `mesh`.
pub fn face_distance(mesh: &SimplicialComplex2, f1: FaceId, f2: FaceId) -> TrianglePairDistance {
    crate::geometry::triangle_triangle_distance(&mesh.face_positions(f1), &mesh.face_positions(f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn counts(m: &SimplicialComplex2) -> (usize, usize, usize) {
        (
            m.live_vertex_count(),
            m.live_edge_count(),
            m.live_face_count(),
        )
    }

    #[test]
    fn shared_edge_counts() {
        let b = build_complex(&fixtures::shared_edge_pair(), 0.0).unwrap();
        assert_eq!(counts(&b.complex), (4, 5, 2));
    }

    #[test]
    fn cube_soup_welds() {
        let soup = fixtures::cube_soup();
        let b = build_complex(&soup, 0.0).unwrap();
        // Brute-force oracle: distinct positions and distinct vertex pairs.
        let mut uniq: Vec<[u64; 3]> = soup
            .positions
            .iter()
            .map(|p| [p.x, p.y, p.z].map(f64::to_bits))
            .collect();
        uniq.sort_unstable();
        uniq.dedup();
        let id = |v: usize| {
            uniq.binary_search(
                &[
                    soup.positions[v].x,
                    soup.positions[v].y,
                    soup.positions[v].z,
                ]
                .map(f64::to_bits),
            )
            .unwrap()
        };
        let mut pairs = Vec::new();
        for f in &soup.faces {
            for k in 0..3 {
                let (a, c) = (id(f[k]), id(f[(k + 1) % 3]));
                pairs.push((a.min(c), a.max(c)));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!((uniq.len(), pairs.len()), (8, 18));
        assert_eq!(counts(&b.complex), (uniq.len(), pairs.len(), 12));
        b.complex.validate().unwrap();
    }

    #[test]
    fn fin_edge_star() {
        let b = build_complex(&fixtures::fin(), 0.0).unwrap();
        let e = b.complex.find_edge(0, 1).unwrap();
        assert_eq!(b.complex.edge_faces(e).len(), 3);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(
            build_complex(&RawMesh::default(), 0.0).unwrap_err(),
            BuildError::NothingToSimplify
        );
        assert!(build_complex(&fixtures::cube(), -1.0).is_err());
    }

    #[test]
    fn tolerance_weld() {
        let mut m = fixtures::two_squares(1e-4);
        let b = build_complex(&m, 0.0).unwrap();
        assert_eq!(b.complex.live_vertex_count(), 8);
        let b = build_complex(&m, 1e-3).unwrap();
        assert_eq!(b.complex.live_vertex_count(), 6);
        assert_eq!(component_labels(&b.complex, false).count, 1);
        // Duplicate faces after welding are dropped.
        let f = m.faces[0];
        m.faces.push([f[1], f[2], f[0]]);
        assert_eq!(build_complex(&m, 0.0).unwrap().dropped_faces, 1);
    }

    #[test]
    fn source_map_round_trip() {
        let soup = fixtures::cube_soup();
        let b = build_complex(&soup, 0.0).unwrap();
        for (i, &v) in b.source.raw_to_vertex.iter().enumerate() {
            assert_eq!(b.complex.position(v), soup.positions[i]);
            assert_eq!(b.source.raw_to_vertex[b.source.vertex_to_raw[v]], v);
        }
        assert_eq!(b.source.face_to_raw, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn lines_become_physical_edges() {
        let mut m = fixtures::square(0.0);
        m.positions.push(Point3::new(3.0, 0.0, 0.0));
        m.lines.push([2, 4]);
        let b = build_complex(&m, 0.0).unwrap();
        assert_eq!(b.complex.dangling_edges().count(), 1);
        assert_eq!(component_labels(&b.complex, false).count, 1);
    }

    #[test]
    fn labels_follow_physical_edges() {
        let b = build_complex(&fixtures::three_squares(0.1), 0.0).unwrap();
        let l = component_labels(&b.complex, false);
        assert_eq!(l.count, 3);
        assert_eq!(l.labels, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }
}
