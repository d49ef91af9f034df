use super::complex::{EdgeId, EdgeKind, FaceId, VertexId};
use crate::geometry::Point3;

/// What happened to an edge that referenced the removed vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    /// Endpoint replaced in place.
    Rewritten,
    /// Coincided with an existing edge and was removed. `into_old_kind` is
    /// the kind of the surviving edge before the merge.
    Merged {
        into: EdgeId,
        into_old_kind: EdgeKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceOutcome {
    Rewritten,
    /// Contained both collapsed vertices.
    Degenerate,
    /// Coincided with the live face `of`.
    Duplicate {
        of: FaceId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeChange {
    pub id: EdgeId,
    pub old_vertices: [VertexId; 2],
    pub old_kind: EdgeKind,
    pub outcome: EdgeOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceChange {
    pub id: FaceId,
    pub old_vertices: [VertexId; 3],
    pub outcome: FaceOutcome,
}

/// Reversible description of one vertex-pair collapse `M^{k-1} -> M^k`.
///
/// `kept` survives (as the new vertex) at `new_position`; `removed` dies.
/// Every edge and face that referenced `removed` is listed with its
/// original vertex tuple, which is enough to perform the inverse vertex
/// split.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseRecord {
    pub edge: EdgeId,
    pub edge_kind: EdgeKind,
    pub kept: VertexId,
    pub removed: VertexId,
    pub kept_position: Point3,
    pub removed_position: Point3,
    pub new_position: Point3,
    pub edges: Vec<EdgeChange>,
    pub faces: Vec<FaceChange>,
}

impl CollapseRecord {
    /// Number of faces the collapse removed.
    pub fn faces_removed(&self) -> usize {
        self.faces
            .iter()
            .filter(|f| f.outcome != FaceOutcome::Rewritten)
            .count()
    }
}
