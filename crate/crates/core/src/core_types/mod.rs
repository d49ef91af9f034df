//! Quadrics, the simplicial 2-complex and collapse records.

mod complex;
mod quadric;
mod record;

pub use complex::{
    Compaction, ComplexError, Edge, EdgeId, EdgeKind, Face, FaceId, SimplicialComplex2, StarIndex,
    VertexId,
};
pub use quadric::{quadric_add, quadric_eval, Quadric};
pub use record::{CollapseRecord, EdgeChange, EdgeOutcome, FaceChange, FaceOutcome};
