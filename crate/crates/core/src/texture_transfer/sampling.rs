use crate::core_types::{EdgeId, FaceId, SimplicialComplex2, VertexId};
use crate::geometry::Point3;
use crate::mesh_io::Rgb;

/// Simplex a sample currently sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Host {
    Face(FaceId),
    /// A faceless edge; barycentrics refer to its two sorted vertices.
    Edge(EdgeId),
    Vertex(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    /// Face of the simplified mesh the sample was drawn on.
    pub owner: FaceId,
    pub owner_bary: [f64; 3],
    /// Sampled position; never changes.
    pub position: Point3,
    pub host: Host,
    /// Barycentrics on `host` (trailing entries zero for edges and vertices).
    pub host_bary: [f64; 3],
    pub color: Rgb,
}

/// Barycentric grid weights `(a, b, c) / r` with `a + b + c = r`, ordered
/// by `c` then `b`. Entry `k` pairs with grid coordinates `(b, c)`.
pub fn grid_weights(r: u32) -> Vec<([f64; 3], [u32; 2])> {
    let rf = r as f64;
    let mut out = Vec::with_capacity(((r + 1) * (r + 2) / 2) as usize);
    for c in 0..=r {
        for b in 0..=r - c {
            let a = r - b - c;
            out.push(([a as f64 / rf, b as f64 / rf, c as f64 / rf], [b, c]));
        }
    }
    out
}

pub fn samples_per_face(r: u32) -> usize {
    ((r + 1) * (r + 2) / 2) as usize
}

pub(crate) fn interpolate(corners: &[Point3; 3], w: &[f64; 3]) -> Point3 {
    Point3::from(corners[0].coords * w[0] + corners[1].coords * w[1] + corners[2].coords * w[2])
}

/// `(r+1)(r+2)/2` samples on every live face, in face-id order, each face's
/// samples in [`grid_weights`] order.
pub fn sample_mesh_colors(mesh: &SimplicialComplex2, r: u32) -> Vec<SurfaceSample> {
    assert!(r >= 1, "samples per edge must be at least 1");
    let weights = grid_weights(r);
    let mut out = Vec::with_capacity(mesh.live_face_count() * weights.len());
    for f in mesh.live_faces() {
        let corners = mesh.face_positions(f);
        for (w, _) in &weights {
            out.push(SurfaceSample {
                owner: f,
                owner_bary: *w,
                position: interpolate(&corners, w),
                host: Host::Face(f),
                host_bary: *w,
                color: [1.0; 3],
            });
        }
    }
    out
}
