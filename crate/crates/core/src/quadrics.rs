//! Quadric constructors (plane, triangle, vertex, area) and the optimal
//! placement solve.

use nalgebra::{Matrix3, SVD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_types::{EdgeId, Quadric, SimplicialComplex2, VertexId};
use crate::geometry::{triangle_area, triangle_normal, Point3, Vector3};

/// Relative singular-value cutoff below which `A` is treated as singular.
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum QuadricError {
    #[error("plane normal must have unit length, got |n| = {0}")]
    NonUnitNormal(f64),
}

/// Squared distance to the plane through `p` with unit normal `n`:
/// `A = n nᵀ`, `b = -A p`, `c = pᵀ A p`.
pub fn plane_quadric(n: &Vector3, p: &Point3) -> Result<Quadric, QuadricError> {
    let len = n.norm();
    if !len.is_finite() || (len - 1.0).abs() > 1e-6 {
        return Err(QuadricError::NonUnitNormal(len));
    }
    let a = n * n.transpose();
    let ap = a * p.coords;
    Ok(Quadric::from_parts(&a, -ap, p.coords.dot(&ap)))
}

/// Plane quadric of the triangle's supporting plane, or `None` when the
/// triangle has zero area.
pub fn triangle_quadric(vi: &Point3, vj: &Point3, vk: &Point3) -> Option<Quadric> {
    let n = triangle_normal(vi, vj, vk)?;
    plane_quadric(&n, vi).ok()
}

/// Area-weighted sum of the one-ring triangle quadrics, each face weighted
/// by a third of its area.
pub fn vertex_quadric(mesh: &SimplicialComplex2, i: VertexId) -> Quadric {
    if !mesh.is_vertex_alive(i) {
        return Quadric::zero();
    }
    mesh.vertex_faces(i)
        .iter()
        .filter_map(|&f| {
            let [a, b, c] = mesh.face_positions(f);
            let q = triangle_quadric(&a, &b, &c)?;
            Some(q * (triangle_area(&a, &b, &c) / 3.0))
        })
        .sum()
}

/// Cross-product matrix `[x]×` with `[x]× y = x × y`.
pub fn cross_matrix(x: &Vector3) -> Matrix3<f64> {
    Matrix3::new(0.0, -x.z, x.y, x.z, 0.0, -x.x, -x.y, x.x, 0.0)
}

/// Quadric whose value at `x` is `2 · area(va, vb, x)²`.
///
/// With `s = vb - va` and `t = va × vb` the doubled triangle normal is
/// `s × x + t`, so its squared norm over two is
/// `([s]×ᵀ[s]×, -[s]× t, tᵀt) / 2`.
pub fn area_quadric_summand(va: &Point3, vb: &Point3) -> Quadric {
    let s = vb - va;
    let t = va.coords.cross(&vb.coords);
    let sx = cross_matrix(&s);
    Quadric::from_parts(
        &(sx.transpose() * sx * 0.5),
        -(sx * t) * 0.5,
        t.dot(&t) * 0.5,
    )
}

/// Which one-ring edges contribute to the area quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaSupport {
    /// Boundary edges (exactly one incident face) touching a collapsing
    /// vertex: the edges the new vertex drags along.
    #[default]
    Boundary,
    /// Every edge of the one-ring faces.
    FullLink,
}

fn area_sum(mesh: &SimplicialComplex2, verts: &[VertexId], support: AreaSupport) -> Quadric {
    let mut ring_edges: Vec<EdgeId> = match support {
        AreaSupport::Boundary => verts
            .iter()
            .flat_map(|&v| mesh.vertex_edges(v).iter().copied())
            .filter(|&ab| mesh.edge_faces(ab).len() == 1)
            .collect(),
        AreaSupport::FullLink => verts
            .iter()
            .flat_map(|&v| mesh.vertex_faces(v).iter().copied())
            .flat_map(|f| mesh.face_edges(f))
            .collect(),
    };
    ring_edges.sort_unstable();
    ring_edges.dedup();
    ring_edges
        .into_iter()
        .map(|ab| {
            let [a, b] = mesh.edge(ab).vertices;
            area_quadric_summand(&mesh.position(a), &mesh.position(b))
        })
        .sum()
}

/// Area quadric of collapsing `e`: [`area_quadric_summand`] summed over the
/// edges selected by `support`.
pub fn area_quadric_for_edge(
    mesh: &SimplicialComplex2,
    e: EdgeId,
    support: AreaSupport,
) -> Quadric {
    area_sum(mesh, &mesh.edge(e).vertices, support)
}

/// Per-vertex area term, accumulated when the area quadric runs in memory mode.
pub fn vertex_area_quadric(
    mesh: &SimplicialComplex2,
    i: VertexId,
    support: AreaSupport,
) -> Quadric {
    area_sum(mesh, &[i], support)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMethod {
    /// `A` well conditioned; `x*` solves `A x = -b`.
    Solve,
    /// Truncated-SVD minimizer closest to the midpoint seed.
    Pseudoinverse,
    /// A fallback point (index into the fallback list) scored lower.
    Fallback(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub position: Point3,
    pub value: f64,
    pub method: PlacementMethod,
}

/// Minimizes `q`. `fallbacks` is `[midpoint, v_i, v_j]`; the midpoint also
/// seeds the pseudoinverse solve when `A` is rank deficient.
pub fn optimal_placement(q: &Quadric, fallbacks: &[Point3; 3]) -> Placement {
    let a = q.a();
    let b = q.b();
    let seed = fallbacks[0];

    let svd = SVD::new(a, true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let sv = svd.singular_values;
    let max_sv = sv.max();

    let (candidate, method) = if max_sv <= 0.0 || !max_sv.is_finite() {
        (seed, PlacementMethod::Pseudoinverse)
    } else {
        let cutoff = SINGULAR_VALUE_CUTOFF * max_sv;
        let well_conditioned = sv.min() >= cutoff;
        // x = m + A⁺ (-b - A m); for full rank this is exactly A⁻¹(-b).
        let rhs = -b - a * seed.coords;
        let mut y = u.transpose() * rhs;
        for k in 0..3 {
            y[k] = if sv[k] >= cutoff { y[k] / sv[k] } else { 0.0 };
        }
        let x = Point3::from(seed.coords + v_t.transpose() * y);
        if well_conditioned {
            (x, PlacementMethod::Solve)
        } else {
            (x, PlacementMethod::Pseudoinverse)
        }
    };

    let mut best = Placement {
        position: candidate,
        value: if candidate.iter().all(|c| c.is_finite()) {
            q.eval(&candidate)
        } else {
            f64::INFINITY
        },
        method,
    };
    if !best.value.is_finite() {
        best.value = f64::INFINITY;
    }
    for (k, p) in fallbacks.iter().enumerate() {
        let value = q.eval(p);
        if value < best.value {
            best = Placement {
                position: *p,
                value,
                method: PlacementMethod::Fallback(k),
            };
        }
    }
    best
}
