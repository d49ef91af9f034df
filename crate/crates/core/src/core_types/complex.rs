use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::{CollapseRecord, EdgeChange, EdgeOutcome, FaceChange, FaceOutcome};
use crate::geometry::{Aabb, Point3};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// Side of an input triangle.
    Physical,
    /// Vertex pair joining two otherwise disconnected components.
    Virtual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints, smaller id first.
    pub vertices: [VertexId; 2],
    pub kind: EdgeKind,
    pub alive: bool,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.vertices[0] == v {
            self.vertices[1]
        } else {
            self.vertices[0]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Face {
    /// Corners in their input orientation.
    pub vertices: [VertexId; 3],
    pub alive: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum ComplexError {
    #[error("edge {0} is not alive")]
    DeadEdge(EdgeId),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

#[inline]
fn edge_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
fn face_key(v: [VertexId; 3]) -> [VertexId; 3] {
    let mut k = v;
    k.sort_unstable();
    k
}

fn remove_item(list: &mut Vec<usize>, item: usize) {
    if let Some(pos) = list.iter().position(|&x| x == item) {
        list.swap_remove(pos);
    }
}

/// Vertex/edge/face lists with the three star indices (vertex→edges,
/// vertex→faces, edge→faces).
///
/// Elements are never removed from the backing arrays; dead elements keep
/// their ids so collapse records stay valid. [`SimplicialComplex2::compacted`]
/// renumbers the live elements for output.
#[derive(Debug, Clone, Default)]
pub struct SimplicialComplex2 {
    positions: Vec<Point3>,
    vertex_alive: Vec<bool>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    vertex_edges: Vec<Vec<EdgeId>>,
    vertex_faces: Vec<Vec<FaceId>>,
    edge_faces: Vec<Vec<FaceId>>,
    edge_lookup: HashMap<(VertexId, VertexId), EdgeId>,
    face_lookup: HashMap<[VertexId; 3], FaceId>,
    live_vertices: usize,
    live_edges: usize,
    live_faces: usize,
}

/// The star sets of a complex, each sorted. Used to compare incremental
/// maintenance against a from-scratch rebuild.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarIndex {
    pub vertex_edges: Vec<Vec<EdgeId>>,
    pub vertex_faces: Vec<Vec<FaceId>>,
    pub edge_faces: Vec<Vec<FaceId>>,
}

/// Old-to-new id maps produced by [`SimplicialComplex2::compacted`].
#[derive(Debug, Clone, Default)]
pub struct Compaction {
    pub vertex_map: Vec<Option<VertexId>>,
    pub edge_map: Vec<Option<EdgeId>>,
    pub face_map: Vec<Option<FaceId>>,
}

impl SimplicialComplex2 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a complex from positions and triangles. Degenerate and duplicate
    /// triangles are skipped; every side becomes a physical edge.
    pub fn from_triangles(positions: Vec<Point3>, triangles: &[[VertexId; 3]]) -> Self {
        let mut c = Self::new();
        for p in positions {
            c.add_vertex(p);
        }
        for t in triangles {
            c.add_face(*t);
        }
        c
    }

    pub fn add_vertex(&mut self, p: Point3) -> VertexId {
        self.positions.push(p);
        self.vertex_alive.push(true);
        self.vertex_edges.push(Vec::new());
        self.vertex_faces.push(Vec::new());
        self.live_vertices += 1;
        self.positions.len() - 1
    }

    /// Inserts the edge `ab`, or returns the existing one. An existing virtual
    /// edge is upgraded when a physical edge is requested.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, kind: EdgeKind) -> Option<EdgeId> {
        if a == b || !self.vertex_alive[a] || !self.vertex_alive[b] {
            return None;
        }
        let key = edge_key(a, b);
        if let Some(&e) = self.edge_lookup.get(&key) {
            if kind == EdgeKind::Physical {
                self.edges[e].kind = EdgeKind::Physical;
            }
            return Some(e);
        }
        let id = self.edges.len();
        self.edges.push(Edge {
            vertices: [key.0, key.1],
            kind,
            alive: true,
        });
        self.edge_faces.push(Vec::new());
        self.attach_edge(id);
        self.live_edges += 1;
        Some(id)
    }

    /// Inserts a triangle (and its physical sides). Returns `None` for
    /// triangles with a repeated vertex or duplicating a live face.
    pub fn add_face(&mut self, v: [VertexId; 3]) -> Option<FaceId> {
        if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
            return None;
        }
        if self.face_lookup.contains_key(&face_key(v)) {
            return None;
        }
        for k in 0..3 {
            self.add_edge(v[k], v[(k + 1) % 3], EdgeKind::Physical)?;
        }
        let id = self.faces.len();
        self.faces.push(Face {
            vertices: v,
            alive: true,
        });
        self.attach_face(id);
        self.live_faces += 1;
        Some(id)
    }

    // --- accessors -------------------------------------------------------

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn live_vertex_count(&self) -> usize {
        self.live_vertices
    }

    pub fn live_edge_count(&self) -> usize {
        self.live_edges
    }

    pub fn live_face_count(&self) -> usize {
        self.live_faces
    }

    pub fn position(&self, v: VertexId) -> Point3 {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn set_position(&mut self, v: VertexId, p: Point3) {
        self.positions[v] = p;
    }

    pub fn is_vertex_alive(&self, v: VertexId) -> bool {
        self.vertex_alive[v]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn face(&self, f: FaceId) -> &Face {
        &self.faces[f]
    }

    pub fn vertex_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.vertex_edges[v]
    }

    pub fn vertex_faces(&self, v: VertexId) -> &[FaceId] {
        &self.vertex_faces[v]
    }

    pub fn edge_faces(&self, e: EdgeId) -> &[FaceId] {
        &self.edge_faces[e]
    }

    pub fn find_edge(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_lookup.get(&edge_key(a, b)).copied()
    }

    pub fn find_face(&self, v: [VertexId; 3]) -> Option<FaceId> {
        self.face_lookup.get(&face_key(v)).copied()
    }

    pub fn face_positions(&self, f: FaceId) -> [Point3; 3] {
        let [a, b, c] = self.faces[f].vertices;
        [self.positions[a], self.positions[b], self.positions[c]]
    }

    pub fn face_area(&self, f: FaceId) -> f64 {
        let [a, b, c] = self.face_positions(f);
        crate::geometry::triangle_area(&a, &b, &c)
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.positions.len()).filter(move |&v| self.vertex_alive[v])
    }

    pub fn live_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].alive)
    }

    pub fn live_faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.faces.len()).filter(move |&f| self.faces[f].alive)
    }

    /// Edges with no incident face.
    pub fn dangling_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.live_edges()
            .filter(move |&e| self.edge_faces[e].is_empty())
    }

    /// Bounding box of the live vertices.
    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.live_vertices().map(|v| &self.positions[v]))
    }

    pub fn total_area(&self) -> f64 {
        self.live_faces().map(|f| self.face_area(f)).sum()
    }

    /// Faces incident to either endpoint of `e` (the edge one-ring), sorted.
    pub fn edge_one_ring_faces(&self, e: EdgeId) -> Vec<FaceId> {
        let [i, j] = self.edges[e].vertices;
        let mut out: Vec<FaceId> = self.vertex_faces[i]
            .iter()
            .chain(&self.vertex_faces[j])
            .copied()
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The three side edges of a live face, in corner order `(v0v1, v1v2, v2v0)`.
    pub fn face_edges(&self, f: FaceId) -> [EdgeId; 3] {
        let v = self.faces[f].vertices;
        let side = |a: VertexId, b: VertexId| {
            self.find_edge(a, b)
                .unwrap_or_else(|| panic!("face {f} side ({a},{b}) has no edge"))
        };
        [side(v[0], v[1]), side(v[1], v[2]), side(v[2], v[0])]
    }

    // --- star maintenance --------------------------------------------------

    fn attach_edge(&mut self, e: EdgeId) {
        let [a, b] = self.edges[e].vertices;
        self.edge_lookup.insert((a, b), e);
        self.vertex_edges[a].push(e);
        self.vertex_edges[b].push(e);
    }

    fn detach_edge(&mut self, e: EdgeId) {
        let [a, b] = self.edges[e].vertices;
        self.edge_lookup.remove(&(a, b));
        remove_item(&mut self.vertex_edges[a], e);
        remove_item(&mut self.vertex_edges[b], e);
    }

    fn attach_face(&mut self, f: FaceId) {
        let v = self.faces[f].vertices;
        self.face_lookup.insert(face_key(v), f);
        for k in 0..3 {
            self.vertex_faces[v[k]].push(f);
            let e = self.edge_lookup[&edge_key(v[k], v[(k + 1) % 3])];
            self.edge_faces[e].push(f);
        }
    }

    fn detach_face(&mut self, f: FaceId) {
        let v = self.faces[f].vertices;
        self.face_lookup.remove(&face_key(v));
        for k in 0..3 {
            remove_item(&mut self.vertex_faces[v[k]], f);
            if let Some(&e) = self.edge_lookup.get(&edge_key(v[k], v[(k + 1) % 3])) {
                remove_item(&mut self.edge_faces[e], f);
            }
        }
    }

    // --- collapse / split --------------------------------------------------

    /// Merges the endpoints of `e` into its first vertex, placed at `x`.
    ///
    /// Every edge and face referencing the second vertex is rewritten; the
    /// ones that become degenerate or duplicate an existing simplex are
    /// removed. A merged edge is physical if either of its sources was.
    pub fn collapse_edge(&mut self, e: EdgeId, x: Point3) -> Result<CollapseRecord, ComplexError> {
        if e >= self.edges.len() || !self.edges[e].alive {
            return Err(ComplexError::DeadEdge(e));
        }
        let [i, j] = self.edges[e].vertices;

        let mut jfaces = self.vertex_faces[j].clone();
        jfaces.sort_unstable();
        let mut jedges: Vec<EdgeId> = self.vertex_edges[j]
            .iter()
            .copied()
            .filter(|&x| x != e)
            .collect();
        jedges.sort_unstable();

        for &f in &jfaces {
            self.detach_face(f);
        }
        self.detach_edge(e);
        self.edges[e].alive = false;
        self.live_edges -= 1;
        for &ej in &jedges {
            self.detach_edge(ej);
        }

        let mut edge_changes = Vec::with_capacity(jedges.len());
        for &ej in &jedges {
            let old = self.edges[ej];
            let k = old.other(j);
            let outcome = match self.edge_lookup.get(&edge_key(i, k)).copied() {
                Some(target) => {
                    let target_old_kind = self.edges[target].kind;
                    if old.kind == EdgeKind::Physical {
                        self.edges[target].kind = EdgeKind::Physical;
                    }
                    self.edges[ej].alive = false;
                    self.live_edges -= 1;
                    EdgeOutcome::Merged {
                        into: target,
                        into_old_kind: target_old_kind,
                    }
                }
                None => {
                    let (a, b) = edge_key(i, k);
                    self.edges[ej].vertices = [a, b];
                    self.attach_edge(ej);
                    EdgeOutcome::Rewritten
                }
            };
            edge_changes.push(EdgeChange {
                id: ej,
                old_vertices: old.vertices,
                old_kind: old.kind,
                outcome,
            });
        }

        let mut face_changes = Vec::with_capacity(jfaces.len());
        for &f in &jfaces {
            let old = self.faces[f].vertices;
            let new = old.map(|v| if v == j { i } else { v });
            let outcome = if new[0] == new[1] || new[1] == new[2] || new[0] == new[2] {
                self.faces[f].alive = false;
                self.live_faces -= 1;
                FaceOutcome::Degenerate
            } else if let Some(&of) = self.face_lookup.get(&face_key(new)) {
                self.faces[f].alive = false;
                self.live_faces -= 1;
                FaceOutcome::Duplicate { of }
            } else {
                self.faces[f].vertices = new;
                self.attach_face(f);
                FaceOutcome::Rewritten
            };
            face_changes.push(FaceChange {
                id: f,
                old_vertices: old,
                outcome,
            });
        }

        debug_assert!(self.vertex_edges[j].is_empty() && self.vertex_faces[j].is_empty());
        self.vertex_alive[j] = false;
        self.live_vertices -= 1;

        let record = CollapseRecord {
            edge: e,
            edge_kind: self.edges[e].kind,
            kept: i,
            removed: j,
            kept_position: self.positions[i],
            removed_position: self.positions[j],
            new_position: x,
            edges: edge_changes,
            faces: face_changes,
        };
        self.positions[i] = x;
        Ok(record)
    }

    /// Vertex split: exactly undoes the collapse described by `record`,
    /// which must be the most recent collapse applied to `self`.
    pub fn split_vertex(&mut self, record: &CollapseRecord) {
        let (i, j) = (record.kept, record.removed);

        for fc in &record.faces {
            if fc.outcome == FaceOutcome::Rewritten {
                self.detach_face(fc.id);
            } else {
                self.live_faces += 1;
            }
        }
        for ec in &record.edges {
            match ec.outcome {
                EdgeOutcome::Rewritten => self.detach_edge(ec.id),
                EdgeOutcome::Merged {
                    into,
                    into_old_kind,
                } => {
                    self.edges[into].kind = into_old_kind;
                    self.live_edges += 1;
                }
            }
        }

        self.vertex_alive[j] = true;
        self.live_vertices += 1;
        self.positions[i] = record.kept_position;
        self.positions[j] = record.removed_position;

        let e = record.edge;
        self.edges[e] = Edge {
            vertices: [i, j],
            kind: record.edge_kind,
            alive: true,
        };
        self.live_edges += 1;
        self.attach_edge(e);
        for ec in &record.edges {
            self.edges[ec.id] = Edge {
                vertices: ec.old_vertices,
                kind: ec.old_kind,
                alive: true,
            };
            self.attach_edge(ec.id);
        }
        for fc in &record.faces {
            self.faces[fc.id] = Face {
                vertices: fc.old_vertices,
                alive: true,
            };
            self.attach_face(fc.id);
        }
    }

    /// Re-applies a recorded collapse (forward replay).
    pub fn replay_collapse(
        &mut self,
        record: &CollapseRecord,
    ) -> Result<CollapseRecord, ComplexError> {
        self.collapse_edge(record.edge, record.new_position)
    }

    // --- validation --------------------------------------------------------

    /// Star sets recomputed from the live edge and face lists.
    pub fn rebuild_stars(&self) -> StarIndex {
        let mut vertex_edges = vec![Vec::new(); self.positions.len()];
        let mut vertex_faces = vec![Vec::new(); self.positions.len()];
        let mut edge_faces = vec![Vec::new(); self.edges.len()];
        let mut lookup = HashMap::new();
        for e in self.live_edges() {
            let [a, b] = self.edges[e].vertices;
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
            lookup.insert((a, b), e);
        }
        for f in self.live_faces() {
            let v = self.faces[f].vertices;
            for k in 0..3 {
                vertex_faces[v[k]].push(f);
                if let Some(&e) = lookup.get(&edge_key(v[k], v[(k + 1) % 3])) {
                    edge_faces[e].push(f);
                }
            }
        }
        StarIndex {
            vertex_edges,
            vertex_faces,
            edge_faces,
        }
    }

    /// Current star sets, each sorted.
    pub fn stars(&self) -> StarIndex {
        let sorted = |v: &Vec<Vec<usize>>| {
            v.iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sort_unstable();
                    s
                })
                .collect::<Vec<_>>()
        };
        StarIndex {
            vertex_edges: sorted(&self.vertex_edges),
            vertex_faces: sorted(&self.vertex_faces),
            edge_faces: sorted(&self.edge_faces),
        }
    }

    /// Checks every structural invariant; intended for tests and debug runs.
    pub fn validate(&self) -> Result<(), ComplexError> {
        let fail = |msg: String| Err(ComplexError::Invariant(msg));

        let live_v = self.live_vertices().count();
        let live_e = self.live_edges().count();
        let live_f = self.live_faces().count();
        if (live_v, live_e, live_f) != (self.live_vertices, self.live_edges, self.live_faces) {
            return fail(format!(
                "live counters ({}, {}, {}) disagree with flags ({live_v}, {live_e}, {live_f})",
                self.live_vertices, self.live_edges, self.live_faces
            ));
        }
        if self.edge_lookup.len() != live_e || self.face_lookup.len() != live_f {
            return fail("lookup tables out of sync with live elements".into());
        }
        for e in self.live_edges() {
            let [a, b] = self.edges[e].vertices;
            if a >= b {
                return fail(format!("edge {e} endpoints ({a},{b}) not strictly ordered"));
            }
            if !self.vertex_alive[a] || !self.vertex_alive[b] {
                return fail(format!("edge {e} references a dead vertex"));
            }
            if self.edge_lookup.get(&(a, b)) != Some(&e) {
                return fail(format!("edge {e} missing from lookup or duplicated"));
            }
        }
        for f in self.live_faces() {
            let v = self.faces[f].vertices;
            if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                return fail(format!("face {f} is degenerate: {v:?}"));
            }
            if v.iter().any(|&x| !self.vertex_alive[x]) {
                return fail(format!("face {f} references a dead vertex"));
            }
            if self.face_lookup.get(&face_key(v)) != Some(&f) {
                return fail(format!("face {f} missing from lookup or duplicated"));
            }
            for k in 0..3 {
                match self.find_edge(v[k], v[(k + 1) % 3]) {
                    Some(e) if self.edges[e].alive && self.edges[e].kind == EdgeKind::Physical => {}
                    _ => return fail(format!("face {f} side {k} is not a live physical edge")),
                }
            }
        }
        if self.rebuild_stars() != self.stars() {
            return fail("star indices differ from a full rebuild".into());
        }
        Ok(())
    }

    /// Checks the stars of `verts` and everything they reference. Costs
    /// time proportional to those stars, so it can run after every collapse;
    /// [`Self::validate`] remains the complete check.
    pub fn validate_local(&self, verts: &[VertexId]) -> Result<(), ComplexError> {
        let fail = |msg: String| Err(ComplexError::Invariant(msg));
        let unique = |list: &[usize]| {
            let mut s = list.to_vec();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        };
        for &v in verts {
            if !self.vertex_alive[v] {
                if !self.vertex_edges[v].is_empty() || !self.vertex_faces[v].is_empty() {
                    return fail(format!("dead vertex {v} keeps a non-empty star"));
                }
                continue;
            }
            if !unique(&self.vertex_edges[v]) || !unique(&self.vertex_faces[v]) {
                return fail(format!("vertex {v} star lists a simplex twice"));
            }
            for &e in &self.vertex_edges[v] {
                let edge = &self.edges[e];
                let [a, b] = edge.vertices;
                if !edge.alive || !edge.vertices.contains(&v) || a >= b {
                    return fail(format!("vertex {v} star holds bad edge {e}"));
                }
                if !self.vertex_alive[a]
                    || !self.vertex_alive[b]
                    || self.edge_lookup.get(&(a, b)) != Some(&e)
                {
                    return fail(format!("edge {e} has a dead endpoint or a stale lookup"));
                }
                if !unique(&self.edge_faces[e]) {
                    return fail(format!("edge {e} star lists a face twice"));
                }
                for &f in &self.edge_faces[e] {
                    let fv = self.faces[f].vertices;
                    if !self.faces[f].alive || !fv.contains(&a) || !fv.contains(&b) {
                        return fail(format!("edge {e} star holds bad face {f}"));
                    }
                }
            }
            for &f in &self.vertex_faces[v] {
                let fv = self.faces[f].vertices;
                if !self.faces[f].alive || !fv.contains(&v) {
                    return fail(format!("vertex {v} star holds bad face {f}"));
                }
                if fv[0] == fv[1] || fv[1] == fv[2] || fv[0] == fv[2] {
                    return fail(format!("face {f} is degenerate: {fv:?}"));
                }
                if self.face_lookup.get(&face_key(fv)) != Some(&f) {
                    return fail(format!("face {f} missing from lookup or duplicated"));
                }
                for k in 0..3 {
                    let (a, b) = (fv[k], fv[(k + 1) % 3]);
                    if !self.vertex_faces[a].contains(&f) {
                        return fail(format!("face {f} absent from the star of vertex {a}"));
                    }
                    match self.find_edge(a, b) {
                        Some(e)
                            if self.edges[e].alive
                                && self.edges[e].kind == EdgeKind::Physical
                                && self.edge_faces[e].contains(&f) =>
                        {
                            if (a == v || b == v) && !self.vertex_edges[v].contains(&e) {
                                return fail(format!(
                                    "edge {e} absent from the star of vertex {v}"
                                ));
                            }
                        }
                        _ => return fail(format!("face {f} side {k} is not a live physical edge")),
                    }
                }
            }
        }
        Ok(())
    }

    /// Renumbers the live elements densely, preserving their relative order.
    pub fn compacted(&self) -> (SimplicialComplex2, Compaction) {
        let mut out = SimplicialComplex2::new();
        let mut map = Compaction {
            vertex_map: vec![None; self.positions.len()],
            edge_map: vec![None; self.edges.len()],
            face_map: vec![None; self.faces.len()],
        };
        for v in self.live_vertices() {
            map.vertex_map[v] = Some(out.add_vertex(self.positions[v]));
        }
        let vm = |v: VertexId| map.vertex_map[v].expect("live simplex references dead vertex");
        for e in self.live_edges() {
            let [a, b] = self.edges[e].vertices;
            map.edge_map[e] = out.add_edge(vm(a), vm(b), self.edges[e].kind);
        }
        for f in self.live_faces() {
            let v = self.faces[f].vertices.map(vm);
            map.face_map[f] = out.add_face(v);
        }
        (out, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetrahedron() -> SimplicialComplex2 {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        SimplicialComplex2::from_triangles(pts, &[[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
    }

    /// Sorted live simplices, independent of ids.
    fn simplices(
        c: &SimplicialComplex2,
    ) -> (Vec<VertexId>, Vec<[VertexId; 2]>, Vec<[VertexId; 3]>) {
        let v: Vec<_> = c.live_vertices().collect();
        let mut e: Vec<_> = c.live_edges().map(|e| c.edge(e).vertices).collect();
        e.sort();
        let mut f: Vec<_> = c
            .live_faces()
            .map(|f| face_key(c.face(f).vertices))
            .collect();
        f.sort();
        (v, e, f)
    }

    #[test]
    fn tetrahedron_collapse_counts() {
        let mut c = tetrahedron();
        c.validate().unwrap();
        let e = c.find_edge(0, 1).unwrap();
        let rec = c.collapse_edge(e, Point3::new(0.5, 0.0, 0.0)).unwrap();
        c.validate().unwrap();
        assert_eq!(
            (
                c.live_vertex_count(),
                c.live_edge_count(),
                c.live_face_count()
            ),
            (3, 3, 1)
        );
        // Hand enumeration: vertex 1 merges into 0; faces 012 and 013 degenerate,
        // 123 becomes 023 which duplicates the existing 032.
        let (v, e, f) = simplices(&c);
        assert_eq!(v, vec![0, 2, 3]);
        assert_eq!(e, vec![[0, 2], [0, 3], [2, 3]]);
        assert_eq!(f, vec![[0, 2, 3]]);
        assert_eq!(rec.kept, 0);
        assert_eq!(rec.removed, 1);
    }

    #[test]
    fn shared_edge_collapse_counts() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
            Point3::new(0.5, -1.0, 0.0),
        ];
        let mut c = SimplicialComplex2::from_triangles(pts, &[[0, 1, 2], [1, 0, 3]]);
        assert_eq!(
            (
                c.live_vertex_count(),
                c.live_edge_count(),
                c.live_face_count()
            ),
            (4, 5, 2)
        );
        let e = c.find_edge(0, 1).unwrap();
        c.collapse_edge(e, Point3::new(0.5, 0.0, 0.0)).unwrap();
        c.validate().unwrap();
        let (v, e, f) = simplices(&c);
        assert_eq!(v, vec![0, 2, 3]);
        assert_eq!(e, vec![[0, 2], [0, 3]]);
        assert!(f.is_empty());
    }

    #[test]
    fn dead_edge_is_an_error() {
        let mut c = tetrahedron();
        let e = c.find_edge(0, 1).unwrap();
        c.collapse_edge(e, Point3::origin()).unwrap();
        assert_eq!(
            c.collapse_edge(e, Point3::origin()),
            Err(ComplexError::DeadEdge(e))
        );
    }

    #[test]
    fn split_restores_exactly() {
        let mut c = tetrahedron();
        let before = (simplices(&c), c.positions().to_vec());
        let e = c.find_edge(1, 3).unwrap();
        let rec = c.collapse_edge(e, Point3::new(0.3, 0.3, 0.3)).unwrap();
        c.split_vertex(&rec);
        c.validate().unwrap();
        assert_eq!((simplices(&c), c.positions().to_vec()), before);
        // Face orientation survives the round trip too.
        for f in c.live_faces() {
            assert_eq!(c.face(f).vertices, tetrahedron().face(f).vertices);
        }
    }

    #[test]
    fn merged_virtual_edge_becomes_physical_and_back() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ];
        let mut c = SimplicialComplex2::from_triangles(pts, &[[1, 2, 3]]);
        let v02 = c.add_edge(0, 2, EdgeKind::Virtual).unwrap();
        let v01 = c.add_edge(0, 1, EdgeKind::Virtual).unwrap();
        let rec = c.collapse_edge(v01, Point3::new(0.5, 0.0, 0.0)).unwrap();
        c.validate().unwrap();
        assert_eq!(c.edge(v02).kind, EdgeKind::Physical);
        assert_eq!(c.live_face_count(), 1);
        c.split_vertex(&rec);
        c.validate().unwrap();
        assert_eq!(c.edge(v02).kind, EdgeKind::Virtual);
        assert_eq!(c.edge(v01).kind, EdgeKind::Virtual);
    }

    #[test]
    fn compaction_renumbers_densely() {
        let mut c = tetrahedron();
        let e = c.find_edge(0, 3).unwrap();
        c.collapse_edge(e, Point3::origin()).unwrap();
        let (out, map) = c.compacted();
        out.validate().unwrap();
        assert_eq!(out.vertex_count(), c.live_vertex_count());
        assert_eq!(out.face_count(), c.live_face_count());
        assert_eq!(map.vertex_map[3], None);
    }

    #[test]
    fn local_check_catches_a_broken_star() {
        let mut c = tetrahedron();
        c.validate_local(&[0, 1, 2, 3]).unwrap();
        let f = c.vertex_faces[0][0];
        c.vertex_faces[0].push(f);
        assert!(c.validate_local(&[0]).is_err());
        c.vertex_faces[0].pop();
        let e = c.find_edge(1, 2).unwrap();
        c.edge_faces[e].clear();
        assert!(c.validate_local(&[1]).is_err());
    }
}
