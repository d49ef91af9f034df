//! Greedy edge-collapse decimation driven by the combined edge and area
//! quadric cost.

mod config;
mod topology;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use config::{Accumulation, ConfigError, DecimationConfig, Target};
pub use topology::{check_collapse, Rejection};

use crate::complex_build::{build_virtual_edges, component_labels, insert_virtual_edges};
use crate::core_types::{
    CollapseRecord, ComplexError, EdgeId, FaceOutcome, Quadric, SimplicialComplex2, VertexId,
};
use crate::geometry::Point3;
use crate::quadrics::{
    area_quadric_for_edge, optimal_placement, vertex_area_quadric, vertex_quadric, Placement,
};

#[derive(Debug, Error)]
pub enum DecimateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invariant violated after collapse {step}: {source}")]
    Invariant {
        step: usize,
        #[source]
        source: ComplexError,
    },
}

/// Scored candidate collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCost {
    pub edge: EdgeId,
    /// Combined error at `position`, clamped at zero.
    pub value: f64,
    pub position: Point3,
    pub generation: u32,
}

/// Per-vertex quadric state.
#[derive(Debug, Clone)]
pub struct VertexQuadrics {
    /// Edge-quadric part: accumulated in memory mode, current one-ring sum
    /// in memoryless mode.
    pub edge: Vec<Quadric>,
    /// Accumulated area quadrics; empty unless the area term runs in
    /// memory mode.
    pub area: Vec<Quadric>,
}

impl VertexQuadrics {
    pub fn new(mesh: &SimplicialComplex2, cfg: &DecimationConfig) -> Self {
        let n = mesh.vertex_count();
        let edge = (0..n)
            .into_par_iter()
            .map(|v| vertex_quadric(mesh, v))
            .collect();
        let area = if cfg.area_quadric_mode == Accumulation::Memory {
            (0..n)
                .into_par_iter()
                .map(|v| vertex_area_quadric(mesh, v, cfg.area_support))
                .collect()
        } else {
            Vec::new()
        };
        Self { edge, area }
    }
}

/// The area quadric an edge is scored with under `cfg`.
pub fn area_term(
    mesh: &SimplicialComplex2,
    vq: &VertexQuadrics,
    e: EdgeId,
    cfg: &DecimationConfig,
) -> Quadric {
    match cfg.area_quadric_mode {
        Accumulation::Memoryless => area_quadric_for_edge(mesh, e, cfg.area_support),
        Accumulation::Memory => {
            let [i, j] = mesh.edge(e).vertices;
            vq.area[i] + vq.area[j]
        }
    }
}

/// Scores collapsing `e`: `Q_i + Q_j + λ·Q_area` (plus the optional
/// regularizer), minimized over the placement.
pub fn edge_cost(
    mesh: &SimplicialComplex2,
    vq: &VertexQuadrics,
    e: EdgeId,
    cfg: &DecimationConfig,
) -> EdgeCost {
    let placement = edge_placement(mesh, vq, e, cfg);
    EdgeCost {
        edge: e,
        value: placement.value.max(0.0),
        position: placement.position,
        generation: 0,
    }
}

fn combined_quadric(
    mesh: &SimplicialComplex2,
    vq: &VertexQuadrics,
    e: EdgeId,
    cfg: &DecimationConfig,
) -> Quadric {
    let [i, j] = mesh.edge(e).vertices;
    let mut q = vq.edge[i] + vq.edge[j];
    if cfg.area_weight > 0.0 {
        q += area_term(mesh, vq, e, cfg) * cfg.area_weight;
    }
    if cfg.regularization > 0.0 {
        let m = nalgebra::center(&mesh.position(i), &mesh.position(j)).coords;
        let reg = Quadric::from_parts(&nalgebra::Matrix3::identity(), -m, m.dot(&m));
        q += reg * (cfg.regularization * cfg.regularization);
    }
    q
}

fn edge_placement(
    mesh: &SimplicialComplex2,
    vq: &VertexQuadrics,
    e: EdgeId,
    cfg: &DecimationConfig,
) -> Placement {
    let [i, j] = mesh.edge(e).vertices;
    let (pi, pj) = (mesh.position(i), mesh.position(j));
    let q = combined_quadric(mesh, vq, e, cfg);
    optimal_placement(&q, &[nalgebra::center(&pi, &pj), pi, pj])
}

/// Updates per-vertex quadrics after `record` was applied to `mesh`.
///
/// Memory mode sums the removed vertex's quadrics into the kept one;
/// memoryless edge quadrics are recomputed for every vertex in `affected`.
pub fn update_quadrics_after_collapse(
    mesh: &SimplicialComplex2,
    vq: &mut VertexQuadrics,
    record: &CollapseRecord,
    affected: &[VertexId],
    cfg: &DecimationConfig,
) {
    let (i, j) = (record.kept, record.removed);
    match cfg.edge_quadric_mode {
        Accumulation::Memory => vq.edge[i] = vq.edge[i] + vq.edge[j],
        Accumulation::Memoryless => {
            for &v in affected {
                vq.edge[v] = vertex_quadric(mesh, v);
            }
        }
    }
    vq.edge[j] = Quadric::zero();
    if cfg.area_quadric_mode == Accumulation::Memory {
        vq.area[i] = vq.area[i] + vq.area[j];
        vq.area[j] = Quadric::zero();
    }
}

/// Vertices whose incident edge costs may change through the collapse:
/// the kept vertex, the vertices of every face it touched, and the
/// vertices of faces on edges whose face count changed.
pub fn affected_vertices(mesh: &SimplicialComplex2, record: &CollapseRecord) -> Vec<VertexId> {
    let (i, j) = (record.kept, record.removed);
    let remap = |v: VertexId| if v == j { i } else { v };
    let mut verts = vec![i];
    let mut edges: Vec<EdgeId> = mesh.vertex_edges(i).to_vec();
    for &f in mesh.vertex_faces(i) {
        verts.extend(mesh.face(f).vertices);
    }
    for fc in &record.faces {
        let v = fc.old_vertices.map(remap);
        verts.extend(v);
        if fc.outcome != FaceOutcome::Rewritten {
            for k in 0..3 {
                if let Some(e) = mesh.find_edge(v[k], v[(k + 1) % 3]) {
                    edges.push(e);
                }
            }
        }
    }
    for e in edges {
        for &f in mesh.edge_faces(e) {
            verts.extend(mesh.face(f).vertices);
        }
    }
    verts.sort_unstable();
    verts.dedup();
    verts.retain(|&v| mesh.is_vertex_alive(v));
    verts
}

/// Details of one accepted collapse.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseLog {
    pub edge: EdgeId,
    pub vertices: [VertexId; 2],
    pub cost: f64,
    pub position: [f64; 3],
    pub faces_after: usize,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    pub virtual_edges: f64,
    pub collapses: f64,
}

#[derive(Debug, Clone)]
pub struct DecimationResult {
    pub mesh: SimplicialComplex2,
    /// The complex the history starts from (input plus virtual edges);
    /// kept only when history is recorded.
    pub initial: Option<SimplicialComplex2>,
    pub history: Vec<CollapseRecord>,
    pub log: Vec<CollapseLog>,
    pub target_faces: usize,
    pub target_reached: bool,
    pub virtual_edges: usize,
    pub rejected: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    edge: EdgeId,
    generation: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed so the max-heap pops the cheapest edge, lowest id first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| other.generation.cmp(&self.generation))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// What one call to [`Decimator::step`] did.
#[derive(Debug, Clone)]
pub struct Step {
    pub record: CollapseRecord,
    pub cost: f64,
    /// Area quadric the accepted collapse was scored with.
    pub area_quadric: Quadric,
    /// Edge quadrics of the two endpoints just before the collapse.
    pub parent_quadrics: [Quadric; 2],
}

/// Collapse loop state: the complex, per-vertex quadrics and a lazy
/// priority queue keyed by edge generation.
pub struct Decimator {
    mesh: SimplicialComplex2,
    cfg: DecimationConfig,
    quadrics: VertexQuadrics,
    queue: BinaryHeap<Entry>,
    generation: Vec<u32>,
    positions: Vec<Point3>,
    rejected: usize,
}

impl Decimator {
    pub fn new(mesh: SimplicialComplex2, cfg: DecimationConfig) -> Self {
        let quadrics = VertexQuadrics::new(&mesh, &cfg);
        let edges: Vec<EdgeId> = mesh.live_edges().collect();
        let costs: Vec<EdgeCost> = edges
            .par_iter()
            .map(|&e| edge_cost(&mesh, &quadrics, e, &cfg))
            .collect();
        let mut positions = vec![Point3::origin(); mesh.edge_count()];
        let queue = costs
            .into_iter()
            .map(|c| {
                positions[c.edge] = c.position;
                Entry {
                    cost: c.value,
                    edge: c.edge,
                    generation: 0,
                }
            })
            .collect();
        Self {
            generation: vec![0; mesh.edge_count()],
            mesh,
            cfg,
            quadrics,
            queue,
            positions,
            rejected: 0,
        }
    }

    pub fn mesh(&self) -> &SimplicialComplex2 {
        &self.mesh
    }

    pub fn quadrics(&self) -> &VertexQuadrics {
        &self.quadrics
    }

    pub fn config(&self) -> &DecimationConfig {
        &self.cfg
    }

    /// Live edges currently queued with an up-to-date entry, and their costs.
    pub fn queued_costs(&self) -> Vec<(EdgeId, f64)> {
        let mut v: Vec<(EdgeId, f64)> = self
            .queue
            .iter()
            .filter(|en| self.is_current(en))
            .map(|en| (en.edge, en.cost))
            .collect();
        v.sort_unstable_by_key(|x| x.0);
        v
    }

    fn is_current(&self, en: &Entry) -> bool {
        self.mesh.edge(en.edge).alive && self.generation[en.edge] == en.generation
    }

    fn push(&mut self, e: EdgeId) {
        self.generation[e] += 1;
        let c = edge_cost(&self.mesh, &self.quadrics, e, &self.cfg);
        self.positions[e] = c.position;
        self.queue.push(Entry {
            cost: c.value,
            edge: e,
            generation: self.generation[e],
        });
    }

    /// Pops entries until one collapses; `None` once the queue is empty.
    pub fn step(&mut self) -> Option<Step> {
        while let Some(en) = self.queue.pop() {
            if !self.is_current(&en) {
                continue;
            }
            let e = en.edge;
            let x = self.positions[e];
            if self.cfg.preserve_topology && check_collapse(&self.mesh, e, &x).is_err() {
                self.rejected += 1;
                continue;
            }
            let [i, j] = self.mesh.edge(e).vertices;
            let area_quadric = if self.cfg.area_weight > 0.0 {
                area_term(&self.mesh, &self.quadrics, e, &self.cfg)
            } else {
                Quadric::zero()
            };
            let parent_quadrics = [self.quadrics.edge[i], self.quadrics.edge[j]];
            let record = self.mesh.collapse_edge(e, x).expect("queued edge is alive");

            let affected = if self.cfg.wide_recost() {
                affected_vertices(&self.mesh, &record)
            } else {
                vec![record.kept]
            };
            update_quadrics_after_collapse(
                &self.mesh,
                &mut self.quadrics,
                &record,
                &affected,
                &self.cfg,
            );
            let mut recost: Vec<EdgeId> = affected
                .iter()
                .flat_map(|&v| self.mesh.vertex_edges(v).iter().copied())
                .collect();
            recost.sort_unstable();
            recost.dedup();
            for r in recost {
                self.push(r);
            }
            return Some(Step {
                record,
                cost: en.cost,
                area_quadric,
                parent_quadrics,
            });
        }
        None
    }

    /// Collapses until the live face count is at most `target_faces` or the
    /// queue runs dry.
    pub fn run(mut self, target_faces: usize) -> Result<DecimationResult, DecimateError> {
        let start = Instant::now();
        let initial = self.cfg.record_history.then(|| self.mesh.clone());
        let mut history = Vec::new();
        let mut log = Vec::new();
        while self.mesh.live_face_count() > target_faces {
            let Some(step) = self.step() else { break };
            if self.cfg.validate {
                let r = &step.record;
                let mut around = vec![r.kept, r.removed];
                for &e in self.mesh.vertex_edges(r.kept) {
                    around.push(self.mesh.edge(e).other(r.kept));
                }
                self.mesh
                    .validate_local(&around)
                    .map_err(|source| DecimateError::Invariant {
                        step: log.len(),
                        source,
                    })?;
            }
            let p = step.record.new_position;
            log.push(CollapseLog {
                edge: step.record.edge,
                vertices: [step.record.kept, step.record.removed],
                cost: step.cost,
                position: [p.x, p.y, p.z],
                faces_after: self.mesh.live_face_count(),
            });
            if self.cfg.record_history {
                history.push(step.record);
            }
        }
        if self.cfg.validate {
            self.mesh
                .validate()
                .map_err(|source| DecimateError::Invariant {
                    step: log.len(),
                    source,
                })?;
        }
        let target_reached = self.mesh.live_face_count() <= target_faces;
        if !target_reached {
            log::warn!(
                "queue exhausted at {} faces, target was {}",
                self.mesh.live_face_count(),
                target_faces
            );
        }
        Ok(DecimationResult {
            mesh: self.mesh,
            initial,
            history,
            log,
            target_faces,
            target_reached,
            virtual_edges: 0,
            rejected: self.rejected,
            timings: Timings {
                virtual_edges: 0.0,
                collapses: start.elapsed().as_secs_f64(),
            },
        })
    }
}

/// Adds virtual edges (when enabled) and runs the collapse loop to the
/// configured target.
pub fn decimate(
    mut mesh: SimplicialComplex2,
    cfg: &DecimationConfig,
) -> Result<DecimationResult, DecimateError> {
    cfg.check()?;
    let target_faces = cfg.target.face_count(mesh.live_face_count());
    let start = Instant::now();
    let mut added = 0;
    if cfg.enable_virtual_edges {
        let eps = cfg.eps_rel * mesh.bbox().diagonal();
        let labels = component_labels(&mesh, false);
        let edges = build_virtual_edges(&mesh, &labels, eps, cfg.virtual_edge_cap);
        added = insert_virtual_edges(&mut mesh, &edges);
        log::info!("{added} virtual edges across {} components", labels.count);
    }
    let ve_time = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut result = Decimator::new(mesh, cfg.clone()).run(target_faces)?;
    result.virtual_edges = added;
    result.timings = Timings {
        virtual_edges: ve_time,
        collapses: start.elapsed().as_secs_f64(),
    };
    Ok(result)
}
