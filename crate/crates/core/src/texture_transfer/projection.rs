use rayon::prelude::*;

use super::sampling::{Host, SurfaceSample};
use crate::complex_build::Bvh;
use crate::core_types::{CollapseRecord, SimplicialComplex2};
use crate::geometry::{closest_point_on_segment, closest_point_on_triangle, Aabb, Point3};

/// Closest point on one host simplex: `(squared distance, barycentrics)`.
pub fn project_onto(mesh: &SimplicialComplex2, host: Host, p: &Point3) -> (f64, [f64; 3]) {
    match host {
        Host::Face(f) => {
            let [a, b, c] = mesh.face_positions(f);
            let (q, w) = closest_point_on_triangle(p, &a, &b, &c);
            ((q - p).norm_squared(), w)
        }
        Host::Edge(e) => {
            let [a, b] = mesh.edge(e).vertices;
            let (q, t) = closest_point_on_segment(p, &mesh.position(a), &mesh.position(b));
            ((q - p).norm_squared(), [1.0 - t, t, 0.0])
        }
        Host::Vertex(v) => ((mesh.position(v) - p).norm_squared(), [1.0, 0.0, 0.0]),
    }
}

/// Best of `candidates` for `p`; ties keep the earlier candidate.
pub fn closest_among(
    mesh: &SimplicialComplex2,
    candidates: &[Host],
    p: &Point3,
) -> Option<(Host, [f64; 3], f64)> {
    let mut best: Option<(Host, [f64; 3], f64)> = None;
    for &h in candidates {
        let (d, w) = project_onto(mesh, h, p);
        if best.is_none_or(|b| d < b.2) {
            best = Some((h, w, d));
        }
    }
    best
}

/// Projection targets for the split that restored `record.edge`: the edge
/// one-ring faces, else the faceless edges at either endpoint, else the two
/// endpoints themselves.
pub fn split_candidates(mesh: &SimplicialComplex2, record: &CollapseRecord) -> Vec<Host> {
    let faces = mesh.edge_one_ring_faces(record.edge);
    if !faces.is_empty() {
        return faces.into_iter().map(Host::Face).collect();
    }
    let mut edges: Vec<_> = [record.kept, record.removed]
        .iter()
        .flat_map(|&v| mesh.vertex_edges(v).iter().copied())
        .filter(|&e| mesh.edge_faces(e).is_empty())
        .collect();
    edges.sort_unstable();
    edges.dedup();
    if !edges.is_empty() {
        return edges.into_iter().map(Host::Edge).collect();
    }
    vec![
        Host::Vertex(record.kept.min(record.removed)),
        Host::Vertex(record.kept.max(record.removed)),
    ]
}

/// Everything a sample can land on in `mesh`: live faces, faceless edges
/// and isolated vertices.
pub fn all_targets(mesh: &SimplicialComplex2) -> Vec<Host> {
    let mut t: Vec<Host> = mesh.live_faces().map(Host::Face).collect();
    t.extend(mesh.dangling_edges().map(Host::Edge));
    t.extend(
        mesh.live_vertices()
            .filter(|&v| mesh.vertex_edges(v).is_empty())
            .map(Host::Vertex),
    );
    t
}

/// Global closest-point projection onto a mesh.
pub struct GlobalProjector<'a> {
    mesh: &'a SimplicialComplex2,
    targets: Vec<Host>,
    bvh: Bvh,
}

impl<'a> GlobalProjector<'a> {
    pub fn new(mesh: &'a SimplicialComplex2) -> Self {
        let targets = all_targets(mesh);
        let boxes = targets
            .iter()
            .enumerate()
            .map(|(k, &h)| {
                let b = match h {
                    Host::Face(f) => Aabb::from_points(mesh.face_positions(f).iter()),
                    Host::Edge(e) => {
                        let [a, b] = mesh.edge(e).vertices;
                        Aabb::from_points([mesh.position(a), mesh.position(b)].iter())
                    }
                    Host::Vertex(v) => Aabb::from_points([mesh.position(v)].iter()),
                };
                (k, b)
            })
            .collect();
        Self {
            mesh,
            bvh: Bvh::new(boxes),
            targets,
        }
    }

    pub fn project(&self, p: &Point3) -> Option<(Host, [f64; 3], f64)> {
        let (k, d) = self
            .bvh
            .nearest(p, |k| project_onto(self.mesh, self.targets[k], p).0)?;
        let h = self.targets[k];
        Some((h, project_onto(self.mesh, h, p).1, d))
    }

    /// Moves every sample to its global closest point.
    pub fn project_all(&self, samples: &mut [SurfaceSample]) {
        samples.par_iter_mut().for_each(|s| {
            if let Some((h, w, _)) = self.project(&s.position) {
                s.host = h;
                s.host_bary = w;
            }
        });
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionStats {
    /// Individual re-projections performed during the walk.
    pub reprojections: usize,
    /// Samples that lost every candidate and were projected globally.
    pub global_fallbacks: usize,
}

/// Hosts grouped per simplex so a split only touches the samples it affects.
struct HostIndex {
    faces: Vec<Vec<usize>>,
    edges: Vec<Vec<usize>>,
    vertices: Vec<Vec<usize>>,
}

impl HostIndex {
    fn new(mesh: &SimplicialComplex2, samples: &[SurfaceSample]) -> Self {
        let mut idx = Self {
            faces: vec![Vec::new(); mesh.face_count()],
            edges: vec![Vec::new(); mesh.edge_count()],
            vertices: vec![Vec::new(); mesh.vertex_count()],
        };
        for (k, s) in samples.iter().enumerate() {
            idx.slot(s.host).push(k);
        }
        idx
    }

    fn slot(&mut self, h: Host) -> &mut Vec<usize> {
        match h {
            Host::Face(f) => &mut self.faces[f],
            Host::Edge(e) => &mut self.edges[e],
            Host::Vertex(v) => &mut self.vertices[v],
        }
    }
}

/// Walks the collapse history backwards from `simplified` (the mesh after
/// the last record), re-projecting the samples hosted in the star of each
/// split vertex onto the restored edge one-ring. Leaves `simplified` equal
/// to the starting mesh of the history.
pub fn successive_project(
    simplified: &mut SimplicialComplex2,
    history: &[CollapseRecord],
    samples: &mut [SurfaceSample],
) -> ProjectionStats {
    let mesh = simplified;
    let mut stats = ProjectionStats::default();
    let mut index = HostIndex::new(mesh, samples);
    for record in history.iter().rev() {
        let v = record.kept;
        let mut moved: Vec<usize> = Vec::new();
        for &f in mesh.vertex_faces(v) {
            moved.append(&mut index.faces[f]);
        }
        for &e in mesh.vertex_edges(v) {
            moved.append(&mut index.edges[e]);
        }
        moved.append(&mut index.vertices[v]);

        mesh.split_vertex(record);
        if moved.is_empty() {
            continue;
        }
        moved.sort_unstable();
        let candidates = split_candidates(mesh, record);
        let m: &SimplicialComplex2 = mesh;
        let results: Vec<Option<(Host, [f64; 3], f64)>> = if moved.len() > 256 {
            moved
                .par_iter()
                .map(|&k| closest_among(m, &candidates, &samples[k].position))
                .collect()
        } else {
            moved
                .iter()
                .map(|&k| closest_among(m, &candidates, &samples[k].position))
                .collect()
        };
        for (&k, res) in moved.iter().zip(results) {
            stats.reprojections += 1;
            if let Some((h, w, _)) = res {
                samples[k].host = h;
                samples[k].host_bary = w;
                index.slot(h).push(k);
            }
        }
    }

    // Any sample whose host did not survive to the start mesh goes global.
    let alive = |h: Host| match h {
        Host::Face(f) => mesh.face(f).alive,
        Host::Edge(e) => mesh.edge(e).alive,
        Host::Vertex(v) => mesh.is_vertex_alive(v),
    };
    let lost: Vec<usize> = (0..samples.len())
        .filter(|&k| !alive(samples[k].host))
        .collect();
    if !lost.is_empty() {
        let global = GlobalProjector::new(mesh);
        for k in lost {
            if let Some((h, w, _)) = global.project(&samples[k].position) {
                samples[k].host = h;
                samples[k].host_bary = w;
            }
            stats.global_fallbacks += 1;
        }
    }
    stats
}
