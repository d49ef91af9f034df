//! Sampled surface distances and color error between two meshes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_types::{FaceId, SimplicialComplex2};
use crate::geometry::Point3;
use crate::mesh_io::Rgb;
use crate::texture_transfer::{ColorSource, GlobalProjector, Host};

pub const DEFAULT_SAMPLES: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("mesh has no live vertices")]
    Empty,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("texture error needs colors on both meshes")]
    Uncolored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Distances divided by the diagonal of the union bounding box.
    UnitDiagonal,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub samples: usize,
    pub seed: u64,
    pub normalization: Normalization,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            normalization: Normalization::UnitDiagonal,
        }
    }
}

/// Points on a mesh with the simplex and barycentrics they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub hosts: Vec<(Host, [f64; 3])>,
    /// Set when the mesh had no area and only vertices were sampled.
    pub zero_area: bool,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n` area-weighted uniform samples followed by every live vertex.
///
/// Each random sample draws exactly three numbers from a ChaCha8 stream,
/// so the samples for `n` are a prefix of those for any larger count.
pub fn sample_surface(
    mesh: &SimplicialComplex2,
    n: usize,
    seed: u64,
) -> Result<PointCloud, MetricsError> {
    if n == 0 {
        return Err(MetricsError::NoSamples);
    }
    if mesh.live_vertex_count() == 0 {
        return Err(MetricsError::Empty);
    }
    let faces: Vec<FaceId> = mesh.live_faces().collect();
    let mut cdf = Vec::with_capacity(faces.len());
    let mut total = 0.0;
    for &f in &faces {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    let mut cloud = PointCloud {
        points: Vec::with_capacity(n + mesh.live_vertex_count()),
        hosts: Vec::with_capacity(n + mesh.live_vertex_count()),
        zero_area: total.is_nan() || total <= 0.0,
    };
    if cloud.zero_area {
        log::warn!("zero-area mesh: sampling vertices only");
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n {
            let t: f64 = rng.random::<f64>() * total;
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let k = cdf.partition_point(|&c| c <= t).min(faces.len() - 1);
            let s = r1.sqrt();
            let w = [1.0 - s, s * (1.0 - r2), s * r2];
            let [a, b, c] = mesh.face_positions(faces[k]);
            cloud.points.push(a + (b - a) * w[1] + (c - a) * w[2]);
            cloud.hosts.push((Host::Face(faces[k]), w));
        }
    }
    for v in mesh.live_vertices() {
        cloud.points.push(mesh.position(v));
        // Prefer a face host so texture lookups work at vertices.
        let host = match mesh.vertex_faces(v).first() {
            Some(&f) => {
                let mut w = [0.0; 3];
                w[mesh.face(f).vertices.iter().position(|&u| u == v).unwrap()] = 1.0;
                (Host::Face(f), w)
            }
            None => (Host::Vertex(v), [1.0, 0.0, 0.0]),
        };
        cloud.hosts.push(host);
    }
    Ok(cloud)
}

/// A mesh with an optional color lookup.
pub struct Surface<'a> {
    pub mesh: &'a SimplicialComplex2,
    pub colors: Option<&'a ColorSource<'a>>,
}

impl<'a> Surface<'a> {
    pub fn new(mesh: &'a SimplicialComplex2) -> Self {
        Self { mesh, colors: None }
    }

    pub fn with_colors(mesh: &'a SimplicialComplex2, colors: &'a ColorSource<'a>) -> Self {
        Self {
            mesh,
            colors: Some(colors),
        }
    }

    fn color(&self, host: Host, w: &[f64; 3]) -> Option<Rgb> {
        self.colors.map(|c| c.color(self.mesh, host, w).0)
    }
}

/// Per-sample results of measuring `from`'s cloud against `to`.
struct Directed {
    dist2: Vec<f64>,
    color_err: Option<Vec<f64>>,
}

fn directed(
    from: &Surface<'_>,
    cloud: &PointCloud,
    to: &Surface<'_>,
    with_color: bool,
) -> Directed {
    let proj = GlobalProjector::new(to.mesh);
    let rows: Vec<(f64, Option<f64>)> = cloud
        .points
        .par_iter()
        .zip(cloud.hosts.par_iter())
        .map(|(p, (h, w))| {
            let (th, tw, d2) = proj.project(p).expect("target mesh is non-empty");
            let err = with_color.then(|| {
                let a = from.color(*h, w).unwrap();
                let b = to.color(th, &tw).unwrap();
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
            });
            (d2, err)
        })
        .collect();
    Directed {
        dist2: rows.iter().map(|r| r.0).collect(),
        color_err: with_color.then(|| rows.iter().map(|r| r.1.unwrap()).collect()),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub hausdorff: f64,
    pub chamfer_ms: f64,
    pub texture_chamfer: Option<f64>,
    #[serde(rename = "N")]
    pub samples: usize,
    pub seed: u64,
    pub normalization: Normalization,
    /// Length distances were divided by.
    pub scale: f64,
}

/// All metrics from one pair of sample clouds. Texture error is computed
/// when both surfaces carry colors.
pub fn compare(
    a: &Surface<'_>,
    b: &Surface<'_>,
    opts: &MetricOptions,
) -> Result<MetricReport, MetricsError> {
    let ca = sample_surface(a.mesh, opts.samples, opts.seed)?;
    // Same seed for both, so swapping the arguments swaps the clouds.
    let cb = sample_surface(b.mesh, opts.samples, opts.seed)?;
    let with_color = a.colors.is_some() && b.colors.is_some();
    let (ab, ba) = rayon::join(
        || directed(a, &ca, b, with_color),
        || directed(b, &cb, a, with_color),
    );

    let scale = match opts.normalization {
        Normalization::UnitDiagonal => {
            let d = a.mesh.bbox().union(&b.mesh.bbox()).diagonal();
            if d > 0.0 {
                d
            } else {
                1.0
            }
        }
        Normalization::None => 1.0,
    };
    let max_d2 = ab
        .dist2
        .iter()
        .chain(&ba.dist2)
        .fold(0.0f64, |m, &d| m.max(d));
    Ok(MetricReport {
        hausdorff: max_d2.sqrt() / scale,
        chamfer_ms: 0.5 * (mean(&ab.dist2) + mean(&ba.dist2)) / (scale * scale),
        texture_chamfer: ab
            .color_err
            .zip(ba.color_err)
            .map(|(x, y)| 0.5 * (mean(&x) + mean(&y))),
        samples: opts.samples,
        seed: opts.seed,
        normalization: opts.normalization,
        scale,
    })
}

/// Sampled symmetric Hausdorff distance.
pub fn hausdorff(
    a: &SimplicialComplex2,
    b: &SimplicialComplex2,
    opts: &MetricOptions,
) -> Result<f64, MetricsError> {
    Ok(compare(&Surface::new(a), &Surface::new(b), opts)?.hausdorff)
}

/// Symmetric mean of squared closest-point distances.
pub fn chamfer_ms(
    a: &SimplicialComplex2,
    b: &SimplicialComplex2,
    opts: &MetricOptions,
) -> Result<f64, MetricsError> {
    Ok(compare(&Surface::new(a), &Surface::new(b), opts)?.chamfer_ms)
}

/// Symmetric mean RGB distance between closest point pairs.
pub fn texture_chamfer(
    a: &Surface<'_>,
    b: &Surface<'_>,
    opts: &MetricOptions,
) -> Result<f64, MetricsError> {
    if a.colors.is_none_or(|c| !c.has_colors()) || b.colors.is_none_or(|c| !c.has_colors()) {
        return Err(MetricsError::Uncolored);
    }
    Ok(compare(a, b, opts)?.texture_chamfer.unwrap())
}
