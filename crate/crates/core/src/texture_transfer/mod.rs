//! Color transfer from the input to the simplified mesh: sample the
//! simplified faces on a barycentric grid, walk the samples back through
//! the collapse history, look colors up on the input and bake an atlas.

mod atlas;
mod projection;
mod sampling;

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atlas::{bake_atlas, AtlasError, AtlasLayout, CLEAR_COLOR};
pub use projection::{
    all_targets, closest_among, project_onto, split_candidates, successive_project,
    GlobalProjector, ProjectionStats,
};
pub use sampling::{grid_weights, sample_mesh_colors, samples_per_face, Host, SurfaceSample};

use crate::complex_build::SourceMap;
use crate::core_types::SimplicialComplex2;
use crate::decimator::DecimationResult;
use crate::mesh_io::{sample_texture, to_rgba8, RawMesh, Rgb, TextureImage, Uv};

/// Color used when a sample has nothing to read from.
pub const FALLBACK_COLOR: Rgb = [1.0, 1.0, 1.0];

/// How colors are looked up on the input mesh.
pub struct ColorSource<'a> {
    raw: &'a RawMesh,
    source: &'a SourceMap,
    texture: Option<&'a TextureImage>,
}

impl<'a> ColorSource<'a> {
    pub fn new(raw: &'a RawMesh, source: &'a SourceMap, texture: Option<&'a TextureImage>) -> Self {
        Self {
            raw,
            source,
            texture,
        }
    }

    pub fn is_textured(&self) -> bool {
        self.texture.is_some() && self.raw.has_uvs()
    }

    pub fn has_colors(&self) -> bool {
        self.is_textured() || self.raw.colors.is_some()
    }

    /// Color at `bary` on `host` of the input complex; the flag is set when
    /// the fallback color was used because the host carries no UVs.
    pub fn color(&self, input: &SimplicialComplex2, host: Host, bary: &[f64; 3]) -> (Rgb, bool) {
        let vertices: Vec<usize> = match host {
            Host::Face(f) => input.face(f).vertices.to_vec(),
            Host::Edge(e) => input.edge(e).vertices.to_vec(),
            Host::Vertex(v) => vec![v],
        };
        if let Some(tex) = self.texture.filter(|_| self.raw.has_uvs()) {
            let Host::Face(f) = host else {
                return (FALLBACK_COLOR, true);
            };
            return match self
                .raw
                .face_uvs
                .get(self.source.face_to_raw[f])
                .copied()
                .flatten()
            {
                Some(uvs) => {
                    let uv = [0, 1]
                        .map(|c| bary[0] * uvs[0][c] + bary[1] * uvs[1][c] + bary[2] * uvs[2][c]);
                    (sample_texture(tex, uv), false)
                }
                None => (FALLBACK_COLOR, true),
            };
        }
        if let Some(colors) = &self.raw.colors {
            let mut c = [0.0; 3];
            for (k, &v) in vertices.iter().enumerate() {
                let vc = colors[self.source.vertex_to_raw[v]];
                for ch in 0..3 {
                    c[ch] += bary[k] * vc[ch];
                }
            }
            return (c, false);
        }
        (FALLBACK_COLOR, false)
    }
}

/// Looks up every sample's color at its host on the input complex; returns
/// the number of samples that got the fallback color.
pub fn resolve_colors(
    samples: &mut [SurfaceSample],
    input: &SimplicialComplex2,
    colors: &ColorSource<'_>,
) -> usize {
    let mut fallbacks = 0;
    for s in samples {
        let (c, fb) = colors.color(input, s.host, &s.host_bary);
        s.color = c;
        fallbacks += fb as usize;
    }
    fallbacks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// Local re-projection through the collapse history.
    Successive,
    /// Closest point on the whole input.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextureOptions {
    pub samples_per_edge: u32,
    pub gutter: u32,
    pub atlas_max: u32,
    pub projection: Projection,
}

impl Default for TextureOptions {
    fn default() -> Self {
        Self {
            samples_per_edge: 4,
            gutter: 2,
            atlas_max: 8192,
            projection: Projection::Successive,
        }
    }
}

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("texture transfer needs the collapse history")]
    NoHistory,
    #[error("samples per edge must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Atlas(#[from] AtlasError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TransferStats {
    pub samples: usize,
    pub reprojections: usize,
    pub global_fallbacks: usize,
    pub color_fallbacks: usize,
}

pub struct TransferOutput {
    /// The simplified complex, compacted; face `k` uses chart `k`.
    pub mesh: SimplicialComplex2,
    pub uvs: Vec<[Uv; 3]>,
    pub image: TextureImage,
    pub layout: AtlasLayout,
    /// Resolved samples; face ids refer to the uncompacted simplified mesh.
    pub samples: Vec<SurfaceSample>,
    pub stats: TransferStats,
}

/// Samples the simplified mesh, maps the samples back to the input and
/// resolves their colors. Samples come out grouped by live face in id
/// order.
pub fn map_samples(
    result: &DecimationResult,
    colors: &ColorSource<'_>,
    r: u32,
    projection: Projection,
) -> Result<(Vec<SurfaceSample>, TransferStats), TransferError> {
    if r == 0 {
        return Err(TransferError::NoSamples);
    }
    let initial = result.initial.as_ref().ok_or(TransferError::NoHistory)?;
    let mut samples = sample_mesh_colors(&result.mesh, r);
    let mut stats = TransferStats {
        samples: samples.len(),
        ..TransferStats::default()
    };
    match projection {
        Projection::Successive => {
            let mut walk = result.mesh.clone();
            let p = successive_project(&mut walk, &result.history, &mut samples);
            stats.reprojections = p.reprojections;
            stats.global_fallbacks = p.global_fallbacks;
        }
        Projection::Global => GlobalProjector::new(initial).project_all(&mut samples),
    }
    stats.color_fallbacks = resolve_colors(&mut samples, initial, colors);
    if stats.color_fallbacks > 0 {
        log::warn!("{} samples used the fallback color", stats.color_fallbacks);
    }
    Ok((samples, stats))
}

/// The full texture path: map samples, bake them into a fresh atlas and
/// compact the simplified mesh so face `k` owns chart `k`.
pub fn transfer_texture(
    result: &DecimationResult,
    colors: &ColorSource<'_>,
    opts: &TextureOptions,
) -> Result<TransferOutput, TransferError> {
    let (samples, stats) = map_samples(result, colors, opts.samples_per_edge, opts.projection)?;
    let charts = result.mesh.live_face_count();
    let (layout, image, uvs) = bake_atlas(
        &samples,
        charts,
        opts.samples_per_edge,
        opts.gutter,
        opts.atlas_max,
    )?;
    // Compaction keeps live faces in id order, matching the chart order.
    let (mesh, _) = result.mesh.compacted();
    Ok(TransferOutput {
        mesh,
        uvs,
        image,
        layout,
        samples,
        stats,
    })
}

/// Raw mesh-color dump. Per face, little endian: `u32` face index (in
/// compacted order), `u32` samples per edge `r`, then `(r+1)(r+2)/2` RGB8
/// triples in barycentric-grid order.
pub fn write_mesh_colors(path: &Path, samples: &[SurfaceSample], r: u32) -> std::io::Result<()> {
    let n = samples_per_face(r);
    let mut buf = Vec::with_capacity(samples.len() * 3 + samples.len() / n * 8);
    for (k, chunk) in samples.chunks(n).enumerate() {
        buf.extend_from_slice(&(k as u32).to_le_bytes());
        buf.extend_from_slice(&r.to_le_bytes());
        for s in chunk {
            buf.extend_from_slice(&to_rgba8(s.color)[..3]);
        }
    }
    std::fs::File::create(path)?.write_all(&buf)
}
