//! Mesh and texture file I/O.
//!
//! Loading keeps the file's vertex list as is (no welding); faces with a
//! repeated vertex index are dropped and counted, polygons are fan
//! triangulated. Saving expects a compacted complex and writes edges
//! without incident faces as line records.

mod obj;
mod ply;
mod texture;

use std::path::{Path, PathBuf};

pub use texture::{sample_texture, to_rgba8, Rgb, TextureImage};

use crate::core_types::SimplicialComplex2;
use crate::geometry::Point3;

pub type Uv = [f64; 2];

#[derive(Debug, thiserror::Error)]
pub enum MeshIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: non-finite vertex coordinate")]
    NonFinite { path: PathBuf, line: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{0}: image has zero size")]
    EmptyImage(PathBuf),
    #[error("mesh must be compacted before saving")]
    NotCompacted,
    #[error("{0} per-corner UV triples for {1} faces")]
    UvCountMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub degenerate_faces: usize,
    pub triangulated_polygons: usize,
}

/// Indexed triangle data as read from disk.
#[derive(Debug, Clone, Default)]
pub struct RawMesh {
    pub positions: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    /// Per-face corner UVs; empty when the file has none, `None` entries for
    /// faces that lack them in a partially textured file.
    pub face_uvs: Vec<Option<[Uv; 3]>>,
    pub colors: Option<Vec<Rgb>>,
    /// Line elements (OBJ `l`, PLY `edge`).
    pub lines: Vec<[usize; 2]>,
    /// Diffuse texture referenced by the file, resolved relative to it.
    pub texture: Option<PathBuf>,
    pub stats: LoadStats,
}

impl RawMesh {
    pub fn has_uvs(&self) -> bool {
        self.face_uvs.iter().any(Option::is_some)
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

pub fn load_mesh(path: &Path) -> Result<RawMesh, MeshIoError> {
    match extension(path).as_str() {
        "obj" => obj::load(path),
        "ply" => ply::load(path),
        other => Err(MeshIoError::Unsupported(format!(
            "mesh extension `{other}`"
        ))),
    }
}

/// Writes `mesh` to `path` (OBJ or PLY by extension). With a texture, the
/// image is written next to the mesh as `<stem>.png` (plus `<stem>.mtl` for
/// OBJ). Returns every file written, mesh first.
pub fn save_mesh(
    mesh: &SimplicialComplex2,
    uvs: Option<&[[Uv; 3]]>,
    texture: Option<&TextureImage>,
    path: &Path,
) -> Result<Vec<PathBuf>, MeshIoError> {
    if mesh.live_vertex_count() != mesh.vertex_count()
        || mesh.live_edge_count() != mesh.edge_count()
        || mesh.live_face_count() != mesh.face_count()
    {
        return Err(MeshIoError::NotCompacted);
    }
    let faces: Vec<[usize; 3]> = (0..mesh.face_count())
        .map(|f| mesh.face(f).vertices)
        .collect();
    if let Some(uvs) = uvs {
        if uvs.len() != faces.len() {
            return Err(MeshIoError::UvCountMismatch(uvs.len(), faces.len()));
        }
    }
    let lines: Vec<[usize; 2]> = mesh
        .dangling_edges()
        .map(|e| mesh.edge(e).vertices)
        .collect();
    let positions = mesh.positions().to_vec();

    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("mesh")
        .to_string();
    let dir = path.parent().unwrap_or(Path::new(""));
    let png_name = format!("{stem}.png");
    let mut written = vec![path.to_path_buf()];

    match extension(path).as_str() {
        "obj" => {
            let material_lib = texture.map(|_| (format!("{stem}.mtl"), "baked".to_string()));
            obj::write(
                &obj::ObjOutput {
                    positions,
                    faces,
                    lines,
                    uvs,
                    material_lib: material_lib.clone(),
                },
                path,
            )?;
            if let Some((lib, mat)) = material_lib {
                let mtl_path = dir.join(&lib);
                obj::write_mtl(&mtl_path, &mat, &png_name)?;
                written.push(mtl_path);
            }
        }
        "ply" => {
            ply::write(
                &positions,
                &faces,
                &lines,
                uvs,
                texture.map(|_| png_name.as_str()),
                path,
            )?;
        }
        other => {
            return Err(MeshIoError::Unsupported(format!(
                "mesh extension `{other}`"
            )))
        }
    }
    if let Some(img) = texture {
        let png_path = dir.join(&png_name);
        img.save_png(&png_path)?;
        written.push(png_path);
    }
    Ok(written)
}
