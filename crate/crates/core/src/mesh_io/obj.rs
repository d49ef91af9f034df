use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{MeshIoError, RawMesh, Uv};
use crate::geometry::Point3;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(tok: Option<&str>, path: &Path, line: usize, what: &str) -> Result<f64, MeshIoError> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("invalid {what} `{tok}`")))
}

/// Resolves a 1-based (or negative, relative) OBJ index.
fn resolve_index(tok: &str, count: usize, path: &Path, line: usize) -> Result<usize, MeshIoError> {
    let raw: i64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid index `{tok}`")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx as usize >= count {
        return Err(parse_err(
            path,
            line,
            format!("index {raw} out of range (have {count})"),
        ));
    }
    Ok(idx as usize)
}

pub(super) fn load(path: &Path) -> Result<RawMesh, MeshIoError> {
    let text = fs::read_to_string(path).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;

    let mut mesh = RawMesh::default();
    let mut tex_coords: Vec<Uv> = Vec::new();
    let mut vertex_colors: Vec<Option<[f64; 3]>> = Vec::new();
    // Per-face corner texture indices, resolved once all records are read.
    let mut corner_tex: Vec<Option<[usize; 3]>> = Vec::new();
    let mut mtllib: Option<String> = None;

    for (n, raw_line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let tag = toks.next().unwrap_or("");
        match tag {
            "v" => {
                let rest: Vec<&str> = toks.collect();
                if rest.len() < 3 {
                    return Err(parse_err(path, line_no, "vertex needs three coordinates"));
                }
                let mut vals = Vec::with_capacity(rest.len());
                for t in &rest {
                    vals.push(parse_f64(Some(t), path, line_no, "coordinate")?);
                }
                if vals[..3].iter().any(|v| !v.is_finite()) {
                    return Err(MeshIoError::NonFinite {
                        path: path.to_path_buf(),
                        line: line_no,
                    });
                }
                mesh.positions.push(Point3::new(vals[0], vals[1], vals[2]));
                vertex_colors.push(if vals.len() >= 6 {
                    Some([vals[3], vals[4], vals[5]])
                } else {
                    None
                });
            }
            "vt" => {
                let u = parse_f64(toks.next(), path, line_no, "u")?;
                let v = parse_f64(toks.next(), path, line_no, "v").unwrap_or(0.0);
                tex_coords.push([u, v]);
            }
            "f" => {
                let mut corners = Vec::new();
                for t in toks {
                    let mut parts = t.split('/');
                    let vi = resolve_index(
                        parts.next().unwrap_or(""),
                        mesh.positions.len(),
                        path,
                        line_no,
                    )?;
                    let ti = match parts.next() {
                        Some(s) if !s.is_empty() => {
                            Some(resolve_index(s, tex_coords.len(), path, line_no)?)
                        }
                        _ => None,
                    };
                    corners.push((vi, ti));
                }
                if corners.len() < 3 {
                    return Err(parse_err(
                        path,
                        line_no,
                        "face needs at least three corners",
                    ));
                }
                if corners.len() > 3 {
                    mesh.stats.triangulated_polygons += 1;
                }
                for k in 1..corners.len() - 1 {
                    let tri = [corners[0], corners[k], corners[k + 1]];
                    let v = tri.map(|c| c.0);
                    if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                        mesh.stats.degenerate_faces += 1;
                        continue;
                    }
                    mesh.faces.push(v);
                    corner_tex.push(match (tri[0].1, tri[1].1, tri[2].1) {
                        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                        _ => None,
                    });
                }
            }
            "l" => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        resolve_index(
                            t.split('/').next().unwrap_or(""),
                            mesh.positions.len(),
                            path,
                            line_no,
                        )
                    })
                    .collect::<Result<_, _>>()?;
                for w in idx.windows(2) {
                    if w[0] != w[1] {
                        mesh.lines.push([w[0], w[1]]);
                    }
                }
            }
            "mtllib" => {
                mtllib = line.strip_prefix("mtllib").map(|s| s.trim().to_string());
            }
            _ => {}
        }
    }

    if corner_tex.iter().any(Option::is_some) {
        mesh.face_uvs = corner_tex
            .iter()
            .map(|c| c.map(|[a, b, c]| [tex_coords[a], tex_coords[b], tex_coords[c]]))
            .collect();
    }
    if !vertex_colors.is_empty() && vertex_colors.iter().all(Option::is_some) {
        mesh.colors = Some(vertex_colors.into_iter().flatten().collect());
    }
    if let Some(lib) = mtllib {
        let dir = path.parent().unwrap_or(Path::new("."));
        mesh.texture = read_mtl_texture(&dir.join(lib));
    }
    if mesh.stats.degenerate_faces > 0 {
        log::warn!(
            "{}: dropped {} degenerate faces",
            path.display(),
            mesh.stats.degenerate_faces
        );
    }
    Ok(mesh)
}

/// First `map_Kd` of a material library, resolved against the library's
/// directory. Missing libraries are not an error.
fn read_mtl_texture(mtl: &Path) -> Option<PathBuf> {
    let text = fs::read_to_string(mtl).ok()?;
    let dir = mtl.parent().unwrap_or(Path::new("."));
    text.lines().find_map(|l| {
        let l = l.trim();
        let rest = l.strip_prefix("map_Kd")?;
        // Options such as `-s 1 1 1` precede the file name; take the last token.
        let name = rest.split_whitespace().last()?;
        Some(dir.join(name))
    })
}

pub(super) struct ObjOutput<'a> {
    pub positions: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    pub lines: Vec<[usize; 2]>,
    pub uvs: Option<&'a [[Uv; 3]]>,
    pub material_lib: Option<(String, String)>,
}

pub(super) fn write(out: &ObjOutput<'_>, path: &Path) -> Result<(), MeshIoError> {
    let mut s = String::new();
    s.push_str("# decimesh\n");
    if let Some((lib, _)) = &out.material_lib {
        let _ = writeln!(s, "mtllib {lib}");
    }
    for p in &out.positions {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    if let Some(uvs) = out.uvs {
        for corner in uvs.iter().flatten() {
            let _ = writeln!(s, "vt {} {}", corner[0], corner[1]);
        }
    }
    if let Some((_, mat)) = &out.material_lib {
        let _ = writeln!(s, "usemtl {mat}");
    }
    for (k, f) in out.faces.iter().enumerate() {
        if out.uvs.is_some() {
            let t = 3 * k + 1;
            let _ = writeln!(
                s,
                "f {}/{} {}/{} {}/{}",
                f[0] + 1,
                t,
                f[1] + 1,
                t + 1,
                f[2] + 1,
                t + 2
            );
        } else {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
    }
    for l in &out.lines {
        let _ = writeln!(s, "l {} {}", l[0] + 1, l[1] + 1);
    }
    fs::write(path, s).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(super) fn write_mtl(
    path: &Path,
    material: &str,
    texture_file: &str,
) -> Result<(), MeshIoError> {
    let s = format!(
        "newmtl {material}\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd {texture_file}\n"
    );
    fs::write(path, s).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}
