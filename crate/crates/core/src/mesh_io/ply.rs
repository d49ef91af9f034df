use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{MeshIoError, RawMesh, Uv};
use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar {
        name: String,
        ty: Scalar,
    },
    List {
        name: String,
        count: Scalar,
        item: Scalar,
    },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

/// Sequential value reader over either token or byte input.
struct Reader<'a> {
    format: Format,
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, msg: impl Into<String>) -> MeshIoError {
        MeshIoError::Parse {
            path: self.path.to_path_buf(),
            line: 0,
            msg: msg.into(),
        }
    }

    fn next_token(&mut self) -> Result<&'a str, MeshIoError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("unexpected end of data"));
        }
        let bytes: &'a [u8] = self.bytes;
        std::str::from_utf8(&bytes[start..self.pos])
            .map_err(|_| self.err("invalid UTF-8 in ASCII body"))
    }

    fn read(&mut self, ty: Scalar) -> Result<f64, MeshIoError> {
        match self.format {
            Format::Ascii => {
                let tok = self.next_token()?;
                tok.parse::<f64>().map_err(|_| {
                    let msg = format!("invalid number `{tok}`");
                    self.err(msg)
                })
            }
            Format::BinaryLittleEndian => {
                let n = ty.size();
                if self.pos + n > self.bytes.len() {
                    return Err(self.err("unexpected end of binary data"));
                }
                let b = &self.bytes[self.pos..self.pos + n];
                self.pos += n;
                Ok(match ty {
                    Scalar::I8 => b[0] as i8 as f64,
                    Scalar::U8 => b[0] as f64,
                    Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
                    Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
                    Scalar::I32 => i32::from_le_bytes(b.try_into().unwrap()) as f64,
                    Scalar::U32 => u32::from_le_bytes(b.try_into().unwrap()) as f64,
                    Scalar::F32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
                    Scalar::F64 => f64::from_le_bytes(b.try_into().unwrap()),
                })
            }
        }
    }
}

fn header_err(path: &Path, line: usize, msg: impl Into<String>) -> MeshIoError {
    MeshIoError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub(super) fn load(path: &Path) -> Result<RawMesh, MeshIoError> {
    let bytes = fs::read(path).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;

    // Header: ASCII lines up to and including `end_header`.
    let mut pos = 0;
    let mut line_no = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut texture_file = None;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|e| pos + e)
            .ok_or_else(|| header_err(path, line_no, "unterminated header"))?;
        let line = String::from_utf8_lossy(&bytes[pos..end]).trim().to_string();
        pos = end + 1;
        line_no += 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if toks.first() != Some(&"ply") {
                return Err(header_err(path, 1, "missing `ply` magic"));
            }
            continue;
        }
        match toks.as_slice() {
            ["format", "ascii", ..] => format = Some(Format::Ascii),
            ["format", "binary_little_endian", ..] => format = Some(Format::BinaryLittleEndian),
            ["format", other, ..] => {
                return Err(MeshIoError::Unsupported(format!("PLY format `{other}`")))
            }
            ["comment", "TextureFile", name, ..] => texture_file = Some(name.to_string()),
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| {
                    header_err(path, line_no, format!("invalid element count `{count}`"))
                })?,
                props: Vec::new(),
            }),
            ["property", "list", cty, ity, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(path, line_no, "property before element"))?;
                let (count, item) = match (Scalar::parse(cty), Scalar::parse(ity)) {
                    (Some(c), Some(i)) => (c, i),
                    _ => return Err(header_err(path, line_no, "unknown list property type")),
                };
                el.props.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(path, line_no, "property before element"))?;
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| header_err(path, line_no, format!("unknown type `{ty}`")))?;
                el.props.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            ["end_header"] => break,
            [] => {}
            _ => {
                return Err(header_err(
                    path,
                    line_no,
                    format!("unrecognized header line `{line}`"),
                ))
            }
        }
    }
    let format = format.ok_or_else(|| header_err(path, line_no, "missing format line"))?;

    let mut rd = Reader {
        format,
        bytes: &bytes,
        pos,
        path,
    };
    let mut mesh = RawMesh::default();
    let mut vertex_uv: Vec<Uv> = Vec::new();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    let mut corner_uvs: Vec<Option<[Uv; 3]>> = Vec::new();

    for el in &elements {
        for _ in 0..el.count {
            let mut xyz = [0.0; 3];
            let mut rgb: [Option<f64>; 3] = [None; 3];
            let mut uv = [None, None];
            let mut poly: Vec<usize> = Vec::new();
            let mut poly_uv: Vec<f64> = Vec::new();
            let mut edge = [None, None];
            for prop in &el.props {
                match prop {
                    Property::Scalar { name, ty } => {
                        let v = rd.read(*ty)?;
                        let color = |v: f64| if ty.is_integer() { v / 255.0 } else { v };
                        match (el.name.as_str(), name.as_str()) {
                            ("vertex", "x") => xyz[0] = v,
                            ("vertex", "y") => xyz[1] = v,
                            ("vertex", "z") => xyz[2] = v,
                            ("vertex", "red" | "r") => rgb[0] = Some(color(v)),
                            ("vertex", "green" | "g") => rgb[1] = Some(color(v)),
                            ("vertex", "blue" | "b") => rgb[2] = Some(color(v)),
                            ("vertex", "u" | "s" | "texture_u") => uv[0] = Some(v),
                            ("vertex", "v" | "t" | "texture_v") => uv[1] = Some(v),
                            ("edge", "vertex1") => edge[0] = Some(v as usize),
                            ("edge", "vertex2") => edge[1] = Some(v as usize),
                            _ => {}
                        }
                    }
                    Property::List { name, count, item } => {
                        let n = rd.read(*count)? as usize;
                        let mut vals = Vec::with_capacity(n);
                        for _ in 0..n {
                            vals.push(rd.read(*item)?);
                        }
                        match (el.name.as_str(), name.as_str()) {
                            ("face", "vertex_indices" | "vertex_index") => {
                                poly = vals.into_iter().map(|v| v as usize).collect()
                            }
                            ("face", "texcoord") => poly_uv = vals,
                            _ => {}
                        }
                    }
                }
            }
            match el.name.as_str() {
                "vertex" => {
                    if xyz.iter().any(|v| !v.is_finite()) {
                        return Err(MeshIoError::NonFinite {
                            path: path.to_path_buf(),
                            line: 0,
                        });
                    }
                    mesh.positions.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                    if let [Some(r), Some(g), Some(b)] = rgb {
                        colors.push([r, g, b]);
                    }
                    if let [Some(u), Some(v)] = uv {
                        vertex_uv.push([u, v]);
                    }
                }
                "face" => {
                    if poly.len() < 3 {
                        return Err(rd.err("face with fewer than three vertices"));
                    }
                    if let Some(&bad) = poly.iter().find(|&&i| i >= mesh.positions.len()) {
                        return Err(rd.err(format!("face index {bad} out of range")));
                    }
                    if poly.len() > 3 {
                        mesh.stats.triangulated_polygons += 1;
                    }
                    let has_uv = poly_uv.len() == 2 * poly.len();
                    for k in 1..poly.len() - 1 {
                        let c = [0, k, k + 1];
                        let v = c.map(|i| poly[i]);
                        if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                            mesh.stats.degenerate_faces += 1;
                            continue;
                        }
                        mesh.faces.push(v);
                        corner_uvs
                            .push(has_uv.then(|| c.map(|i| [poly_uv[2 * i], poly_uv[2 * i + 1]])));
                    }
                }
                "edge" => {
                    if let [Some(a), Some(b)] = edge {
                        if a >= mesh.positions.len() || b >= mesh.positions.len() {
                            return Err(rd.err("edge index out of range"));
                        }
                        if a != b {
                            mesh.lines.push([a, b]);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    if corner_uvs.iter().any(Option::is_some) {
        mesh.face_uvs = corner_uvs;
    } else if !vertex_uv.is_empty() && vertex_uv.len() == mesh.positions.len() {
        mesh.face_uvs = mesh
            .faces
            .iter()
            .map(|f| Some(f.map(|v| vertex_uv[v])))
            .collect();
    }
    if !colors.is_empty() && colors.len() == mesh.positions.len() {
        mesh.colors = Some(colors);
    }
    if let Some(name) = texture_file {
        mesh.texture = Some(path.parent().unwrap_or(Path::new(".")).join(name));
    }
    Ok(mesh)
}

/// Writes binary little-endian PLY with double coordinates, `edge` elements
/// for dangling edges and optional per-corner `texcoord` lists.
pub(super) fn write(
    positions: &[Point3],
    faces: &[[usize; 3]],
    lines: &[[usize; 2]],
    uvs: Option<&[[Uv; 3]]>,
    texture_file: Option<&str>,
    path: &Path,
) -> Result<(), MeshIoError> {
    let mut header = String::from("ply\nformat binary_little_endian 1.0\ncomment decimesh\n");
    if let Some(t) = texture_file {
        header.push_str(&format!("comment TextureFile {t}\n"));
    }
    header.push_str(&format!(
        "element vertex {}\nproperty double x\nproperty double y\nproperty double z\n",
        positions.len()
    ));
    header.push_str(&format!(
        "element face {}\nproperty list uchar int vertex_indices\n",
        faces.len()
    ));
    if uvs.is_some() {
        header.push_str("property list uchar float texcoord\n");
    }
    if !lines.is_empty() {
        header.push_str(&format!(
            "element edge {}\nproperty int vertex1\nproperty int vertex2\n",
            lines.len()
        ));
    }
    header.push_str("end_header\n");

    let mut buf = header.into_bytes();
    for p in positions {
        for c in [p.x, p.y, p.z] {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    for (k, f) in faces.iter().enumerate() {
        buf.push(3);
        for &v in f {
            buf.extend_from_slice(&(v as i32).to_le_bytes());
        }
        if let Some(uvs) = uvs {
            buf.push(6);
            for uv in &uvs[k] {
                buf.extend_from_slice(&(uv[0] as f32).to_le_bytes());
                buf.extend_from_slice(&(uv[1] as f32).to_le_bytes());
            }
        }
    }
    for l in lines {
        buf.extend_from_slice(&(l[0] as i32).to_le_bytes());
        buf.extend_from_slice(&(l[1] as i32).to_le_bytes());
    }
    let mut file = fs::File::create(path).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&buf).map_err(|source| MeshIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}
