//! Procedural test meshes: closed solids, non-manifold configurations,
//! multi-component soups and textured inputs.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core_types::SimplicialComplex2;
use crate::geometry::Point3;
use crate::mesh_io::{RawMesh, TextureImage, Uv};

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

fn raw(positions: Vec<Point3>, faces: Vec<[usize; 3]>) -> RawMesh {
    RawMesh {
        positions,
        faces,
        ..RawMesh::default()
    }
}

/// Appends `other`, offsetting its indices.
pub fn merge(mut a: RawMesh, b: &RawMesh) -> RawMesh {
    let off = a.positions.len();
    let a_faces = a.faces.len();
    a.positions.extend_from_slice(&b.positions);
    a.faces.extend(b.faces.iter().map(|f| f.map(|v| v + off)));
    a.lines.extend(b.lines.iter().map(|l| l.map(|v| v + off)));
    if !a.face_uvs.is_empty() || !b.face_uvs.is_empty() {
        a.face_uvs.resize(a_faces, None);
        if b.face_uvs.is_empty() {
            a.face_uvs.resize(a.faces.len(), None);
        } else {
            a.face_uvs.extend_from_slice(&b.face_uvs);
        }
    }
    a.colors = match (a.colors.take(), &b.colors) {
        (Some(mut ca), Some(cb)) => {
            ca.extend_from_slice(cb);
            Some(ca)
        }
        _ => None,
    };
    a
}

pub fn translated(mut m: RawMesh, d: [f64; 3]) -> RawMesh {
    for q in &mut m.positions {
        *q += crate::geometry::Vector3::new(d[0], d[1], d[2]);
    }
    m
}

pub fn to_complex(m: &RawMesh) -> SimplicialComplex2 {
    SimplicialComplex2::from_triangles(m.positions.clone(), &m.faces)
}

/// Unit tetrahedron, outward oriented.
pub fn tetrahedron() -> RawMesh {
    raw(
        vec![
            p(0.0, 0.0, 0.0),
            p(1.0, 0.0, 0.0),
            p(0.0, 1.0, 0.0),
            p(0.0, 0.0, 1.0),
        ],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    )
}

/// Axis-aligned box `[lo, hi]`, 8 vertices and 12 outward faces.
pub fn cuboid(lo: [f64; 3], hi: [f64; 3]) -> RawMesh {
    let c = |i: usize| {
        p(
            if i & 1 == 0 { lo[0] } else { hi[0] },
            if i & 2 == 0 { lo[1] } else { hi[1] },
            if i & 4 == 0 { lo[2] } else { hi[2] },
        )
    };
    let quads = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    raw((0..8).map(c).collect(), faces)
}

pub fn cube() -> RawMesh {
    cuboid([0.0; 3], [1.0; 3])
}

pub fn cube_complex() -> SimplicialComplex2 {
    to_complex(&cube())
}

/// The unit cube as a soup: every face corner is its own vertex (36).
pub fn cube_soup() -> RawMesh {
    unweld(&cube())
}

/// Gives every face corner its own copy of the vertex position.
pub fn unweld(m: &RawMesh) -> RawMesh {
    let mut out = RawMesh::default();
    for f in &m.faces {
        let base = out.positions.len();
        out.positions.extend(f.iter().map(|&v| m.positions[v]));
        out.faces.push([base, base + 1, base + 2]);
    }
    out.face_uvs = m.face_uvs.clone();
    out
}

/// Two triangles sharing the edge (0, 1).
pub fn shared_edge_pair() -> RawMesh {
    raw(
        vec![
            p(0.0, 0.0, 0.0),
            p(1.0, 0.0, 0.0),
            p(0.5, 1.0, 0.0),
            p(0.5, -1.0, 0.0),
        ],
        vec![[0, 1, 2], [1, 0, 3]],
    )
}

/// Three triangles hinged on the edge (0, 1): a non-manifold fin.
pub fn fin() -> RawMesh {
    raw(
        vec![
            p(0.0, 0.0, 0.0),
            p(0.0, 0.0, 1.0),
            p(1.0, 0.0, 0.5),
            p(-0.5, 0.866, 0.5),
            p(-0.5, -0.866, 0.5),
        ],
        vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
    )
}

/// Regular subdivided icosahedron on the unit sphere: `20 · 4^level` faces.
pub fn icosphere(level: u32) -> RawMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pos: Vec<Point3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::from(p(x, y, z).coords.normalize()))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, pos: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                pos.push(Point3::from(
                    ((pos[a].coords + pos[b].coords) * 0.5).normalize(),
                ));
                pos.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut pos);
            let bc = midpoint(b, c, &mut pos);
            let ca = midpoint(c, a, &mut pos);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    raw(pos, faces)
}

/// `nx × ny` quad grid over `[0, sx] × [0, sy]` in `z = 0`, with planar UVs
/// `(x / sx, y / sy)`.
pub fn grid(nx: usize, ny: usize, sx: f64, sy: f64) -> RawMesh {
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut m = RawMesh::default();
    for j in 0..=ny {
        for i in 0..=nx {
            m.positions
                .push(p(sx * i as f64 / nx as f64, sy * j as f64 / ny as f64, 0.0));
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            m.faces.push([a, b, c]);
            m.faces.push([a, c, d]);
        }
    }
    let uv = |v: usize, m: &RawMesh| -> Uv { [m.positions[v].x / sx, m.positions[v].y / sy] };
    m.face_uvs = m.faces.iter().map(|f| Some(f.map(|v| uv(v, &m)))).collect();
    m
}

/// A unit square (two faces) at height `z`.
pub fn square(z: f64) -> RawMesh {
    raw(
        vec![
            p(0.0, 0.0, z),
            p(1.0, 0.0, z),
            p(1.0, 1.0, z),
            p(0.0, 1.0, z),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
}

/// Three disconnected coplanar unit squares in a row, `gap` apart.
pub fn three_squares(gap: f64) -> RawMesh {
    (1..3).fold(square(0.0), |acc, k| {
        merge(
            acc,
            &translated(square(0.0), [k as f64 * (1.0 + gap), 0.0, 0.0]),
        )
    })
}

/// Two coplanar unit squares separated along x by `gap`.
pub fn two_squares(gap: f64) -> RawMesh {
    merge(square(0.0), &translated(square(0.0), [1.0 + gap, 0.0, 0.0]))
}

/// A small box resting on the top face of a large one. The contact face
/// lies inside the large face, far from all of its corners.
pub fn t_junction() -> RawMesh {
    merge(
        cuboid([0.0; 3], [4.0, 4.0, 1.0]),
        &cuboid([1.75, 1.75, 1.0], [2.25, 2.25, 1.5]),
    )
}

fn wave(x: f64, y: f64) -> f64 {
    0.04 * (2.0 * PI * x).sin() * (3.0 * PI * y).cos() + 0.03 * (5.0 * PI * (x + y)).sin()
}

/// Two wavy sheets over the unit square, `separation` apart along z; the
/// upper one is blue, the lower one yellow (per-vertex colors).
pub fn two_sheets(n: usize, separation: f64) -> RawMesh {
    let sheet = |dz: f64, color: [f64; 3], flip: bool| {
        let mut m = grid(n, n, 1.0, 1.0);
        m.face_uvs.clear();
        for q in &mut m.positions {
            q.z = wave(q.x, q.y) + dz;
        }
        if flip {
            for f in &mut m.faces {
                f.swap(1, 2);
            }
        }
        m.colors = Some(vec![color; m.positions.len()]);
        m
    };
    merge(
        sheet(0.5 * separation, [0.0, 0.0, 1.0], false),
        &sheet(-0.5 * separation, [1.0, 1.0, 0.0], true),
    )
}

/// Background color of [`textured_islands`] outside every UV island.
pub const ISLAND_BACKGROUND: [u8; 4] = [255, 0, 255, 255];

/// Unit cube with each side an `n × n` grid mapped to its own UV island
/// in a 128 × 128 texture; islands are inset by 8 texels and the texture
/// outside them is magenta.
pub fn textured_islands(n: usize) -> (RawMesh, TextureImage) {
    const SIZE: u32 = 128;
    // 3 × 2 island grid, each cell 42 texels with an 8 texel inset.
    let cell = SIZE as f64 / 3.0;
    let inset = 8.0;
    let palette: [[f64; 3]; 6] = [
        [0.9, 0.2, 0.1],
        [0.1, 0.7, 0.2],
        [0.2, 0.3, 0.9],
        [0.9, 0.8, 0.1],
        [0.1, 0.8, 0.8],
        [0.6, 0.4, 0.2],
    ];
    let island_rect = |k: usize| {
        let (cx, cy) = ((k % 3) as f64, (k / 3) as f64);
        let x0 = cx * cell + inset;
        let y0 = cy * cell + inset;
        (x0, y0, cell - 2.0 * inset)
    };
    let img = TextureImage::from_fn(SIZE, SIZE, |x, y| {
        let (xf, yf) = (x as f64 + 0.5, y as f64 + 0.5);
        for (k, c) in palette.iter().enumerate() {
            let (x0, y0, w) = island_rect(k);
            // Texels within two of the island keep the island color so
            // bilinear lookups at island edges stay clean.
            if xf >= x0 - 2.0 && xf <= x0 + w + 2.0 && yf >= y0 - 2.0 && yf <= y0 + w + 2.0 {
                let sx = ((xf - x0) / w).clamp(0.0, 1.0);
                let sy = ((yf - y0) / w).clamp(0.0, 1.0);
                let shade = 0.75 + 0.25 * (sx + sy) * 0.5;
                return crate::mesh_io::to_rgba8([c[0] * shade, c[1] * shade, c[2] * shade]);
            }
        }
        ISLAND_BACKGROUND
    });

    // Side k: origin + s·u + t·v for s, t ∈ [0, 1], outward oriented.
    let sides: [([f64; 3], [f64; 3], [f64; 3]); 6] = [
        ([0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]),
        ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
        ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        ([0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]),
        ([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
        ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
    ];
    let mut m = RawMesh::default();
    for (k, (o, u, v)) in sides.iter().enumerate() {
        let (x0, y0, w) = island_rect(k);
        let base = m.positions.len();
        for j in 0..=n {
            for i in 0..=n {
                let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
                m.positions.push(p(
                    o[0] + s * u[0] + t * v[0],
                    o[1] + s * u[1] + t * v[1],
                    o[2] + s * u[2] + t * v[2],
                ));
            }
        }
        let uv = |i: usize, j: usize| -> Uv {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let px = x0 + s * w;
            let py = y0 + t * w;
            [px / SIZE as f64, 1.0 - py / SIZE as f64]
        };
        let idx = |i: usize, j: usize| base + j * (n + 1) + i;
        for j in 0..n {
            for i in 0..n {
                m.faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                m.face_uvs
                    .push(Some([uv(i, j), uv(i + 1, j), uv(i + 1, j + 1)]));
                m.faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                m.face_uvs
                    .push(Some([uv(i, j), uv(i + 1, j + 1), uv(i, j + 1)]));
            }
        }
    }
    (m, img)
}

/// Latitude/longitude ellipsoid with `rings` latitude bands and `segments`
/// longitudes: `2 · segments · (rings - 1)` faces.
pub fn ellipsoid(
    center: [f64; 3],
    radii: [f64; 3],
    rings: usize,
    segments: usize,
    bump: f64,
) -> RawMesh {
    let mut m = RawMesh::default();
    m.positions
        .push(p(center[0], center[1], center[2] + radii[2]));
    for r in 1..rings {
        let theta = PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * PI * s as f64 / segments as f64;
            let k = 1.0 + bump * (3.0 * phi).sin() * (2.0 * theta).sin();
            m.positions.push(p(
                center[0] + k * radii[0] * theta.sin() * phi.cos(),
                center[1] + k * radii[1] * theta.sin() * phi.sin(),
                center[2] + k * radii[2] * theta.cos(),
            ));
        }
    }
    m.positions
        .push(p(center[0], center[1], center[2] - radii[2]));
    let south = m.positions.len() - 1;
    let ring = |r: usize, s: usize| 1 + (r - 1) * segments + s % segments;
    for s in 0..segments {
        m.faces.push([0, ring(1, s), ring(1, s + 1)]);
        m.faces
            .push([south, ring(rings - 1, s + 1), ring(rings - 1, s)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            let (a, b, c, d) = (
                ring(r, s),
                ring(r + 1, s),
                ring(r + 1, s + 1),
                ring(r, s + 1),
            );
            m.faces.push([a, b, c]);
            m.faces.push([a, c, d]);
        }
    }
    m
}

/// A duck-like multi-component shape (body, head and beak as separate,
/// interpenetrating closed surfaces) with roughly `faces` triangles.
pub fn duck(faces: usize) -> RawMesh {
    // Each part contributes 2·s·(r-1) ≈ 4·r² faces with s = 2r.
    let part = |share: f64| {
        let r = ((faces as f64 * share / 4.0).sqrt().round() as usize).max(3);
        (r, 2 * r)
    };
    let (rb, sb) = part(0.7);
    let (rh, sh) = part(0.25);
    let (rk, sk) = part(0.05);
    let body = ellipsoid([0.0, 0.0, 0.0], [1.2, 0.8, 0.7], rb, sb, 0.08);
    let head = ellipsoid([0.9, 0.0, 0.75], [0.45, 0.42, 0.45], rh, sh, 0.03);
    let beak = ellipsoid([1.38, 0.0, 0.7], [0.25, 0.14, 0.06], rk, sk, 0.0);
    merge(merge(body, &head), &beak)
}

/// A `segments`-gon bipyramid with jittered vertices: a closed manifold
/// with `2 · segments` faces.
pub fn bipyramid(segments: usize, seed: u64) -> RawMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = |s: f64| rng.random_range(-s..s);
    let mut m = RawMesh::default();
    for s in 0..segments {
        let phi = 2.0 * PI * s as f64 / segments as f64;
        let r = 1.0 + j(0.15);
        m.positions.push(p(r * phi.cos(), r * phi.sin(), j(0.2)));
    }
    m.positions.push(p(j(0.1), j(0.1), 1.0 + j(0.2)));
    m.positions.push(p(j(0.1), j(0.1), -1.0 + j(0.2)));
    let (top, bottom) = (segments, segments + 1);
    for s in 0..segments {
        let t = (s + 1) % segments;
        m.faces.push([s, t, top]);
        m.faces.push([t, s, bottom]);
    }
    m
}

/// Icosphere triangles scattered as an unconnected soup: each face gets
/// its own vertices and a random offset of up to `jitter`.
pub fn jittered_soup(level: u32, jitter: f64, seed: u64) -> RawMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = unweld(&icosphere(level));
    for f in m.faces.clone() {
        let d = crate::geometry::Vector3::new(
            rng.random_range(-jitter..=jitter),
            rng.random_range(-jitter..=jitter),
            rng.random_range(-jitter..=jitter),
        );
        for v in f {
            m.positions[v] += d;
        }
    }
    m
}

/// A deliberately messy mesh of about `faces` triangles: a noisy grid with
/// extra triangles over random nearby vertex triples (fins, overlaps,
/// non-manifold vertices), a few isolated triangles and duplicated faces.
pub fn fuzz_mesh(faces: usize, seed: u64) -> RawMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ((faces as f64 * 0.35).sqrt() as usize).max(2);
    let mut m = grid(n, n, 1.0, 1.0);
    m.face_uvs.clear();
    for q in &mut m.positions {
        q.z = 0.05 * rng.random::<f64>();
    }
    let nv = m.positions.len();
    while m.faces.len() < faces * 9 / 10 {
        let a = rng.random_range(0..nv);
        let b = (a + rng.random_range(1..3)) % nv;
        let c = (a + (n + 1) * rng.random_range(1..3)) % nv;
        if a != b && b != c && a != c {
            m.faces.push([a, b, c]);
        }
    }
    for k in 0..5 {
        let f = m.faces[rng.random_range(0..m.faces.len())];
        m.faces
            .push(if k % 2 == 0 { f } else { [f[2], f[1], f[0]] });
    }
    while m.faces.len() < faces {
        let o = p(rng.random(), rng.random(), 0.2 + rng.random::<f64>());
        let base = m.positions.len();
        for _ in 0..3 {
            m.positions.push(
                o + crate::geometry::Vector3::new(rng.random(), rng.random(), rng.random()) * 0.05,
            );
        }
        m.faces.push([base, base + 1, base + 2]);
    }
    m
}

/// The robustness corpus: name and mesh.
pub fn corpus() -> Vec<(&'static str, RawMesh)> {
    let isolated = (0..12).fold(RawMesh::default(), |acc, k| {
        let t = raw(
            vec![p(0.0, 0.0, 0.0), p(0.3, 0.0, 0.0), p(0.0, 0.3, 0.1)],
            vec![[0, 1, 2]],
        );
        merge(
            acc,
            &translated(t, [k as f64 * 0.5, (k % 3) as f64 * 0.4, 0.0]),
        )
    });
    let fins = (0..6).fold(RawMesh::default(), |acc, k| {
        merge(acc, &translated(fin(), [0.0, k as f64 * 0.3, 0.0]))
    });
    vec![
        ("tetrahedron", tetrahedron()),
        ("cube", cube()),
        ("cube_soup", cube_soup()),
        ("fin", fin()),
        ("fins", merge(fins, &grid(6, 6, 1.0, 1.0))),
        ("t_junction", t_junction()),
        ("isolated_triangles", isolated),
        ("three_squares", three_squares(1e-3)),
        ("two_sheets", two_sheets(16, 0.02)),
        ("icosphere", icosphere(3)),
        ("soup", jittered_soup(3, 2e-3, 1)),
        ("dense_soup", jittered_soup(4, 1e-3, 2)),
        ("fuzz", fuzz_mesh(1200, 3)),
        ("duck", duck(3000)),
        ("islands", textured_islands(6).0),
    ]
}
