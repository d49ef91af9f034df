//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

use decimesh::complex_build::ComponentLabels;
use decimesh::core_types::SimplicialComplex2;
use decimesh::geometry::{triangle_triangle_distance, Point3};
use decimesh::mesh_io::RawMesh;

type M4 = [[f64; 4]; 4];

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn eval(q: &M4, x: [f64; 3]) -> f64 {
    let h = [x[0], x[1], x[2], 1.0];
    (0..4)
        .map(|r| (0..4).map(|c| h[r] * q[r][c] * h[c]).sum::<f64>())
        .sum()
}

/// Solves the 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-9 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Classic quadric-error decimation on an indexed triangle list:
/// homogeneous 4×4 fundamental quadrics weighted by a third of the face
/// area, summed across collapses, with a link-condition / duplicate-face /
/// flip check and a brute-force minimum over all edges at every step.
pub struct ReferenceQem {
    pos: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    q: Vec<M4>,
}

impl ReferenceQem {
    pub fn new(raw: &RawMesh) -> Self {
        let pos: Vec<[f64; 3]> = raw.positions.iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut q = vec![[[0.0; 4]; 4]; pos.len()];
        for f in &raw.faces {
            let [a, b, c] = f.map(|v| pos[v]);
            let n = cross(sub(b, a), sub(c, a));
            let len = dot(n, n).sqrt();
            let n = n.map(|x| x / len);
            let plane = [n[0], n[1], n[2], -dot(n, a)];
            let w = len / 2.0 / 3.0;
            for &v in f {
                for r in 0..4 {
                    for c in 0..4 {
                        q[v][r][c] += w * plane[r] * plane[c];
                    }
                }
            }
        }
        Self {
            pos,
            faces: raw.faces.clone(),
            q,
        }
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut e = BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                e.insert((a.min(b), a.max(b)));
            }
        }
        e
    }

    fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.faces
            .iter()
            .filter(|f| f.contains(&v))
            .flat_map(|f| f.iter().copied())
            .filter(|&u| u != v)
            .collect()
    }

    /// `(cost, position)` of collapsing `(i, j)`.
    pub fn cost(&self, i: usize, j: usize) -> (f64, [f64; 3]) {
        let mut q = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                q[r][c] = self.q[i][r][c] + self.q[j][r][c];
            }
        }
        let a = [
            [q[0][0], q[0][1], q[0][2]],
            [q[1][0], q[1][1], q[1][2]],
            [q[2][0], q[2][1], q[2][2]],
        ];
        let (pi, pj) = (self.pos[i], self.pos[j]);
        let mid = [
            0.5 * (pi[0] + pj[0]),
            0.5 * (pi[1] + pj[1]),
            0.5 * (pi[2] + pj[2]),
        ];
        let mut best = (f64::INFINITY, mid);
        if let Some(x) = solve3(a, [-q[0][3], -q[1][3], -q[2][3]]) {
            best = (eval(&q, x), x);
        }
        for p in [mid, pi, pj] {
            let v = eval(&q, p);
            if v < best.0 {
                best = (v, p);
            }
        }
        (best.0.max(0.0), best.1)
    }

    fn valid(&self, i: usize, j: usize, x: [f64; 3]) -> bool {
        let opposite: BTreeSet<usize> = self
            .faces
            .iter()
            .filter(|f| f.contains(&i) && f.contains(&j))
            .flat_map(|f| f.iter().copied())
            .filter(|&v| v != i && v != j)
            .collect();
        let common: BTreeSet<usize> = self
            .neighbors(i)
            .intersection(&self.neighbors(j))
            .copied()
            .collect();
        if common != opposite {
            return false;
        }
        let sorted = |mut f: [usize; 3]| {
            f.sort_unstable();
            f
        };
        let existing: BTreeSet<[usize; 3]> = self.faces.iter().map(|&f| sorted(f)).collect();
        for f in &self.faces {
            let (hi, hj) = (f.contains(&i), f.contains(&j));
            if hi && hj {
                continue;
            }
            if hj && existing.contains(&sorted(f.map(|v| if v == j { i } else { v }))) {
                return false;
            }
            if hi || hj {
                let before = f.map(|v| self.pos[v]);
                let after = f.map(|v| if v == i || v == j { x } else { self.pos[v] });
                let n0 = cross(sub(before[1], before[0]), sub(before[2], before[0]));
                let n1 = cross(sub(after[1], after[0]), sub(after[2], after[0]));
                if dot(n1, n1) == 0.0 || dot(n0, n1) < 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Performs the cheapest valid collapse; returns its cost.
    pub fn step(&mut self) -> Option<f64> {
        let mut best: Option<(f64, usize, usize, [f64; 3])> = None;
        for (i, j) in self.edges() {
            let (c, x) = self.cost(i, j);
            if best.is_some_and(|b| c >= b.0) || !self.valid(i, j, x) {
                continue;
            }
            best = Some((c, i, j, x));
        }
        let (c, i, j, x) = best?;
        self.pos[i] = x;
        for r in 0..4 {
            for k in 0..4 {
                self.q[i][r][k] += self.q[j][r][k];
            }
        }
        for f in &mut self.faces {
            for v in f.iter_mut() {
                if *v == j {
                    *v = i;
                }
            }
        }
        self.faces
            .retain(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2]);
        Some(c)
    }
}

/// Classic vertex-pair rule: every pair of vertices from different
/// components closer than `eps`.
pub fn close_vertex_pairs(
    mesh: &SimplicialComplex2,
    labels: &ComponentLabels,
    eps: f64,
) -> Vec<[usize; 2]> {
    let verts: Vec<usize> = mesh.live_vertices().collect();
    let mut out = Vec::new();
    for (k, &a) in verts.iter().enumerate() {
        for &b in &verts[k + 1..] {
            if labels.of(a) != labels.of(b) && (mesh.position(a) - mesh.position(b)).norm() < eps {
                out.push([a, b]);
            }
        }
    }
    out
}

/// O(F²) virtual-edge search without a per-vertex cap: vertex pairs of the
/// nearest corners of every close face pair across components.
pub fn brute_force_virtual_pairs(
    mesh: &SimplicialComplex2,
    labels: &ComponentLabels,
    eps: f64,
) -> Vec<[usize; 2]> {
    let faces: Vec<usize> = mesh.live_faces().collect();
    let corner = |f: usize, p: &Point3| {
        let mut vs = mesh.face(f).vertices;
        vs.sort_unstable();
        let mut best = vs[0];
        for &v in &vs[1..] {
            if (mesh.position(v) - p).norm_squared() < (mesh.position(best) - p).norm_squared() {
                best = v;
            }
        }
        best
    };
    let mut pairs: BTreeMap<[usize; 2], ()> = BTreeMap::new();
    for (k, &f1) in faces.iter().enumerate() {
        for &f2 in &faces[k + 1..] {
            if labels.of(mesh.face(f1).vertices[0]) == labels.of(mesh.face(f2).vertices[0]) {
                continue;
            }
            let d = triangle_triangle_distance(&mesh.face_positions(f1), &mesh.face_positions(f2));
            if d.distance > eps {
                continue;
            }
            let (a, b) = (corner(f1, &d.p1), corner(f2, &d.p2));
            if a != b && mesh.find_edge(a, b).is_none() {
                pairs.insert([a.min(b), a.max(b)], ());
            }
        }
    }
    pairs.into_keys().collect()
}

pub fn decimesh(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_decimesh"));
    for a in args {
        cmd.arg(a);
    }
    cmd.output().expect("binary runs")
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Relative agreement with an absolute floor for values near zero.
pub fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
