use crate::core_types::SimplicialComplex2;
use crate::geometry::{Aabb, Point3};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bbox: Aabb,
    /// Leaves (`count > 0`) own `items[start..start + count]`. Interior
    /// nodes keep their left child at the next index and the right at `right`.
    start: usize,
    count: usize,
    right: usize,
}

/// Axis-aligned bounding-box tree over arbitrary primitive ids.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    items: Vec<(usize, Aabb)>,
}

impl Bvh {
    pub fn new(mut items: Vec<(usize, Aabb)>) -> Self {
        let mut nodes = Vec::with_capacity(2 * items.len() / LEAF_SIZE + 1);
        if !items.is_empty() {
            let n = items.len();
            build(&mut nodes, &mut items, 0, n);
        }
        Self { nodes, items }
    }

    /// Tree over the live faces of `mesh`.
    pub fn over_faces(mesh: &SimplicialComplex2) -> Self {
        Self::new(
            mesh.live_faces()
                .map(|f| (f, Aabb::from_points(mesh.face_positions(f).iter())))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Primitive ids grouped by leaf.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .filter(|n| n.count > 0)
            .map(|n| {
                self.items[n.start..n.start + n.count]
                    .iter()
                    .map(|it| it.0)
                    .collect()
            })
            .collect()
    }

    /// Checks that every node box contains the boxes below it.
    pub fn is_consistent(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| {
            let contains =
                |b: &Aabb| (0..3).all(|k| n.bbox.min[k] <= b.min[k] && n.bbox.max[k] >= b.max[k]);
            if n.count > 0 {
                self.items[n.start..n.start + n.count]
                    .iter()
                    .all(|it| contains(&it.1))
            } else {
                contains(&self.nodes[i + 1].bbox) && contains(&self.nodes[n.right].bbox)
            }
        })
    }

    /// Calls `f` for every primitive whose box overlaps `query`.
    pub fn visit_overlapping(&self, query: &Aabb, mut f: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if !n.bbox.intersects(query) {
                continue;
            }
            if n.count > 0 {
                for it in &self.items[n.start..n.start + n.count] {
                    if it.1.intersects(query) {
                        f(it.0);
                    }
                }
            } else {
                stack.push(n.right);
                stack.push(i + 1);
            }
        }
    }

    /// Nearest primitive to `p`. `dist2(id)` returns the exact squared
    /// distance to primitive `id`; ties go to the lower id.
    pub fn nearest(&self, p: &Point3, mut dist2: impl FnMut(usize) -> f64) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![(0usize, self.nodes[0].bbox.distance_squared(p))];
        while let Some((i, lower)) = stack.pop() {
            if best.is_some_and(|(_, d)| lower > d) {
                continue;
            }
            let n = &self.nodes[i];
            if n.count > 0 {
                for it in &self.items[n.start..n.start + n.count] {
                    if best.is_some_and(|(_, d)| it.1.distance_squared(p) > d) {
                        continue;
                    }
                    let d = dist2(it.0);
                    let better = match best {
                        None => true,
                        Some((bid, bd)) => d < bd || (d == bd && it.0 < bid),
                    };
                    if better {
                        best = Some((it.0, d));
                    }
                }
            } else {
                let (l, r) = (i + 1, n.right);
                let (dl, dr) = (
                    self.nodes[l].bbox.distance_squared(p),
                    self.nodes[r].bbox.distance_squared(p),
                );
                // Visit the closer child first.
                if dl <= dr {
                    stack.push((r, dr));
                    stack.push((l, dl));
                } else {
                    stack.push((l, dl));
                    stack.push((r, dr));
                }
            }
        }
        best
    }
}

fn build(nodes: &mut Vec<Node>, items: &mut [(usize, Aabb)], start: usize, end: usize) -> usize {
    let slice = &mut items[start..end];
    let bbox = slice.iter().fold(Aabb::empty(), |acc, it| acc.union(&it.1));
    let idx = nodes.len();
    nodes.push(Node {
        bbox,
        start,
        count: end - start,
        right: 0,
    });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let centroids = Aabb::from_points(
        slice
            .iter()
            .map(|it| it.1.center())
            .collect::<Vec<_>>()
            .iter(),
    );
    let axis = centroids.longest_axis();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| {
        a.1.center()[axis]
            .total_cmp(&b.1.center()[axis])
            .then(a.0.cmp(&b.0))
    });
    nodes[idx].count = 0;
    build(nodes, items, start, start + mid);
    let right = build(nodes, items, start + mid, end);
    nodes[idx].right = right;
    idx
}
