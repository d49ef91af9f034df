//! Low-level geometric kernels: bounding boxes, closest-point queries and
//! triangle-to-triangle distances.

use nalgebra as na;

pub type Point3 = na::Point3<f64>;
pub type Vector3 = na::Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    /// An inverted box that acts as the identity for [`Aabb::union`].
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn expanded(&self, r: f64) -> Aabb {
        let d = Vector3::repeat(r);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
            && self.min.z <= other.max.z
            && other.min.z <= self.max.z
    }

    pub fn center(&self) -> Point3 {
        na::center(&self.min, &self.max)
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.max - self.min).norm()
        }
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.max - self.min;
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: &Point3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = p[k];
            if v < self.min[k] {
                d2 += (self.min[k] - v).powi(2);
            } else if v > self.max[k] {
                d2 += (v - self.max[k]).powi(2);
            }
        }
        d2
    }
}

/// Unnormalized normal `(b - a) x (c - a)`; its norm is twice the area.
#[inline]
pub fn triangle_cross(a: &Point3, b: &Point3, c: &Point3) -> Vector3 {
    (b - a).cross(&(c - a))
}

#[inline]
pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * triangle_cross(a, b, c).norm()
}

/// Unit normal, or `None` for a zero-area triangle.
pub fn triangle_normal(a: &Point3, b: &Point3, c: &Point3) -> Option<Vector3> {
    let n = triangle_cross(a, b, c);
    let len = n.norm();
    if len > 0.0 && len.is_finite() {
        Some(n / len)
    } else {
        None
    }
}

/// Closest point on triangle `abc` to `p`, with its barycentric coordinates
/// with respect to `(a, b, c)`.
pub fn closest_point_on_triangle(
    p: &Point3,
    a: &Point3,
    b: &Point3,
    c: &Point3,
) -> (Point3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }

    let denom = va + vb + vc;
    if denom <= 0.0 || !denom.is_finite() {
        // Degenerate triangle: fall back to its edges.
        return closest_point_on_degenerate_triangle(p, a, b, c);
    }
    let v = vb / denom;
    let w = vc / denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

fn closest_point_on_degenerate_triangle(
    p: &Point3,
    a: &Point3,
    b: &Point3,
    c: &Point3,
) -> (Point3, [f64; 3]) {
    let (q0, t0) = closest_point_on_segment(p, a, b);
    let (q1, t1) = closest_point_on_segment(p, b, c);
    let (q2, t2) = closest_point_on_segment(p, c, a);
    let cands = [
        (q0, [1.0 - t0, t0, 0.0]),
        (q1, [0.0, 1.0 - t1, t1]),
        (q2, [t2, 0.0, 1.0 - t2]),
    ];
    let mut best = cands[0];
    let mut best_d = (p - best.0).norm_squared();
    for c in &cands[1..] {
        let d = (p - c.0).norm_squared();
        if d < best_d {
            best_d = d;
            best = *c;
        }
    }
    best
}

/// Closest point on segment `ab` to `p` and its parameter `t` in `[0, 1]`.
pub fn closest_point_on_segment(p: &Point3, a: &Point3, b: &Point3) -> (Point3, f64) {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 0.0 {
        return (*a, 0.0);
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

/// Closest points between segments `p1q1` and `p2q2`.
/// Returns `(c1, c2, s, t)` where `c1 = p1 + s (q1 - p1)` and `c2 = p2 + t (q2 - p2)`.
pub fn closest_points_segment_segment(
    p1: &Point3,
    q1: &Point3,
    p2: &Point3,
    q2: &Point3,
) -> (Point3, Point3, f64, f64) {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t);
    if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        return (*p1, *p2, 0.0, 0.0);
    }
    if a <= f64::MIN_POSITIVE {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::MIN_POSITIVE {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p1 + d1 * s, p2 + d2 * t, s, t)
}

/// Intersection of segment `pq` with triangle `abc`, if any.
/// Segments lying in the triangle's plane report no intersection; callers
/// handle the coplanar case through edge and vertex distances.
pub fn segment_triangle_intersection(
    p: &Point3,
    q: &Point3,
    a: &Point3,
    b: &Point3,
    c: &Point3,
) -> Option<Point3> {
    let dir = q - p;
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= 1e-14 * scale || scale == 0.0 {
        return None;
    }
    let inv = 1.0 / det;
    let s = p - a;
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qv = s.cross(&e1);
    let v = inv * dir.dot(&qv);
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = inv * e2.dot(&qv);
    if !(0.0..=1.0).contains(&t) {
        return None;
    }
    Some(p + dir * t)
}

/// Minimum distance between two closed triangles and a pair of points
/// realizing it (`p1` on the first triangle, `p2` on the second).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePairDistance {
    pub distance: f64,
    pub p1: Point3,
    pub p2: Point3,
}

pub fn triangle_triangle_distance(t1: &[Point3; 3], t2: &[Point3; 3]) -> TrianglePairDistance {
    // Any crossing shows up as an edge of one triangle piercing the other.
    for k in 0..3 {
        let (a, b) = (&t1[k], &t1[(k + 1) % 3]);
        if let Some(x) = segment_triangle_intersection(a, b, &t2[0], &t2[1], &t2[2]) {
            return TrianglePairDistance {
                distance: 0.0,
                p1: x,
                p2: x,
            };
        }
        let (a, b) = (&t2[k], &t2[(k + 1) % 3]);
        if let Some(x) = segment_triangle_intersection(a, b, &t1[0], &t1[1], &t1[2]) {
            return TrianglePairDistance {
                distance: 0.0,
                p1: x,
                p2: x,
            };
        }
    }

    let mut best_d2 = f64::INFINITY;
    let mut best = (t1[0], t2[0]);
    let mut consider = |x: Point3, y: Point3| {
        let d2 = (x - y).norm_squared();
        if d2 < best_d2 {
            best_d2 = d2;
            best = (x, y);
        }
    };

    for i in 0..3 {
        for j in 0..3 {
            let (c1, c2, _, _) =
                closest_points_segment_segment(&t1[i], &t1[(i + 1) % 3], &t2[j], &t2[(j + 1) % 3]);
            consider(c1, c2);
        }
    }
    for v in t1 {
        let (q, _) = closest_point_on_triangle(v, &t2[0], &t2[1], &t2[2]);
        consider(*v, q);
    }
    for v in t2 {
        let (q, _) = closest_point_on_triangle(v, &t1[0], &t1[1], &t1[2]);
        consider(q, *v);
    }

    TrianglePairDistance {
        distance: best_d2.sqrt(),
        p1: best.0,
        p2: best.1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = (p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0));
        let (q, w) = closest_point_on_triangle(&p(0.2, 0.3, 4.0), &a, &b, &c);
        assert!((q - p(0.2, 0.3, 0.0)).norm() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.2).abs() < 1e-15);
        let (q, w) = closest_point_on_triangle(&p(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(q, a);
        assert_eq!(w, [1.0, 0.0, 0.0]);
        let (q, _) = closest_point_on_triangle(&p(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - p(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn segment_segment_skew() {
        let (c1, c2, s, t) = closest_points_segment_segment(
            &p(-1.0, 0.0, 0.0),
            &p(1.0, 0.0, 0.0),
            &p(0.0, -1.0, 1.0),
            &p(0.0, 1.0, 1.0),
        );
        assert!((c1 - p(0.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((c2 - p(0.0, 0.0, 1.0)).norm() < 1e-15);
        assert!((s - 0.5).abs() < 1e-15 && (t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_distance_intersecting_is_zero() {
        let t1 = [p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(0.0, 2.0, 0.0)];
        let t2 = [p(0.5, 0.5, -1.0), p(0.5, 0.5, 1.0), p(1.5, 0.2, 0.3)];
        assert_eq!(triangle_triangle_distance(&t1, &t2).distance, 0.0);
    }

    #[test]
    fn triangle_distance_parallel_offset() {
        let t1 = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)];
        let t2 = [p(0.0, 0.0, 0.3), p(1.0, 0.0, 0.3), p(0.0, 1.0, 0.3)];
        let d = triangle_triangle_distance(&t1, &t2);
        assert!((d.distance - 0.3).abs() < 1e-15);
        assert!(((d.p2 - d.p1).norm() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn triangle_distance_coplanar_overlap() {
        let t1 = [p(0.0, 0.0, 0.0), p(4.0, 0.0, 0.0), p(0.0, 4.0, 0.0)];
        let t2 = [p(0.5, 0.5, 0.0), p(1.0, 0.5, 0.0), p(0.5, 1.0, 0.0)];
        assert_eq!(triangle_triangle_distance(&t1, &t2).distance, 0.0);
    }

    #[test]
    fn aabb_distance() {
        let b = Aabb::from_points(&[p(0.0, 0.0, 0.0), p(1.0, 1.0, 1.0)]);
        assert_eq!(b.distance_squared(&p(0.5, 0.5, 0.5)), 0.0);
        assert_eq!(b.distance_squared(&p(2.0, 0.5, 3.0)), 5.0);
        assert_eq!(b.longest_axis(), 0);
        assert!(Aabb::empty().is_empty());
    }
}
