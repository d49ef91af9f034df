use std::ops::{Add, AddAssign, Mul};

use nalgebra::Matrix3;

use crate::geometry::{Point3, Vector3};

/// Quadratic error functional `E(x) = xᵀ A x + 2 bᵀ x + c`.
///
/// `A` is symmetric and stored as its six unique entries in the order
/// `xx, xy, xz, yy, yz, zz`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadric {
    a: [f64; 6],
    b: Vector3,
    c: f64,
}

impl Quadric {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a quadric from a full matrix, reading only its upper triangle.
    pub fn from_parts(a: &Matrix3<f64>, b: Vector3, c: f64) -> Self {
        Self {
            a: [
                a[(0, 0)],
                a[(0, 1)],
                a[(0, 2)],
                a[(1, 1)],
                a[(1, 2)],
                a[(2, 2)],
            ],
            b,
            c,
        }
    }

    pub fn a(&self) -> Matrix3<f64> {
        let [xx, xy, xz, yy, yz, zz] = self.a;
        Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz)
    }

    pub fn b(&self) -> Vector3 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: &Point3) -> f64 {
        let [xx, xy, xz, yy, yz, zz] = self.a;
        let (px, py, pz) = (x.x, x.y, x.z);
        let quad = xx * px * px
            + yy * py * py
            + zz * pz * pz
            + 2.0 * (xy * px * py + xz * px * pz + yz * py * pz);
        quad + 2.0 * self.b.dot(&x.coords) + self.c
    }

    /// `∇E(x) = 2 (A x + b)`.
    pub fn gradient(&self, x: &Point3) -> Vector3 {
        2.0 * (self.a() * x.coords + self.b)
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|v| v.is_finite())
            && self.b.iter().all(|v| v.is_finite())
            && self.c.is_finite()
    }
}

impl Add for Quadric {
    type Output = Quadric;

    fn add(mut self, rhs: Quadric) -> Quadric {
        self += rhs;
        self
    }
}

impl AddAssign for Quadric {
    fn add_assign(&mut self, rhs: Quadric) {
        for (l, r) in self.a.iter_mut().zip(rhs.a.iter()) {
            *l += r;
        }
        self.b += rhs.b;
        self.c += rhs.c;
    }
}

impl Mul<f64> for Quadric {
    type Output = Quadric;

    fn mul(mut self, s: f64) -> Quadric {
        for v in self.a.iter_mut() {
            *v *= s;
        }
        self.b *= s;
        self.c *= s;
        self
    }
}

impl std::iter::Sum for Quadric {
    fn sum<I: Iterator<Item = Quadric>>(iter: I) -> Quadric {
        iter.fold(Quadric::zero(), |acc, q| acc + q)
    }
}

/// Component-wise sum of two quadrics.
pub fn quadric_add(q1: &Quadric, q2: &Quadric) -> Quadric {
    *q1 + *q2
}

pub fn quadric_eval(q: &Quadric, x: &Point3) -> f64 {
    q.eval(x)
}
