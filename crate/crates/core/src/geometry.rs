//! Planar primitives: points, headings, the square arena, and uniform sampling.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use thiserror::Error;

/// Tolerance (meters) for "on the boundary" tests.
pub const BOUNDARY_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("arena side must be positive and finite, got {0}")]
    InvalidSide(f64),
    #[error("point ({x}, {y}) is not on the arena boundary")]
    NotOnBoundary { x: f64, y: f64 },
}

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

/// Direction of motion as an angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Heading(f64);

impl Heading {
    /// Builds a heading from any finite angle, wrapping it into `[0, 2π)`.
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        // rem_euclid of a tiny negative angle rounds up to exactly TAU
        if a >= TAU {
            a = 0.0;
        }
        Heading(a)
    }

    /// Direction of a vector; `None` for the zero vector.
    pub fn from_vector(v: Point2) -> Option<Self> {
        if v.x == 0.0 && v.y == 0.0 {
            None
        } else {
            Some(Heading::new(v.y.atan2(v.x)))
        }
    }

    pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Heading::new(rng.gen_range(0.0..TAU))
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn unit(self) -> Point2 {
        let (s, c) = self.0.sin_cos();
        Point2::new(c, s)
    }

    pub fn reversed(self) -> Self {
        Heading::new(self.0 + PI)
    }
}

/// Axis-aligned square `[0, side] × [0, side]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    side: f64,
}

impl Arena {
    pub fn new(side: f64) -> Result<Self, GeometryError> {
        if side.is_finite() && side > 0.0 {
            Ok(Arena { side })
        } else {
            Err(GeometryError::InvalidSide(side))
        }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn diagonal(&self) -> f64 {
        self.side * std::f64::consts::SQRT_2
    }

    pub fn contains(&self, p: Point2) -> bool {
        (0.0..=self.side).contains(&p.x) && (0.0..=self.side).contains(&p.y)
    }

    pub fn clamp(&self, p: Point2) -> Point2 {
        Point2::new(p.x.clamp(0.0, self.side), p.y.clamp(0.0, self.side))
    }

    /// Distance travelled from `p` along `heading` before leaving the arena.
    /// Zero when `p` is on an edge and `heading` points outward across it.
    pub fn exit_distance(&self, p: Point2, heading: Heading) -> f64 {
        let u = heading.unit();
        let along = |pos: f64, dir: f64| {
            if dir > 0.0 {
                ((self.side - pos) / dir).max(0.0)
            } else if dir < 0.0 {
                (pos / -dir).max(0.0)
            } else {
                f64::INFINITY
            }
        };
        along(p.x, u.x).min(along(p.y, u.y))
    }
}

pub fn distance(p: Point2, q: Point2) -> f64 {
    (p - q).norm()
}

/// Minimum distance from `p` to the closed segment `ab`; `a == b` is allowed.
pub fn seg_point_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return distance(a, p);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    distance(a + ab * t, p)
}

pub fn sample_uniform_point<R: Rng + ?Sized>(arena: &Arena, rng: &mut R) -> Point2 {
    let s = arena.side();
    Point2::new(rng.gen_range(0.0..=s), rng.gen_range(0.0..=s))
}

/// Draws a heading uniformly from the open sector of directions that point
/// strictly into the arena from a boundary point: a half-plane on an edge,
/// a quarter-plane at a corner.
pub fn redirect_into_interior<R: Rng + ?Sized>(
    pos: Point2,
    arena: &Arena,
    rng: &mut R,
) -> Result<Heading, GeometryError> {
    let s = arena.side();
    let left = pos.x <= BOUNDARY_EPS;
    let right = pos.x >= s - BOUNDARY_EPS;
    let bottom = pos.y <= BOUNDARY_EPS;
    let top = pos.y >= s - BOUNDARY_EPS;

    // (lo, hi) open interval of admissible angles; lo may be negative.
    let x_sector = match (left, right) {
        (true, false) => Some((-FRAC_PI_2, FRAC_PI_2)),
        (false, true) => Some((FRAC_PI_2, 3.0 * FRAC_PI_2)),
        _ => None,
    };
    let y_sector = match (bottom, top) {
        (true, false) => Some((0.0, PI)),
        (false, true) => Some((PI, TAU)),
        _ => None,
    };
    let (lo, hi) = match (x_sector, y_sector) {
        (Some(xs), None) => xs,
        (None, Some(ys)) => ys,
        (Some(_), Some(_)) => match (left, bottom) {
            (true, true) => (0.0, FRAC_PI_2),
            (true, false) => (-FRAC_PI_2, 0.0),
            (false, true) => (FRAC_PI_2, PI),
            (false, false) => (PI, 3.0 * FRAC_PI_2),
        },
        (None, None) => return Err(GeometryError::NotOnBoundary { x: pos.x, y: pos.y }),
    };
    loop {
        let a = rng.gen_range(lo..hi);
        if a > lo {
            return Ok(Heading::new(a));
        }
    }
}
