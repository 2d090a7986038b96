//! Planar predicates and angular ordering.
//!
//! Everything here works on plain `f64` coordinates. Turn decisions use the
//! sign of a cross product, never an extracted angle, so that the
//! traversal rules built on top of them are deterministic.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dist2(self, other: Point) -> f64 {
        let d = self.sub(other);
        d.dot(d)
    }

    pub fn dist(self, other: Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Closed segment. `a == b` is allowed and denotes a degenerate segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }
}

/// Axis-aligned closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    /// Returns `None` when the corners are not ordered or not finite.
    pub fn new(min: Point, max: Point) -> Option<Self> {
        (min.is_finite() && max.is_finite() && min.x <= max.x && min.y <= max.y)
            .then_some(Self { min, max })
    }

    pub fn square(min: Point, side: f64) -> Option<Self> {
        Self::new(min, Point::new(min.x + side, min.y + side))
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }
}

impl TryFrom<[f64; 4]> for Rect {
    type Error = String;

    fn try_from([x0, y0, x1, y1]: [f64; 4]) -> Result<Self, Self::Error> {
        Rect::new(Point::new(x0, y0), Point::new(x1, y1))
            .ok_or_else(|| format!("invalid rectangle [{x0}, {y0}, {x1}, {y1}]"))
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.min.x, r.min.y, r.max.x, r.max.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Clockwise,
    CounterClockwise,
    Collinear,
}

impl Orientation {
    pub fn reverse(self) -> Self {
        match self {
            Orientation::Clockwise => Orientation::CounterClockwise,
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Collinear => Orientation::Collinear,
        }
    }
}

/// Sign of `(q - p) x (r - p)`; an exact zero is collinear.
pub fn orientation(p: Point, q: Point, r: Point) -> Orientation {
    let c = q.sub(p).cross(r.sub(p));
    if c > 0.0 {
        Orientation::CounterClockwise
    } else if c < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

/// `r` lies within the bounding box of `p`-`q`. Only meaningful for collinear input.
fn within_box(p: Point, q: Point, r: Point) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed segment intersection: touching endpoints and collinear overlap count.
pub fn segments_intersect(s1: Segment, s2: Segment) -> bool {
    let o1 = orientation(s1.a, s1.b, s2.a);
    let o2 = orientation(s1.a, s1.b, s2.b);
    let o3 = orientation(s2.a, s2.b, s1.a);
    let o4 = orientation(s2.a, s2.b, s1.b);

    if o1 != o2
        && o3 != o4
        && o1 != Orientation::Collinear
        && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear
        && o4 != Orientation::Collinear
    {
        return true;
    }
    (o1 == Orientation::Collinear && within_box(s1.a, s1.b, s2.a))
        || (o2 == Orientation::Collinear && within_box(s1.a, s1.b, s2.b))
        || (o3 == Orientation::Collinear && within_box(s2.a, s2.b, s1.a))
        || (o4 == Orientation::Collinear && within_box(s2.a, s2.b, s1.b))
}

/// True when the two segments cross at a point interior to both.
pub fn segments_cross_properly(s1: Segment, s2: Segment) -> bool {
    let o1 = orientation(s1.a, s1.b, s2.a);
    let o2 = orientation(s1.a, s1.b, s2.b);
    let o3 = orientation(s2.a, s2.b, s1.a);
    let o4 = orientation(s2.a, s2.b, s1.b);
    o1 != Orientation::Collinear
        && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear
        && o4 != Orientation::Collinear
        && o1 != o2
        && o3 != o4
}

/// Closed segment against closed rectangle.
pub fn segment_intersects_rect(s: Segment, r: Rect) -> bool {
    if r.contains(s.a) || r.contains(s.b) {
        return true;
    }
    let c = r.corners();
    (0..4).any(|i| segments_intersect(s, Segment::new(c[i], c[(i + 1) % 4])))
}

/// Traversal rule: right-hand (clockwise) or left-hand (counter-clockwise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    L,
    R,
}

impl Rule {
    pub fn opposite(self) -> Rule {
        match self {
            Rule::L => Rule::R,
            Rule::R => Rule::L,
        }
    }
}

/// Angular class of `v` measured counter-clockwise from `reference`, in `[0, 2pi)`.
/// 0: same direction, 1: (0, pi), 2: pi, 3: (pi, 2pi).
fn sweep_class(reference: Point, v: Point) -> u8 {
    let c = reference.cross(v);
    if c > 0.0 {
        1
    } else if c < 0.0 {
        3
    } else if reference.dot(v) > 0.0 {
        0
    } else {
        2
    }
}

/// Compares the counter-clockwise angles of `a` and `b` measured from
/// `reference`, all taken as direction vectors. Angles live in `[0, 2pi)`.
pub fn ccw_angle_cmp(reference: Point, a: Point, b: Point) -> Ordering {
    let (ca, cb) = (sweep_class(reference, a), sweep_class(reference, b));
    if ca != cb {
        return ca.cmp(&cb);
    }
    match ca {
        1 | 3 => {
            let c = a.cross(b);
            if c > 0.0 {
                Ordering::Less
            } else if c < 0.0 {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
        _ => Ordering::Equal,
    }
}

/// Total order of points around `center`, counter-clockwise starting at the
/// positive x axis. Points in the same direction are ordered nearer first.
pub fn angular_cmp(center: Point, a: Point, b: Point) -> Ordering {
    let east = Point::new(1.0, 0.0);
    let (va, vb) = (a.sub(center), b.sub(center));
    ccw_angle_cmp(east, va, vb).then_with(|| {
        va.dot(va)
            .partial_cmp(&vb.dot(vb))
            .unwrap_or(Ordering::Equal)
    })
}

/// True when direction `t` lies in the closed counter-clockwise sweep from
/// direction `from` to direction `to` (all relative vectors). A sweep whose
/// ends coincide in direction covers the whole turn.
pub fn in_ccw_sweep(from: Point, to: Point, t: Point) -> bool {
    if sweep_class(from, to) == 0 {
        return true;
    }
    ccw_angle_cmp(from, t, to) != Ordering::Greater
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("next hop requested with an empty neighbor set")]
    EmptyNeighborhood,
}

/// Face-traversal successor: for [`Rule::R`] the first neighbor met when
/// sweeping clockwise from the ray `at -> prev`; for [`Rule::L`] the first met
/// counter-clockwise. Neighbors pointing exactly along the incoming ray are
/// taken only after a full turn, with `prev` itself preferred (bounce back).
pub fn next_hop(
    at: Point,
    prev: Point,
    neighbors: &[Point],
    rule: Rule,
) -> Result<Point, GeometryError> {
    let reference = prev.sub(at);
    // Linear rank along the sweep: smaller is met earlier.
    let rank = |p: &Point| -> (u8, Point) {
        let v = p.sub(at);
        let class = sweep_class(reference, v);
        let class = match (rule, class) {
            (_, 0) => 4,
            (Rule::L, c) => c,
            (Rule::R, 1) => 3,
            (Rule::R, 3) => 1,
            (Rule::R, c) => c,
        };
        (class, v)
    };
    let sweep_cmp = |a: &Point, b: &Point| -> Ordering {
        let (ca, va) = rank(a);
        let (cb, vb) = rank(b);
        ca.cmp(&cb).then_with(|| {
            let by_angle = match ca {
                1 | 3 => {
                    let c = va.cross(vb);
                    let ord = if c > 0.0 {
                        Ordering::Less
                    } else if c < 0.0 {
                        Ordering::Greater
                    } else {
                        Ordering::Equal
                    };
                    if rule == Rule::R {
                        ord.reverse()
                    } else {
                        ord
                    }
                }
                _ => Ordering::Equal,
            };
            by_angle
                .then_with(|| (*b == prev).cmp(&(*a == prev)))
                .then_with(|| {
                    va.dot(va)
                        .partial_cmp(&vb.dot(vb))
                        .unwrap_or(Ordering::Equal)
                })
        })
    };
    neighbors
        .iter()
        .copied()
        .min_by(sweep_cmp)
        .ok_or(GeometryError::EmptyNeighborhood)
}
