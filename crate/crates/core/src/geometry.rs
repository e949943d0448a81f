//! Planar geometry: points, poses, wall maps, robot footprints and conflict zones.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Segments shorter than this are rejected as degenerate.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or zero for a (near) zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 1e-12 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        libm::atan2(self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use core::f64::consts::PI;
    let mut r = libm::remainder(a, 2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// Exact unicycle motion: drive at `v` with turn rate `omega` for `dt`.
    pub fn integrate(&self, v: f64, omega: f64, dt: f64) -> Pose {
        let theta1 = self.theta + omega * dt;
        if libm::fabs(omega) < 1e-12 {
            Pose::new(
                self.x + v * dt * libm::cos(self.theta),
                self.y + v * dt * libm::sin(self.theta),
                theta1,
            )
        } else {
            let r = v / omega;
            Pose::new(
                self.x + r * (libm::sin(theta1) - libm::sin(self.theta)),
                self.y - r * (libm::cos(theta1) - libm::cos(self.theta)),
                theta1,
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.length() <= MIN_SEGMENT_LENGTH
    }

    /// Closest point on the segment to `p`. Degenerate segments collapse to `a`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let d = self.b - self.a;
        let len2 = d.norm_squared();
        if len2 <= 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(d) / len2).clamp(0.0, 1.0);
        self.a + d * t
    }

    /// Distance from `p` without the degeneracy check; used on hot paths
    /// where segments were validated at construction.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        p.distance(self.closest_point(p))
    }

    pub fn intersects(&self, o: &Segment) -> bool {
        let d1 = orient(o.a, o.b, self.a);
        let d2 = orient(o.a, o.b, self.b);
        let d3 = orient(self.a, self.b, o.a);
        let d4 = orient(self.a, self.b, o.b);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && on_segment(o, self.a))
            || (d2 == 0.0 && on_segment(o, self.b))
            || (d3 == 0.0 && on_segment(self, o.a))
            || (d4 == 0.0 && on_segment(self, o.b))
    }

    /// Minimum distance between two segments (0 when they cross).
    pub fn distance_to_segment(&self, o: &Segment) -> f64 {
        if self.intersects(o) {
            return 0.0;
        }
        let d = [
            self.distance_to(o.a),
            self.distance_to(o.b),
            o.distance_to(self.a),
            o.distance_to(self.b),
        ];
        d.into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(s: &Segment, p: Vec2) -> bool {
    p.x >= s.a.x.min(s.b.x)
        && p.x <= s.a.x.max(s.b.x)
        && p.y >= s.a.y.min(s.b.y)
        && p.y <= s.a.y.max(s.b.y)
}

/// Euclidean distance from `p` to segment `s`.
pub fn distance_point_segment(p: Vec2, s: &Segment) -> Result<f64> {
    if s.is_degenerate() {
        return Err(Error::DegenerateGeometry);
    }
    Ok(s.distance_to(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self> {
        if !(max.x > min.x && max.y > min.y) {
            return Err(Error::InvalidMap("bounds must have positive extent".into()));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn translated(&self, offset: Vec2) -> Bounds {
        Bounds { min: self.min + offset, max: self.max + offset }
    }
}

/// Static world: wall segments inside an axis-aligned arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorMap {
    bounds: Bounds,
    segments: Vec<Segment>,
}

impl VectorMap {
    pub fn new(bounds: Bounds, segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if s.is_degenerate() {
                return Err(Error::InvalidMap(alloc::format!("segment {i} has zero length")));
            }
            if !bounds.contains(s.a) || !bounds.contains(s.b) {
                return Err(Error::InvalidMap(alloc::format!("segment {i} leaves the map bounds")));
            }
        }
        Ok(Self { bounds, segments })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Distance from `p` to the nearest wall, `INFINITY` for an empty map.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest wall point to `p`, if the map has any walls.
    pub fn nearest_wall_point(&self, p: Vec2) -> Option<Vec2> {
        self.segments
            .iter()
            .map(|s| s.closest_point(p))
            .min_by(|a, b| p.distance(*a).total_cmp(&p.distance(*b)))
    }

    pub fn segment_clearance(&self, seg: &Segment) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance_to_segment(seg))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, offset: Vec2) -> VectorMap {
        VectorMap {
            bounds: self.bounds.translated(offset),
            segments: self
                .segments
                .iter()
                .map(|s| Segment::new(s.a + offset, s.b + offset))
                .collect(),
        }
    }

    /// Copy of the map without the segment at `index`.
    pub fn without_segment(&self, index: usize) -> VectorMap {
        let mut segments = self.segments.clone();
        segments.remove(index);
        VectorMap { bounds: self.bounds, segments }
    }
}

/// Circular robot footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("disc radius must be positive"));
        }
        Ok(Self { center, radius })
    }
}

/// True iff the disc overlaps a wall; tangency is not a collision.
pub fn disc_collides_map(d: &Disc, m: &VectorMap) -> bool {
    m.clearance(d.center) < d.radius
}

/// True iff two discs overlap; tangency is not a collision.
pub fn discs_collide(a: &Disc, b: &Disc) -> bool {
    a.center.distance(b.center) < a.radius + b.radius
}

/// A convex region whose traversal must be ordered between robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictZone {
    pub id: String,
    region: Vec<Vec2>,
}

impl ConflictZone {
    /// Builds a zone from a convex polygon given in either winding; stored
    /// counter-clockwise.
    pub fn new(id: impl Into<String>, mut region: Vec<Vec2>) -> Result<Self> {
        if region.len() < 3 {
            return Err(Error::InvalidZone("polygon needs at least 3 vertices"));
        }
        let area = signed_area(&region);
        if libm::fabs(area) <= 1e-12 {
            return Err(Error::InvalidZone("polygon has zero area"));
        }
        if area < 0.0 {
            region.reverse();
        }
        let n = region.len();
        for i in 0..n {
            let turn = orient(region[i], region[(i + 1) % n], region[(i + 2) % n]);
            if turn < -1e-12 {
                return Err(Error::InvalidZone("polygon is not convex"));
            }
        }
        Ok(Self { id: id.into(), region })
    }

    /// Axis-aligned rectangle zone.
    pub fn rectangle(id: impl Into<String>, min: Vec2, max: Vec2) -> Result<Self> {
        Self::new(
            id,
            alloc::vec![min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)],
        )
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.region
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.region)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.region.len() as f64;
        self.region.iter().fold(Vec2::ZERO, |acc, v| acc + *v) * (1.0 / n)
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.region.len();
        (0..n).map(move |i| Segment::new(self.region[i], self.region[(i + 1) % n]))
    }

    /// Distance from `p` to the zone; 0 inside.
    pub fn distance(&self, p: Vec2) -> f64 {
        if in_conflict_zone(p, self) {
            return 0.0;
        }
        self.edges().map(|e| e.distance_to(p)).fold(f64::INFINITY, f64::min)
    }

    /// True iff any point of the segment lies in the zone.
    pub fn intersects_segment(&self, s: &Segment) -> bool {
        in_conflict_zone(s.a, self)
            || in_conflict_zone(s.b, self)
            || self.edges().any(|e| e.intersects(s))
    }

    pub fn translated(&self, offset: Vec2) -> ConflictZone {
        ConflictZone {
            id: self.id.clone(),
            region: self.region.iter().map(|v| *v + offset).collect(),
        }
    }
}

fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Point-in-convex-polygon test, boundary inclusive.
pub fn in_conflict_zone(p: Vec2, z: &ConflictZone) -> bool {
    const EPS: f64 = 1e-12;
    let n = z.region.len();
    (0..n).all(|i| orient(z.region[i], z.region[(i + 1) % n], p) >= -EPS)
}
