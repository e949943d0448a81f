//! Lattice navigation graph over a [`VectorMap`] and A* search on it.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2, VectorMap};

/// Default lattice spacing in meters.
pub const DEFAULT_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// 8-connected lattice restricted to points and moves that keep
/// `robot_radius` clearance from every wall.
#[derive(Debug, Clone)]
pub struct NavGraph {
    vertices: Vec<Vec2>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    origin: Vec2,
    resolution: f64,
    robot_radius: f64,
    cols: usize,
    rows: usize,
    /// Lattice cell (row-major) to vertex index.
    cell_vertex: Vec<Option<usize>>,
}

pub fn build_nav_graph(m: &VectorMap, resolution: f64, robot_radius: f64) -> Result<NavGraph> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::InvalidParameter("resolution must be positive"));
    }
    if !(robot_radius > 0.0) || !robot_radius.is_finite() {
        return Err(Error::InvalidParameter("robot radius must be positive"));
    }
    let bounds = m.bounds();
    let cols = libm::floor(bounds.width() / resolution + 1e-9) as usize + 1;
    let rows = libm::floor(bounds.height() / resolution + 1e-9) as usize + 1;
    let origin = bounds.min;
    let point = |c: usize, r: usize| {
        Vec2::new(
            origin.x + c as f64 * resolution,
            origin.y + r as f64 * resolution,
        )
    };

    let mut vertices = Vec::new();
    let mut cell_vertex = vec![None; cols * rows];
    for r in 0..rows {
        for c in 0..cols {
            let p = point(c, r);
            if m.clearance(p) >= robot_radius {
                cell_vertex[r * cols + c] = Some(vertices.len());
                vertices.push(p);
            }
        }
    }
    if vertices.is_empty() {
        return Err(Error::MapFullyBlocked);
    }

    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    // forward half of the 8-neighbourhood so each undirected edge is visited once
    const FORWARD: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (-1, 1)];
    for r in 0..rows {
        for c in 0..cols {
            let Some(a) = cell_vertex[r * cols + c] else { continue };
            for (dc, dr) in FORWARD {
                let (nc, nr) = (c as isize + dc, r as isize + dr);
                if nc < 0 || nr < 0 || nc as usize >= cols || nr as usize >= rows {
                    continue;
                }
                let Some(b) = cell_vertex[nr as usize * cols + nc as usize] else { continue };
                let seg = Segment::new(vertices[a], vertices[b]);
                if m.segment_clearance(&seg) < robot_radius {
                    continue;
                }
                let weight = vertices[a].distance(vertices[b]);
                edges.push(Edge { a, b, weight });
                adjacency[a].push((b, weight));
                adjacency[b].push((a, weight));
            }
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(v, _)| v);
    }

    Ok(NavGraph {
        vertices,
        edges,
        adjacency,
        origin,
        resolution,
        robot_radius,
        cols,
        rows,
        cell_vertex,
    })
}

impl NavGraph {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    /// Number of connected components (iterative flood fill).
    pub fn component_count(&self) -> usize {
        let mut label = vec![usize::MAX; self.vertices.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.vertices.len() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        count
    }

    /// Nearest free vertex within one lattice cell of `p`; ties go to the
    /// lowest vertex index.
    pub fn snap(&self, p: Vec2) -> Option<usize> {
        let fc = (p.x - self.origin.x) / self.resolution;
        let fr = (p.y - self.origin.y) / self.resolution;
        let c0 = libm::floor(fc) as isize;
        let r0 = libm::floor(fr) as isize;
        let mut best: Option<(f64, usize)> = None;
        for r in (r0 - 1)..=(r0 + 2) {
            for c in (c0 - 1)..=(c0 + 2) {
                if r < 0 || c < 0 || r as usize >= self.rows || c as usize >= self.cols {
                    continue;
                }
                let Some(v) = self.cell_vertex[r as usize * self.cols + c as usize] else {
                    continue;
                };
                let d = self.vertices[v].distance(p);
                if d > self.resolution + 1e-9 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bd, bv)) => d < bd || (d == bd && v < bv),
                };
                if better {
                    best = Some((d, v));
                }
            }
        }
        best.map(|(_, v)| v)
    }

    /// Clearance-preserving straight lattice move between two vertices, if any.
    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .binary_search_by_key(&b, |&(v, _)| v)
            .ok()
            .map(|i| self.adjacency[a][i].1)
    }
}

/// A polyline through graph vertices from start to goal.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPath {
    pub vertex_ids: Vec<usize>,
    pub waypoints: Vec<Vec2>,
    pub total_length: f64,
}

impl GlobalPath {
    /// Builds a path directly from points (no graph), e.g. for tests and
    /// straight-line routes.
    pub fn from_points(waypoints: Vec<Vec2>) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::EmptyPath);
        }
        let total_length = waypoints.windows(2).map(|w| w[0].distance(w[1])).sum();
        Ok(Self { vertex_ids: Vec::new(), waypoints, total_length })
    }

    pub fn goal(&self) -> Vec2 {
        *self.waypoints.last().expect("paths are nonempty")
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.waypoints.windows(2).map(|w| Segment::new(w[0], w[1]))
    }

    /// Arc-length coordinate of the point on the path closest to `p`,
    /// together with the distance to it. Ties go to the earliest segment.
    pub fn project(&self, p: Vec2) -> (f64, f64) {
        if self.waypoints.len() == 1 {
            return (0.0, p.distance(self.waypoints[0]));
        }
        let mut best = (0.0, f64::INFINITY);
        let mut s0 = 0.0;
        for seg in self.segments() {
            let q = seg.closest_point(p);
            let d = q.distance(p);
            if d < best.1 {
                best = (s0 + seg.a.distance(q), d);
            }
            s0 += seg.length();
        }
        best
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).1
    }

    /// Point at arc-length `s`, clamped to the path.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let mut remaining = s.max(0.0);
        for seg in self.segments() {
            let len = seg.length();
            if remaining <= len {
                if len <= 0.0 {
                    return seg.a;
                }
                return seg.a + (seg.b - seg.a) * (remaining / len);
            }
            remaining -= len;
        }
        self.goal()
    }

    /// The portion of the path after arc-length `s`, starting at `point_at(s)`.
    pub fn remaining_from(&self, s: f64) -> Vec<Vec2> {
        let mut out = vec![self.point_at(s)];
        let mut acc = 0.0;
        for w in self.waypoints.windows(2) {
            acc += w[0].distance(w[1]);
            if acc > s {
                out.push(w[1]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    f: f64,
    g: f64,
    vertex: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // max-heap: smallest f first, then largest g, then lowest index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Shrinks the straight-line heuristic so that it never exceeds a
/// floating-point sum of edge weights along any path.
const HEURISTIC_SCALE: f64 = 1.0 - 1e-12;

/// Shortest path between the vertices nearest `start` and `goal`.
pub fn astar(g: &NavGraph, start: Vec2, goal: Vec2) -> Result<GlobalPath> {
    let s = g.snap(start).ok_or(Error::EndpointBlocked)?;
    let t = g.snap(goal).ok_or(Error::EndpointBlocked)?;
    astar_vertices(g, s, t)
}

pub fn astar_vertices(g: &NavGraph, s: usize, t: usize) -> Result<GlobalPath> {
    let n = g.vertices.len();
    let target = g.vertices[t];
    let h = |v: usize| g.vertices[v].distance(target) * HEURISTIC_SCALE;

    let mut best_g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    best_g[s] = 0.0;
    heap.push(Frontier { f: h(s), g: 0.0, vertex: s });

    while let Some(Frontier { g: gu, vertex: u, .. }) = heap.pop() {
        if gu > best_g[u] {
            continue; // stale entry
        }
        if u == t {
            break;
        }
        for &(v, w) in &g.adjacency[u] {
            let cand = gu + w;
            if cand < best_g[v] {
                best_g[v] = cand;
                parent[v] = u;
                heap.push(Frontier { f: cand + h(v), g: cand, vertex: v });
            }
        }
    }

    if !best_g[t].is_finite() {
        return Err(Error::NoPath);
    }
    let mut vertex_ids = vec![t];
    let mut cur = t;
    while cur != s {
        cur = parent[cur];
        vertex_ids.push(cur);
    }
    vertex_ids.reverse();
    let waypoints = vertex_ids.iter().map(|&v| g.vertices[v]).collect();
    Ok(GlobalPath { vertex_ids, waypoints, total_length: best_g[t] })
}
