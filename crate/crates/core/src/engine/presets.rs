//! The two social mini-games on a 3 m x 3 m arena.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Bounds, ConflictZone, Segment, Vec2, VectorMap};
use crate::local_planner::Kinodynamics;

use super::{RobotSpec, Scenario};

pub const ARENA: f64 = 3.0;
pub const DOORWAY_GAP: f64 = 0.5;
pub const DOORWAY_WALL_Y: f64 = 1.9;

/// Limits shared by every robot in the presets.
pub fn default_kinodynamics() -> Kinodynamics {
    Kinodynamics { v_max: 1.5, a_max: 3.0, omega_max: 4.0, curvature_max: 4.0, robot_radius: 0.2 }
}

fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
    Segment::new(Vec2::new(ax, ay), Vec2::new(bx, by))
}

fn perimeter() -> Vec<Segment> {
    vec![
        seg(0.0, 0.0, ARENA, 0.0),
        seg(ARENA, 0.0, ARENA, ARENA),
        seg(ARENA, ARENA, 0.0, ARENA),
        seg(0.0, ARENA, 0.0, 0.0),
    ]
}

fn robot(start: (f64, f64), goal: (f64, f64)) -> RobotSpec {
    RobotSpec {
        start: Vec2::new(start.0, start.1),
        goal: Vec2::new(goal.0, goal.1),
        heading: None,
        zeta: None,
        kinodynamics: default_kinodynamics(),
    }
}

/// Two robots pass a 0.5 m gap in a wall splitting the arena.
pub fn doorway() -> Scenario {
    let lo = (ARENA - DOORWAY_GAP) / 2.0;
    let hi = lo + DOORWAY_GAP;
    let mut segments = perimeter();
    segments.push(seg(0.0, DOORWAY_WALL_Y, lo, DOORWAY_WALL_Y));
    segments.push(seg(hi, DOORWAY_WALL_Y, ARENA, DOORWAY_WALL_Y));
    let map = VectorMap::new(Bounds { min: Vec2::ZERO, max: Vec2::new(ARENA, ARENA) }, segments)
        .expect("preset map is valid");
    let zone = ConflictZone::rectangle(
        "doorway",
        Vec2::new(lo, DOORWAY_WALL_Y - 0.2),
        Vec2::new(hi, DOORWAY_WALL_Y + 0.2),
    )
    .expect("preset zone is valid");
    let mut s = Scenario::new(
        "doorway",
        map,
        vec![zone],
        vec![robot((1.0, 1.0), (1.2, 2.35)), robot((2.0, 1.0), (1.8, 2.35))],
    );
    s.gap_width = Some(DOORWAY_GAP);
    s.start_jitter = 0.05;
    s
}

/// Four robots, one per arm of a corridor cross, each driving straight through.
pub fn intersection() -> Scenario {
    let a = 0.7;
    let b = ARENA - a;
    let mut segments = perimeter();
    for (cx, cy) in [(a, a), (b, a), (b, b), (a, b)] {
        let (ex, ey) = (if cx < 1.5 { 0.0 } else { ARENA }, if cy < 1.5 { 0.0 } else { ARENA });
        segments.push(seg(ex, cy, cx, cy));
        segments.push(seg(cx, cy, cx, ey));
    }
    let map = VectorMap::new(Bounds { min: Vec2::ZERO, max: Vec2::new(ARENA, ARENA) }, segments)
        .expect("preset map is valid");
    let zone = ConflictZone::rectangle("crossing", Vec2::new(a, a), Vec2::new(b, b))
        .expect("preset zone is valid");
    let mut s = Scenario::new(
        "intersection",
        map,
        vec![zone],
        vec![
            robot((0.3, 1.2), (2.7, 1.2)),
            robot((1.8, 0.3), (1.8, 2.7)),
            robot((2.7, 1.8), (0.3, 1.8)),
            robot((1.2, 2.7), (1.2, 0.3)),
        ],
    );
    s.start_jitter = 0.05;
    s
}
