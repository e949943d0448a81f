//! Per-tick episode records.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{Bounds, ConflictZone, Segment, Vec2};
use crate::RobotId;

use super::{BaselineMode, Outcome, SchedulingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotInfo {
    pub id: RobotId,
    pub start: Vec2,
    pub goal: Vec2,
    pub radius: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TelemetryRecord {
    Header {
        scenario: String,
        seed: u64,
        tick_rate: f64,
        scheduling: SchedulingMode,
        baseline: BaselineMode,
        bounds: Bounds,
        segments: Vec<Segment>,
        zones: Vec<ConflictZone>,
        robots: Vec<RobotInfo>,
    },
    State {
        tick: u64,
        robot: RobotId,
        x: f64,
        y: f64,
        theta: f64,
        v: f64,
        omega: f64,
        turn: Option<u32>,
        done: bool,
    },
    Auction {
        tick: u64,
        zone: String,
        bids: Vec<(RobotId, f64)>,
        order: Vec<RobotId>,
        payments: Vec<(RobotId, f64)>,
        proxy_bids: Vec<f64>,
    },
    ZoneEntry {
        tick: u64,
        robot: RobotId,
        zone: String,
    },
    Collision {
        tick: u64,
        robot: RobotId,
        /// `None` for a wall contact.
        other: Option<RobotId>,
        x: f64,
        y: f64,
        goal_adjacent: bool,
    },
    Arrival {
        tick: u64,
        robot: RobotId,
        time: f64,
    },
    End {
        tick: u64,
        outcome: Outcome,
    },
}
