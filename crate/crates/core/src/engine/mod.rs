//! Fixed-rate episode engine: observations, controllers, conflict
//! orchestration, termination and metrics.

mod controller;
pub mod metrics;
pub mod presets;
mod scenario;
pub mod telemetry;
mod world;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::auction::Bid;
use crate::error::Result;
use crate::geometry::{Disc, Pose, Vec2};
use crate::global_planner::GlobalPath;
use crate::local_planner::{ArcTrajectory, Kinodynamics, VelocityCommand};
use crate::RobotId;

pub use controller::{neighbor_obstacles, BilevelController};
pub use metrics::{compute_flow_rate, count_delta_v, count_stop_time, detect_deadlock, EpisodeMetrics, Outcome};
pub use scenario::*;
pub use telemetry::TelemetryRecord;
pub use world::{effective_limits, run_episode, World};

/// What a robot knows about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OwnState {
    pub id: RobotId,
    pub pose: Pose,
    pub v: f64,
    pub omega: f64,
    pub goal: Vec2,
    pub radius: f64,
    /// Limits in force this tick, already scaled by the turn.
    pub kinodynamics: Kinodynamics,
    pub turn: Option<u32>,
    /// Index of the conflict zone `turn` refers to.
    pub zone: Option<usize>,
    pub done: bool,
}

/// What a robot can observe about a neighbour: public state only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborState {
    pub id: RobotId,
    pub pose: Pose,
    pub v: f64,
    pub omega: f64,
    pub radius: f64,
    /// Unscaled speed limit.
    pub v_max: f64,
    pub turn: Option<u32>,
    pub zone: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub tick: u64,
    pub dt: f64,
    pub own: OwnState,
    pub neighbors: Vec<NeighborState>,
}

impl Observation {
    pub fn neighbor_discs(&self) -> Vec<Disc> {
        self.neighbors
            .iter()
            .map(|n| Disc { center: n.pose.position(), radius: n.radius })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub command: VelocityCommand,
    /// The speed limit the controller planned under.
    pub v_limit: f64,
    pub arc: Option<ArcTrajectory>,
}

/// A decentralized robot controller. It sees only its own observation.
pub trait Controller {
    /// Sealed bid for a newly detected conflict; `None` abstains.
    fn bid(&self, obs: &Observation) -> Option<Bid>;

    /// Current global route, if the controller follows one.
    fn route(&self) -> Option<&GlobalPath>;

    fn act(&mut self, obs: &Observation) -> Result<ControlOutput>;
}
