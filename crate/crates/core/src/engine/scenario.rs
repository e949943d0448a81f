use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::auction::DEFAULT_ENGAGEMENT_RADIUS;
use crate::error::{Error, Result};
use crate::geometry::{ConflictZone, Vec2, VectorMap};
use crate::global_planner::DEFAULT_RESOLUTION;
use crate::local_planner::{Kinodynamics, PlannerConfig};
use crate::social_force::SocialForceParams;

/// How turns through conflict zones are decided and enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulingMode {
    /// Auction ordering, speed limit `v_max / turn`.
    Auction,
    /// No ordering; every robot plans at its own limits.
    None,
    /// Auction ordering with the `(1 - turn / (5 v_max))^-1` speed scaling.
    EnforcedAltScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineMode {
    Bilevel,
    SocialForces,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub start: Vec2,
    pub goal: Vec2,
    /// Initial heading; defaults to facing the first pursuit target.
    pub heading: Option<f64>,
    /// Private priority constant; drawn from the episode generator when absent.
    pub zeta: Option<f64>,
    pub kinodynamics: Kinodynamics,
}

/// A fully resolved episode description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub map: VectorMap,
    pub zones: Vec<ConflictZone>,
    pub robots: Vec<RobotSpec>,
    /// Doorway gap width `z` used by the flow rate, meters.
    pub gap_width: Option<f64>,
    pub tick_rate: f64,
    pub episode_cap: u64,
    pub scheduling: SchedulingMode,
    pub baseline: BaselineMode,
    pub seed: u64,
    pub planner: PlannerConfig,
    /// How far ahead (s) a robot predicts the motion of robots holding an
    /// earlier turn; 0 treats every neighbour as a static disc.
    pub yield_horizon: f64,
    pub social: SocialForceParams,
    pub nav_resolution: f64,
    pub engagement_radius: f64,
    /// Upper end of the priority-constant and proxy-bid distribution.
    pub zeta_max: f64,
    pub goal_tolerance: f64,
    /// `None` makes every robot visible to every other.
    pub sensing_radius: Option<f64>,
    pub delta_v_threshold: f64,
    pub stop_speed: f64,
    /// Half-width of the uniform perturbation applied to each start, meters.
    pub start_jitter: f64,
    pub deadlock_window: usize,
    pub deadlock_distance: f64,
}

pub const DEFAULT_TICK_RATE: f64 = 40.0;
pub const DEFAULT_EPISODE_CAP: u64 = 4000;
pub const DEFAULT_GOAL_TOLERANCE: f64 = 0.15;
pub const DEFAULT_DELTA_V_THRESHOLD: f64 = 0.05;
pub const DEFAULT_STOP_SPEED: f64 = 0.01;
pub const DEFAULT_DEADLOCK_WINDOW: usize = 100;
pub const DEFAULT_DEADLOCK_DISTANCE: f64 = 0.5;
pub const DEFAULT_ZETA_MAX: f64 = 10.0;
pub const DEFAULT_YIELD_HORIZON: f64 = 1.0;

impl Scenario {
    /// Scenario with default engine settings around the given world and robots.
    pub fn new(
        name: impl Into<String>,
        map: VectorMap,
        zones: Vec<ConflictZone>,
        robots: Vec<RobotSpec>,
    ) -> Self {
        Self {
            name: name.into(),
            map,
            zones,
            robots,
            gap_width: None,
            tick_rate: DEFAULT_TICK_RATE,
            episode_cap: DEFAULT_EPISODE_CAP,
            scheduling: SchedulingMode::Auction,
            baseline: BaselineMode::Bilevel,
            seed: 0,
            planner: PlannerConfig::default(),
            yield_horizon: DEFAULT_YIELD_HORIZON,
            social: SocialForceParams::default(),
            nav_resolution: DEFAULT_RESOLUTION,
            engagement_radius: DEFAULT_ENGAGEMENT_RADIUS,
            zeta_max: DEFAULT_ZETA_MAX,
            goal_tolerance: DEFAULT_GOAL_TOLERANCE,
            sensing_radius: None,
            delta_v_threshold: DEFAULT_DELTA_V_THRESHOLD,
            stop_speed: DEFAULT_STOP_SPEED,
            start_jitter: 0.0,
            deadlock_window: DEFAULT_DEADLOCK_WINDOW,
            deadlock_distance: DEFAULT_DEADLOCK_DISTANCE,
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate
    }

    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::scenario(field, "must be positive and finite"))
            }
        }
        positive("tick_rate", self.tick_rate)?;
        if self.episode_cap == 0 {
            return Err(Error::scenario("episode_cap", "must be at least 1"));
        }
        if self.robots.is_empty() {
            return Err(Error::scenario("robots", "at least one robot is required"));
        }
        if let Some(z) = self.gap_width {
            positive("gap_width", z)?;
        }
        positive("nav_resolution", self.nav_resolution)?;
        positive("engagement_radius", self.engagement_radius)?;
        positive("zeta_max", self.zeta_max)?;
        positive("goal_tolerance", self.goal_tolerance)?;
        positive("delta_v_threshold", self.delta_v_threshold)?;
        positive("stop_speed", self.stop_speed)?;
        positive("deadlock_distance", self.deadlock_distance)?;
        if let Some(r) = self.sensing_radius {
            positive("sensing_radius", r)?;
        }
        if !(self.yield_horizon >= 0.0 && self.yield_horizon.is_finite()) {
            return Err(Error::scenario("yield_horizon", "must be nonnegative and finite"));
        }
        if !(self.start_jitter >= 0.0) {
            return Err(Error::scenario("start_jitter", "must be nonnegative"));
        }
        if self.deadlock_window == 0 {
            return Err(Error::scenario("deadlock_window", "must be at least 1"));
        }
        self.planner
            .validate()
            .map_err(|e| Error::scenario("planner", alloc::format!("{e}")))?;
        self.social
            .validate()
            .map_err(|e| Error::scenario("social", alloc::format!("{e}")))?;
        let bounds = self.map.bounds();
        for (i, r) in self.robots.iter().enumerate() {
            let field = |f: &str| alloc::format!("robots[{i}].{f}");
            r.kinodynamics
                .validate()
                .map_err(|e| Error::scenario(field("kinodynamics"), alloc::format!("{e}")))?;
            if !bounds.contains(r.start) {
                return Err(Error::scenario(field("start"), "outside the map bounds"));
            }
            if !bounds.contains(r.goal) {
                return Err(Error::scenario(field("goal"), "outside the map bounds"));
            }
            if let Some(z) = r.zeta {
                if !(z.is_finite() && z > 0.0) {
                    return Err(Error::scenario(field("zeta"), "must be positive and finite"));
                }
            }
        }
        Ok(())
    }
}
