//! TOML scenario files.
//!
//! A scenario names a map file (resolved relative to the scenario file) and
//! lists the robots; every other field is optional and falls back to the
//! engine default.
//!
//! ```toml
//! name = "doorway"
//! map = "../maps/doorway.map"
//! gap_width = 0.5
//! start_jitter = 0.05
//!
//! [kinodynamics]
//! v_max = 1.5
//!
//! [[robots]]
//! start = [1.0, 1.0]
//! goal = [1.2, 2.35]
//! ```

use std::path::{Path, PathBuf};

use minigame_core::engine::presets::default_kinodynamics;
use minigame_core::engine::{BaselineMode, RobotSpec, Scenario, SchedulingMode};
use minigame_core::geometry::Vec2;
use minigame_core::local_planner::{Kinodynamics, PlannerConfig};
use minigame_core::social_force::SocialForceParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map_file::load_map;

/// Motion limits with every field optional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinodynamicsFile {
    pub v_max: Option<f64>,
    pub a_max: Option<f64>,
    pub omega_max: Option<f64>,
    pub curvature_max: Option<f64>,
    pub robot_radius: Option<f64>,
}

impl KinodynamicsFile {
    fn over(&self, base: Kinodynamics) -> Kinodynamics {
        Kinodynamics {
            v_max: self.v_max.unwrap_or(base.v_max),
            a_max: self.a_max.unwrap_or(base.a_max),
            omega_max: self.omega_max.unwrap_or(base.omega_max),
            curvature_max: self.curvature_max.unwrap_or(base.curvature_max),
            robot_radius: self.robot_radius.unwrap_or(base.robot_radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub heading: Option<f64>,
    pub zeta: Option<f64>,
    /// Overrides of the scenario-wide limits for this robot.
    pub kinodynamics: Option<KinodynamicsFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub map: PathBuf,
    pub gap_width: Option<f64>,
    pub tick_rate: Option<f64>,
    pub episode_cap: Option<u64>,
    pub scheduling: Option<SchedulingMode>,
    pub baseline: Option<BaselineMode>,
    pub seed: Option<u64>,
    pub yield_horizon: Option<f64>,
    pub nav_resolution: Option<f64>,
    pub engagement_radius: Option<f64>,
    pub zeta_max: Option<f64>,
    pub goal_tolerance: Option<f64>,
    pub sensing_radius: Option<f64>,
    pub delta_v_threshold: Option<f64>,
    pub stop_speed: Option<f64>,
    pub start_jitter: Option<f64>,
    pub deadlock_window: Option<usize>,
    pub deadlock_distance: Option<f64>,
    /// Limits shared by all robots; unset fields use the preset limits.
    #[serde(default)]
    pub kinodynamics: KinodynamicsFile,
    pub planner: Option<PlannerConfig>,
    pub social: Option<SocialForceParams>,
    pub robots: Vec<RobotFile>,
}

impl ScenarioFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(origin, e.to_string().trim_end().to_string()))
    }

    /// Builds the scenario, reading the map relative to `base_dir`.
    pub fn resolve(&self, base_dir: &Path, origin: &str) -> Result<Scenario> {
        let map_path = base_dir.join(&self.map);
        let map_file = load_map(&map_path)?;
        let shared = self.kinodynamics.over(default_kinodynamics());
        let robots = self
            .robots
            .iter()
            .map(|r| RobotSpec {
                start: Vec2::new(r.start[0], r.start[1]),
                goal: Vec2::new(r.goal[0], r.goal[1]),
                heading: r.heading,
                zeta: r.zeta,
                kinodynamics: r.kinodynamics.unwrap_or_default().over(shared),
            })
            .collect();
        let name = self.name.clone().unwrap_or_else(|| {
            Path::new(origin).file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned())
        });
        let mut s = Scenario::new(name, map_file.map, map_file.zones, robots);
        s.gap_width = self.gap_width;
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { s.$field = v; })*
            };
        }
        set!(
            tick_rate,
            episode_cap,
            scheduling,
            baseline,
            seed,
            yield_horizon,
            nav_resolution,
            engagement_radius,
            zeta_max,
            goal_tolerance,
            delta_v_threshold,
            stop_speed,
            start_jitter,
            deadlock_window,
            deadlock_distance,
            planner,
            social
        );
        s.sensing_radius = self.sensing_radius;
        s.validate().map_err(|e| Error::config(origin, e.to_string()))?;
        Ok(s)
    }
}

/// Reads and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let file = ScenarioFile::parse(&text, &origin)?;
    file.resolve(path.parent().unwrap_or(Path::new(".")), &origin)
}
