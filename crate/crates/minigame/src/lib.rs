//! File formats, telemetry, plotting, batch experiments and the command-line
//! front end for [`minigame_core`].

pub mod batch;
pub mod error;
pub mod map_file;
pub mod plot;
pub mod scenario_file;
pub mod telemetry;

use std::fmt::Write as _;

pub use error::{Error, Result};
pub use minigame_core;

use minigame_core::engine::{BaselineMode, Scenario, SchedulingMode};
use minigame_core::global_planner::NavGraph;

/// Mode overrides accepted by `run`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub no_schedule: bool,
    pub alt_scaling: bool,
    pub baseline: Option<BaselineMode>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) -> Result<()> {
        if self.no_schedule && self.alt_scaling {
            return Err(Error::config("overrides", "--no-schedule and --alt-scaling exclude each other"));
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if self.no_schedule {
            s.scheduling = SchedulingMode::None;
        }
        if self.alt_scaling {
            s.scheduling = SchedulingMode::EnforcedAltScaling;
        }
        if let Some(b) = self.baseline {
            s.baseline = b;
        }
        Ok(())
    }
}

/// Plain-text dump of a navigation graph: `vertex <i> <x> <y>` lines, then
/// `edge <a> <b> <weight>` lines.
pub fn format_graph(g: &NavGraph) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# resolution {} robot_radius {} vertices {} edges {} components {}",
        g.resolution(),
        g.robot_radius(),
        g.vertices().len(),
        g.edges().len(),
        g.component_count()
    )
    .unwrap();
    for (i, v) in g.vertices().iter().enumerate() {
        writeln!(out, "vertex {i} {} {}", v.x, v.y).unwrap();
    }
    for e in g.edges() {
        writeln!(out, "edge {} {} {}", e.a, e.b, e.weight).unwrap();
    }
    out
}
