//! Episode measurements.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::RobotId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Success,
    Collision,
    Deadlock,
    Timeout,
}

/// Order decided by one auction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionSummary {
    pub tick: u64,
    pub zone: alloc::string::String,
    pub order: Vec<RobotId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub outcome: Outcome,
    /// Per robot: reached its goal.
    pub reached: Vec<bool>,
    pub goal_times: Vec<Option<f64>>,
    pub collisions: u64,
    /// Collisions with both robots within twice the goal tolerance of their goals.
    pub goal_adjacent_collisions: u64,
    pub deadlock: bool,
    pub ticks: u64,
    pub makespan: Option<f64>,
    pub flow_rate: Option<f64>,
    pub stop_ticks: Vec<u64>,
    pub delta_v: Vec<u64>,
    pub feasibility_violations: u64,
    pub auctions: Vec<AuctionSummary>,
    /// `zone_entries[z][i]`: first tick robot `i`'s center was inside zone `z`.
    pub zone_entries: Vec<Vec<Option<u64>>>,
}

impl EpisodeMetrics {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }

    pub fn total_stop_ticks(&self) -> u64 {
        self.stop_ticks.iter().sum()
    }

    /// Stop ticks averaged over robots.
    pub fn mean_stop_ticks(&self) -> f64 {
        mean(&self.stop_ticks)
    }

    /// ΔV count averaged over robots.
    pub fn mean_delta_v(&self) -> f64 {
        mean(&self.delta_v)
    }
}

fn mean(xs: &[u64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<u64>() as f64 / xs.len() as f64
    }
}

/// True iff the summed displacement of the unfinished robots over the last
/// `window` ticks is below `threshold`.
///
/// `history[t][i]` is robot `i`'s position after tick `t`; `active[i]` marks
/// robots that had not reached their goal when the window opened. Shorter
/// histories never report a deadlock.
pub fn detect_deadlock(history: &[Vec<Vec2>], active: &[bool], window: usize, threshold: f64) -> bool {
    if window == 0 || history.len() <= window {
        return false;
    }
    let now = &history[history.len() - 1];
    let then = &history[history.len() - 1 - window];
    let moved: f64 = active
        .iter()
        .enumerate()
        .filter(|(_, a)| **a)
        .map(|(i, _)| now[i].distance(then[i]))
        .sum();
    moved < threshold
}

/// Ticks whose speed differs from the previous one by more than `threshold`.
pub fn count_delta_v(log: &[f64], threshold: f64) -> u64 {
    log.windows(2).filter(|w| libm::fabs(w[1] - w[0]) > threshold).count() as u64
}

/// Ticks with `|v| < v_eps`. The log must end at goal arrival.
pub fn count_stop_time(log: &[f64], v_eps: f64) -> u64 {
    log.iter().filter(|v| libm::fabs(**v) < v_eps).count() as u64
}

/// `N / (z T)`; absent unless every robot succeeded with `z, T > 0`.
pub fn compute_flow_rate(robots: usize, all_succeeded: bool, gap_width: f64, makespan: f64) -> Option<f64> {
    (all_succeeded && robots > 0 && gap_width > 0.0 && makespan > 0.0)
        .then(|| robots as f64 / (gap_width * makespan))
}
