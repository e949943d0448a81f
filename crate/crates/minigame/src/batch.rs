//! Seed-by-mode experiment batches and their summary table.

use std::fmt::Write as _;
use std::path::Path;

use minigame_core::engine::{run_episode, BaselineMode, EpisodeMetrics, Scenario, SchedulingMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mode override applied to the base scenario for one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cell {
    /// The scenario exactly as loaded.
    Scenario,
    Auction,
    NoSchedule,
    AltScaling,
    SocialForces,
}

impl Cell {
    pub const ALL: [Cell; 5] = [Cell::Scenario, Cell::Auction, Cell::NoSchedule, Cell::AltScaling, Cell::SocialForces];

    pub fn name(self) -> &'static str {
        match self {
            Cell::Scenario => "scenario",
            Cell::Auction => "auction",
            Cell::NoSchedule => "no-schedule",
            Cell::AltScaling => "alt-scaling",
            Cell::SocialForces => "social-forces",
        }
    }

    pub fn parse(name: &str) -> Option<Cell> {
        Cell::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn apply(self, s: &mut Scenario) {
        let (scheduling, baseline) = match self {
            Cell::Scenario => return,
            Cell::Auction => (SchedulingMode::Auction, BaselineMode::Bilevel),
            Cell::NoSchedule => (SchedulingMode::None, BaselineMode::Bilevel),
            Cell::AltScaling => (SchedulingMode::EnforcedAltScaling, BaselineMode::Bilevel),
            Cell::SocialForces => (SchedulingMode::None, BaselineMode::SocialForces),
        };
        s.scheduling = scheduling;
        s.baseline = baseline;
    }
}

#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub scenario: Scenario,
    pub seeds: Vec<u64>,
    pub cells: Vec<Cell>,
}

impl BatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("batch", "seed list is empty"));
        }
        if self.cells.is_empty() {
            return Err(Error::config("batch", "no cells to run"));
        }
        Ok(())
    }
}

/// One episode of a batch; errors are kept so the batch can continue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub cell: Cell,
    pub seed: u64,
    pub metrics: Option<EpisodeMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub episodes: usize,
    pub errors: usize,
    pub success_rate: f64,
    /// Mean collision events per episode.
    pub collision_rate: f64,
    pub goal_adjacent_collision_rate: f64,
    /// Stop ticks per robot, averaged over episodes.
    pub stop_time: f64,
    /// ΔV count per robot, averaged over episodes.
    pub avg_delta_v: f64,
    /// Means over successful episodes.
    pub makespan: Option<f64>,
    pub flow_rate: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates the rows of one cell.
pub fn summarize(cell: Cell, rows: &[EpisodeRow]) -> CellSummary {
    let rows: Vec<&EpisodeRow> = rows.iter().filter(|r| r.cell == cell).collect();
    let ok: Vec<&EpisodeMetrics> = rows.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let errors = rows.len() - ok.len();
    let successes: Vec<&EpisodeMetrics> = ok.iter().copied().filter(|m| m.success()).collect();
    let per_episode = |f: fn(&EpisodeMetrics) -> f64| mean(ok.iter().map(|m| f(m))).unwrap_or(0.0);
    CellSummary {
        cell,
        episodes: rows.len(),
        errors,
        success_rate: if rows.is_empty() { 0.0 } else { successes.len() as f64 / rows.len() as f64 },
        collision_rate: per_episode(|m| m.collisions as f64),
        goal_adjacent_collision_rate: per_episode(|m| m.goal_adjacent_collisions as f64),
        stop_time: per_episode(|m| m.mean_stop_ticks()),
        avg_delta_v: per_episode(|m| m.mean_delta_v()),
        makespan: mean(successes.iter().filter_map(|m| m.makespan)),
        flow_rate: mean(successes.iter().filter_map(|m| m.flow_rate)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    /// In cell order, then seed order.
    pub rows: Vec<EpisodeRow>,
    pub summaries: Vec<CellSummary>,
}

/// Runs every (cell, seed) pair on the rayon pool. Results do not depend on
/// the number of threads.
pub fn run_batch(spec: &BatchSpec) -> Result<BatchResult> {
    spec.validate()?;
    let jobs: Vec<(Cell, u64)> =
        spec.cells.iter().flat_map(|c| spec.seeds.iter().map(move |s| (*c, *s))).collect();
    let rows: Vec<EpisodeRow> = jobs
        .par_iter()
        .map(|&(cell, seed)| {
            let mut s = spec.scenario.clone();
            cell.apply(&mut s);
            s.seed = seed;
            match run_episode(&s) {
                Ok((m, _)) => EpisodeRow { cell, seed, metrics: Some(m), error: None },
                Err(e) => EpisodeRow { cell, seed, metrics: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let summaries = spec.cells.iter().map(|c| summarize(*c, &rows)).collect();
    Ok(BatchResult { rows, summaries })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub const TABLE_COLUMNS: [&str; 11] = [
    "cell",
    "episodes",
    "errors",
    "success_rate",
    "collision_rate",
    "goal_adjacent_collision_rate",
    "stop_time",
    "avg_delta_v",
    "makespan",
    "flow_rate",
    "human_flow_rate",
];

/// Flow rate of people through a doorway, for context.
pub const HUMAN_FLOW_RATE: f64 = 4.0;

/// Tab-separated table with a header row; absent values print as `-`.
pub fn format_table(summaries: &[CellSummary]) -> String {
    let mut out = TABLE_COLUMNS.join("\t");
    out.push('\n');
    for s in summaries {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{:.1}",
            s.cell.name(),
            s.episodes,
            s.errors,
            s.success_rate,
            s.collision_rate,
            s.goal_adjacent_collision_rate,
            s.stop_time,
            s.avg_delta_v,
            opt(s.makespan),
            opt(s.flow_rate),
            HUMAN_FLOW_RATE,
        )
        .unwrap();
    }
    out
}

/// Writes `<cell>/metrics.jsonl` per cell, then `summary.tsv`.
pub fn write_batch(result: &BatchResult, out_dir: &Path) -> Result<()> {
    let cells: Vec<Cell> = result.summaries.iter().map(|s| s.cell).collect();
    for cell in cells {
        let dir = out_dir.join(cell.name());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut text = String::new();
        for row in result.rows.iter().filter(|r| r.cell == cell) {
            text.push_str(&serde_json::to_string(row).expect("rows serialize"));
            text.push('\n');
        }
        let path = dir.join("metrics.jsonl");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    let path = out_dir.join("summary.tsv");
    std::fs::write(&path, format_table(&result.summaries)).map_err(|e| Error::io(&path, e))
}
