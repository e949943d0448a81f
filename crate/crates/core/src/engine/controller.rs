use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::auction::{optimal_bid, Bid};
use crate::error::Result;
use crate::geometry::{in_conflict_zone, ConflictZone, Disc, Vec2, VectorMap};
use crate::global_planner::{astar, GlobalPath, NavGraph};
use crate::local_planner::{plan_step, PlanInput, PlannerConfig, VelocityCommand};
use crate::RobotId;

use super::{ControlOutput, Controller, NeighborState, Observation};

/// Auction bidder on top, arc-sampling local planner underneath.
pub struct BilevelController {
    id: RobotId,
    zeta: f64,
    map: Arc<VectorMap>,
    graph: Arc<NavGraph>,
    config: PlannerConfig,
    yield_horizon: f64,
    zones: Arc<Vec<ConflictZone>>,
    /// Robots observed inside each zone so far.
    seen_inside: BTreeSet<(usize, RobotId)>,
    path: GlobalPath,
}

const PREDICTION_STEP: f64 = 0.1;

fn gives_way(obs: &Observation, n: &NeighborState) -> bool {
    matches!((obs.own.turn, n.turn), (Some(mine), Some(theirs)) if theirs < mine)
}

/// Obstacles for the local planner, split in two. Robots on an earlier turn
/// are swept for `horizon` seconds, both straight ahead and along their
/// current arc, at no less than the limit their turn allows. These only limit
/// speed. Every other neighbour is a static disc that arcs must avoid.
pub fn neighbor_obstacles(obs: &Observation, horizon: f64) -> (Vec<Disc>, Vec<Disc>) {
    let mut avoid = Vec::new();
    let mut yield_to = Vec::new();
    let steps = libm::ceil(horizon / PREDICTION_STEP) as usize;
    for n in &obs.neighbors {
        if !gives_way(obs, n) {
            avoid.push(Disc { center: n.pose.position(), radius: n.radius });
            continue;
        }
        // a waiting robot may set off at any moment, up to the limit the
        // linear scaling law gives its turn
        let turn = n.turn.unwrap_or(1).max(1);
        let speed = n.v.max(n.v_max / turn as f64);
        let curvature = if n.v > 0.0 { n.omega / n.v } else { 0.0 };
        // the current turn rate is a poor guess far ahead, so keep the straight line too
        let curvatures: &[f64] = if curvature == 0.0 { &[0.0] } else { &[0.0, curvature] };
        for &c in curvatures {
            for k in 0..=steps {
                let t = (k as f64 * PREDICTION_STEP).min(horizon);
                let p = n.pose.integrate(speed, speed * c, t);
                yield_to.push(Disc { center: p.position(), radius: n.radius });
            }
        }
    }
    (avoid, yield_to)
}

impl BilevelController {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: RobotId,
        zeta: f64,
        map: Arc<VectorMap>,
        graph: Arc<NavGraph>,
        config: PlannerConfig,
        yield_horizon: f64,
        zones: Arc<Vec<ConflictZone>>,
        start: Vec2,
        goal: Vec2,
    ) -> Result<Self> {
        let path = astar(&graph, start, goal)?;
        Ok(Self { id, zeta, map, graph, config, yield_horizon, zones, seen_inside: BTreeSet::new(), path })
    }

    fn observe_entries(&mut self, obs: &Observation) {
        let own = (obs.own.id, obs.own.zone, obs.own.pose.position());
        let others = obs.neighbors.iter().map(|n| (n.id, n.zone, n.pose.position()));
        for (id, zone, p) in core::iter::once(own).chain(others) {
            if let Some(z) = zone.filter(|z| self.zones.get(*z).is_some_and(|zz| in_conflict_zone(p, zz))) {
                self.seen_inside.insert((z, id));
            }
        }
    }

    /// The zone to hold outside of while a robot on an earlier turn has yet
    /// to enter it.
    fn held_out_of(&self, obs: &Observation) -> Option<&ConflictZone> {
        let (q, z) = (obs.own.turn?, obs.own.zone?);
        if self.seen_inside.contains(&(z, self.id)) {
            return None;
        }
        let waiting = obs.neighbors.iter().any(|n| {
            n.zone == Some(z) && n.turn.is_some_and(|t| t < q) && !self.seen_inside.contains(&(z, n.id))
        });
        if waiting {
            self.zones.get(z)
        } else {
            None
        }
    }

    fn replan_if_lost(&mut self, position: Vec2, goal: Vec2) {
        if self.path.distance_to(position) > 2.0 * self.graph.resolution() {
            if let Ok(p) = astar(&self.graph, position, goal) {
                self.path = p;
            }
        }
    }
}

impl Controller for BilevelController {
    fn bid(&self, _obs: &Observation) -> Option<Bid> {
        optimal_bid(self.id, self.zeta).ok()
    }

    fn route(&self) -> Option<&GlobalPath> {
        Some(&self.path)
    }

    fn act(&mut self, obs: &Observation) -> Result<ControlOutput> {
        let own = &obs.own;
        let kin = own.kinodynamics;
        if own.done {
            let v = (own.v - kin.a_max * obs.dt).max(0.0);
            return Ok(ControlOutput {
                command: VelocityCommand { v, omega: 0.0 },
                v_limit: kin.v_max,
                arc: None,
            });
        }
        self.replan_if_lost(own.pose.position(), own.goal);
        self.observe_entries(obs);
        let (others, yield_to) = neighbor_obstacles(obs, self.yield_horizon);
        let out = plan_step(&PlanInput {
            pose: own.pose,
            v: own.v,
            omega: own.omega,
            goal: own.goal,
            path: &self.path,
            kin: &kin,
            map: &self.map,
            others: &others,
            yield_to: &yield_to,
            keep_out: self.held_out_of(obs),
            config: &self.config,
            dt: obs.dt,
        })?;
        Ok(ControlOutput { command: out.command, v_limit: kin.v_max, arc: Some(out.arc) })
    }
}
