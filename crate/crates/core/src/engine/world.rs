use alloc::boxed::Box;
use alloc::collections::{BTreeSet, VecDeque};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auction::{allocate, detect_conflict, payment, sample_proxy_bids, ConflictCandidate, RewardSchedule};
use crate::error::Result;
use crate::geometry::{in_conflict_zone, Disc, Pose, Vec2, VectorMap};
use crate::global_planner::build_nav_graph;
use crate::local_planner::{alt_scale_kinodynamics, pure_pursuit_target, scale_kinodynamics, Kinodynamics};
use crate::social_force::SocialForceController;
use crate::RobotId;

use super::metrics::{count_delta_v, count_stop_time, compute_flow_rate, detect_deadlock, AuctionSummary};
use super::telemetry::RobotInfo;
use super::{
    BaselineMode, BilevelController, Controller, EpisodeMetrics, NeighborState, Observation, Outcome, OwnState,
    Scenario, SchedulingMode, TelemetryRecord,
};

const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Limits a robot on `turn` must obey under `mode`.
pub fn effective_limits(base: &Kinodynamics, turn: Option<u32>, mode: SchedulingMode) -> Result<Kinodynamics> {
    match (mode, turn) {
        (SchedulingMode::Auction, Some(q)) => scale_kinodynamics(base, q),
        (SchedulingMode::EnforcedAltScaling, Some(q)) => alt_scale_kinodynamics(base, q),
        _ => Ok(*base),
    }
}

struct RobotSim {
    id: RobotId,
    base: Kinodynamics,
    goal: Vec2,
    pose: Pose,
    v: f64,
    omega: f64,
    turn: Option<u32>,
    zone: Option<usize>,
    done: bool,
    goal_tick: Option<u64>,
    /// Commanded speeds up to goal arrival, led by the initial speed.
    v_log: Vec<f64>,
}

struct ActiveConflict {
    zone: usize,
    order: Vec<RobotId>,
}

/// One running episode.
pub struct World {
    scenario: Scenario,
    map: Arc<VectorMap>,
    robots: Vec<RobotSim>,
    controllers: Vec<Box<dyn Controller>>,
    rng: ChaCha8Rng,
    tick: u64,
    conflicts: Vec<ActiveConflict>,
    history: VecDeque<Vec<Vec2>>,
    contacts: BTreeSet<(u32, Option<u32>)>,
    telemetry: Vec<TelemetryRecord>,
    collisions: u64,
    goal_adjacent_collisions: u64,
    violations: u64,
    deadlock: bool,
    auctions: Vec<AuctionSummary>,
    zone_entries: Vec<Vec<Option<u64>>>,
    outcome: Option<Outcome>,
}

impl World {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let zetas: Vec<f64> = scenario
            .robots
            .iter()
            .map(|r| r.zeta.unwrap_or_else(|| scenario.zeta_max * (1.0 - rng.gen::<f64>())))
            .collect();
        let starts: Vec<Vec2> = scenario
            .robots
            .iter()
            .map(|r| {
                let j = scenario.start_jitter;
                if j > 0.0 {
                    let dx = (rng.gen::<f64>() * 2.0 - 1.0) * j;
                    let dy = (rng.gen::<f64>() * 2.0 - 1.0) * j;
                    r.start + Vec2::new(dx, dy)
                } else {
                    r.start
                }
            })
            .collect();

        let map = Arc::new(scenario.map.clone());
        let zones = Arc::new(scenario.zones.clone());
        let mut controllers: Vec<Box<dyn Controller>> = Vec::with_capacity(scenario.robots.len());
        match scenario.baseline {
            BaselineMode::Bilevel => {
                let radius = scenario
                    .robots
                    .iter()
                    .map(|r| r.kinodynamics.robot_radius)
                    .fold(0.0, f64::max);
                let graph = Arc::new(build_nav_graph(&map, scenario.nav_resolution, radius)?);
                for (i, r) in scenario.robots.iter().enumerate() {
                    controllers.push(Box::new(BilevelController::new(
                        RobotId(i as u32),
                        zetas[i],
                        map.clone(),
                        graph.clone(),
                        scenario.planner,
                        scenario.yield_horizon,
                        zones.clone(),
                        starts[i],
                        r.goal,
                    )?));
                }
            }
            BaselineMode::SocialForces => {
                for _ in &scenario.robots {
                    controllers.push(Box::new(SocialForceController::new(map.clone(), scenario.social)));
                }
            }
        }

        let mut robots = Vec::with_capacity(scenario.robots.len());
        for (i, r) in scenario.robots.iter().enumerate() {
            let start = starts[i];
            let theta = match (r.heading, controllers[i].route()) {
                (Some(h), _) => h,
                (None, Some(path)) => (pure_pursuit_target(start, path, scenario.planner.lookahead)? - start).angle(),
                (None, None) => (r.goal - start).angle(),
            };
            robots.push(RobotSim {
                id: RobotId(i as u32),
                base: r.kinodynamics,
                goal: r.goal,
                pose: Pose::new(start.x, start.y, theta),
                v: 0.0,
                omega: 0.0,
                turn: None,
                zone: None,
                done: false,
                goal_tick: None,
                v_log: alloc::vec![0.0],
            });
        }

        let telemetry = alloc::vec![TelemetryRecord::Header {
            scenario: scenario.name.clone(),
            seed: scenario.seed,
            tick_rate: scenario.tick_rate,
            scheduling: scenario.scheduling,
            baseline: scenario.baseline,
            bounds: *map.bounds(),
            segments: map.segments().to_vec(),
            zones: scenario.zones.clone(),
            robots: robots
                .iter()
                .map(|r| RobotInfo {
                    id: r.id,
                    start: r.pose.position(),
                    goal: r.goal,
                    radius: r.base.robot_radius,
                    v_max: r.base.v_max,
                })
                .collect(),
        }];
        let zone_entries = alloc::vec![alloc::vec![None; robots.len()]; scenario.zones.len()];
        let mut world = Self {
            map,
            robots,
            controllers,
            rng,
            tick: 0,
            conflicts: Vec::new(),
            history: VecDeque::new(),
            contacts: BTreeSet::new(),
            telemetry,
            collisions: 0,
            goal_adjacent_collisions: 0,
            violations: 0,
            deadlock: false,
            auctions: Vec::new(),
            zone_entries,
            outcome: None,
            scenario,
        };
        world.record_positions();
        world.record_zone_entries();
        world.record_collisions();
        world.record_states();
        Ok(world)
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Advances one tick; returns whether the episode has ended.
    pub fn step(&mut self) -> Result<bool> {
        if self.outcome.is_some() {
            return Ok(true);
        }
        if self.scenario.scheduling != SchedulingMode::None {
            self.update_conflicts()?;
        }

        let dt = self.scenario.dt();
        let observations: Vec<Observation> = (0..self.robots.len())
            .map(|i| self.observe(i))
            .collect::<Result<_>>()?;
        let mut commands = Vec::with_capacity(self.robots.len());
        for (c, obs) in self.controllers.iter_mut().zip(&observations) {
            commands.push(c.act(obs)?.command);
        }

        for ((r, obs), cmd) in self.robots.iter_mut().zip(&observations).zip(&commands) {
            let kin = &obs.own.kinodynamics;
            let feasible = cmd.v >= -FEASIBILITY_TOLERANCE
                && cmd.v <= kin.v_max.max(r.v - kin.a_max * dt) + FEASIBILITY_TOLERANCE
                && libm::fabs(cmd.v - r.v) <= kin.a_max * dt + FEASIBILITY_TOLERANCE
                && libm::fabs(cmd.omega) <= kin.omega_max + FEASIBILITY_TOLERANCE;
            if !feasible {
                self.violations += 1;
            }
            r.pose = r.pose.integrate(cmd.v, cmd.omega, dt);
            r.v = cmd.v;
            r.omega = cmd.omega;
            if !r.done {
                r.v_log.push(cmd.v);
            }
        }
        self.tick += 1;

        let tol = self.scenario.goal_tolerance;
        for r in self.robots.iter_mut().filter(|r| !r.done) {
            if r.pose.position().distance(r.goal) <= tol {
                r.done = true;
                r.goal_tick = Some(self.tick);
                self.telemetry.push(TelemetryRecord::Arrival {
                    tick: self.tick,
                    robot: r.id,
                    time: self.tick as f64 * dt,
                });
            }
        }
        self.record_collisions();
        self.record_zone_entries();
        self.record_states();
        self.record_positions();

        // a robot that arrived inside the window still made progress in it
        let window_start = self.tick.saturating_sub(self.scenario.deadlock_window as u64);
        let active: Vec<bool> = self
            .robots
            .iter()
            .map(|r| r.goal_tick.is_none_or(|g| g > window_start))
            .collect();
        let history = self.history.make_contiguous();
        if detect_deadlock(history, &active, self.scenario.deadlock_window, self.scenario.deadlock_distance) {
            self.deadlock = true;
        }
        let all_done = self.robots.iter().all(|r| r.done);
        if all_done || self.deadlock || self.tick >= self.scenario.episode_cap {
            let outcome = if self.collisions > 0 {
                Outcome::Collision
            } else if all_done {
                Outcome::Success
            } else if self.deadlock {
                Outcome::Deadlock
            } else {
                Outcome::Timeout
            };
            self.outcome = Some(outcome);
            self.telemetry.push(TelemetryRecord::End { tick: self.tick, outcome });
        }
        Ok(self.outcome.is_some())
    }

    /// Runs to termination and returns metrics and telemetry.
    pub fn run(mut self) -> Result<(EpisodeMetrics, Vec<TelemetryRecord>)> {
        while !self.step()? {}
        Ok(self.finish())
    }

    fn finish(self) -> (EpisodeMetrics, Vec<TelemetryRecord>) {
        let dt = self.scenario.dt();
        let outcome = self.outcome.unwrap_or(Outcome::Timeout);
        let reached: Vec<bool> = self.robots.iter().map(|r| r.done).collect();
        let goal_times: Vec<Option<f64>> =
            self.robots.iter().map(|r| r.goal_tick.map(|t| t as f64 * dt)).collect();
        let makespan = goal_times
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|ts| ts.into_iter().fold(0.0, f64::max));
        let flow_rate = match (self.scenario.gap_width, makespan) {
            (Some(z), Some(t)) => compute_flow_rate(self.robots.len(), outcome == Outcome::Success, z, t),
            _ => None,
        };
        let metrics = EpisodeMetrics {
            outcome,
            reached,
            goal_times,
            collisions: self.collisions,
            goal_adjacent_collisions: self.goal_adjacent_collisions,
            deadlock: self.deadlock,
            ticks: self.tick,
            makespan,
            flow_rate,
            stop_ticks: self
                .robots
                .iter()
                .map(|r| count_stop_time(&r.v_log[1..], self.scenario.stop_speed))
                .collect(),
            delta_v: self
                .robots
                .iter()
                .map(|r| count_delta_v(&r.v_log, self.scenario.delta_v_threshold))
                .collect(),
            feasibility_violations: self.violations,
            auctions: self.auctions,
            zone_entries: self.zone_entries,
        };
        (metrics, self.telemetry)
    }

    fn observe(&self, i: usize) -> Result<Observation> {
        let r = &self.robots[i];
        let kinodynamics = effective_limits(&r.base, r.turn, self.scenario.scheduling)?;
        let neighbors = self
            .robots
            .iter()
            .filter(|o| o.id != r.id)
            .filter(|o| {
                self.scenario
                    .sensing_radius
                    .is_none_or(|s| o.pose.position().distance(r.pose.position()) <= s)
            })
            .map(|o| NeighborState {
                id: o.id,
                pose: o.pose,
                v: o.v,
                omega: o.omega,
                radius: o.base.robot_radius,
                v_max: o.base.v_max,
                turn: o.turn,
                zone: o.zone,
            })
            .collect();
        Ok(Observation {
            tick: self.tick,
            dt: self.scenario.dt(),
            own: OwnState {
                id: r.id,
                pose: r.pose,
                v: r.v,
                omega: r.omega,
                goal: r.goal,
                radius: r.base.robot_radius,
                kinodynamics,
                turn: r.turn,
                zone: r.zone,
                done: r.done,
            },
            neighbors,
        })
    }

    fn update_conflicts(&mut self) -> Result<()> {
        // members that cleared their zone leave; those behind move up
        for c in &mut self.conflicts {
            let zone = &self.scenario.zones[c.zone];
            let entries = &self.zone_entries[c.zone];
            let robots = &self.robots;
            c.order.retain(|id| {
                let r = &robots[id.0 as usize];
                let left = entries[id.0 as usize].is_some()
                    && zone.distance(r.pose.position()) >= r.base.robot_radius
                    && !in_conflict_zone(r.pose.position(), zone);
                !(r.done || left)
            });
        }
        self.conflicts.retain(|c| !c.order.is_empty());

        for z in 0..self.scenario.zones.len() {
            if self.conflicts.iter().any(|c| c.zone == z) {
                continue;
            }
            let remaining: Vec<(usize, Vec<Vec2>)> = self
                .robots
                .iter()
                .enumerate()
                .filter(|(i, r)| !r.done && self.zone_entries[z][*i].is_none())
                .filter_map(|(i, r)| {
                    let path = self.controllers[i].route()?;
                    let (s, _) = path.project(r.pose.position());
                    Some((i, path.remaining_from(s)))
                })
                .collect();
            let candidates: Vec<ConflictCandidate<'_>> = remaining
                .iter()
                .map(|(i, path)| ConflictCandidate {
                    robot: self.robots[*i].id,
                    position: self.robots[*i].pose.position(),
                    remaining_path: path,
                })
                .collect();
            let zone = &self.scenario.zones[z];
            let Some(conflict) = detect_conflict(&candidates, zone, self.tick, self.scenario.engagement_radius)
            else {
                continue;
            };
            let mut bids = Vec::with_capacity(conflict.robots.len());
            for id in &conflict.robots {
                let obs = self.observe(id.0 as usize)?;
                if let Some(b) = self.controllers[id.0 as usize].bid(&obs) {
                    bids.push(b);
                }
            }
            if bids.len() < 2 {
                continue;
            }
            let sigma = allocate(&bids)?;
            let k = sigma.len();
            let alpha = RewardSchedule::linear(k)?;
            let proxies = sample_proxy_bids(&mut self.rng, k, self.scenario.zeta_max);
            let mut payments = Vec::with_capacity(k);
            for (q0, id) in sigma.by_turn().iter().enumerate() {
                payments.push((*id, payment(q0 + 1, &proxies[q0 + 1..], &alpha)?));
            }
            self.telemetry.push(TelemetryRecord::Auction {
                tick: self.tick,
                zone: zone.id.clone(),
                bids: bids.iter().map(|b| (b.robot, b.value)).collect(),
                order: sigma.by_turn().to_vec(),
                payments,
                proxy_bids: proxies,
            });
            self.auctions.push(AuctionSummary {
                tick: self.tick,
                zone: zone.id.clone(),
                order: sigma.by_turn().to_vec(),
            });
            self.conflicts.push(ActiveConflict { zone: z, order: sigma.by_turn().to_vec() });
        }

        for r in &mut self.robots {
            r.turn = None;
            r.zone = None;
        }
        for c in &self.conflicts {
            for (q0, id) in c.order.iter().enumerate() {
                let r = &mut self.robots[id.0 as usize];
                let q = q0 as u32 + 1;
                if r.turn.is_none_or(|t| q > t) {
                    r.turn = Some(q);
                    r.zone = Some(c.zone);
                }
            }
        }
        Ok(())
    }

    fn record_positions(&mut self) {
        self.history.push_back(self.robots.iter().map(|r| r.pose.position()).collect());
        while self.history.len() > self.scenario.deadlock_window + 1 {
            self.history.pop_front();
        }
    }

    fn record_zone_entries(&mut self) {
        for (z, zone) in self.scenario.zones.iter().enumerate() {
            for (i, r) in self.robots.iter().enumerate() {
                if self.zone_entries[z][i].is_none() && in_conflict_zone(r.pose.position(), zone) {
                    self.zone_entries[z][i] = Some(self.tick);
                    self.telemetry.push(TelemetryRecord::ZoneEntry {
                        tick: self.tick,
                        robot: r.id,
                        zone: zone.id.clone(),
                    });
                }
            }
        }
    }

    fn record_collisions(&mut self) {
        let near_goal = |r: &RobotSim| r.pose.position().distance(r.goal) <= 2.0 * self.scenario.goal_tolerance;
        let mut now = BTreeSet::new();
        let mut events = Vec::new();
        for (i, a) in self.robots.iter().enumerate() {
            let da = Disc { center: a.pose.position(), radius: a.base.robot_radius };
            if crate::geometry::disc_collides_map(&da, &self.map) {
                now.insert((a.id.0, None));
                if !self.contacts.contains(&(a.id.0, None)) {
                    events.push((a.id, None, a.pose.position(), near_goal(a)));
                }
            }
            for b in &self.robots[i + 1..] {
                let db = Disc { center: b.pose.position(), radius: b.base.robot_radius };
                if crate::geometry::discs_collide(&da, &db) {
                    let key = (a.id.0, Some(b.id.0));
                    now.insert(key);
                    if !self.contacts.contains(&key) {
                        let at = (da.center + db.center) * 0.5;
                        events.push((a.id, Some(b.id), at, near_goal(a) && near_goal(b)));
                    }
                }
            }
        }
        for (robot, other, at, goal_adjacent) in events {
            self.collisions += 1;
            if goal_adjacent {
                self.goal_adjacent_collisions += 1;
            }
            self.telemetry.push(TelemetryRecord::Collision {
                tick: self.tick,
                robot,
                other,
                x: at.x,
                y: at.y,
                goal_adjacent,
            });
        }
        self.contacts = now;
    }

    fn record_states(&mut self) {
        for r in &self.robots {
            self.telemetry.push(TelemetryRecord::State {
                tick: self.tick,
                robot: r.id,
                x: r.pose.x,
                y: r.pose.y,
                theta: r.pose.theta,
                v: r.v,
                omega: r.omega,
                turn: r.turn,
                done: r.done,
            });
        }
    }
}

/// Runs one episode of `scenario` to termination.
pub fn run_episode(scenario: &Scenario) -> Result<(EpisodeMetrics, Vec<TelemetryRecord>)> {
    World::new(scenario.clone())?.run()
}
