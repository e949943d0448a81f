//! Social-forces comparison controller.
//!
//! Each robot is pulled toward its goal by a relaxation term and pushed away
//! from neighbours and the nearest wall by exponential repulsions. The
//! resulting velocity is tracked by a unicycle under the same limits the
//! bi-level planner obeys.

use alloc::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::auction::Bid;
use crate::engine::{ControlOutput, Controller, NeighborState, Observation};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2, VectorMap};
use crate::global_planner::GlobalPath;
use crate::local_planner::{Kinodynamics, VelocityCommand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialForceParams {
    /// Inverse relaxation time of the goal attraction, 1/s.
    pub goal_gain: f64,
    /// Agent repulsion strength (m/s^2) and range (m).
    pub agent_strength: f64,
    pub agent_range: f64,
    pub wall_strength: f64,
    pub wall_range: f64,
    /// Body compression force per metre of overlap, 1/s^2.
    pub contact_stiffness: f64,
    /// Preferred walking speed; `None` uses the robot's `v_max`.
    pub desired_speed: Option<f64>,
}

impl Default for SocialForceParams {
    fn default() -> Self {
        Self {
            goal_gain: 1.0 / 0.5,
            agent_strength: 2.1,
            agent_range: 0.3,
            wall_strength: 2.1,
            wall_range: 0.3,
            contact_stiffness: 1.2e5 / 80.0,
            desired_speed: None,
        }
    }
}

impl SocialForceParams {
    pub fn validate(&self) -> Result<()> {
        let gains = [self.goal_gain, self.agent_strength, self.wall_strength, self.contact_stiffness];
        if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidParameter("social force gains must be nonnegative"));
        }
        if !(self.agent_range > 0.0 && self.wall_range > 0.0) {
            return Err(Error::InvalidParameter("social force ranges must be positive"));
        }
        if let Some(v) = self.desired_speed {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter("desired speed must be positive"));
            }
        }
        Ok(())
    }
}

/// The kinematic state a force is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

impl From<&NeighborState> for Body {
    fn from(n: &NeighborState) -> Self {
        Body { position: n.pose.position(), velocity: n.pose.heading() * n.v, radius: n.radius }
    }
}

/// Total acceleration acting on `me`.
pub fn social_force(
    me: &Body,
    others: &[Body],
    goal: Vec2,
    desired_speed: f64,
    map: &VectorMap,
    params: &SocialForceParams,
) -> Vec2 {
    let to_goal = (goal - me.position).normalized();
    let mut f = (to_goal * desired_speed - me.velocity) * params.goal_gain;
    for o in others {
        let diff = me.position - o.position;
        let d = diff.norm();
        let n = diff.normalized();
        let overlap = me.radius + o.radius - d;
        f += n * (params.agent_strength * libm::exp(overlap / params.agent_range));
        if overlap > 0.0 {
            f += n * (params.contact_stiffness * overlap);
        }
    }
    if let Some(w) = map.nearest_wall_point(me.position) {
        let diff = me.position - w;
        let d = diff.norm();
        let overlap = me.radius - d;
        f += diff.normalized() * (params.wall_strength * libm::exp(overlap / params.wall_range));
        if overlap > 0.0 {
            f += diff.normalized() * (params.contact_stiffness * overlap);
        }
    }
    f
}

/// One tick of the social-forces controller from an observation.
pub fn social_force_step(
    obs: &Observation,
    goal: Vec2,
    map: &VectorMap,
    kin: &Kinodynamics,
    params: &SocialForceParams,
) -> VelocityCommand {
    let own = &obs.own;
    let me = Body {
        position: own.pose.position(),
        velocity: own.pose.heading() * own.v,
        radius: own.radius,
    };
    let others: alloc::vec::Vec<Body> = obs.neighbors.iter().map(Body::from).collect();
    let desired = params.desired_speed.unwrap_or(kin.v_max).min(kin.v_max);
    let f = social_force(&me, &others, goal, desired, map, params);
    let wanted = me.velocity + f * obs.dt;

    let dv = kin.a_max * obs.dt;
    let heading_error = if wanted.norm() > 1e-9 {
        wrap_angle(wanted.angle() - own.pose.theta)
    } else {
        0.0
    };
    let forward = wanted.norm() * libm::cos(heading_error).max(0.0);
    let v = forward.clamp(own.v - dv, own.v + dv).clamp(0.0, kin.v_max);
    let omega = (heading_error / obs.dt).clamp(-kin.omega_max, kin.omega_max);
    VelocityCommand { v, omega }
}

pub struct SocialForceController {
    map: Arc<VectorMap>,
    params: SocialForceParams,
}

impl SocialForceController {
    pub fn new(map: Arc<VectorMap>, params: SocialForceParams) -> Self {
        Self { map, params }
    }
}

impl Controller for SocialForceController {
    fn bid(&self, _obs: &Observation) -> Option<Bid> {
        None
    }

    fn route(&self) -> Option<&GlobalPath> {
        None
    }

    fn act(&mut self, obs: &Observation) -> Result<ControlOutput> {
        let kin = obs.own.kinodynamics;
        let command = if obs.own.done {
            VelocityCommand { v: (obs.own.v - kin.a_max * obs.dt).max(0.0), omega: 0.0 }
        } else {
            social_force_step(obs, obs.own.goal, &self.map, &kin, &self.params)
        };
        Ok(ControlOutput { command, v_limit: kin.v_max, arc: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::OwnState;
    use crate::geometry::{Bounds, Pose, Segment};
    use crate::RobotId;
    use alloc::vec;
    use alloc::vec::Vec;

    fn kin() -> Kinodynamics {
        Kinodynamics::new(1.5, 3.0, 4.0, 4.0, 0.2).unwrap()
    }

    fn open_map() -> VectorMap {
        VectorMap::new(Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)).unwrap(), vec![]).unwrap()
    }

    fn obs(pose: Pose, v: f64, neighbors: Vec<NeighborState>, goal: Vec2) -> Observation {
        Observation {
            tick: 0,
            dt: 0.025,
            own: OwnState {
                id: RobotId(0),
                pose,
                v,
                omega: 0.0,
                goal,
                radius: 0.2,
                kinodynamics: kin(),
                turn: None,
                zone: None,
                done: false,
            },
            neighbors,
        }
    }

    fn neighbor(id: u32, pose: Pose, v: f64) -> NeighborState {
        NeighborState { id: RobotId(id), pose, v, omega: 0.0, radius: 0.2, v_max: 1.5, turn: None, zone: None }
    }

    #[test]
    fn lone_robot_accelerates_to_goal() {
        let m = open_map();
        let o = obs(Pose::new(0.0, 0.0, 0.0), 0.0, vec![], Vec2::new(3.0, 0.0));
        let me = Body { position: Vec2::ZERO, velocity: Vec2::ZERO, radius: 0.2 };
        let f = social_force(&me, &[], Vec2::new(3.0, 0.0), 1.5, &m, &SocialForceParams::default());
        assert!(f.x > 0.0 && f.y == 0.0);
        let cmd = social_force_step(&o, Vec2::new(3.0, 0.0), &m, &kin(), &SocialForceParams::default());
        assert!(cmd.v > 0.0);
        assert_eq!(cmd.omega, 0.0);
    }

    #[test]
    fn mirror_symmetric_about_doorway_axis() {
        let m = VectorMap::new(
            Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)).unwrap(),
            vec![
                Segment::new(Vec2::new(-3.0, 0.0), Vec2::new(-0.25, 0.0)),
                Segment::new(Vec2::new(0.25, 0.0), Vec2::new(3.0, 0.0)),
            ],
        )
        .unwrap();
        let p = SocialForceParams::default();
        let goal = Vec2::new(0.0, 1.0);
        let a = Body { position: Vec2::new(-0.4, -0.7), velocity: Vec2::new(0.3, 0.5), radius: 0.2 };
        let b = Body { position: Vec2::new(0.4, -0.7), velocity: Vec2::new(-0.3, 0.5), radius: 0.2 };
        let fa = social_force(&a, &[b], goal, 1.5, &m, &p);
        let fb = social_force(&b, &[a], goal, 1.5, &m, &p);
        assert!((fa.x + fb.x).abs() < 1e-12);
        assert!((fa.y - fb.y).abs() < 1e-12);
    }

    #[test]
    fn swapping_identical_robots_swaps_forces() {
        let m = open_map();
        let p = SocialForceParams::default();
        let goal = Vec2::new(2.0, 2.0);
        let a = Body { position: Vec2::new(0.1, 0.3), velocity: Vec2::new(0.2, 0.0), radius: 0.2 };
        let b = Body { position: Vec2::new(0.6, 0.1), velocity: Vec2::new(0.0, 0.4), radius: 0.2 };
        let fa = social_force(&a, &[b], goal, 1.0, &m, &p);
        let fb = social_force(&b, &[a], goal, 1.0, &m, &p);
        let fa2 = social_force(&a, &[b], goal, 1.0, &m, &p);
        assert_eq!(fa, fa2);
        // swapped states produce swapped forces
        let fb_as_a = social_force(&b, &[a], goal, 1.0, &m, &p);
        assert_eq!(fb, fb_as_a);
    }

    #[test]
    fn head_on_deflects_and_slows() {
        let m = open_map();
        let p = SocialForceParams::default();
        let goal = Vec2::new(3.0, 0.0);
        let me = Body { position: Vec2::new(0.0, 0.0), velocity: Vec2::new(1.0, 0.0), radius: 0.2 };
        // oncoming robot slightly to the left of the centre line
        let other = Body { position: Vec2::new(0.55, 0.05), velocity: Vec2::new(-1.0, 0.0), radius: 0.2 };
        let f = social_force(&me, &[other], goal, 1.5, &m, &p);
        let repulsion = f - (goal - me.position).normalized() * 1.5 * p.goal_gain + me.velocity * p.goal_gain;
        assert!(repulsion.y < 0.0, "pushed to the right: {repulsion:?}");
        assert!(repulsion.x < 0.0);

        let o = obs(
            Pose::new(0.0, 0.0, 0.0),
            1.0,
            vec![neighbor(1, Pose::new(0.55, 0.05, core::f64::consts::PI), 1.0)],
            goal,
        );
        let cmd = social_force_step(&o, goal, &m, &kin(), &p);
        assert!(cmd.v < 1.5);
        assert!(cmd.omega < 0.0);
    }

    #[test]
    fn no_repulsion_means_straight_pursuit() {
        let m = open_map();
        let p = SocialForceParams {
            agent_strength: 0.0,
            wall_strength: 0.0,
            contact_stiffness: 0.0,
            ..Default::default()
        };
        let goal = Vec2::new(2.0, 1.0);
        let heading = goal.angle();
        let mut pose = Pose::new(0.0, 0.0, heading);
        let mut v = 0.0;
        for _ in 0..40 {
            let o = obs(pose, v, vec![neighbor(1, Pose::new(0.5, 0.6, 0.0), 0.0)], goal);
            let cmd = social_force_step(&o, goal, &m, &kin(), &p);
            assert!(cmd.omega.abs() < 1e-9);
            pose = pose.integrate(cmd.v, cmd.omega, 0.025);
            v = cmd.v;
            let off_line = (pose.position()).cross(goal.normalized()).abs();
            assert!(off_line < 1e-9);
        }
    }

    #[test]
    fn commands_respect_limits() {
        let m = open_map();
        let p = SocialForceParams { agent_strength: 50.0, ..Default::default() };
        let k = kin();
        for i in 0..50 {
            let v = i as f64 * 0.03;
            let o = obs(
                Pose::new(0.0, 0.0, 0.3 * i as f64),
                v,
                vec![neighbor(1, Pose::new(0.3, 0.1, 0.0), 0.5)],
                Vec2::new(-2.0, 1.0),
            );
            let c = social_force_step(&o, Vec2::new(-2.0, 1.0), &m, &k, &p);
            assert!(c.v >= 0.0 && c.v <= k.v_max);
            assert!((c.v - v).abs() <= k.a_max * 0.025 + 1e-12);
            assert!(c.omega.abs() <= k.omega_max);
        }
    }
}
