//! Per-tick local planning: pure-pursuit target selection, constant-curvature
//! arc search with obstacle clipping, weighted arc scoring, and a 1-D speed
//! program that picks between accelerating, cruising and braking.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_conflict_zone, wrap_angle, ConflictZone, Disc, Pose, Vec2, VectorMap};
use crate::global_planner::GlobalPath;

/// Motion limits of one robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinodynamics {
    pub v_max: f64,
    pub a_max: f64,
    pub omega_max: f64,
    pub curvature_max: f64,
    pub robot_radius: f64,
}

impl Kinodynamics {
    pub fn new(
        v_max: f64,
        a_max: f64,
        omega_max: f64,
        curvature_max: f64,
        robot_radius: f64,
    ) -> Result<Self> {
        let k = Self { v_max, a_max, omega_max, curvature_max, robot_radius };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.v_max, self.a_max, self.omega_max, self.curvature_max, self.robot_radius];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("kinodynamic limits must be positive and finite"))
        }
    }

    /// Distance needed to stop from speed `v` at full deceleration.
    pub fn stopping_distance(&self, v: f64) -> f64 {
        v * v / (2.0 * self.a_max)
    }
}

/// Turn-proportional speed limit: the robot on turn `q` gets `v_max / q`.
pub fn scale_kinodynamics(base: &Kinodynamics, turn: u32) -> Result<Kinodynamics> {
    if turn < 1 {
        return Err(Error::InvalidParameter("turn must be at least 1"));
    }
    Ok(Kinodynamics { v_max: base.v_max / turn as f64, ..*base })
}

/// Ablation scaling `v_max * (1 - q / (5 v_max))^-1`.
pub fn alt_scale_kinodynamics(base: &Kinodynamics, turn: u32) -> Result<Kinodynamics> {
    if turn < 1 {
        return Err(Error::InvalidParameter("turn must be at least 1"));
    }
    let denom = 1.0 - turn as f64 / (5.0 * base.v_max);
    if !(denom > 0.0) {
        return Err(Error::InvalidAltScaling);
    }
    Ok(Kinodynamics { v_max: base.v_max / denom, ..*base })
}

/// A constant-curvature path from `start`, sampled every `spacing` meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcTrajectory {
    pub start: Pose,
    pub curvature: f64,
    pub arc_length: f64,
    pub spacing: f64,
    pub samples: Vec<Pose>,
}

/// Pose reached after driving `s` meters along curvature `curvature`.
pub fn arc_pose(start: &Pose, curvature: f64, s: f64) -> Pose {
    start.integrate(1.0, curvature, s)
}

impl ArcTrajectory {
    pub fn new(start: Pose, curvature: f64, arc_length: f64, spacing: f64) -> Self {
        let arc_length = arc_length.max(0.0);
        let mut samples = Vec::new();
        let mut i = 0usize;
        loop {
            let s = i as f64 * spacing;
            if s >= arc_length {
                break;
            }
            samples.push(arc_pose(&start, curvature, s));
            i += 1;
        }
        samples.push(arc_pose(&start, curvature, arc_length));
        Self { start, curvature, arc_length, spacing, samples }
    }

    pub fn endpoint(&self) -> Pose {
        *self.samples.last().expect("arcs always hold the start sample")
    }

    /// Same arc cut to `length` (never extended).
    pub fn truncated(&self, length: f64) -> Self {
        Self::new(self.start, self.curvature, length.min(self.arc_length), self.spacing)
    }

    /// Arc-length coordinate of sample `i`.
    fn sample_s(&self, i: usize) -> f64 {
        (i as f64 * self.spacing).min(self.arc_length)
    }
}

/// `n` arcs with curvatures evenly spread over `[-curvature_max, curvature_max]`.
pub fn sample_arcs(
    pose: &Pose,
    curvature_max: f64,
    n: usize,
    horizon: f64,
    spacing: f64,
) -> Result<Vec<ArcTrajectory>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter("arc count must be odd and at least 3"));
    }
    if !(horizon > 0.0) || !(spacing > 0.0) {
        return Err(Error::InvalidParameter("horizon and spacing must be positive"));
    }
    let half = (n / 2) as f64;
    Ok((0..n)
        .map(|i| {
            // centre index gets exactly zero curvature
            let c = curvature_max * (i as f64 - half) / half;
            ArcTrajectory::new(*pose, c, horizon, spacing)
        })
        .collect())
}

/// Length of the arc that stays clear: up to the last sample before the
/// robot disc would touch a wall or another robot.
pub fn free_length(arc: &ArcTrajectory, m: &VectorMap, others: &[Disc], radius: f64) -> f64 {
    free_length_with_margin(arc, m, others, radius, 0.0)
}

fn free_length_with_margin(
    arc: &ArcTrajectory,
    m: &VectorMap,
    others: &[Disc],
    radius: f64,
    wall_margin: f64,
) -> f64 {
    let mut previous = f64::INFINITY;
    for (i, p) in arc.samples.iter().enumerate() {
        let c = p.position();
        let clearance = m.clearance(c);
        // inside the margin only moves that open up clearance are allowed
        let blocked = clearance < radius
            || (i > 0 && clearance < radius + wall_margin && clearance <= previous)
            || others.iter().any(|o| c.distance(o.center) < radius + o.radius);
        previous = clearance;
        if blocked {
            return if i == 0 { 0.0 } else { arc.sample_s(i - 1) };
        }
    }
    arc.arc_length
}

/// Length of the arc before its first sample inside `zone`.
pub fn length_outside(arc: &ArcTrajectory, zone: &ConflictZone) -> f64 {
    match arc.samples.iter().position(|p| in_conflict_zone(p.position(), zone)) {
        Some(0) => 0.0,
        Some(i) => arc.sample_s(i - 1),
        None => arc.arc_length,
    }
}

/// Truncates `arc` before its first obstacle contact, less a stopping margin.
pub fn clip_arc(
    arc: &ArcTrajectory,
    m: &VectorMap,
    others: &[Disc],
    radius: f64,
    margin: f64,
) -> ArcTrajectory {
    let free = free_length(arc, m, others, radius);
    arc.truncated((free - margin.max(0.0)).max(0.0))
}

/// Cuts the arc at its closest approach to `target`.
pub fn trim_to_target(arc: &ArcTrajectory, target: Vec2) -> ArcTrajectory {
    let mut best = (0usize, f64::INFINITY);
    for (i, p) in arc.samples.iter().enumerate() {
        let d = p.position().distance(target);
        if d < best.1 {
            best = (i, d);
        }
    }
    arc.truncated(arc.sample_s(best.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureWeights {
    pub clearance: f64,
    pub progress: f64,
    pub length: f64,
    pub goal: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        Self { clearance: 0.02, progress: 2.0, length: 0.5, goal: 1.0 }
    }
}

impl FeatureWeights {
    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidParameter("feature weights must be nonnegative"));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(Error::InvalidParameter("at least one feature weight must be positive"));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.clearance, self.progress, self.length, self.goal]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            clearance: self.clearance * k,
            progress: self.progress * k,
            length: self.length * k,
            goal: self.goal * k,
        }
    }
}

/// Guards the inverse-clearance feature at contact, meters.
pub const CLEARANCE_EPSILON: f64 = 1e-3;

/// Everything an arc is scored against.
#[derive(Debug, Clone, Copy)]
pub struct CostContext<'a> {
    pub target: Vec2,
    pub goal: Vec2,
    pub map: &'a VectorMap,
    pub others: &'a [Disc],
    pub radius: f64,
}

/// Raw feature values, in weight order.
pub fn arc_features(arc: &ArcTrajectory, ctx: &CostContext<'_>) -> [f64; 4] {
    let clearance = arc
        .samples
        .iter()
        .map(|p| {
            let c = p.position();
            let wall = ctx.map.clearance(c) - ctx.radius;
            ctx.others
                .iter()
                .map(|o| c.distance(o.center) - ctx.radius - o.radius)
                .fold(wall, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let end = arc.endpoint().position();
    [
        1.0 / (clearance + CLEARANCE_EPSILON),
        end.distance(ctx.target),
        -arc.arc_length,
        end.distance(ctx.goal),
    ]
}

/// Weighted feature sum; lower is better.
pub fn evaluate_cost(arc: &ArcTrajectory, weights: &FeatureWeights, ctx: &CostContext<'_>) -> f64 {
    arc_features(arc, ctx)
        .iter()
        .zip(weights.as_array())
        .map(|(f, w)| f * w)
        .sum()
}

/// Local target: the farthest-along point of the path at `lookahead` from
/// the robot, the goal once it is within reach, otherwise the closest path
/// point.
pub fn pure_pursuit_target(position: Vec2, path: &GlobalPath, lookahead: f64) -> Result<Vec2> {
    if path.waypoints.is_empty() {
        return Err(Error::EmptyPath);
    }
    if !(lookahead > 0.0) {
        return Err(Error::InvalidParameter("lookahead must be positive"));
    }
    let goal = path.goal();
    if position.distance(goal) <= lookahead {
        return Ok(goal);
    }
    let mut best: Option<(f64, Vec2)> = None;
    let mut s0 = 0.0;
    for seg in path.segments() {
        let len = seg.length();
        if len > 0.0 {
            let d = seg.b - seg.a;
            let f = seg.a - position;
            let a = d.dot(d);
            let b = 2.0 * f.dot(d);
            let c = f.dot(f) - lookahead * lookahead;
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let root = libm::sqrt(disc);
                for t in [(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)] {
                    if (0.0..=1.0).contains(&t) {
                        let s = s0 + t * len;
                        if best.is_none_or(|(bs, _)| s > bs) {
                            best = Some((s, seg.a + d * t));
                        }
                    }
                }
            }
        }
        s0 += len;
    }
    Ok(match best {
        Some((_, p)) => p,
        None => path.point_at(path.project(position).0),
    })
}

/// 1-D speed program. Brakes when the current stopping distance reaches
/// `dist_to_stop`, accelerates when the faster speed still leaves room to
/// stop, otherwise cruises. Speed changes by at most `a_max * dt` per tick.
pub fn plan_velocity(current_v: f64, kin: &Kinodynamics, dist_to_stop: f64, dt: f64) -> f64 {
    let dv = kin.a_max * dt;
    let v = current_v.max(0.0);
    if kin.stopping_distance(v) >= dist_to_stop {
        return (v - dv).max(0.0);
    }
    if v > kin.v_max {
        // limit dropped below the current speed (e.g. a new, later turn)
        return (v - dv).max(kin.v_max);
    }
    let faster = (v + dv).min(kin.v_max);
    if kin.stopping_distance(faster) + faster * dt < dist_to_stop {
        faster
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub lookahead: f64,
    pub arc_count: usize,
    pub horizon: f64,
    pub sample_spacing: f64,
    /// Extra clearance kept from walls, m.
    pub safety_margin: f64,
    pub weights: FeatureWeights,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            lookahead: 1.0,
            arc_count: 41,
            horizon: 2.0,
            sample_spacing: 0.05,
            safety_margin: 0.02,
            weights: FeatureWeights::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lookahead > 0.0) {
            return Err(Error::InvalidParameter("lookahead must be positive"));
        }
        if self.arc_count < 3 || self.arc_count.is_multiple_of(2) {
            return Err(Error::InvalidParameter("arc count must be odd and at least 3"));
        }
        if !(self.horizon > 0.0) || !(self.sample_spacing > 0.0) {
            return Err(Error::InvalidParameter("horizon and spacing must be positive"));
        }
        if !(self.safety_margin >= 0.0 && self.safety_margin.is_finite()) {
            return Err(Error::InvalidParameter("safety margin must be nonnegative"));
        }
        self.weights.validate()
    }
}

/// Inputs of one planning cycle, all borrowed from an immutable snapshot.
#[derive(Debug, Clone, Copy)]
pub struct PlanInput<'a> {
    pub pose: Pose,
    pub v: f64,
    /// Angular rate of the arc being executed; its curvature stays a candidate.
    pub omega: f64,
    pub goal: Vec2,
    pub path: &'a GlobalPath,
    pub kin: &'a Kinodynamics,
    pub map: &'a VectorMap,
    pub others: &'a [Disc],
    /// Predicted positions of robots to give way to. They limit speed along
    /// the chosen arc but do not steer the arc choice.
    pub yield_to: &'a [Disc],
    /// A region the robot's centre must not enter yet; limits speed only.
    pub keep_out: Option<&'a ConflictZone>,
    pub config: &'a PlannerConfig,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutput {
    pub command: VelocityCommand,
    pub arc: ArcTrajectory,
    pub target: Vec2,
    /// False when every candidate arc was blocked and the robot is braking.
    pub found: bool,
}

/// Length after which an arc starts doubling back.
fn half_turn(arc: &ArcTrajectory) -> f64 {
    let k = libm::fabs(arc.curvature);
    if k > 0.0 {
        core::f64::consts::PI / k
    } else {
        f64::INFINITY
    }
}

fn turn_toward(input: &PlanInput<'_>, target: Vec2) -> f64 {
    let error = wrap_angle((target - input.pose.position()).angle() - input.pose.theta);
    (error / input.dt).clamp(-input.kin.omega_max, input.kin.omega_max)
}

/// One full local planning cycle.
pub fn plan_step(input: &PlanInput<'_>) -> Result<PlanOutput> {
    let kin = input.kin;
    let cfg = input.config;
    let radius = kin.robot_radius;
    let target = pure_pursuit_target(input.pose.position(), input.path, cfg.lookahead)?;

    // keep |omega| = |v * curvature| within omega_max at the fastest reachable speed
    let reachable = input.v.max(0.0) + kin.a_max * input.dt;
    let curvature_bound = if reachable > 0.0 {
        kin.curvature_max.min(kin.omega_max / reachable)
    } else {
        kin.curvature_max
    };
    let mut arcs = sample_arcs(&input.pose, curvature_bound, cfg.arc_count, cfg.horizon, cfg.sample_spacing)?;
    if input.v > 0.0 {
        let current = input.omega / input.v;
        if libm::fabs(current) <= curvature_bound && arcs.iter().all(|a| a.curvature != current) {
            arcs.push(ArcTrajectory::new(input.pose, current, cfg.horizon, cfg.sample_spacing));
        }
    }
    // room to stop after one more tick on the arc
    let margin = kin.stopping_distance(input.v.max(0.0)) + input.v.max(0.0) * input.dt;
    let ctx = CostContext {
        target,
        goal: input.goal,
        map: input.map,
        others: input.others,
        radius,
    };

    let mut best: Option<(f64, f64, ArcTrajectory)> = None;
    // longest free arc, followed while braking when nothing is usable
    let mut escape: Option<(f64, &ArcTrajectory)> = None;
    for arc in &arcs {
        let free = free_length_with_margin(arc, input.map, input.others, radius, cfg.safety_margin);
        if escape.is_none_or(|(f, _)| free > f) {
            escape = Some((free, arc));
        }
        let usable = free - margin;
        if usable <= 0.0 {
            continue;
        }
        let candidate = trim_to_target(&arc.truncated(usable.min(half_turn(arc))), target);
        let cost = evaluate_cost(&candidate, &cfg.weights, &ctx);
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, free, candidate));
        }
    }

    let Some((_, free, arc)) = best else {
        let v = plan_velocity(input.v, kin, 0.0, input.dt);
        let (free, arc) = escape.expect("at least three arcs are sampled");
        let curvature = if free > 0.0 { arc.curvature } else { 0.0 };
        // at rest and boxed in: turn on the spot toward the target
        let omega = if input.v <= 0.0 { turn_toward(input, target) } else { v * curvature };
        return Ok(PlanOutput {
            command: VelocityCommand { v, omega },
            arc: arc.truncated(free),
            target,
            found: false,
        });
    };
    let free = if input.yield_to.is_empty() && input.keep_out.is_none() {
        free
    } else {
        let full = ArcTrajectory::new(input.pose, arc.curvature, free, cfg.sample_spacing);
        let free = free.min(free_length(&full, input.map, input.yield_to, radius));
        input.keep_out.map_or(free, |zone| free.min(length_outside(&full, zone)))
    };
    // a goal the arc misses is reached, at best, where the arc passes closest
    let full = ArcTrajectory::new(input.pose, arc.curvature, free.min(half_turn(&arc)), cfg.sample_spacing);
    let to_goal = trim_to_target(&full, input.goal).arc_length;
    // one tick passes before the next command can react
    let reach = (free - input.v.max(0.0) * input.dt).max(0.0);
    let v = plan_velocity(input.v, kin, reach.min(to_goal), input.dt);
    // stalled only because the arc misses the goal: face it first
    let omega = if v <= 0.0 && input.v <= 0.0 && to_goal < reach {
        turn_toward(input, target)
    } else {
        v * arc.curvature
    };
    Ok(PlanOutput {
        command: VelocityCommand { v, omega },
        arc,
        target,
        found: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, Segment};
    use alloc::vec;
    use proptest::prelude::*;

    fn kin() -> Kinodynamics {
        Kinodynamics::new(1.5, 3.0, 4.0, 4.0, 0.2).unwrap()
    }

    fn empty_map() -> VectorMap {
        VectorMap::new(Bounds::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0)).unwrap(), vec![]).unwrap()
    }

    #[test]
    fn linear_scaling() {
        assert_eq!(scale_kinodynamics(&kin(), 1).unwrap().v_max, 1.5);
        assert_eq!(scale_kinodynamics(&kin(), 2).unwrap().v_max, 0.75);
        assert_eq!(scale_kinodynamics(&kin(), 3).unwrap().v_max, 0.5);
        let s = scale_kinodynamics(&kin(), 3).unwrap();
        assert_eq!((s.a_max, s.omega_max, s.curvature_max), (3.0, 4.0, 4.0));
        assert!(scale_kinodynamics(&kin(), 0).is_err());
    }

    #[test]
    fn alt_scaling() {
        let one = alt_scale_kinodynamics(&kin(), 1).unwrap().v_max;
        assert!((one - 1.5 / (1.0 - 1.0 / 7.5)).abs() < 1e-12);
        assert!((one - 1.7308).abs() < 1e-4);
        let two = alt_scale_kinodynamics(&kin(), 2).unwrap().v_max;
        assert!((two - 2.0455).abs() < 1e-4);
        assert_eq!(alt_scale_kinodynamics(&kin(), 8), Err(Error::InvalidAltScaling));
    }

    #[test]
    fn arc_fan() {
        let p = Pose::new(0.0, 0.0, 0.0);
        let c: Vec<f64> = sample_arcs(&p, 1.0, 3, 1.0, 0.1).unwrap().iter().map(|a| a.curvature).collect();
        assert_eq!(c, vec![-1.0, 0.0, 1.0]);
        let c: Vec<f64> = sample_arcs(&p, 2.0, 5, 1.0, 0.1).unwrap().iter().map(|a| a.curvature).collect();
        assert_eq!(c, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(sample_arcs(&p, 2.0, 4, 1.0, 0.1).is_err());
    }

    /// Forward-Euler unicycle with unit speed; independent of the closed form.
    fn integrate_numerically(start: Pose, curvature: f64, length: f64, step: f64) -> Pose {
        let n = libm::round(length / step) as usize;
        let h = length / n as f64;
        let (mut x, mut y, mut th) = (start.x, start.y, start.theta);
        for _ in 0..n {
            // midpoint rule keeps the global error well under the step size
            let mid = th + 0.5 * curvature * h;
            x += h * libm::cos(mid);
            y += h * libm::sin(mid);
            th += curvature * h;
        }
        Pose::new(x, y, th)
    }

    #[test]
    fn quarter_circle_endpoint() {
        let arc = ArcTrajectory::new(Pose::new(0.0, 0.0, 0.0), 1.0, core::f64::consts::FRAC_PI_2, 0.05);
        let end = arc.endpoint();
        assert!((end.x - 1.0).abs() < 1e-12 && (end.y - 1.0).abs() < 1e-12);
        assert!((end.theta - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let num = integrate_numerically(arc.start, 1.0, arc.arc_length, 1e-6);
        assert!(end.position().distance(num.position()) < 1e-6);
    }

    #[test]
    fn samples_lie_on_the_circle() {
        let start = Pose::new(0.3, -0.2, 0.7);
        let k = -2.5;
        let arc = ArcTrajectory::new(start, k, 2.0, 0.05);
        // centre of curvature is at distance 1/|k| to the left (k>0) or right (k<0)
        let centre = start.position() + start.heading().perp() * (1.0 / k);
        for s in &arc.samples {
            assert!((s.position().distance(centre) - 1.0 / k.abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_examples() {
        let start = Pose::new(0.0, 0.0, 0.0);
        let arc = ArcTrajectory::new(start, 0.0, 2.0, 0.05);
        let open = clip_arc(&arc, &empty_map(), &[], 0.2, 0.0);
        assert_eq!(open.arc_length, 2.0);

        let wall = VectorMap::new(
            Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)).unwrap(),
            vec![Segment::new(Vec2::new(1.0, -1.0), Vec2::new(1.0, 1.0))],
        )
        .unwrap();
        let clipped = clip_arc(&arc, &wall, &[], 0.2, 0.0);
        assert!((clipped.arc_length - 0.8).abs() <= 0.05 + 1e-12);
        assert!(clipped.arc_length <= 0.8 + 1e-12);

        let blocker = Disc::new(Vec2::new(0.1, 0.0), 0.2).unwrap();
        assert_eq!(clip_arc(&arc, &empty_map(), &[blocker], 0.2, 0.0).arc_length, 0.0);

        let margin = clip_arc(&arc, &wall, &[], 0.2, 0.3);
        assert!((margin.arc_length - (clipped.arc_length - 0.3)).abs() < 1e-12);
    }

    fn ctx<'a>(map: &'a VectorMap, target: Vec2) -> CostContext<'a> {
        CostContext { target, goal: target, map, others: &[], radius: 0.2 }
    }

    #[test]
    fn cost_prefers_closer_endpoint() {
        let m = empty_map();
        let w = FeatureWeights { clearance: 0.0, progress: 1.0, length: 0.0, goal: 0.0 };
        let a = ArcTrajectory::new(Pose::new(0.0, 0.0, 0.0), 0.0, 1.0, 0.1);
        let near = evaluate_cost(&a, &w, &ctx(&m, Vec2::new(2.0, 0.0)));
        let far = evaluate_cost(&a, &w, &ctx(&m, Vec2::new(3.0, 0.0)));
        assert!(near < far);
        assert_eq!(near, 1.0);
    }

    #[test]
    fn clearance_only_cost_orders_by_clearance() {
        let m = VectorMap::new(
            Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)).unwrap(),
            vec![Segment::new(Vec2::new(-2.0, 1.0), Vec2::new(2.0, 1.0))],
        )
        .unwrap();
        let w = FeatureWeights { clearance: 1.0, progress: 0.0, length: 0.0, goal: 0.0 };
        let c = ctx(&m, Vec2::new(1.0, 0.0));
        let arcs: Vec<_> = [0.0, -0.3, -0.6]
            .iter()
            .map(|y| ArcTrajectory::new(Pose::new(-1.0, *y, 0.0), 0.0, 1.0, 0.1))
            .collect();
        let costs: Vec<f64> = arcs.iter().map(|a| evaluate_cost(a, &w, &c)).collect();
        assert!(costs[0] > costs[1] && costs[1] > costs[2]);
    }

    #[test]
    fn velocity_program() {
        let k = Kinodynamics::new(1.0, 1.0, 4.0, 4.0, 0.2).unwrap();
        assert_eq!(plan_velocity(0.0, &k, 10.0, 0.025), 0.025);
        assert_eq!(plan_velocity(1.0, &k, 0.5, 0.025), 0.975);
        assert_eq!(plan_velocity(1.0, &k, 50.0, 0.025), 1.0);
        // limit dropped under the current speed: decelerate, never jump
        let half = scale_kinodynamics(&k, 2).unwrap();
        assert_eq!(plan_velocity(1.0, &half, 50.0, 0.025), 0.975);
        assert_eq!(plan_velocity(0.51, &half, 50.0, 0.025), 0.5);
    }

    #[test]
    fn pursuit_targets() {
        let straight = GlobalPath::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)]).unwrap();
        let t = pure_pursuit_target(Vec2::ZERO, &straight, 1.0).unwrap();
        assert!(t.distance(Vec2::new(1.0, 0.0)) < 1e-12);
        let t = pure_pursuit_target(Vec2::new(4.5, 0.0), &straight, 1.0).unwrap();
        assert_eq!(t, Vec2::new(5.0, 0.0));
        // far from the path: fall back to the nearest path point
        let t = pure_pursuit_target(Vec2::new(2.0, 3.0), &straight, 1.0).unwrap();
        assert!(t.distance(Vec2::new(2.0, 0.0)) < 1e-12);
    }

    #[test]
    fn pursuit_around_corner_matches_sampling() {
        let path = GlobalPath::from_points(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 2.0),
        ])
        .unwrap();
        let robot = Vec2::new(0.6, 0.0);
        let r = 1.0;
        let t = pure_pursuit_target(robot, &path, r).unwrap();
        // oracle: walk the polyline densely, keep the last point within 1e-3 of the circle
        let n = 300_000;
        let mut last = None;
        for i in 0..=n {
            let p = path.point_at(path.total_length * i as f64 / n as f64);
            if (p.distance(robot) - r).abs() < 1e-4 {
                last = Some(p);
            }
        }
        let oracle = last.unwrap();
        assert!(t.x == 1.0, "target should be on the second leg: {t:?}");
        assert!(t.distance(oracle) < 1e-3);
        assert!((t.distance(robot) - r).abs() < 1e-12);
    }

    fn doorway_map() -> VectorMap {
        VectorMap::new(
            Bounds::new(Vec2::ZERO, Vec2::new(3.0, 3.0)).unwrap(),
            vec![
                Segment::new(Vec2::new(0.0, 1.8), Vec2::new(1.25, 1.8)),
                Segment::new(Vec2::new(1.75, 1.8), Vec2::new(3.0, 1.8)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn open_space_goes_straight() {
        let m = empty_map();
        let path = GlobalPath::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)]).unwrap();
        let cfg = PlannerConfig::default();
        let k = kin();
        let out = plan_step(&PlanInput {
            pose: Pose::new(0.0, 0.0, 0.0),
            v: 0.0,
            omega: 0.0,
            goal: Vec2::new(5.0, 0.0),
            path: &path,
            kin: &k,
            map: &m,
            others: &[],
            yield_to: &[],
            keep_out: None,
            config: &cfg,
            dt: 0.025,
        })
        .unwrap();
        assert!(out.found);
        assert_eq!(out.arc.curvature, 0.0);
        assert!((out.command.v - 0.075).abs() < 1e-12);
        assert_eq!(out.command.omega, 0.0);
    }

    #[test]
    fn blocked_robot_brakes_in_place() {
        let m = empty_map();
        let path = GlobalPath::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)]).unwrap();
        let cfg = PlannerConfig::default();
        let k = kin();
        let on_top = [Disc::new(Vec2::new(0.1, 0.0), 0.2).unwrap()];
        let mut input = PlanInput {
            pose: Pose::new(0.0, 0.0, 0.0),
            v: 0.0,
            omega: 0.0,
            goal: Vec2::new(5.0, 0.0),
            path: &path,
            kin: &k,
            map: &m,
            others: &on_top,
            yield_to: &[],
            keep_out: None,
            config: &cfg,
            dt: 0.025,
        };
        let out = plan_step(&input).unwrap();
        assert!(!out.found);
        assert_eq!(out.command, VelocityCommand { v: 0.0, omega: 0.0 });
        input.v = 1.0;
        let out = plan_step(&input).unwrap();
        assert_eq!(out.command.v, 1.0 - 0.075);
    }

    #[test]
    fn length_outside_zone() {
        let arc = ArcTrajectory::new(Pose::new(0.0, 0.0, 0.0), 0.0, 2.0, 0.05);
        let zone = ConflictZone::rectangle("z", Vec2::new(1.0, -1.0), Vec2::new(2.0, 1.0)).unwrap();
        assert!((length_outside(&arc, &zone) - 0.95).abs() < 1e-9);
        let inside = ArcTrajectory::new(Pose::new(1.5, 0.0, 0.0), 0.0, 1.0, 0.05);
        assert_eq!(length_outside(&inside, &zone), 0.0);
        let away = ArcTrajectory::new(Pose::new(0.0, 0.0, core::f64::consts::PI), 0.0, 1.0, 0.05);
        assert_eq!(length_outside(&away, &zone), 1.0);
    }

    #[test]
    fn wall_margin_only_blocks_closing_moves() {
        let wall = VectorMap::new(
            Bounds::new(Vec2::new(-5.0, -5.0), Vec2::new(5.0, 5.0)).unwrap(),
            vec![Segment::new(Vec2::new(1.0, -5.0), Vec2::new(1.0, 5.0))],
        )
        .unwrap();
        let toward = ArcTrajectory::new(Pose::new(0.0, 0.0, 0.0), 0.0, 2.0, 0.01);
        let plain = free_length(&toward, &wall, &[], 0.2);
        let kept = free_length_with_margin(&toward, &wall, &[], 0.2, 0.1);
        assert!((plain - 0.79).abs() < 0.011, "{plain}");
        assert!((kept - 0.69).abs() < 0.011, "{kept}");
        // starting inside the margin, backing away from the wall stays free
        let away = ArcTrajectory::new(Pose::new(0.75, 0.0, core::f64::consts::PI), 0.0, 1.0, 0.01);
        assert_eq!(free_length_with_margin(&away, &wall, &[], 0.2, 0.1), 1.0);
    }

    #[test]
    fn keep_out_stops_short_of_the_zone() {
        let m = empty_map();
        let path = GlobalPath::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(5.0, 0.0)]).unwrap();
        let cfg = PlannerConfig::default();
        let k = kin();
        let zone = ConflictZone::rectangle("z", Vec2::new(1.0, -1.0), Vec2::new(2.0, 1.0)).unwrap();
        let mut input = PlanInput {
            pose: Pose::new(0.0, 0.0, 0.0),
            v: 0.0,
            omega: 0.0,
            goal: Vec2::new(5.0, 0.0),
            path: &path,
            kin: &k,
            map: &m,
            others: &[],
            yield_to: &[],
            keep_out: Some(&zone),
            config: &cfg,
            dt: 0.025,
        };
        let mut pose = input.pose;
        for _ in 0..400 {
            input.pose = pose;
            let out = plan_step(&input).unwrap();
            pose = pose.integrate(out.command.v, out.command.omega, input.dt);
            input.v = out.command.v;
            input.omega = out.command.omega;
            assert!(!in_conflict_zone(pose.position(), &zone), "entered at {pose:?}");
        }
        assert!(pose.x > 0.8, "should close in on the zone: {pose:?}");
        assert!(input.v < 1e-9);
    }

    #[test]
    fn weight_scaling_keeps_choice() {
        let m = doorway_map();
        let path = GlobalPath::from_points(vec![
            Vec2::new(1.1, 1.2),
            Vec2::new(1.5, 1.6),
            Vec2::new(1.5, 2.0),
            Vec2::new(1.2, 2.4),
        ])
        .unwrap();
        let k = kin();
        let base = PlannerConfig::default();
        let scaled = PlannerConfig { weights: base.weights.scaled(7.5), ..base };
        let mut pose = Pose::new(1.1, 1.2, 0.9);
        for _ in 0..5 {
            let make = |cfg| PlanInput {
                pose,
                v: 0.4,
                omega: 0.0,
                goal: Vec2::new(1.2, 2.4),
                path: &path,
                kin: &k,
                map: &m,
                others: &[],
                yield_to: &[],
                keep_out: None,
                config: cfg,
                dt: 0.025,
            };
            let a = plan_step(&make(&base)).unwrap();
            let b = plan_step(&make(&scaled)).unwrap();
            assert_eq!(a.arc.curvature, b.arc.curvature);
            pose = pose.integrate(a.command.v.max(0.3), a.command.omega, 0.1);
        }
    }

    proptest! {
        #[test]
        fn arc_endpoints_match_integration(k in -4.0f64..4.0, len in 0.05f64..2.0, th in -3.1f64..3.1) {
            let start = Pose::new(0.5, -0.5, th);
            let arc = ArcTrajectory::new(start, k, len, 0.05);
            let num = integrate_numerically(start, k, len, 1e-4);
            prop_assert!(arc.endpoint().position().distance(num.position()) < 1e-4);
        }

        #[test]
        fn velocity_program_is_feasible(v in 0.0f64..2.0, d in 0.0f64..5.0, vmax in 0.1f64..2.0) {
            let k = Kinodynamics::new(vmax, 3.0, 4.0, 4.0, 0.2).unwrap();
            let dt = 0.025;
            let out = plan_velocity(v, &k, d, dt);
            prop_assert!(out >= 0.0);
            prop_assert!((out - v).abs() <= k.a_max * dt + 1e-12);
            if v <= vmax {
                prop_assert!(out <= vmax + 1e-12);
            }
        }

        #[test]
        fn weight_scale_invariance(scale in 0.01f64..100.0, x in 0.6f64..2.4, th in 0.3f64..2.8) {
            let m = doorway_map();
            let path = GlobalPath::from_points(vec![Vec2::new(x, 1.0), Vec2::new(1.5, 1.6), Vec2::new(1.5, 2.2)]).unwrap();
            let k = kin();
            let base = PlannerConfig::default();
            let scaled = PlannerConfig { weights: base.weights.scaled(scale), ..base };
            let make = |cfg| PlanInput {
                pose: Pose::new(x, 1.0, th),
                v: 0.5,
                omega: 0.0,
                goal: Vec2::new(1.5, 2.2),
                path: &path,
                kin: &k,
                map: &m,
                others: &[],
                yield_to: &[],
                keep_out: None,
                config: cfg,
                dt: 0.025,
            };
            let a = plan_step(&make(&base)).unwrap();
            let b = plan_step(&make(&scaled)).unwrap();
            prop_assert_eq!(a.arc.curvature, b.arc.curvature);
        }
    }
}
