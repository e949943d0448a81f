use std::collections::BTreeMap;

use minigame_core::engine::presets::{default_kinodynamics, doorway, intersection};
use minigame_core::engine::{
    run_episode, NeighborState, Observation, Outcome, OwnState, RobotSpec, Scenario, SchedulingMode,
    TelemetryRecord,
};
use minigame_core::geometry::{Bounds, Pose, Vec2, VectorMap};
use minigame_core::RobotId;

fn spec(start: (f64, f64), goal: (f64, f64), zeta: Option<f64>) -> RobotSpec {
    RobotSpec {
        start: Vec2::new(start.0, start.1),
        goal: Vec2::new(goal.0, goal.1),
        heading: None,
        zeta,
        kinodynamics: default_kinodynamics(),
    }
}

fn doorway_seed(seed: u64) -> Scenario {
    let mut s = doorway();
    s.seed = seed;
    s
}

/// `(tick, robot) -> (x, y, theta, v, omega, turn)` from the state records.
type States = BTreeMap<(u64, u32), (f64, f64, f64, f64, f64, Option<u32>)>;

fn states(log: &[TelemetryRecord]) -> States {
    log.iter()
        .filter_map(|r| match r {
            TelemetryRecord::State { tick, robot, x, y, theta, v, omega, turn, .. } => {
                Some(((*tick, robot.0), (*x, *y, *theta, *v, *omega, *turn)))
            }
            _ => None,
        })
        .collect()
}

#[test]
fn single_robot_open_map() {
    let map = VectorMap::new(Bounds::new(Vec2::ZERO, Vec2::new(3.0, 3.0)).unwrap(), vec![]).unwrap();
    let s = Scenario::new("open", map, vec![], vec![spec((0.5, 0.5), (2.5, 2.2), None)]);
    let (m, _) = run_episode(&s).unwrap();
    assert_eq!(m.outcome, Outcome::Success);
    assert_eq!(m.collisions, 0);
    assert_eq!(m.reached, vec![true]);
}

#[test]
fn doorway_auction_second_robot_is_held_to_half_speed() {
    for seed in 0..5 {
        let s = doorway_seed(seed);
        let (m, log) = run_episode(&s).unwrap();
        assert_eq!(m.outcome, Outcome::Success, "seed {seed}");
        assert_eq!(m.collisions, 0);
        assert_eq!(m.auctions.len(), 1);
        let second = m.auctions[0].order[1].0;
        let v_max = default_kinodynamics().v_max;
        let peak = states(&log)
            .iter()
            .filter(|((_, r), st)| *r == second && st.5 == Some(2))
            .map(|(_, st)| st.3)
            .fold(0.0, f64::max);
        assert!(peak > 0.0);
        assert!(peak <= v_max / 2.0 + 1e-9, "seed {seed}: peak {peak}");
    }
}

#[test]
fn doorway_without_schedule_fails() {
    for seed in 0..5 {
        let mut s = doorway_seed(seed);
        s.scheduling = SchedulingMode::None;
        let (m, _) = run_episode(&s).unwrap();
        assert!(matches!(m.outcome, Outcome::Collision | Outcome::Deadlock), "seed {seed}: {:?}", m.outcome);
    }
}

#[test]
fn waiting_for_the_first_turn_counts_as_stop_time() {
    let mut s = doorway();
    // the robot nearest the gap bids lower and must wait for the other to go first
    s.robots = vec![spec((2.0, 1.45), (1.8, 2.35), Some(1.0)), spec((0.6, 0.5), (1.2, 2.35), Some(9.0))];
    s.start_jitter = 0.0;
    let (m, _) = run_episode(&s).unwrap();
    assert_eq!(m.outcome, Outcome::Success);
    assert_eq!(m.auctions[0].order, vec![RobotId(1), RobotId(0)]);
    assert!(m.stop_ticks[0] > 0);
    let entries = &m.zone_entries[0];
    assert!(entries[1].unwrap() < entries[0].unwrap());
}

#[test]
fn same_seed_same_telemetry() {
    for s in [doorway_seed(3), { let mut s = intersection(); s.seed = 3; s }] {
        let (_, a) = run_episode(&s).unwrap();
        let (_, b) = run_episode(&s).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn a_rivals_private_value_only_matters_through_the_order() {
    let run = |zeta: f64| {
        let mut s = doorway();
        s.robots[0].zeta = Some(zeta);
        s.robots[1].zeta = Some(1.0);
        let (m, log) = run_episode(&s).unwrap();
        (m.auctions[0].order.clone(), states(&log))
    };
    let (order_a, a) = run(5.0);
    let (order_b, b) = run(9.0);
    assert_eq!(order_a, order_b);
    assert_eq!(a, b);
}

#[test]
fn observations_carry_no_private_fields() {
    let kin = default_kinodynamics();
    let obs = Observation {
        tick: 0,
        dt: 0.025,
        own: OwnState {
            id: RobotId(0),
            pose: Pose::new(0.0, 0.0, 0.0),
            v: 0.0,
            omega: 0.0,
            goal: Vec2::ZERO,
            radius: 0.2,
            kinodynamics: kin,
            turn: None,
            zone: None,
            done: false,
        },
        neighbors: vec![NeighborState {
            id: RobotId(1),
            pose: Pose::new(1.0, 0.0, 0.0),
            v: 0.0,
            omega: 0.0,
            radius: 0.2,
            v_max: kin.v_max,
            turn: None,
            zone: None,
        }],
    };
    let text = serde_json::to_string(&obs).unwrap();
    for private in ["zeta", "bid", "payment", "value"] {
        assert!(!text.contains(private), "{private} leaked into {text}");
    }
}

#[test]
fn poses_follow_unicycle_integration() {
    for s in [doorway_seed(1), { let mut s = intersection(); s.seed = 1; s }] {
        let (m, log) = run_episode(&s).unwrap();
        assert_eq!(m.feasibility_violations, 0);
        let st = states(&log);
        let dt = s.dt();
        for (&(tick, robot), &(x, y, th, v, w, _)) in &st {
            let Some(&(px, py, pth, _, _, _)) = tick.checked_sub(1).and_then(|t| st.get(&(t, robot))) else {
                continue;
            };
            let p = Pose::new(px, py, pth).integrate(v, w, dt);
            assert!((p.x - x).abs() < 1e-9 && (p.y - y).abs() < 1e-9 && (p.theta - th).abs() < 1e-9);
        }
    }
}

#[test]
fn makespan_is_the_last_arrival() {
    let (m, log) = run_episode(&doorway_seed(2)).unwrap();
    let last = m.goal_times.iter().map(|t| t.unwrap()).fold(0.0, f64::max);
    assert_eq!(m.makespan, Some(last));
    let arrivals: Vec<f64> = log
        .iter()
        .filter_map(|r| match r {
            TelemetryRecord::Arrival { time, .. } => Some(*time),
            _ => None,
        })
        .collect();
    assert_eq!(arrivals.len(), 2);
    let flow = m.flow_rate.unwrap();
    assert!((flow - 2.0 / (0.5 * last)).abs() < 1e-12);
}

#[test]
fn intersection_entries_follow_the_order() {
    for seed in 0..5 {
        let mut s = intersection();
        s.seed = seed;
        let (m, _) = run_episode(&s).unwrap();
        assert_eq!(m.outcome, Outcome::Success, "seed {seed}");
        let order = &m.auctions[0].order;
        assert_eq!(order.len(), 4);
        let entries: Vec<u64> = order.iter().map(|id| m.zone_entries[0][id.0 as usize].unwrap()).collect();
        assert!(entries.windows(2).all(|w| w[0] < w[1]), "seed {seed}: {entries:?}");
    }
}

#[test]
fn invalid_scenario_names_the_field() {
    let mut s = doorway();
    s.tick_rate = 0.0;
    let e = run_episode(&s).unwrap_err();
    assert!(format!("{e}").contains("tick_rate"));
}
