//! Priority scheduling for robots contesting a conflict zone.
//!
//! Each robot bids for an early turn through the zone. Turns are allocated in
//! decreasing bid order and each robot is charged the externality it imposes
//! on the robots behind it:
//!
//! ```text
//! p(q) = sum_{j=q}^{k} b_(j+1) * (alpha_j - alpha_(j+1)),   alpha_(k+1) = 0, b_(k+1) = 0
//! ```
//!
//! where `b_(j)` is the bid holding turn `j` and `alpha` is the strictly
//! decreasing reward schedule. Under this pair of rules reporting the true
//! priority constant is a dominant strategy, and the resulting ordering
//! maximises `sum_i zeta_i * alpha_(turn_i)`.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConflictZone, Segment, Vec2};
use crate::RobotId;

/// Default distance from a zone inside which robots are considered engaged.
pub const DEFAULT_ENGAGEMENT_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSchedule(Vec<f64>);

impl RewardSchedule {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidRewardSchedule("schedule is empty"));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidRewardSchedule("rewards must be positive and finite"));
        }
        if alpha.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidRewardSchedule("rewards must be strictly decreasing"));
        }
        Ok(Self(alpha))
    }

    /// `alpha_q = k - q + 1`.
    pub fn linear(k: usize) -> Result<Self> {
        Self::new((1..=k).map(|q| (k - q + 1) as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Reward for turn `q` (1-based); zero past the last turn.
    pub fn alpha(&self, q: usize) -> f64 {
        if q == 0 {
            return f64::NAN;
        }
        self.0.get(q - 1).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A robot's private priority constant together with the shared schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityProfile {
    pub zeta: Vec<(RobotId, f64)>,
    pub alpha: RewardSchedule,
}

impl PriorityProfile {
    pub fn new(zeta: Vec<(RobotId, f64)>, alpha: RewardSchedule) -> Result<Self> {
        if zeta.iter().any(|(_, z)| !z.is_finite() || *z <= 0.0) {
            return Err(Error::NonPositiveValuation);
        }
        if zeta.len() != alpha.len() {
            return Err(Error::SizeMismatch { expected: alpha.len(), actual: zeta.len() });
        }
        Ok(Self { zeta, alpha })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub robot: RobotId,
    pub value: f64,
}

impl Bid {
    pub fn new(robot: RobotId, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidBid("bid must be finite"));
        }
        if value < 0.0 {
            return Err(Error::InvalidBid("bid must be nonnegative"));
        }
        Ok(Self { robot, value })
    }
}

/// Truthful bidding: report the priority constant itself.
pub fn optimal_bid(robot: RobotId, zeta: f64) -> Result<Bid> {
    if !zeta.is_finite() || zeta <= 0.0 {
        return Err(Error::NonPositiveValuation);
    }
    Bid::new(robot, zeta)
}

/// Turn assignment `sigma` and its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityOrdering {
    /// `by_turn[q - 1]` is the robot moving on turn `q`.
    by_turn: Vec<RobotId>,
}

impl PriorityOrdering {
    pub fn from_turn_order(by_turn: Vec<RobotId>) -> Result<Self> {
        let mut ids = by_turn.clone();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("ordering repeats a robot"));
        }
        Ok(Self { by_turn })
    }

    pub fn len(&self) -> usize {
        self.by_turn.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_turn.is_empty()
    }

    /// `sigma(robot)`, 1-based.
    pub fn turn_of(&self, robot: RobotId) -> Option<usize> {
        self.by_turn.iter().position(|r| *r == robot).map(|i| i + 1)
    }

    /// `sigma^-1(turn)`.
    pub fn robot_at(&self, turn: usize) -> Option<RobotId> {
        turn.checked_sub(1).and_then(|i| self.by_turn.get(i)).copied()
    }

    pub fn by_turn(&self) -> &[RobotId] {
        &self.by_turn
    }
}

/// Allocation rule: highest bid moves first; equal bids go to the lower id.
pub fn allocate(bids: &[Bid]) -> Result<PriorityOrdering> {
    if bids.is_empty() {
        return Err(Error::EmptyAuction);
    }
    if bids.iter().any(|b| !b.value.is_finite()) {
        return Err(Error::InvalidBid("bid must be finite"));
    }
    let mut sorted = bids.to_vec();
    sorted.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.robot.cmp(&b.robot)));
    PriorityOrdering::from_turn_order(sorted.into_iter().map(|b| b.robot).collect())
}

/// Social-cost payment for the robot on turn `turn`.
///
/// `successor_bids[0]` is the bid on turn `turn + 1`, `successor_bids[1]` on
/// turn `turn + 2`, and so on. Missing entries count as zero.
pub fn payment(turn: usize, successor_bids: &[f64], alpha: &RewardSchedule) -> Result<f64> {
    let k = alpha.len();
    if turn == 0 || turn > k {
        return Err(Error::TurnOutOfRange { turn, count: k });
    }
    let mut total = 0.0;
    for j in turn..=k {
        let bid = successor_bids.get(j - turn).copied().unwrap_or(0.0);
        total += bid * (alpha.alpha(j) - alpha.alpha(j + 1));
    }
    Ok(total)
}

/// Draws proxy bids for the turns behind a robot, uniform on `(0, zeta_max]`.
pub fn sample_proxy_bids<R: Rng + ?Sized>(rng: &mut R, count: usize, zeta_max: f64) -> Vec<f64> {
    (0..count).map(|_| zeta_max * (1.0 - rng.gen::<f64>())).collect()
}

/// `sum_i zeta_i * alpha_(sigma(i))`.
pub fn welfare(
    sigma: &PriorityOrdering,
    zeta: &[(RobotId, f64)],
    alpha: &RewardSchedule,
) -> Result<f64> {
    if zeta.len() != sigma.len() {
        return Err(Error::SizeMismatch { expected: sigma.len(), actual: zeta.len() });
    }
    if alpha.len() < sigma.len() {
        return Err(Error::SizeMismatch { expected: sigma.len(), actual: alpha.len() });
    }
    zeta.iter()
        .map(|(id, z)| {
            sigma
                .turn_of(*id)
                .map(|q| z * alpha.alpha(q))
                .ok_or(Error::InvalidParameter("valuation for a robot outside the ordering"))
        })
        .sum()
}

/// Allocation rule signature used by [`verify_dsic`].
pub type AllocationRule = fn(&[Bid]) -> Result<PriorityOrdering>;

/// Quasi-linear utility of `robot` when the auction runs on `bids`:
/// its reward at the allocated turn minus the social-cost payment charged
/// at the bids actually placed behind it.
pub fn utility(
    robot: RobotId,
    zeta: f64,
    bids: &[Bid],
    alpha: &RewardSchedule,
    rule: AllocationRule,
) -> Result<f64> {
    let sigma = rule(bids)?;
    let q = sigma.turn_of(robot).ok_or(Error::InvalidParameter("robot did not bid"))?;
    let behind: Vec<f64> = sigma.by_turn()[q..]
        .iter()
        .map(|r| bids.iter().find(|b| b.robot == *r).map(|b| b.value).unwrap_or(0.0))
        .collect();
    Ok(zeta * alpha.alpha(q) - payment(q, &behind, alpha)?)
}

/// Exhaustively checks that truthful bidding is a dominant strategy: for
/// every valuation profile drawn from `grid`, every robot, and every
/// unilateral deviation to another grid value, truthful utility is at least
/// the deviating utility (others bidding truthfully).
pub fn verify_dsic(k: usize, grid: &[f64], alpha: &RewardSchedule, rule: AllocationRule) -> bool {
    const TOL: f64 = 1e-9;
    if k == 0 || grid.is_empty() || alpha.len() != k {
        return false;
    }
    let mut profile = alloc::vec![0usize; k];
    loop {
        let zeta: Vec<f64> = profile.iter().map(|&i| grid[i]).collect();
        let truthful: Vec<Bid> = zeta
            .iter()
            .enumerate()
            .map(|(i, z)| Bid { robot: RobotId(i as u32), value: *z })
            .collect();
        for i in 0..k {
            let robot = RobotId(i as u32);
            let Ok(honest) = utility(robot, zeta[i], &truthful, alpha, rule) else {
                return false;
            };
            for &dev in grid.iter().filter(|d| **d != zeta[i]) {
                let mut bids = truthful.clone();
                bids[i].value = dev;
                let Ok(deviant) = utility(robot, zeta[i], &bids, alpha, rule) else {
                    return false;
                };
                if deviant > honest + TOL {
                    return false;
                }
            }
        }
        // odometer over grid^k
        let mut pos = 0;
        loop {
            if pos == k {
                return true;
            }
            profile[pos] += 1;
            if profile[pos] < grid.len() {
                break;
            }
            profile[pos] = 0;
            pos += 1;
        }
    }
}

/// Robots contesting one zone at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub robots: Vec<RobotId>,
    pub zone: String,
    pub tick: u64,
}

/// What the conflict detector knows about one robot.
#[derive(Debug, Clone, Copy)]
pub struct ConflictCandidate<'a> {
    pub robot: RobotId,
    pub position: Vec2,
    /// Remaining global route, starting near the robot.
    pub remaining_path: &'a [Vec2],
}

/// True iff the polyline passes through (or starts inside) the zone.
pub fn path_crosses_zone(path: &[Vec2], zone: &ConflictZone) -> bool {
    match path {
        [] => false,
        [p] => crate::geometry::in_conflict_zone(*p, zone),
        _ => path.windows(2).any(|w| zone.intersects_segment(&Segment::new(w[0], w[1]))),
    }
}

/// Collects every candidate whose remaining route crosses `zone` and which
/// is closer than `engagement_radius` to it. Fewer than two such robots is
/// not a conflict.
pub fn detect_conflict(
    candidates: &[ConflictCandidate<'_>],
    zone: &ConflictZone,
    tick: u64,
    engagement_radius: f64,
) -> Option<Conflict> {
    let mut robots: Vec<RobotId> = candidates
        .iter()
        .filter(|c| zone.distance(c.position) < engagement_radius)
        .filter(|c| path_crosses_zone(c.remaining_path, zone))
        .map(|c| c.robot)
        .collect();
    robots.sort();
    robots.dedup();
    (robots.len() >= 2).then(|| Conflict { robots, zone: zone.id.clone(), tick })
}
