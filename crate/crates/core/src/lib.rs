//! Decentralized bi-level navigation for multi-robot social mini-games.
//!
//! A top-level auction orders robots contesting a conflict zone (a doorway,
//! an intersection core); each robot's bottom-level planner then samples
//! constant-curvature arcs under speed limits scaled by its turn. The
//! [`engine`] runs both levels in a fixed-rate deterministic loop and
//! collects the episode metrics.
//!
//! The crate is `no_std` (with `alloc`). File formats, the CLI and batch
//! execution live in the `minigame` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod auction;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod global_planner;
pub mod local_planner;
pub mod social_force;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Robot identifier; ordering doubles as the auction tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl core::fmt::Display for RobotId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}
