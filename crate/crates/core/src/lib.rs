//! Robust average-reward MDPs under S-rectangular ambiguity.
//!
//! The crate covers per-state robust games, discounted Bellman operators,
//! constant-gain solutions by vanishing discount, communication and
//! unichain checks, Monte Carlo simulation and an exhaustive oracle for
//! small instances.

pub mod ambiguity;
pub mod bellman;
pub mod error;
pub mod gain;
pub mod game;
pub mod graph;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod simulate;
pub mod structure;

pub use error::{Error, Result};
pub use game::Orientation;
pub use model::{ControllerSet, RobustMdpInstance, StateAmbiguity};
