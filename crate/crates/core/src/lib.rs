//! Sequential social dilemma laboratory.
//!
//! A deterministic grid-world engine hosting the Gathering and Wolfpack
//! games, independent Q-learning agents, a seeded experiment harness, and
//! empirical game-theoretic analysis of trained policy populations.

pub mod egta;
pub mod engine;
pub mod games;
pub mod harness;
pub mod learner;
pub mod seed;

pub use engine::{Action, GameKind, GridMap, Observation, Position, WorldState};
