//! Schema-based navigation agents at desk scale.
//!
//! The crate composes a handful of biologically motivated pieces — a
//! recurrent reservoir with TD-trained actor/critic readouts, a
//! path-integration metric map, a one-shot cue-to-goal associative memory
//! (symbolic or plastic-readout), a vector navigator, and a gated
//! bump-attractor working memory — into agents that run a battery of
//! navigation tasks (delayed match to place, obstacle mazes, multiple
//! paired associations, transient cues with distractors).
//!
//! `harness` holds the experiment runner, metrics, statistics, persistence,
//! and reporting; the `schema-nav` binary drives it from the command line.

pub mod agents;
pub mod dynamics;
pub mod environment;
pub mod error;
pub mod goal_memory;
pub mod harness;
pub mod linalg;
pub mod metric_map;
pub mod navigator;
pub mod reservoir;
pub mod rng;
pub mod working_memory;

pub use agents::{Agent, AgentKind, AgentParams};
pub use environment::schedule::{MpaCondition, TaskKind};
pub use error::ConfigError;
