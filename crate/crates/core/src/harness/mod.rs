//! Experiment harness: configuration, execution, metrics, persistence,
//! and reporting.

pub mod config;
pub mod foraging;
pub mod metrics;
pub mod report;
pub mod rows;
pub mod runner;
pub mod snapshot;
pub mod svg;

pub use config::{spec_from_toml, task_defaults, AgentSetup, ExperimentSpec, Overrides};
pub use foraging::{run_foraging, ForagingOutcome};
pub use metrics::{pas_learned, savings, stats, visit_ratio, StatSummary};
pub use report::generate_report;
pub use rows::ExperimentTables;
pub use runner::{run_experiment, run_seed};
pub use snapshot::WeightSnapshot;
