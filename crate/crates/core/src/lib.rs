//! Mobile wireless sensor network simulator.
//!
//! Nodes move in a square arena under one of five mobility models, the
//! coverage-based model steering each node along the resultant of
//! inverse-distance repulsion from its neighbors plus a momentum term.
//! A single target (stationary, linear crosser or random walker) lives for a
//! finite duration; runs record whether and for how long it was within
//! range of some node. Monte Carlo estimates can be checked against the
//! closed-form Poisson coverage results in [`analysis`].

pub mod analysis;
pub mod config;
pub mod engine;
pub mod geometry;
pub mod harness;
pub mod mobility;
pub mod output;
pub mod target;

pub use analysis::CoverageParams;
pub use config::{parse_config, ConfigDocument, ConfigError};
pub use engine::{run_single, RunResult, SimConfig};
pub use geometry::{Arena, Heading, Point2};
pub use harness::{monte_carlo, sweep, Aggregate, Experiment, SweepGrid, SweepRow};
pub use mobility::{MobilityModel, MobilityParams, NodeState};
pub use target::{TargetKind, TargetSpec};
