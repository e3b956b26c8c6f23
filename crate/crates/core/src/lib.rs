//! Event-aware scheduling engine for single-line, multi-source, multi-depot
//! refined-products pipelines.
//!
//! The engine builds a continuous-time MILP from a [`scenario::Scenario`],
//! solves it through a pluggable backend, extracts the physical
//! [`schedule::Schedule`], verifies it with an independent plug-flow
//! simulation, and can compare event-aware planning against a reactive
//! stop-and-resume baseline.

pub mod error;
pub mod model;
pub mod scenario;
pub mod solver;

pub use error::{PlanError, ScenarioError, ScheduleError, SolveError};
