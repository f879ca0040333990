//! Modeling and scheduling for heterogeneous compute-continuum clusters.
//!
//! The library describes clusters of heterogeneous nodes and DAG workflows,
//! maps tasks to nodes, and schedules them to minimize a weighted sum of
//! resource usage and makespan. Several solvers share one evaluation engine:
//!
//! * [`exact`] — branch-and-bound search that returns provably optimal
//!   schedules on desk-scale instances,
//! * [`heuristics`] — HEFT and OLB list schedulers for large instances,
//! * [`metaheur`] — GA, SA, PSO, and ACO searches over the assignment space,
//! * [`oracle`] — a deliberately independent brute-force reference used to
//!   cross-check the exact solver.
//!
//! [`ingest`] parses the JSON cluster/workflow formats and the Standard Task
//! Graph Set layout, and generates synthetic instances for scale tests.

pub mod engine;
pub mod exact;
pub mod heuristics;
pub mod ingest;
pub mod metaheur;
pub mod model;
pub mod oracle;
pub mod solve;

#[cfg(test)]
pub(crate) mod testutil;

pub use engine::{Assignment, FeasibilityReport, Violation, ViolationKind};
pub use model::{
    CapacityMode, DurationSpec, Instance, ModelError, Node, Resource, Schedule, ScheduleEntry,
    Task, UsageMode, Workflow,
};
pub use solve::{SolveError, SolveResult, SolveStatus, Technique};
