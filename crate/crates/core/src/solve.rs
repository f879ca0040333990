//! Result and error types shared by every solver.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::engine::{Assignment, EngineError};
use crate::model::{ModelError, Schedule};

/// Identifies which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Technique {
    /// Exact branch-and-bound with the MILP's semantics.
    Milp,
    Heft,
    Olb,
    Ga,
    Sa,
    Pso,
    Aco,
    /// Brute-force reference enumeration.
    Brute,
}

impl Technique {
    pub const ALL: [Technique; 7] = [
        Technique::Milp,
        Technique::Heft,
        Technique::Olb,
        Technique::Ga,
        Technique::Sa,
        Technique::Pso,
        Technique::Aco,
    ];
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Technique::Milp => "milp",
            Technique::Heft => "heft",
            Technique::Olb => "olb",
            Technique::Ga => "ga",
            Technique::Sa => "sa",
            Technique::Pso => "pso",
            Technique::Aco => "aco",
            Technique::Brute => "brute",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Technique {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "milp" => Ok(Technique::Milp),
            "heft" => Ok(Technique::Heft),
            "olb" => Ok(Technique::Olb),
            "ga" => Ok(Technique::Ga),
            "sa" => Ok(Technique::Sa),
            "pso" => Ok(Technique::Pso),
            "aco" => Ok(Technique::Aco),
            "brute" => Ok(Technique::Brute),
            other => Err(format!("unknown technique `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The returned objective is the global minimum over all feasible
    /// assignments.
    Optimal,
    Feasible,
    /// The budget expired; the result carries the best incumbent, if any.
    Timeout,
    Infeasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Timeout => "timeout",
            SolveStatus::Infeasible => "infeasible",
        };
        write!(f, "{s}")
    }
}

/// Outcome of one solver run on one workflow.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub technique: Technique,
    pub status: SolveStatus,
    /// Absent when no feasible assignment was found.
    pub schedule: Option<Schedule>,
    pub assignment: Option<Assignment>,
    pub objective: Option<f64>,
    /// Search states examined: branch expansions for the exact solver,
    /// candidate evaluations for metaheuristics, placement probes for the
    /// list schedulers. Deterministic for runs that finish within budget.
    pub explored_nodes: u64,
    pub wall_time: Duration,
    /// Human-readable diagnostics, e.g. which task made an instance
    /// infeasible.
    pub note: Option<String>,
}

impl SolveResult {
    pub fn infeasible(technique: Technique, note: String, wall_time: Duration) -> Self {
        SolveResult {
            technique,
            status: SolveStatus::Infeasible,
            schedule: None,
            assignment: None,
            objective: None,
            explored_nodes: 0,
            wall_time,
            note: Some(note),
        }
    }

    pub fn makespan(&self) -> Option<f64> {
        self.schedule.as_ref().map(|s| s.makespan)
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("instance too large for enumeration: {combinations:.3e} assignments exceed the {limit:.0e} guard")]
    TooLarge { combinations: f64, limit: f64 },
}
