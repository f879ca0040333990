//! Population and annealing searches over the assignment space: genetic
//! algorithm, simulated annealing, particle swarm, and ant colony.
//!
//! All four share one fitness function — the engine objective plus a linear
//! penalty per constraint violation — so quality comparisons between them
//! isolate search behavior. Every solver draws randomness from a named
//! seedable generator (ChaCha8) with a documented stream split: stream 0
//! drives the main loop, streams `1 + i` initialize population member `i`
//! (for the ant colony, streams `1 + iteration * population + k` drive ant
//! `k` of each wave). Identical instance and parameters therefore reproduce
//! identical results.

mod aco;
mod ga;
mod pso;
mod sa;

pub use aco::solve_aco;
pub use ga::solve_ga;
pub use pso::solve_pso;
pub use sa::solve_sa;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{Assignment, Prepared};
use crate::exact::candidate_nodes;
use crate::model::{CapacityMode, Instance, Workflow};
use crate::solve::{SolveError, SolveResult, SolveStatus, Technique};

/// Tunables for the metaheuristic solvers. Rates live in `[0, 1]`;
/// `initial_temperature` is relative — it is multiplied by the beta-weighted
/// makespan of the starting schedule, which keeps annealing behavior
/// independent of the instance's time scale.
#[derive(Debug, Clone)]
pub struct MhParams {
    pub seed: u64,
    pub iterations: usize,
    /// Population for GA/PSO, ants per wave for ACO.
    pub population_size: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub evaporation_rate: f64,
    pub pheromone_exponent: f64,
    pub heuristic_exponent: f64,
    /// Fitness penalty per constraint violation. `None` derives
    /// `10 * (alpha * max-usage sum + beta * serialized-makespan bound)`,
    /// which guarantees any feasible candidate beats any infeasible one.
    pub infeasibility_penalty: Option<f64>,
}

impl Default for MhParams {
    fn default() -> Self {
        MhParams {
            seed: 42,
            iterations: 200,
            population_size: 32,
            mutation_rate: 0.1,
            crossover_rate: 0.9,
            initial_temperature: 0.2,
            cooling_rate: 0.95,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
            evaporation_rate: 0.1,
            pheromone_exponent: 1.0,
            heuristic_exponent: 2.0,
            infeasibility_penalty: None,
        }
    }
}

impl MhParams {
    /// Default budget scaled to the workflow: iteration count grows with the
    /// task count so large instances keep searching while 5-task instances
    /// stay well under a second.
    pub fn default_for(task_count: usize) -> Self {
        MhParams {
            iterations: 200.max(8 * task_count),
            ..MhParams::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.mutation_rate)
            || !rate_ok(self.crossover_rate)
            || !rate_ok(self.cooling_rate)
            || !rate_ok(self.evaporation_rate)
        {
            return Err(SolveError::InvalidParams("rates must lie in [0, 1]".into()));
        }
        if !(self.initial_temperature > 0.0) {
            return Err(SolveError::InvalidParams(
                "initial_temperature must be positive".into(),
            ));
        }
        if self.population_size < 2 {
            return Err(SolveError::InvalidParams(
                "population_size must be at least 2".into(),
            ));
        }
        if self.iterations == 0 {
            return Err(SolveError::InvalidParams(
                "iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One point in the search space: a dense assignment and its fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub assignment: Vec<usize>,
    pub fitness: f64,
}

/// ChaCha8 stream for this seed. Stream 0 is the main loop; see the module
/// docs for the full split.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Shared fitness: engine objective plus `penalty` per violation. Feasible
/// candidates are timed under the instance's capacity mode; infeasible ones
/// under `Off` so their objective stays defined.
pub(crate) struct FitnessEval<'p, 'a> {
    pub prep: &'p Prepared<'a>,
    pub candidates: Vec<Vec<usize>>,
    pub penalty: f64,
    pub evals: u64,
}

impl<'p, 'a> FitnessEval<'p, 'a> {
    pub fn new(prep: &'p Prepared<'a>, params: &MhParams) -> Self {
        let candidates = candidate_nodes(prep, prep.instance.capacity_mode);
        let penalty = params
            .infeasibility_penalty
            .unwrap_or_else(|| default_penalty(prep));
        FitnessEval {
            prep,
            candidates,
            penalty,
            evals: 0,
        }
    }

    pub fn infeasible_task(&self) -> Option<&str> {
        self.candidates
            .iter()
            .position(|c| c.is_empty())
            .map(|t| self.prep.workflow.tasks[t].id.as_str())
    }

    pub fn violations(&self, assign: &[usize]) -> usize {
        let prep = self.prep;
        let mut count = 0;
        for t in 0..prep.task_count() {
            if prep.feature_feasible[t].binary_search(&assign[t]).is_err() {
                count += 1;
            }
        }
        match prep.instance.capacity_mode {
            CapacityMode::Off => {}
            CapacityMode::Concurrent => {
                for t in 0..prep.task_count() {
                    if !prep.fits_alone(t, assign[t]) {
                        count += 1;
                    }
                }
            }
            CapacityMode::Aggregate => {
                for (ni, node) in prep.instance.nodes.iter().enumerate() {
                    let mut sums = [0.0f64; 3];
                    for (t, task) in prep.workflow.tasks.iter().enumerate() {
                        if assign[t] == ni {
                            sums[0] += task.cores as f64;
                            sums[1] += task.memory;
                            sums[2] += task.data_out;
                        }
                    }
                    let caps = [node.cores as f64, node.memory, node.storage];
                    count += sums.iter().zip(&caps).filter(|(s, c)| s > c).count();
                }
            }
        }
        count
    }

    pub fn fitness(&mut self, assign: &[usize]) -> f64 {
        self.evals += 1;
        let violations = self.violations(assign);
        if violations == 0 {
            let raw = self.prep.simulate(assign, self.prep.instance.capacity_mode);
            let (_, objective) = self.prep.objective(assign, raw.makespan);
            objective
        } else {
            let raw = self.prep.simulate(assign, CapacityMode::Off);
            let (_, objective) = self.prep.objective(assign, raw.makespan);
            objective + self.penalty * violations as f64
        }
    }
}

/// `10 * (alpha * sum of per-task maximum usage + beta * serialized
/// makespan bound)`: larger than any feasible objective, so one violation
/// outweighs any quality difference.
fn default_penalty(prep: &Prepared<'_>) -> f64 {
    let inst = prep.instance;
    let max_usage: f64 = (0..prep.task_count())
        .map(|t| prep.usage[t].iter().copied().fold(0.0f64, f64::max))
        .sum();
    let min_rate = slowest_rate(inst);
    let mut serialized = prep.workflow.submission_time;
    for (t, task) in prep.workflow.tasks.iter().enumerate() {
        serialized += prep.durations[t].iter().copied().fold(0.0f64, f64::max);
        let out_degree = prep.preds.iter().filter(|preds| preds.contains(&t)).count();
        if min_rate > 0.0 {
            serialized += out_degree as f64 * task.data_out / min_rate;
        }
    }
    (10.0 * (inst.alpha * max_usage + inst.beta * serialized)).max(1.0)
}

fn slowest_rate(inst: &Instance) -> f64 {
    let n = inst.nodes.len();
    let mut slowest = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                slowest = slowest.min(inst.rate_between(a, b));
            }
        }
    }
    if slowest.is_finite() {
        slowest
    } else {
        0.0
    }
}

/// Builds the final result from the best feasible assignment found, or an
/// infeasible result when the budget produced none.
pub(crate) fn conclude(
    prep: &Prepared<'_>,
    technique: Technique,
    best_feasible: Option<Vec<usize>>,
    evals: u64,
    started: Instant,
) -> SolveResult {
    match best_feasible {
        None => SolveResult {
            technique,
            status: SolveStatus::Infeasible,
            schedule: None,
            assignment: None,
            objective: None,
            explored_nodes: evals,
            wall_time: started.elapsed(),
            note: Some("no feasible candidate found within the iteration budget".into()),
        },
        Some(assign) => {
            let raw = prep.simulate(&assign, prep.instance.capacity_mode);
            let schedule = prep.to_schedule(&assign, &raw);
            let objective = schedule.objective;
            let assignment: Assignment = prep
                .workflow
                .tasks
                .iter()
                .enumerate()
                .map(|(ti, t)| (t.id.clone(), prep.instance.nodes[assign[ti]].id.clone()))
                .collect();
            SolveResult {
                technique,
                status: SolveStatus::Feasible,
                schedule: Some(schedule),
                assignment: Some(assignment),
                objective: Some(objective),
                explored_nodes: evals,
                wall_time: started.elapsed(),
                note: None,
            }
        }
    }
}

/// Tracks the incumbent: best fitness ever seen and the best feasible
/// assignment (by objective) seen so far.
pub(crate) struct Incumbent {
    pub best_fitness: f64,
    pub best_feasible: Option<(Vec<usize>, f64)>,
    pub trace: Vec<f64>,
}

impl Incumbent {
    pub fn new() -> Self {
        Incumbent {
            best_fitness: f64::INFINITY,
            best_feasible: None,
            trace: Vec::new(),
        }
    }

    pub fn observe(&mut self, assign: &[usize], fitness: f64, feasible: bool) {
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
        }
        if feasible {
            let better = match &self.best_feasible {
                None => true,
                Some((_, obj)) => fitness < *obj,
            };
            if better {
                self.best_feasible = Some((assign.to_vec(), fitness));
            }
        }
    }

    pub fn mark_iteration(&mut self) {
        self.trace.push(self.best_fitness);
    }

    pub fn into_parts(self) -> (Option<Vec<usize>>, Vec<f64>) {
        (self.best_feasible.map(|(a, _)| a), self.trace)
    }
}
