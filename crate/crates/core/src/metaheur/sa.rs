//! Simulated annealing from the OLB starting point: one uniformly chosen
//! task is reassigned to a random feasible node per step, accepted by the
//! Metropolis rule under geometric cooling.
//!
//! The effective starting temperature is `initial_temperature` times the
//! beta-weighted makespan of the OLB schedule, so acceptance behavior does
//! not depend on the instance's absolute time scale.

use std::time::Instant;

use rand::Rng;

use crate::engine::Prepared;
use crate::heuristics::solve_olb;
use crate::model::{Instance, Workflow};
use crate::solve::{SolveError, SolveResult, SolveStatus, Technique};

use super::{conclude, rng_for, FitnessEval, Incumbent, MhParams};

pub fn solve_sa(
    instance: &Instance,
    workflow: &Workflow,
    params: &MhParams,
) -> Result<SolveResult, SolveError> {
    solve_sa_traced(instance, workflow, params).map(|(result, _)| result)
}

pub(crate) fn solve_sa_traced(
    instance: &Instance,
    workflow: &Workflow,
    params: &MhParams,
) -> Result<(SolveResult, Vec<f64>), SolveError> {
    params.validate()?;
    let started = Instant::now();
    let prep = Prepared::new(instance, workflow)?;
    let mut eval = FitnessEval::new(&prep, params);
    if let Some(task) = eval.infeasible_task() {
        let result = SolveResult::infeasible(
            Technique::Sa,
            format!("task `{task}` has no feasible node"),
            started.elapsed(),
        );
        return Ok((result, Vec::new()));
    }

    let olb = solve_olb(instance, workflow)?;
    if olb.status == SolveStatus::Infeasible {
        let mut result = olb;
        result.technique = Technique::Sa;
        return Ok((result, Vec::new()));
    }
    let node_index: std::collections::BTreeMap<&str, usize> = instance
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let start_assignment = olb.assignment.expect("feasible OLB carries an assignment");
    let mut current: Vec<usize> = workflow
        .tasks
        .iter()
        .map(|t| node_index[start_assignment[&t.id].as_str()])
        .collect();

    let mut incumbent = Incumbent::new();
    let mut current_fitness = eval.fitness(&current);
    incumbent.observe(&current, current_fitness, eval.violations(&current) == 0);

    let start_makespan = olb
        .schedule
        .as_ref()
        .map(|s| s.makespan)
        .unwrap_or_default();
    let scale = instance.beta * start_makespan;
    let mut temperature = if scale > 0.0 {
        params.initial_temperature * scale
    } else {
        params.initial_temperature
    };

    let n_tasks = prep.task_count();
    let mut rng = rng_for(params.seed, 0);
    for _ in 0..params.iterations {
        let task = rng.gen_range(0..n_tasks);
        let set = &eval.candidates[task];
        let node = set[rng.gen_range(0..set.len())];
        let previous = current[task];
        current[task] = node;
        let fitness = eval.fitness(&current);
        let delta = fitness - current_fitness;
        let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp();
        if accept {
            incumbent.observe(&current, fitness, eval.violations(&current) == 0);
            current_fitness = fitness;
        } else {
            current[task] = previous;
        }
        temperature *= params.cooling_rate;
        incumbent.mark_iteration();
    }

    let evals = eval.evals;
    let (best, trace) = incumbent.into_parts();
    Ok((conclude(&prep, Technique::Sa, best, evals, started), trace))
}
