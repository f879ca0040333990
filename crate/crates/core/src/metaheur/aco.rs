//! Ant colony optimization: a pheromone matrix over (task, feasible node)
//! slots guides ants that construct assignments in topological order with
//! probability proportional to `pheromone^a * (1/EFT)^b`, where the EFT is
//! probed against the ant's own partial timeline. Evaporation is global;
//! the global-best ant deposits a fixed amount on its trail each wave, which
//! keeps the pheromone dynamics independent of the objective's scale.

use std::time::Instant;

use rand::Rng;

use crate::engine::{Prepared, Timeline};
use crate::model::{Instance, Workflow};
use crate::solve::{SolveError, SolveResult, Technique};

use super::{conclude, rng_for, FitnessEval, Incumbent, MhParams};

const BEST_ANT_DEPOSIT: f64 = 1.0;

pub fn solve_aco(
    instance: &Instance,
    workflow: &Workflow,
    params: &MhParams,
) -> Result<SolveResult, SolveError> {
    solve_aco_traced(instance, workflow, params).map(|(result, _)| result)
}

pub(crate) fn solve_aco_traced(
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
            Technique::Aco,
            format!("task `{task}` has no feasible node"),
            started.elapsed(),
        );
        return Ok((result, Vec::new()));
    }

    let mode = instance.capacity_mode;
    let n_tasks = prep.task_count();
    let mut pheromone: Vec<Vec<f64>> = eval
        .candidates
        .iter()
        .map(|set| vec![1.0; set.len()])
        .collect();

    let mut incumbent = Incumbent::new();
    let mut best_trail: Option<(Vec<usize>, Vec<usize>, f64)> = None; // (slots, assignment, fitness)

    for wave in 0..params.iterations {
        for ant in 0..params.population_size {
            let stream = 1 + (wave as u64) * params.population_size as u64 + ant as u64;
            let mut rng = rng_for(params.seed, stream);
            let mut timeline = Timeline::new(&prep);
            let mut slots = vec![0usize; n_tasks];
            let mut assignment = vec![0usize; n_tasks];
            for &t in &prep.topo {
                let set = &eval.candidates[t];
                let mut weights = Vec::with_capacity(set.len());
                let mut total = 0.0;
                for (slot, &node) in set.iter().enumerate() {
                    let (_, finish) = timeline.probe(&prep, t, node, mode);
                    let eft = finish.max(1e-12);
                    let weight = pheromone[t][slot].powf(params.pheromone_exponent)
                        * eft.recip().powf(params.heuristic_exponent);
                    total += weight;
                    weights.push(weight);
                }
                let slot = if total > 0.0 && total.is_finite() {
                    let mut draw = rng.gen::<f64>() * total;
                    let mut chosen = set.len() - 1;
                    for (i, w) in weights.iter().enumerate() {
                        if draw < *w {
                            chosen = i;
                            break;
                        }
                        draw -= w;
                    }
                    chosen
                } else {
                    rng.gen_range(0..set.len())
                };
                slots[t] = slot;
                assignment[t] = set[slot];
                timeline.place(&prep, t, assignment[t], mode);
            }
            let fitness = eval.fitness(&assignment);
            incumbent.observe(&assignment, fitness, eval.violations(&assignment) == 0);
            let better = match &best_trail {
                None => true,
                Some((_, _, best)) => fitness < *best,
            };
            if better {
                best_trail = Some((slots, assignment, fitness));
            }
        }

        for row in &mut pheromone {
            for tau in row.iter_mut() {
                *tau *= 1.0 - params.evaporation_rate;
            }
        }
        if let Some((slots, _, _)) = &best_trail {
            for (t, &slot) in slots.iter().enumerate() {
                pheromone[t][slot] += BEST_ANT_DEPOSIT;
            }
        }
        incumbent.mark_iteration();
    }

    let evals = eval.evals;
    let (best, trace) = incumbent.into_parts();
    Ok((conclude(&prep, Technique::Aco, best, evals, started), trace))
}
