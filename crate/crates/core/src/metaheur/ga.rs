//! Genetic algorithm: tournament selection of size 2, uniform crossover,
//! per-gene mutation to a random feasible node, elitism of 1.

use std::time::Instant;

use rand::Rng;

use crate::engine::Prepared;
use crate::model::{Instance, Workflow};
use crate::solve::{SolveError, SolveResult, Technique};

use super::{conclude, rng_for, Candidate, FitnessEval, Incumbent, MhParams};

pub fn solve_ga(
    instance: &Instance,
    workflow: &Workflow,
    params: &MhParams,
) -> Result<SolveResult, SolveError> {
    solve_ga_traced(instance, workflow, params).map(|(result, _)| result)
}

pub(crate) fn solve_ga_traced(
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
            Technique::Ga,
            format!("task `{task}` has no feasible node"),
            started.elapsed(),
        );
        return Ok((result, Vec::new()));
    }

    let n_tasks = prep.task_count();
    let mut incumbent = Incumbent::new();

    // Stream 1 + i initializes member i.
    let mut population: Vec<Candidate> = (0..params.population_size)
        .map(|i| {
            let mut rng = rng_for(params.seed, 1 + i as u64);
            let assignment: Vec<usize> = (0..n_tasks)
                .map(|t| {
                    let set = &eval.candidates[t];
                    set[rng.gen_range(0..set.len())]
                })
                .collect();
            let fitness = eval.fitness(&assignment);
            incumbent.observe(&assignment, fitness, eval.violations(&assignment) == 0);
            Candidate { assignment, fitness }
        })
        .collect();

    let mut rng = rng_for(params.seed, 0);
    for _ in 0..params.iterations {
        let elite = population
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.fitness.total_cmp(&b.fitness).then(ia.cmp(ib)))
            .map(|(_, c)| c.clone())
            .expect("population is non-empty");

        let mut next = Vec::with_capacity(params.population_size);
        next.push(elite);
        while next.len() < params.population_size {
            let a = tournament(&population, &mut rng);
            let b = tournament(&population, &mut rng);
            let mut genes: Vec<usize> = if rng.gen_bool(params.crossover_rate) {
                (0..n_tasks)
                    .map(|t| {
                        if rng.gen_bool(0.5) {
                            population[a].assignment[t]
                        } else {
                            population[b].assignment[t]
                        }
                    })
                    .collect()
            } else {
                population[a].assignment.clone()
            };
            for (t, gene) in genes.iter_mut().enumerate() {
                if rng.gen_bool(params.mutation_rate) {
                    let set = &eval.candidates[t];
                    *gene = set[rng.gen_range(0..set.len())];
                }
            }
            let fitness = eval.fitness(&genes);
            incumbent.observe(&genes, fitness, eval.violations(&genes) == 0);
            next.push(Candidate {
                assignment: genes,
                fitness,
            });
        }
        population = next;
        incumbent.mark_iteration();
    }

    let evals = eval.evals;
    let (best, trace) = incumbent.into_parts();
    Ok((conclude(&prep, Technique::Ga, best, evals, started), trace))
}

/// Size-2 tournament; fitness ties keep the earlier index.
fn tournament(population: &[Candidate], rng: &mut impl Rng) -> usize {
    let a = rng.gen_range(0..population.len());
    let b = rng.gen_range(0..population.len());
    match population[a].fitness.total_cmp(&population[b].fitness) {
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => a.min(b),
        std::cmp::Ordering::Less => a,
    }
}
