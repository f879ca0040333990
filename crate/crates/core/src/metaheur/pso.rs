//! Particle swarm over a random-key encoding: each particle carries one
//! continuous key per (task, feasible node) slot and decodes by argmax over
//! the task's feasible set, ties to the lowest node id. Positions and
//! velocities follow the standard inertia/cognitive/social update against
//! per-particle and global bests.

use std::time::Instant;

use rand::Rng;

use crate::engine::Prepared;
use crate::model::{Instance, Workflow};
use crate::solve::{SolveError, SolveResult, Technique};

use super::{conclude, rng_for, FitnessEval, Incumbent, MhParams};

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_fitness: f64,
}

pub fn solve_pso(
    instance: &Instance,
    workflow: &Workflow,
    params: &MhParams,
) -> Result<SolveResult, SolveError> {
    solve_pso_traced(instance, workflow, params).map(|(result, _)| result)
}

pub(crate) fn solve_pso_traced(
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
            Technique::Pso,
            format!("task `{task}` has no feasible node"),
            started.elapsed(),
        );
        return Ok((result, Vec::new()));
    }

    // Flattened key layout: offsets[t] .. offsets[t] + |candidates[t]|.
    let offsets: Vec<usize> = eval
        .candidates
        .iter()
        .scan(0usize, |acc, set| {
            let here = *acc;
            *acc += set.len();
            Some(here)
        })
        .collect();
    let dims = offsets.last().copied().unwrap_or(0)
        + eval.candidates.last().map(|s| s.len()).unwrap_or(0);

    let decode = |position: &[f64], eval: &FitnessEval<'_, '_>| -> Vec<usize> {
        eval.candidates
            .iter()
            .enumerate()
            .map(|(t, set)| {
                let keys = &position[offsets[t]..offsets[t] + set.len()];
                let mut best = 0usize;
                for (i, &k) in keys.iter().enumerate() {
                    if k > keys[best] {
                        best = i;
                    }
                }
                set[best]
            })
            .collect()
    };

    let mut incumbent = Incumbent::new();
    let mut global_best_position: Vec<f64> = Vec::new();
    let mut global_best_fitness = f64::INFINITY;

    // Stream 1 + i initializes particle i.
    let mut particles: Vec<Particle> = (0..params.population_size)
        .map(|i| {
            let mut rng = rng_for(params.seed, 1 + i as u64);
            let position: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
            let velocity: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>() - 0.5).collect();
            let assignment = decode(&position, &eval);
            let fitness = eval.fitness(&assignment);
            incumbent.observe(&assignment, fitness, eval.violations(&assignment) == 0);
            if fitness < global_best_fitness {
                global_best_fitness = fitness;
                global_best_position = position.clone();
            }
            Particle {
                best_position: position.clone(),
                best_fitness: fitness,
                position,
                velocity,
            }
        })
        .collect();

    let mut rng = rng_for(params.seed, 0);
    for _ in 0..params.iterations {
        for particle in &mut particles {
            for d in 0..dims {
                let r1 = rng.gen::<f64>();
                let r2 = rng.gen::<f64>();
                particle.velocity[d] = params.inertia * particle.velocity[d]
                    + params.cognitive * r1 * (particle.best_position[d] - particle.position[d])
                    + params.social * r2 * (global_best_position[d] - particle.position[d]);
                particle.position[d] += particle.velocity[d];
            }
            let assignment = decode(&particle.position, &eval);
            let fitness = eval.fitness(&assignment);
            incumbent.observe(&assignment, fitness, eval.violations(&assignment) == 0);
            if fitness < particle.best_fitness {
                particle.best_fitness = fitness;
                particle.best_position = particle.position.clone();
            }
            if fitness < global_best_fitness {
                global_best_fitness = fitness;
                global_best_position = particle.position.clone();
            }
        }
        incumbent.mark_iteration();
    }

    let evals = eval.evals;
    let (best, trace) = incumbent.into_parts();
    Ok((conclude(&prep, Technique::Pso, best, evals, started), trace))
}
