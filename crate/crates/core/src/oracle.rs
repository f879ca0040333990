//! Brute-force reference solver used to cross-check the exact solver.
//!
//! Everything here is deliberately re-implemented from first principles —
//! its own topological order, its own feasibility filter, its own timing —
//! and shares no scheduling code with the evaluation engine, so agreement
//! between the two is evidence rather than tautology. The timing policy it
//! realizes is the same documented one: earliest start after all
//! predecessors finish and transfer their data (zero transfer when
//! co-located), and under concurrent capacity the earliest candidate time at
//! which the node has spare cores and memory, candidates being the ready
//! time and the finish times of tasks already placed on the node.
//!
//! It lives in the shipped library rather than test code so the CLI can
//! offer `--technique brute` for user-verifiable optimality claims on small
//! instances.

use std::time::Instant;

use crate::model::{CapacityMode, Instance, Schedule, ScheduleEntry, UsageMode, Workflow};
use crate::solve::{SolveError, SolveResult, SolveStatus, Technique};

const ENUMERATION_LIMIT: f64 = 1e6;

/// Enumerates every total assignment, filters infeasible ones, and returns
/// the global minimum objective. Guarded to `nodes^tasks <= 1e6`.
pub fn brute_force_optimum(
    instance: &Instance,
    workflow: &Workflow,
) -> Result<SolveResult, SolveError> {
    let started = Instant::now();
    instance.validate()?;
    let n_tasks = workflow.tasks.len();
    let n_nodes = instance.nodes.len();

    let combinations = (n_nodes as f64).powi(n_tasks as i32);
    if combinations > ENUMERATION_LIMIT {
        return Err(SolveError::TooLarge {
            combinations,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n_tasks > 0 && n_nodes == 0 {
        return Ok(SolveResult::infeasible(
            Technique::Brute,
            "cluster has no nodes".into(),
            started.elapsed(),
        ));
    }

    let order = topo_order(workflow)?;
    let pred_lists: Vec<Vec<usize>> = workflow
        .tasks
        .iter()
        .map(|t| {
            t.dependencies
                .iter()
                .map(|d| workflow.tasks.iter().position(|x| &x.id == d).unwrap())
                .collect()
        })
        .collect();

    let mut best: Option<(Vec<usize>, Vec<f64>, Vec<f64>, f64, f64)> = None;
    let mut assign = vec![0usize; n_tasks];
    let mut explored = 0u64;
    loop {
        explored += 1;
        if feasible(instance, workflow, &assign) {
            let (start, finish) = simulate(instance, workflow, &order, &pred_lists, &assign);
            let makespan = finish.iter().copied().fold(0.0, f64::max);
            let mut usage_total = 0.0;
            for (ti, &ni) in assign.iter().enumerate() {
                usage_total += usage_of(instance, workflow, ti, ni);
            }
            let objective = instance.alpha * usage_total + instance.beta * makespan;
            let better = match &best {
                None => true,
                Some((_, _, _, _, incumbent)) => objective < *incumbent,
            };
            if better {
                best = Some((assign.clone(), start, finish, usage_total, objective));
            }
        }
        // Odometer in lexicographic order: the first task in topological
        // order is the most significant digit, so the first minimum found is
        // the lexicographically smallest optimum.
        let mut pos = n_tasks;
        loop {
            if pos == 0 {
                break;
            }
            let digit = order[pos - 1];
            assign[digit] += 1;
            if assign[digit] < n_nodes {
                break;
            }
            assign[digit] = 0;
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
    }

    match best {
        None => Ok(SolveResult::infeasible(
            Technique::Brute,
            "no feasible total assignment exists".into(),
            started.elapsed(),
        )),
        Some((assign, start, finish, usage_total, objective)) => {
            let entries: Vec<ScheduleEntry> = workflow
                .tasks
                .iter()
                .enumerate()
                .map(|(ti, task)| ScheduleEntry {
                    task_id: task.id.clone(),
                    node_id: instance.nodes[assign[ti]].id.clone(),
                    start: start[ti],
                    finish: finish[ti],
                    usage: usage_of(instance, workflow, ti, assign[ti]),
                })
                .collect();
            let makespan = finish.iter().copied().fold(0.0, f64::max);
            let schedule = Schedule {
                entries,
                makespan,
                total_usage: usage_total,
                objective,
            };
            let assignment = workflow
                .tasks
                .iter()
                .enumerate()
                .map(|(ti, t)| (t.id.clone(), instance.nodes[assign[ti]].id.clone()))
                .collect();
            Ok(SolveResult {
                technique: Technique::Brute,
                status: SolveStatus::Optimal,
                schedule: Some(schedule),
                assignment: Some(assignment),
                objective: Some(objective),
                explored_nodes: explored,
                wall_time: started.elapsed(),
                note: None,
            })
        }
    }
}

/// Naive repeated-scan topological sort, smallest ready id first.
fn topo_order(workflow: &Workflow) -> Result<Vec<usize>, SolveError> {
    let n = workflow.tasks.len();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let mut pick: Option<usize> = None;
        for (i, task) in workflow.tasks.iter().enumerate() {
            if done[i] {
                continue;
            }
            let ready = task.dependencies.iter().all(|d| {
                workflow
                    .tasks
                    .iter()
                    .position(|x| &x.id == d)
                    .map(|j| done[j])
                    .unwrap_or(false)
            });
            if ready {
                pick = match pick {
                    None => Some(i),
                    Some(p) if workflow.tasks[i].id < workflow.tasks[p].id => Some(i),
                    keep => keep,
                };
            }
        }
        match pick {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                return Err(SolveError::Model(crate::model::ModelError::CycleDetected(
                    workflow
                        .tasks
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !done[*i])
                        .map(|(_, t)| t.id.clone())
                        .collect(),
                )))
            }
        }
    }
    Ok(order)
}

/// Feature subset check plus the capacity rule of the instance's mode.
fn feasible(instance: &Instance, workflow: &Workflow, assign: &[usize]) -> bool {
    for (ti, task) in workflow.tasks.iter().enumerate() {
        let node = &instance.nodes[assign[ti]];
        for feature in &task.features {
            if !node.features.contains(feature) {
                return false;
            }
        }
    }
    match instance.capacity_mode {
        CapacityMode::Off => true,
        CapacityMode::Concurrent => workflow.tasks.iter().enumerate().all(|(ti, task)| {
            let node = &instance.nodes[assign[ti]];
            task.cores <= node.cores && task.memory <= node.memory && task.data_out <= node.storage
        }),
        CapacityMode::Aggregate => instance.nodes.iter().enumerate().all(|(ni, node)| {
            let mut cores = 0.0;
            let mut memory = 0.0;
            let mut storage = 0.0;
            for (ti, task) in workflow.tasks.iter().enumerate() {
                if assign[ti] == ni {
                    cores += task.cores as f64;
                    memory += task.memory;
                    storage += task.data_out;
                }
            }
            cores <= node.cores as f64 && memory <= node.memory && storage <= node.storage
        }),
    }
}

fn duration_of(instance: &Instance, workflow: &Workflow, task: usize, node: usize) -> f64 {
    use crate::model::DurationSpec;
    match workflow.tasks[task].duration.as_ref() {
        Some(DurationSpec::PerNode(list)) => list[node],
        Some(DurationSpec::Uniform(secs)) => *secs,
        Some(DurationSpec::Work(work)) => work / instance.nodes[node].processing_speed,
        None => f64::NAN,
    }
}

fn usage_of(instance: &Instance, workflow: &Workflow, task: usize, node: usize) -> f64 {
    let cores = workflow.tasks[task].cores as f64;
    match instance.usage_mode {
        UsageMode::Requested => cores,
        UsageMode::Scaled => {
            let total: f64 = instance.nodes.iter().map(|n| n.cores as f64).sum();
            cores * (instance.nodes[node].cores as f64 / total)
        }
    }
}

fn rate_of(instance: &Instance, a: usize, b: usize) -> f64 {
    match &instance.pairwise_dtr {
        Some(matrix) => matrix[a][b],
        None => instance.nodes[a]
            .data_transfer_rate
            .min(instance.nodes[b].data_transfer_rate),
    }
}

/// Walks the tasks in topological order computing start/finish times per the
/// documented policy; ready times come from a direct per-edge pass over the
/// predecessor lists.
fn simulate(
    instance: &Instance,
    workflow: &Workflow,
    order: &[usize],
    preds: &[Vec<usize>],
    assign: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let n = workflow.tasks.len();
    let mut start = vec![0.0; n];
    let mut finish = vec![0.0; n];
    // Per node: (start, finish, cores, memory) of tasks placed so far.
    let mut busy: Vec<Vec<(f64, f64, f64, f64)>> = vec![Vec::new(); instance.nodes.len()];

    for &t in order {
        let node = assign[t];
        let mut ready = workflow.submission_time;
        for &p in &preds[t] {
            let transfer = if assign[p] == node {
                0.0
            } else {
                workflow.tasks[p].data_out / rate_of(instance, assign[p], node)
            };
            ready = ready.max(finish[p] + transfer);
        }
        let duration = duration_of(instance, workflow, t, node);
        let s = match instance.capacity_mode {
            CapacityMode::Concurrent => {
                let need_cores = workflow.tasks[t].cores as f64;
                let need_mem = workflow.tasks[t].memory;
                let cap_cores = instance.nodes[node].cores as f64;
                let cap_mem = instance.nodes[node].memory;
                let mut candidates: Vec<f64> = busy[node]
                    .iter()
                    .map(|&(_, f, _, _)| f)
                    .filter(|&f| f > ready)
                    .collect();
                candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
                candidates.insert(0, ready);
                let mut chosen = *candidates.last().unwrap();
                for &cand in &candidates {
                    let end = cand + duration;
                    let mut used_cores = 0.0;
                    let mut used_mem = 0.0;
                    for &(s, f, c, m) in &busy[node] {
                        if s < end && f > cand {
                            used_cores += c;
                            used_mem += m;
                        }
                    }
                    if used_cores + need_cores <= cap_cores && used_mem + need_mem <= cap_mem {
                        chosen = cand;
                        break;
                    }
                }
                chosen
            }
            _ => ready,
        };
        start[t] = s;
        finish[t] = s + duration;
        busy[node].push((
            s,
            finish[t],
            workflow.tasks[t].cores as f64,
            workflow.tasks[t].memory,
        ));
    }
    (start, finish)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DurationSpec, Node, Task};
    use crate::testutil::{mri_instance, mri_w1};

    #[test]
    fn w1_optimum_matches_paper_totals() {
        let inst = mri_instance();
        let result = brute_force_optimum(&inst, &mri_w1()).unwrap();
        assert_eq!(result.status, SolveStatus::Optimal);
        let schedule = result.schedule.unwrap();
        assert_eq!(schedule.makespan, 10.0);
        assert_eq!(schedule.total_usage, 32.0);
        assert_eq!(result.objective.unwrap(), 42.0);
    }

    #[test]
    fn single_task_single_node() {
        let node = Node {
            id: "N1".into(),
            cores: 4,
            memory: f64::INFINITY,
            storage: f64::INFINITY,
            features: Default::default(),
            processing_speed: 2.0,
            data_transfer_rate: 10.0,
        };
        let wf = Workflow {
            id: "W".into(),
            tasks: vec![Task {
                id: "T1".into(),
                cores: 1,
                memory: 0.0,
                data_out: 0.0,
                features: Default::default(),
                duration: Some(DurationSpec::Work(8.0)),
                dependencies: vec![],
            }],
            submission_time: 0.0,
        };
        let inst = Instance::new(vec![node], vec![wf.clone()]);
        let result = brute_force_optimum(&inst, &wf).unwrap();
        assert_eq!(result.explored_nodes, 1);
        assert_eq!(result.schedule.unwrap().makespan, 4.0);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let nodes: Vec<Node> = (0..10)
            .map(|i| Node {
                id: format!("N{i}"),
                cores: 4,
                memory: f64::INFINITY,
                storage: f64::INFINITY,
                features: Default::default(),
                processing_speed: 1.0,
                data_transfer_rate: 10.0,
            })
            .collect();
        let tasks: Vec<Task> = (0..7)
            .map(|i| Task {
                id: format!("T{i}"),
                cores: 1,
                memory: 0.0,
                data_out: 0.0,
                features: Default::default(),
                duration: Some(DurationSpec::Uniform(1.0)),
                dependencies: vec![],
            })
            .collect();
        let wf = Workflow {
            id: "big".into(),
            tasks,
            submission_time: 0.0,
        };
        let inst = Instance::new(nodes, vec![wf.clone()]);
        assert!(matches!(
            brute_force_optimum(&inst, &wf),
            Err(SolveError::TooLarge { .. })
        ));
    }

    #[test]
    fn infeasible_when_no_node_has_features() {
        let inst = mri_instance();
        let wf = Workflow {
            id: "W".into(),
            tasks: vec![Task {
                id: "T1".into(),
                cores: 1,
                memory: 0.0,
                data_out: 0.0,
                features: ["F9".to_string()].into_iter().collect(),
                duration: Some(DurationSpec::Uniform(1.0)),
                dependencies: vec![],
            }],
            submission_time: 0.0,
        };
        let result = brute_force_optimum(&inst, &wf).unwrap();
        assert_eq!(result.status, SolveStatus::Infeasible);
        assert!(result.schedule.is_none());
    }
}
