//! Turns a task-to-node assignment into a timed schedule and evaluates the
//! weighted usage/makespan objective. This module is the single source of
//! truth for feasibility and timing; every solver evaluates candidates
//! through it.
//!
//! Timing follows earliest-start semantics: a task becomes ready once all
//! predecessors have finished and their output has been transferred (the
//! transfer term is zero when producer and consumer share a node), and under
//! concurrent capacity mode it additionally waits until its node has free
//! cores and memory. Tasks are placed in topological order with ties broken
//! by ascending task id.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{
    compute_duration, feature_feasible, resource_usage, validate_workflow, CapacityMode, Instance,
    ModelError, Resource, Schedule, ScheduleEntry, Workflow,
};

/// Total task-to-node map for one workflow (the binary x in dense form).
pub type Assignment = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Feature,
    Capacity,
    Dependency,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::Feature => write!(f, "feature"),
            ViolationKind::Capacity => write!(f, "capacity"),
            ViolationKind::Dependency => write!(f, "dependency"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub task_id: String,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Outcome of checking an assignment. `feasible` holds iff `violations` is
/// empty; violations are data, not errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        FeasibilityReport {
            feasible: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("assignment is infeasible: {}", summarize(&.0.violations))]
    InfeasibleAssignment(FeasibilityReport),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn summarize(violations: &[Violation]) -> String {
    let mut parts: Vec<String> = violations
        .iter()
        .take(3)
        .map(|v| format!("{} [{}] {}", v.task_id, v.kind, v.detail))
        .collect();
    if violations.len() > 3 {
        parts.push(format!("... and {} more", violations.len() - 3));
    }
    parts.join("; ")
}

/// An instance/workflow pair compiled to index form: topological order,
/// predecessor lists, per-(task, node) durations and usage figures, and
/// effective pairwise transfer rates. Solvers compile once and evaluate many
/// assignments against it.
pub struct Prepared<'a> {
    pub instance: &'a Instance,
    pub workflow: &'a Workflow,
    /// Task indices in topological order, ties by ascending task id.
    pub topo: Vec<usize>,
    pub preds: Vec<Vec<usize>>,
    /// `durations[task][node]` in seconds.
    pub durations: Vec<Vec<f64>>,
    /// `usage[task][node]` under the instance's usage mode.
    pub usage: Vec<Vec<f64>>,
    /// Node indices whose feature set covers the task's, ascending.
    pub feature_feasible: Vec<Vec<usize>>,
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a Instance, workflow: &'a Workflow) -> Result<Self, ModelError> {
        instance.validate()?;
        let order = validate_workflow(workflow)?;
        let index = workflow.task_index();
        let topo: Vec<usize> = order.iter().map(|id| index[id.as_str()]).collect();
        let preds: Vec<Vec<usize>> = workflow
            .tasks
            .iter()
            .map(|t| t.dependencies.iter().map(|d| index[d.as_str()]).collect())
            .collect();

        let n_nodes = instance.nodes.len();
        let mut durations = Vec::with_capacity(workflow.tasks.len());
        let mut usage = Vec::with_capacity(workflow.tasks.len());
        let mut feasible = Vec::with_capacity(workflow.tasks.len());
        for task in &workflow.tasks {
            let mut d_row = Vec::with_capacity(n_nodes);
            let mut u_row = Vec::with_capacity(n_nodes);
            let mut f_row = Vec::new();
            for (ni, node) in instance.nodes.iter().enumerate() {
                d_row.push(compute_duration(task, ni, node)?);
                u_row.push(resource_usage(task, node, &instance.nodes, instance.usage_mode)?);
                if feature_feasible(task, node) {
                    f_row.push(ni);
                }
            }
            durations.push(d_row);
            usage.push(u_row);
            feasible.push(f_row);
        }

        Ok(Prepared {
            instance,
            workflow,
            topo,
            preds,
            durations,
            usage,
            feature_feasible: feasible,
        })
    }

    pub fn task_count(&self) -> usize {
        self.workflow.tasks.len()
    }

    pub fn node_count(&self) -> usize {
        self.instance.nodes.len()
    }

    /// Transfer seconds for `producer`'s output moving from node `a` to `b`.
    pub fn transfer(&self, producer: usize, a: usize, b: usize) -> f64 {
        if a == b {
            0.0
        } else {
            self.workflow.tasks[producer].data_out / self.instance.rate_between(a, b)
        }
    }

    /// True iff the task alone fits the node's core, memory, and storage
    /// capacity.
    pub fn fits_alone(&self, task: usize, node: usize) -> bool {
        let t = &self.workflow.tasks[task];
        let n = &self.instance.nodes[node];
        t.cores as f64 <= n.cores as f64 && t.memory <= n.memory && t.data_out <= n.storage
    }

    /// Resolves a string-keyed assignment to a dense index vector; structural
    /// problems come back as dependency-kind violations.
    pub fn assignment_indices(&self, assignment: &Assignment) -> Result<Vec<usize>, Vec<Violation>> {
        let node_index: BTreeMap<&str, usize> = self
            .instance
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let mut out = vec![usize::MAX; self.task_count()];
        let mut violations = Vec::new();
        for (ti, task) in self.workflow.tasks.iter().enumerate() {
            match assignment.get(&task.id) {
                Some(node_id) => match node_index.get(node_id.as_str()) {
                    Some(&ni) => out[ti] = ni,
                    None => violations.push(Violation {
                        task_id: task.id.clone(),
                        kind: ViolationKind::Dependency,
                        detail: format!("assigned to unknown node `{node_id}`"),
                    }),
                },
                None => violations.push(Violation {
                    task_id: task.id.clone(),
                    kind: ViolationKind::Dependency,
                    detail: "not assigned to any node".into(),
                }),
            }
        }
        for task_id in assignment.keys() {
            if !self.workflow.tasks.iter().any(|t| &t.id == task_id) {
                violations.push(Violation {
                    task_id: task_id.clone(),
                    kind: ViolationKind::Dependency,
                    detail: "assignment names a task outside the workflow".into(),
                });
            }
        }
        if violations.is_empty() {
            Ok(out)
        } else {
            Err(violations)
        }
    }

    /// Feature and capacity checks for a dense assignment under the
    /// instance's capacity mode.
    pub fn check_indices(&self, assign: &[usize]) -> Vec<Violation> {
        let mut violations = Vec::new();
        for (ti, task) in self.workflow.tasks.iter().enumerate() {
            let ni = assign[ti];
            let node = &self.instance.nodes[ni];
            if !feature_feasible(task, node) {
                let missing: Vec<&String> = task.features.difference(&node.features).collect();
                violations.push(Violation {
                    task_id: task.id.clone(),
                    kind: ViolationKind::Feature,
                    detail: format!(
                        "node `{}` lacks feature(s) {}",
                        node.id,
                        missing
                            .iter()
                            .map(|s| s.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                });
            }
        }
        match self.instance.capacity_mode {
            CapacityMode::Off => {}
            CapacityMode::Concurrent => {
                // Tasks wait for free capacity at schedule time, so an
                // assignment is concurrent-feasible iff each task fits its
                // node on its own.
                for (ti, task) in self.workflow.tasks.iter().enumerate() {
                    let node = &self.instance.nodes[assign[ti]];
                    for resource in [Resource::Cores, Resource::Memory, Resource::Storage] {
                        if task.request(resource) > node.capacity(resource) {
                            violations.push(Violation {
                                task_id: task.id.clone(),
                                kind: ViolationKind::Capacity,
                                detail: format!(
                                    "{} request {} exceeds node `{}` capacity {}",
                                    resource,
                                    task.request(resource),
                                    node.id,
                                    node.capacity(resource)
                                ),
                            });
                        }
                    }
                }
            }
            CapacityMode::Aggregate => {
                for (ni, node) in self.instance.nodes.iter().enumerate() {
                    for resource in [Resource::Cores, Resource::Memory, Resource::Storage] {
                        let total: f64 = self
                            .workflow
                            .tasks
                            .iter()
                            .enumerate()
                            .filter(|(ti, _)| assign[*ti] == ni)
                            .map(|(_, t)| t.request(resource))
                            .sum();
                        if total > node.capacity(resource) {
                            for (ti, task) in self.workflow.tasks.iter().enumerate() {
                                if assign[ti] == ni && task.request(resource) > 0.0 {
                                    violations.push(Violation {
                                        task_id: task.id.clone(),
                                        kind: ViolationKind::Capacity,
                                        detail: format!(
                                            "aggregate {} on node `{}` is {} of {}",
                                            resource,
                                            node.id,
                                            total,
                                            node.capacity(resource)
                                        ),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        violations
    }

    /// Schedules a dense assignment under `capacity` and returns raw times.
    /// With `CapacityMode::Concurrent` the caller must have verified that
    /// every task fits its node alone.
    pub fn simulate(&self, assign: &[usize], capacity: CapacityMode) -> RawSchedule {
        let mut timeline = Timeline::new(self);
        for &t in &self.topo {
            timeline.place(self, t, assign[t], capacity);
        }
        timeline.into_raw()
    }

    /// Total usage (summed in task order) and the objective value for a dense
    /// assignment with known makespan.
    pub fn objective(&self, assign: &[usize], makespan: f64) -> (f64, f64) {
        let mut total = 0.0;
        for (ti, &ni) in assign.iter().enumerate() {
            total += self.usage[ti][ni];
        }
        let objective = self.instance.alpha * total + self.instance.beta * makespan;
        (total, objective)
    }

    /// Assembles the public `Schedule` for a dense assignment and raw times.
    pub fn to_schedule(&self, assign: &[usize], raw: &RawSchedule) -> Schedule {
        let entries: Vec<ScheduleEntry> = self
            .workflow
            .tasks
            .iter()
            .enumerate()
            .map(|(ti, task)| ScheduleEntry {
                task_id: task.id.clone(),
                node_id: self.instance.nodes[assign[ti]].id.clone(),
                start: raw.start[ti],
                finish: raw.finish[ti],
                usage: self.usage[ti][assign[ti]],
            })
            .collect();
        let (total_usage, objective) = self.objective(assign, raw.makespan);
        Schedule {
            entries,
            makespan: raw.makespan,
            total_usage,
            objective,
        }
    }

}

/// Start/finish times from a simulation, indexed by task.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSchedule {
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    pub makespan: f64,
}

/// Incremental scheduling state: finish times of placed tasks plus per-node
/// occupancy intervals. The exact solver pushes and pops placements during
/// search; `Prepared::simulate` drives it straight through.
#[derive(Debug, Clone)]
pub struct Timeline {
    start: Vec<f64>,
    finish: Vec<f64>,
    placed: Vec<bool>,
    node_assignment: Vec<usize>,
    /// Per node: (start, finish, cores, memory) of placed tasks.
    occupancy: Vec<Vec<(f64, f64, f64, f64)>>,
}

impl Timeline {
    pub fn new(prep: &Prepared<'_>) -> Self {
        Timeline {
            start: vec![0.0; prep.task_count()],
            finish: vec![0.0; prep.task_count()],
            placed: vec![false; prep.task_count()],
            node_assignment: vec![usize::MAX; prep.task_count()],
            occupancy: vec![Vec::new(); prep.node_count()],
        }
    }

    pub fn start_of(&self, task: usize) -> f64 {
        self.start[task]
    }

    pub fn finish_of(&self, task: usize) -> f64 {
        self.finish[task]
    }

    pub fn is_placed(&self, task: usize) -> bool {
        self.placed[task]
    }

    /// Earliest time the task is ready on `node`: all placed predecessors
    /// finished and their data transferred in. Unplaced predecessors
    /// contribute nothing; callers place in topological order to avoid that.
    pub fn ready_time(&self, prep: &Prepared<'_>, task: usize, node: usize) -> f64 {
        let mut ready = prep.workflow.submission_time;
        for &p in &prep.preds[task] {
            if self.placed[p] {
                // Transfer is charged from the predecessor's placed node.
                let p_node = self.node_assignment[p];
                ready = ready.max(self.finish[p] + prep.transfer(p, p_node, node));
            }
        }
        ready
    }

    /// Computes (start, finish) for placing `task` on `node` without
    /// committing to it.
    pub fn probe(
        &self,
        prep: &Prepared<'_>,
        task: usize,
        node: usize,
        capacity: CapacityMode,
    ) -> (f64, f64) {
        let ready = self.ready_time(prep, task, node);
        let duration = prep.durations[task][node];
        let start = match capacity {
            CapacityMode::Concurrent => self.earliest_fit(prep, task, node, ready, duration),
            _ => ready,
        };
        (start, start + duration)
    }

    /// Places the task and returns its (start, finish).
    pub fn place(
        &mut self,
        prep: &Prepared<'_>,
        task: usize,
        node: usize,
        capacity: CapacityMode,
    ) -> (f64, f64) {
        let (start, finish) = self.probe(prep, task, node, capacity);
        self.start[task] = start;
        self.finish[task] = finish;
        self.placed[task] = true;
        self.node_assignment[task] = node;
        let t = &prep.workflow.tasks[task];
        self.occupancy[node].push((start, finish, t.cores as f64, t.memory));
        (start, finish)
    }

    /// Reverts the most recent `place` of this task on this node.
    pub fn unplace(&mut self, task: usize, node: usize) {
        self.placed[task] = false;
        self.occupancy[node].pop();
    }

    /// Earliest start at or after `ready` where the node has spare cores and
    /// memory for the whole `[start, start + duration)` window. Candidate
    /// times are `ready` and the finish times of already-placed tasks on the
    /// node; a zero-length window never conflicts.
    fn earliest_fit(
        &self,
        prep: &Prepared<'_>,
        task: usize,
        node: usize,
        ready: f64,
        duration: f64,
    ) -> f64 {
        let t = &prep.workflow.tasks[task];
        let n = &prep.instance.nodes[node];
        let need_cores = t.cores as f64;
        let need_mem = t.memory;
        let cap_cores = n.cores as f64;
        let cap_mem = n.memory;

        let mut candidates: Vec<f64> = self.occupancy[node]
            .iter()
            .map(|&(_, f, _, _)| f)
            .filter(|&f| f > ready)
            .collect();
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        candidates.insert(0, ready);

        for &cand in &candidates {
            let end = cand + duration;
            let mut used_cores = 0.0;
            let mut used_mem = 0.0;
            for &(s, f, c, m) in &self.occupancy[node] {
                if s < end && f > cand {
                    used_cores += c;
                    used_mem += m;
                }
            }
            if used_cores + need_cores <= cap_cores && used_mem + need_mem <= cap_mem {
                return cand;
            }
        }
        // Unreachable when the task fits the node alone: the last candidate
        // is the latest finish, where nothing overlaps.
        *candidates.last().expect("candidate list is never empty")
    }

    pub fn into_raw(self) -> RawSchedule {
        let makespan = self
            .finish
            .iter()
            .zip(&self.placed)
            .filter(|(_, &p)| p)
            .map(|(f, _)| *f)
            .fold(0.0, f64::max);
        RawSchedule {
            start: self.start,
            finish: self.finish,
            makespan,
        }
    }
}

/// Checks an assignment against the workflow and instance. Structural
/// problems (cycles, unknown dependencies, unmapped tasks) surface as
/// dependency-kind violations; features and capacity follow the instance's
/// capacity mode.
pub fn check_feasibility(
    assignment: &Assignment,
    workflow: &Workflow,
    instance: &Instance,
) -> FeasibilityReport {
    if let Err(err) = instance.validate() {
        return FeasibilityReport::from_violations(vec![Violation {
            task_id: String::new(),
            kind: ViolationKind::Dependency,
            detail: err.to_string(),
        }]);
    }
    if let Err(err) = validate_workflow(workflow) {
        return FeasibilityReport::from_violations(vec![Violation {
            task_id: match &err {
                ModelError::CycleDetected(ids) => ids.first().cloned().unwrap_or_default(),
                ModelError::UnknownDependency { task, .. } => task.clone(),
                ModelError::DuplicateTaskId(id) => id.clone(),
                _ => String::new(),
            },
            kind: ViolationKind::Dependency,
            detail: err.to_string(),
        }]);
    }
    // Durations are irrelevant to feasibility; fill any gaps so Prepared
    // can be built for the index machinery.
    let mut wf = workflow.clone();
    for task in &mut wf.tasks {
        if task.duration.is_none() {
            task.duration = Some(crate::model::DurationSpec::Uniform(0.0));
        }
        if let Some(crate::model::DurationSpec::PerNode(list)) = &mut task.duration {
            list.resize(instance.nodes.len(), 0.0);
        }
    }
    let prep = match Prepared::new(instance, &wf) {
        Ok(p) => p,
        Err(err) => {
            return FeasibilityReport::from_violations(vec![Violation {
                task_id: String::new(),
                kind: ViolationKind::Dependency,
                detail: err.to_string(),
            }])
        }
    };
    match prep.assignment_indices(assignment) {
        Ok(assign) => FeasibilityReport::from_violations(prep.check_indices(&assign)),
        Err(violations) => FeasibilityReport::from_violations(violations),
    }
}

/// Builds the earliest-start schedule for a feasible assignment.
///
/// Under `CapacityMode::Off` constraint enforcement is disabled: feature and
/// capacity violations are still reported by [`check_feasibility`] but do not
/// prevent scheduling, which lets literal externally-given placements be
/// timed as-is. Structural problems (unmapped tasks, unknown nodes, broken
/// DAGs) always prevent scheduling.
pub fn build_schedule(
    assignment: &Assignment,
    workflow: &Workflow,
    instance: &Instance,
) -> Result<Schedule, EngineError> {
    let report = check_feasibility(assignment, workflow, instance);
    let blocking = report.violations.iter().any(|v| match v.kind {
        ViolationKind::Dependency => true,
        ViolationKind::Feature | ViolationKind::Capacity => {
            instance.capacity_mode != CapacityMode::Off
        }
    });
    if blocking {
        return Err(EngineError::InfeasibleAssignment(report));
    }
    let prep = Prepared::new(instance, workflow)?;
    let assign = prep
        .assignment_indices(assignment)
        .map_err(|v| EngineError::InfeasibleAssignment(FeasibilityReport::from_violations(v)))?;
    let raw = prep.simulate(&assign, instance.capacity_mode);
    Ok(prep.to_schedule(&assign, &raw))
}

/// `alpha * total usage + beta * makespan` for an existing schedule.
pub fn evaluate_objective(schedule: &Schedule, instance: &Instance) -> f64 {
    let usage: f64 = schedule.entries.iter().map(|e| e.usage).sum();
    instance.alpha * usage + instance.beta * schedule.makespan
}
