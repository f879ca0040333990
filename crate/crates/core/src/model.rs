//! Domain types for clusters and workflows, plus the elementary formulas
//! (allocation ratio, duration, transfer time, resource usage) every solver
//! consumes.
//!
//! Units are fixed throughout the crate: seconds for time, GB for data and
//! storage, GiB for memory, integer cores, GB/s for transfer rates, and
//! abstract work-units per second for processing speed.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use thiserror::Error;

/// Resource dimensions a task can request from a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Cores,
    Memory,
    Storage,
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Cores => write!(f, "cores"),
            Resource::Memory => write!(f, "memory"),
            Resource::Storage => write!(f, "storage"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dependency cycle involving: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("task `{task}` depends on unknown task `{dependency}`")]
    UnknownDependency { task: String, dependency: String },
    #[error("duplicate task id `{0}`")]
    DuplicateTaskId(String),
    #[error("node `{node}` has zero {resource} capacity but the request is positive")]
    ZeroCapacity { node: String, resource: Resource },
    #[error("task `{0}` has neither explicit durations nor a work amount")]
    MissingDuration(String),
    #[error("task `{task}` lists {got} durations but the cluster has {expected} nodes")]
    DurationCount {
        task: String,
        expected: usize,
        got: usize,
    },
    #[error("cluster has zero total {0} capacity in scaled usage mode")]
    ZeroTotalCapacity(Resource),
    #[error("objective weights must satisfy alpha >= 0, beta >= 0, alpha + beta > 0")]
    DegenerateWeights,
    #[error("node `{node}`: {message}")]
    InvalidNode { node: String, message: String },
}

/// A compute resource: capacities, feature tags, and performance properties.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Core count.
    pub cores: u64,
    /// Memory capacity in GiB; `f64::INFINITY` when the cluster file declares
    /// no limit.
    pub memory: f64,
    /// Storage capacity in GB; `f64::INFINITY` when undeclared.
    pub storage: f64,
    /// Feature tags such as `F1`..`F8` (ISA, memory type, interconnect).
    pub features: std::collections::BTreeSet<String>,
    /// Abstract work-units per second; divides task work amounts.
    pub processing_speed: f64,
    /// Data transfer rate in GB/s.
    pub data_transfer_rate: f64,
}

impl Node {
    pub fn capacity(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Cores => self.cores as f64,
            Resource::Memory => self.memory,
            Resource::Storage => self.storage,
        }
    }
}

/// How a task's running time on a node is determined.
#[derive(Debug, Clone, PartialEq)]
pub enum DurationSpec {
    /// Explicit seconds per node, in canonical (ascending id) node order.
    PerNode(Vec<f64>),
    /// The same explicit seconds on every node.
    Uniform(f64),
    /// Abstract work-units, divided by the node's processing speed.
    Work(f64),
}

/// A workflow step: resource requests, feature requirements, produced data,
/// and predecessor dependencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub cores: u64,
    /// Requested memory in GiB.
    pub memory: f64,
    /// Size of produced data in GB; doubles as the storage request.
    pub data_out: f64,
    pub features: std::collections::BTreeSet<String>,
    pub duration: Option<DurationSpec>,
    /// Ids of predecessor tasks in the same workflow.
    pub dependencies: Vec<String>,
}

impl Task {
    pub fn request(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Cores => self.cores as f64,
            Resource::Memory => self.memory,
            Resource::Storage => self.data_out,
        }
    }
}

/// A validated DAG of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    pub id: String,
    pub tasks: Vec<Task>,
    /// Offsets all start times; carried for completeness and otherwise inert.
    pub submission_time: f64,
}

impl Workflow {
    /// Map from task id to index in `tasks`.
    pub fn task_index(&self) -> BTreeMap<&str, usize> {
        self.tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect()
    }
}

/// Which usage figure enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UsageMode {
    /// U equals the task's core request, independent of placement.
    Requested,
    /// U is weighted by the node's share of total cluster cores.
    Scaled,
}

/// How node resource limits are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityMode {
    /// Time-overlapping tasks on a node may not exceed its capacity; tasks
    /// wait for free capacity.
    Concurrent,
    /// The summed requests of all tasks assigned to a node may not exceed its
    /// capacity, regardless of timing.
    Aggregate,
    /// Capacity is not enforced.
    Off,
}

impl fmt::Display for UsageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsageMode::Requested => write!(f, "requested"),
            UsageMode::Scaled => write!(f, "scaled"),
        }
    }
}

impl std::str::FromStr for UsageMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "requested" => Ok(UsageMode::Requested),
            "scaled" => Ok(UsageMode::Scaled),
            other => Err(format!("unknown usage mode `{other}`")),
        }
    }
}

impl fmt::Display for CapacityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapacityMode::Concurrent => write!(f, "concurrent"),
            CapacityMode::Aggregate => write!(f, "aggregate"),
            CapacityMode::Off => write!(f, "off"),
        }
    }
}

impl std::str::FromStr for CapacityMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concurrent" => Ok(CapacityMode::Concurrent),
            "aggregate" => Ok(CapacityMode::Aggregate),
            "off" => Ok(CapacityMode::Off),
            other => Err(format!("unknown capacity mode `{other}`")),
        }
    }
}

/// A cluster, its workload, and the objective configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Nodes in canonical order (ascending id).
    pub nodes: Vec<Node>,
    pub workflows: Vec<Workflow>,
    pub usage_mode: UsageMode,
    pub capacity_mode: CapacityMode,
    pub alpha: f64,
    pub beta: f64,
    /// Optional explicit pairwise transfer rates (GB/s), indexed like
    /// `nodes`. When absent the bottleneck rule applies: the rate between two
    /// nodes is the minimum of their individual rates.
    pub pairwise_dtr: Option<Vec<Vec<f64>>>,
}

impl Instance {
    pub fn new(nodes: Vec<Node>, workflows: Vec<Workflow>) -> Self {
        Instance {
            nodes,
            workflows,
            usage_mode: UsageMode::Requested,
            capacity_mode: CapacityMode::Concurrent,
            alpha: 1.0,
            beta: 1.0,
            pairwise_dtr: None,
        }
    }

    /// Checks instance-level invariants: positive weights sum, unique node
    /// ids, positive speeds and rates, and per-node duration list lengths.
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta > 0.0) {
            return Err(ModelError::DegenerateWeights);
        }
        let mut seen = std::collections::BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                return Err(ModelError::InvalidNode {
                    node: node.id.clone(),
                    message: "duplicate node id".into(),
                });
            }
            if !(node.processing_speed > 0.0) {
                return Err(ModelError::InvalidNode {
                    node: node.id.clone(),
                    message: "processing_speed must be positive".into(),
                });
            }
            if !(node.data_transfer_rate > 0.0) {
                return Err(ModelError::InvalidNode {
                    node: node.id.clone(),
                    message: "data_transfer_rate must be positive".into(),
                });
            }
        }
        for wf in &self.workflows {
            for task in &wf.tasks {
                if let Some(DurationSpec::PerNode(list)) = &task.duration {
                    if list.len() != self.nodes.len() {
                        return Err(ModelError::DurationCount {
                            task: task.id.clone(),
                            expected: self.nodes.len(),
                            got: list.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Effective transfer rate between two nodes by index.
    pub fn rate_between(&self, a: usize, b: usize) -> f64 {
        match &self.pairwise_dtr {
            Some(matrix) => matrix[a][b],
            None => self.nodes[a]
                .data_transfer_rate
                .min(self.nodes[b].data_transfer_rate),
        }
    }

    /// Returns a copy with every node's processing speed multiplied by
    /// `factor`. Explicit per-node durations are unaffected.
    pub fn scale_speeds(&self, factor: f64) -> Instance {
        let mut scaled = self.clone();
        for node in &mut scaled.nodes {
            node.processing_speed *= factor;
        }
        scaled
    }
}

/// One task's placement and timing within a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEntry {
    pub task_id: String,
    pub node_id: String,
    pub start: f64,
    pub finish: f64,
    /// The usage figure U for this task under the instance's usage mode.
    pub usage: f64,
}

/// A complete timed schedule for one workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    /// Maximum finish time across all entries.
    pub makespan: f64,
    pub total_usage: f64,
    /// `alpha * total_usage + beta * makespan`.
    pub objective: f64,
}

/// Returns a topological order of task ids, or the cycle/unknown-dependency
/// error that prevents one. Ties are broken by ascending task id, so the
/// order is deterministic.
pub fn validate_workflow(workflow: &Workflow) -> Result<Vec<String>, ModelError> {
    let mut index = BTreeMap::new();
    for (i, task) in workflow.tasks.iter().enumerate() {
        if index.insert(task.id.as_str(), i).is_some() {
            return Err(ModelError::DuplicateTaskId(task.id.clone()));
        }
    }

    let n = workflow.tasks.len();
    let mut indegree = vec![0usize; n];
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, task) in workflow.tasks.iter().enumerate() {
        for dep in &task.dependencies {
            let &j = index
                .get(dep.as_str())
                .ok_or_else(|| ModelError::UnknownDependency {
                    task: task.id.clone(),
                    dependency: dep.clone(),
                })?;
            if j == i {
                return Err(ModelError::CycleDetected(vec![task.id.clone()]));
            }
            successors[j].push(i);
            indegree[i] += 1;
        }
    }

    let mut ready: BinaryHeap<Reverse<(&str, usize)>> = workflow
        .tasks
        .iter()
        .enumerate()
        .filter(|(i, _)| indegree[*i] == 0)
        .map(|(i, t)| Reverse((t.id.as_str(), i)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, i))) = ready.pop() {
        order.push(workflow.tasks[i].id.clone());
        for &s in &successors[i] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.push(Reverse((workflow.tasks[s].id.as_str(), s)));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Some tasks never became ready: walk predecessor links among them until
    // a task repeats, which names an actual cycle.
    let remaining: std::collections::BTreeSet<usize> = (0..n)
        .filter(|i| indegree[*i] > 0 || !order.iter().any(|id| id == &workflow.tasks[*i].id))
        .filter(|i| indegree[*i] > 0)
        .collect();
    let mut cursor = *remaining.iter().next().expect("cycle must be non-empty");
    let mut seen_at = BTreeMap::new();
    let mut path = Vec::new();
    loop {
        if let Some(&pos) = seen_at.get(&cursor) {
            let cycle = path[pos..]
                .iter()
                .map(|&i: &usize| workflow.tasks[i].id.clone())
                .collect();
            return Err(ModelError::CycleDetected(cycle));
        }
        seen_at.insert(cursor, path.len());
        path.push(cursor);
        cursor = workflow.tasks[cursor]
            .dependencies
            .iter()
            .filter_map(|dep| index.get(dep.as_str()).copied())
            .filter(|p| remaining.contains(p))
            .min_by_key(|&p| workflow.tasks[p].id.clone())
            .expect("a stuck task has a stuck predecessor");
    }
}

/// Ratio of the task's request to the node's capacity in one dimension.
/// A ratio above 1 means the allocation is not allowed.
pub fn allocation_ratio(task: &Task, node: &Node, resource: Resource) -> Result<f64, ModelError> {
    let request = task.request(resource);
    if request == 0.0 {
        return Ok(0.0);
    }
    let capacity = node.capacity(resource);
    if capacity == 0.0 {
        return Err(ModelError::ZeroCapacity {
            node: node.id.clone(),
            resource,
        });
    }
    Ok(request / capacity)
}

/// True iff the task's required features are a subset of the node's.
pub fn feature_feasible(task: &Task, node: &Node) -> bool {
    task.features.is_subset(&node.features)
}

/// Running time of `task` on `node`. Explicit durations take precedence;
/// otherwise the work amount is divided by the node's processing speed.
pub fn compute_duration(task: &Task, node_index: usize, node: &Node) -> Result<f64, ModelError> {
    match &task.duration {
        Some(DurationSpec::PerNode(list)) => list
            .get(node_index)
            .copied()
            .ok_or_else(|| ModelError::MissingDuration(task.id.clone())),
        Some(DurationSpec::Uniform(seconds)) => Ok(*seconds),
        Some(DurationSpec::Work(work)) => Ok(work / node.processing_speed),
        None => Err(ModelError::MissingDuration(task.id.clone())),
    }
}

/// Seconds to move `data_gb` between two nodes: zero when they are the same
/// node, otherwise the data divided by the slower endpoint's rate.
pub fn transfer_time(data_gb: f64, node_a: &Node, node_b: &Node) -> f64 {
    if node_a.id == node_b.id {
        0.0
    } else {
        data_gb / node_a.data_transfer_rate.min(node_b.data_transfer_rate)
    }
}

/// The usage figure U for a task placed on `node`. Requested mode returns the
/// core request as-is; scaled mode weights it by the node's share of total
/// cluster cores.
pub fn resource_usage(
    task: &Task,
    node: &Node,
    all_nodes: &[Node],
    mode: UsageMode,
) -> Result<f64, ModelError> {
    match mode {
        UsageMode::Requested => Ok(task.cores as f64),
        UsageMode::Scaled => {
            let total: f64 = all_nodes.iter().map(|n| n.cores as f64).sum();
            if total == 0.0 {
                return Err(ModelError::ZeroTotalCapacity(Resource::Cores));
            }
            Ok(task.cores as f64 * (node.cores as f64 / total))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn node(id: &str, cores: u64, features: &[&str]) -> Node {
        Node {
            id: id.into(),
            cores,
            memory: f64::INFINITY,
            storage: f64::INFINITY,
            features: features.iter().map(|s| s.to_string()).collect(),
            processing_speed: 1.0,
            data_transfer_rate: 100.0,
        }
    }

    fn task(id: &str, cores: u64, features: &[&str], deps: &[&str]) -> Task {
        Task {
            id: id.into(),
            cores,
            memory: 0.0,
            data_out: 0.0,
            features: features.iter().map(|s| s.to_string()).collect(),
            duration: Some(DurationSpec::Uniform(1.0)),
            dependencies: deps.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn workflow(id: &str, tasks: Vec<Task>) -> Workflow {
        Workflow {
            id: id.into(),
            tasks,
            submission_time: 0.0,
        }
    }

    #[test]
    fn toposort_chain() {
        let wf = workflow(
            "W1",
            vec![
                task("T1", 8, &["F1"], &[]),
                task("T2", 12, &["F1", "F2"], &["T1"]),
                task("T3", 12, &["F1", "F2"], &["T2"]),
            ],
        );
        assert_eq!(validate_workflow(&wf).unwrap(), vec!["T1", "T2", "T3"]);
    }

    #[test]
    fn toposort_diamond_breaks_ties_by_id() {
        let wf = workflow(
            "W2",
            vec![
                task("T1", 8, &[], &[]),
                task("T2", 12, &[], &["T1"]),
                task("T3", 32, &[], &["T1"]),
                task("T4", 12, &[], &["T2", "T3"]),
            ],
        );
        assert_eq!(validate_workflow(&wf).unwrap(), vec!["T1", "T2", "T3", "T4"]);
    }

    #[test]
    fn toposort_mutual_dependency_is_a_cycle() {
        let wf = workflow(
            "W",
            vec![task("A", 1, &[], &["B"]), task("B", 1, &[], &["A"])],
        );
        match validate_workflow(&wf) {
            Err(ModelError::CycleDetected(cycle)) => {
                assert!(!cycle.is_empty());
                assert!(cycle.iter().all(|id| id == "A" || id == "B"));
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn toposort_unknown_dependency() {
        let wf = workflow("W", vec![task("A", 1, &[], &["Z"])]);
        assert_eq!(
            validate_workflow(&wf),
            Err(ModelError::UnknownDependency {
                task: "A".into(),
                dependency: "Z".into()
            })
        );
    }

    #[test]
    fn toposort_rejects_self_dependency() {
        let wf = workflow("W", vec![task("A", 1, &[], &["A"])]);
        assert!(matches!(
            validate_workflow(&wf),
            Err(ModelError::CycleDetected(_))
        ));
    }

    #[test]
    fn allocation_ratio_paper_values() {
        let n1 = node("N1", 8, &["F1"]);
        assert_eq!(
            allocation_ratio(&task("T1", 8, &["F1"], &[]), &n1, Resource::Cores).unwrap(),
            1.0
        );
        assert_eq!(
            allocation_ratio(&task("T2", 12, &["F1"], &[]), &n1, Resource::Cores).unwrap(),
            1.5
        );
        assert_eq!(
            allocation_ratio(&task("T0", 0, &[], &[]), &n1, Resource::Cores).unwrap(),
            0.0
        );
    }

    #[test]
    fn allocation_ratio_zero_capacity_errors() {
        let degenerate = node("N0", 0, &[]);
        assert_eq!(
            allocation_ratio(&task("T", 4, &[], &[]), &degenerate, Resource::Cores),
            Err(ModelError::ZeroCapacity {
                node: "N0".into(),
                resource: Resource::Cores
            })
        );
        // A zero request on a zero-capacity node is still fine.
        assert_eq!(
            allocation_ratio(&task("T", 0, &[], &[]), &degenerate, Resource::Cores).unwrap(),
            0.0
        );
    }

    #[test]
    fn feature_subset_rule() {
        let n1 = node("N1", 8, &["F1"]);
        let n2 = node("N2", 48, &["F1", "F2"]);
        assert!(!feature_feasible(&task("T2", 12, &["F1", "F2"], &[]), &n1));
        assert!(feature_feasible(&task("T1", 8, &["F1"], &[]), &n2));
        assert!(feature_feasible(&task("T0", 1, &[], &[]), &n1));
    }

    #[test]
    fn duration_explicit_and_work() {
        let n = node("N1", 8, &[]);
        let mut t = task("T1", 8, &[], &[]);
        t.duration = Some(DurationSpec::PerNode(vec![3.0, 3.0, 3.0]));
        assert_eq!(compute_duration(&t, 0, &n).unwrap(), 3.0);
        assert_eq!(compute_duration(&t, 2, &n).unwrap(), 3.0);

        let mut fast = node("N2", 8, &[]);
        fast.processing_speed = 1024.0;
        t.duration = Some(DurationSpec::Work(1024.0));
        assert_eq!(compute_duration(&t, 0, &fast).unwrap(), 1.0);
        fast.processing_speed = 2048.0;
        assert_eq!(compute_duration(&t, 0, &fast).unwrap(), 0.5);

        t.duration = None;
        assert_eq!(
            compute_duration(&t, 0, &n),
            Err(ModelError::MissingDuration("T1".into()))
        );
    }

    #[test]
    fn transfer_time_paper_values() {
        let n1 = node("N1", 8, &[]);
        let n2 = node("N2", 48, &[]);
        assert_eq!(transfer_time(2.0, &n1, &n2), 0.02);
        assert_eq!(transfer_time(10.0, &n1, &n2), 0.10);
        assert_eq!(transfer_time(123.0, &n1, &n1), 0.0);
    }

    #[test]
    fn usage_requested_and_scaled() {
        let nodes = vec![
            node("N1", 8, &[]),
            node("N2", 48, &[]),
            node("N3", 2572, &[]),
        ];
        // W1 requested-mode total: 8 + 12 + 12.
        let total: f64 = [8u64, 12, 12]
            .iter()
            .map(|&c| {
                resource_usage(
                    &task("T", c, &[], &[]),
                    &nodes[1],
                    &nodes,
                    UsageMode::Requested,
                )
                .unwrap()
            })
            .sum();
        assert_eq!(total, 32.0);

        let single = vec![node("N1", 8, &[])];
        assert_eq!(
            resource_usage(&task("T", 5, &[], &[]), &single[0], &single, UsageMode::Scaled)
                .unwrap(),
            5.0
        );

        let scaled = resource_usage(&task("T", 12, &[], &[]), &nodes[1], &nodes, UsageMode::Scaled)
            .unwrap();
        assert_eq!(scaled, 12.0 * 48.0 / 2628.0);
    }

    #[test]
    fn usage_scaled_zero_total_errors() {
        let nodes = vec![node("N1", 0, &[])];
        assert_eq!(
            resource_usage(&task("T", 1, &[], &[]), &nodes[0], &nodes, UsageMode::Scaled),
            Err(ModelError::ZeroTotalCapacity(Resource::Cores))
        );
    }

    #[test]
    fn instance_weight_invariant() {
        let mut inst = Instance::new(vec![node("N1", 1, &[])], vec![]);
        assert!(inst.validate().is_ok());
        inst.alpha = 0.0;
        inst.beta = 0.0;
        assert_eq!(inst.validate(), Err(ModelError::DegenerateWeights));
        inst.beta = -1.0;
        assert_eq!(inst.validate(), Err(ModelError::DegenerateWeights));
    }

    #[test]
    fn instance_checks_duration_counts() {
        let mut t = task("T1", 1, &[], &[]);
        t.duration = Some(DurationSpec::PerNode(vec![1.0, 2.0]));
        let inst = Instance::new(vec![node("N1", 1, &[])], vec![workflow("W", vec![t])]);
        assert_eq!(
            inst.validate(),
            Err(ModelError::DurationCount {
                task: "T1".into(),
                expected: 1,
                got: 2
            })
        );
    }

    /// Independent reachability oracle: a directed graph has a cycle iff some
    /// node reaches itself through at least one edge.
    fn has_cycle_oracle(n: usize, edges: &[(usize, usize)]) -> bool {
        let mut reach = vec![vec![false; n]; n];
        for &(a, b) in edges {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
                }
            }
        }
        (0..n).any(|i| reach[i][i])
    }

    proptest! {
        #[test]
        fn toposort_agrees_with_reachability_oracle(
            n in 1usize..10,
            raw_edges in proptest::collection::vec((0usize..10, 0usize..10), 0..25)
        ) {
            let edges: Vec<(usize, usize)> = raw_edges
                .into_iter()
                .filter(|(a, b)| *a < n && *b < n && a != b)
                .collect();
            let tasks: Vec<Task> = (0..n)
                .map(|i| {
                    let deps: Vec<&str> = Vec::new();
                    let mut t = task(&format!("T{i}"), 1, &[], &deps);
                    t.dependencies = edges
                        .iter()
                        .filter(|(_, b)| *b == i)
                        .map(|(a, _)| format!("T{a}"))
                        .collect();
                    t
                })
                .collect();
            let wf = workflow("W", tasks);
            let result = validate_workflow(&wf);
            if has_cycle_oracle(n, &edges) {
                prop_assert!(matches!(result, Err(ModelError::CycleDetected(_))));
            } else {
                let order = result.unwrap();
                prop_assert_eq!(order.len(), n);
                let pos: BTreeMap<&str, usize> =
                    order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
                for (a, b) in edges {
                    let (ia, ib) = (format!("T{a}"), format!("T{b}"));
                    prop_assert!(pos[ia.as_str()] < pos[ib.as_str()]);
                }
            }
        }

        #[test]
        fn transfer_is_symmetric_and_zero_on_same_node(
            data in 0.0f64..1000.0,
            ra in 0.5f64..500.0,
            rb in 0.5f64..500.0,
        ) {
            let mut a = node("A", 1, &[]);
            let mut b = node("B", 1, &[]);
            a.data_transfer_rate = ra;
            b.data_transfer_rate = rb;
            prop_assert_eq!(transfer_time(data, &a, &b), transfer_time(data, &b, &a));
            prop_assert_eq!(transfer_time(data, &a, &a), 0.0);
        }

        #[test]
        fn work_duration_is_homogeneous(work in 0.0f64..1e6, speed in 0.001f64..1e6) {
            let mut t = task("T", 1, &[], &[]);
            t.duration = Some(DurationSpec::Work(work));
            let mut n = node("N", 1, &[]);
            n.processing_speed = speed;
            let base = compute_duration(&t, 0, &n).unwrap();
            n.processing_speed = 2.0 * speed;
            prop_assert_eq!(compute_duration(&t, 0, &n).unwrap(), base / 2.0);
        }

        #[test]
        fn allocation_ratio_is_linear_in_request(req in 1u64..1000, k in 1u64..8, cap in 1u64..10_000) {
            let n = node("N", cap, &[]);
            let r1 = allocation_ratio(&task("T", req, &[], &[]), &n, Resource::Cores).unwrap();
            let rk = allocation_ratio(&task("T", k * req, &[], &[]), &n, Resource::Cores).unwrap();
            prop_assert!((rk - k as f64 * r1).abs() <= 1e-12 * rk.abs().max(1.0));
        }

        #[test]
        fn requested_usage_ignores_node(cores in 0u64..100, pick in 0usize..3) {
            let nodes = vec![node("N1", 8, &[]), node("N2", 48, &[]), node("N3", 2572, &[])];
            let t = task("T", cores, &[], &[]);
            let u = resource_usage(&t, &nodes[pick], &nodes, UsageMode::Requested).unwrap();
            prop_assert_eq!(u, cores as f64);
        }
    }
}
