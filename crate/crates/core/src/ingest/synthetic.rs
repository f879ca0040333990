//! Seed-deterministic synthetic instances for scale tests: a layered DAG
//! over a heterogeneous cluster, constructed so that every task has at least
//! one feasible node and the graph is acyclic by layering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{DurationSpec, Node, Task, Workflow};

use super::IngestError;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub task_count: usize,
    /// Probability of an edge between tasks in different layers.
    pub edge_density: f64,
    pub feature_pool_size: usize,
    /// Range of task work amounts (abstract units).
    pub work_range: (f64, f64),
    /// Range of task output data (GB).
    pub data_range: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(node_count: usize, task_count: usize, seed: u64) -> Self {
        SyntheticSpec {
            node_count,
            task_count,
            edge_density: 0.3,
            feature_pool_size: 4,
            work_range: (5.0, 50.0),
            data_range: (0.0, 4.0),
            seed,
        }
    }

    fn validate(&self) -> Result<(), IngestError> {
        if self.node_count == 0 || self.task_count == 0 {
            return Err(IngestError::schema("spec", "counts must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.edge_density) {
            return Err(IngestError::schema("spec.edge_density", "must lie in [0, 1]"));
        }
        for (range, what) in [(self.work_range, "work_range"), (self.data_range, "data_range")] {
            if !(range.0 >= 0.0 && range.1 >= range.0) {
                return Err(IngestError::schema(
                    format!("spec.{what}"),
                    "must be a non-negative, non-empty range",
                ));
            }
        }
        Ok(())
    }
}

/// Generates a cluster and a workflow, both a pure function of the spec.
/// Each task draws its requests from a randomly chosen "home" node, which
/// guarantees a feasible placement exists, so infeasibility never
/// contaminates scale timings.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Vec<Node>, Workflow), IngestError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let node_width = (spec.node_count - 1).to_string().len().max(1);
    let task_width = (spec.task_count - 1).to_string().len().max(1);
    let pool: Vec<String> = (1..=spec.feature_pool_size).map(|i| format!("F{i}")).collect();

    let nodes: Vec<Node> = (0..spec.node_count)
        .map(|i| Node {
            id: format!("N{i:0node_width$}"),
            cores: rng.gen_range(4..=64),
            memory: rng.gen_range(16.0..512.0),
            storage: f64::INFINITY,
            features: pool
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect(),
            processing_speed: rng.gen_range(0.5..4.0),
            data_transfer_rate: rng.gen_range(1.0..10.0),
        })
        .collect();

    let layers = (spec.task_count as f64).sqrt().ceil() as usize;
    let layer_of = |t: usize| t * layers / spec.task_count;

    let tasks: Vec<Task> = (0..spec.task_count)
        .map(|i| {
            let home = &nodes[rng.gen_range(0..spec.node_count)];
            let features = home
                .features
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .cloned()
                .collect();
            let cores = rng.gen_range(1..=(home.cores / 2).max(1));
            let memory = rng.gen_range(0.0..home.memory * 0.5);
            let work = rng.gen_range(spec.work_range.0..=spec.work_range.1);
            let data = rng.gen_range(spec.data_range.0..=spec.data_range.1);
            let dependencies = (0..i)
                .filter(|&j| layer_of(j) < layer_of(i) && rng.gen_bool(spec.edge_density))
                .map(|j| format!("T{j:0task_width$}"))
                .collect();
            Task {
                id: format!("T{i:0task_width$}"),
                cores,
                memory,
                data_out: data,
                features,
                duration: Some(DurationSpec::Work(work)),
                dependencies,
            }
        })
        .collect();

    let workflow = Workflow {
        id: format!("syn-{}x{}-s{}", spec.node_count, spec.task_count, spec.seed),
        tasks,
        submission_time: 0.0,
    };
    Ok((nodes, workflow))
}
