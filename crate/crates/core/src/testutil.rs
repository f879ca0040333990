//! Shared fixtures for unit tests: the 3-node MRI cluster and its two
//! workflows, with the values from the worked example.

use std::collections::BTreeSet;

use crate::model::{DurationSpec, Instance, Node, Task, Workflow};

fn tags(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn mri_nodes() -> Vec<Node> {
    vec![
        Node {
            id: "N1".into(),
            cores: 8,
            memory: f64::INFINITY,
            storage: 500.0,
            features: tags(&["F1"]),
            processing_speed: 1.0,
            data_transfer_rate: 100.0,
        },
        Node {
            id: "N2".into(),
            cores: 48,
            memory: f64::INFINITY,
            storage: 20_000.0,
            features: tags(&["F1", "F2"]),
            processing_speed: 1.0,
            data_transfer_rate: 100.0,
        },
        Node {
            id: "N3".into(),
            cores: 2572,
            memory: f64::INFINITY,
            storage: 210_000.0,
            features: tags(&["F1", "F2", "F3"]),
            processing_speed: 1.0,
            data_transfer_rate: 100.0,
        },
    ]
}

fn task(id: &str, cores: u64, features: &[&str], data: f64, secs: f64, deps: &[&str]) -> Task {
    Task {
        id: id.into(),
        cores,
        memory: 0.0,
        data_out: data,
        features: tags(features),
        duration: Some(DurationSpec::PerNode(vec![secs; 3])),
        dependencies: deps.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn mri_w1() -> Workflow {
    Workflow {
        id: "W1".into(),
        tasks: vec![
            task("T1", 8, &["F1"], 2.0, 3.0, &[]),
            task("T2", 12, &["F1", "F2"], 5.0, 5.0, &["T1"]),
            task("T3", 12, &["F1", "F2"], 8.0, 2.0, &["T2"]),
        ],
        submission_time: 0.0,
    }
}

pub fn mri_w2() -> Workflow {
    Workflow {
        id: "W2".into(),
        tasks: vec![
            task("T1", 8, &["F1"], 2.0, 3.0, &[]),
            task("T2", 12, &["F1", "F2"], 5.0, 5.0, &["T1"]),
            task("T3", 32, &["F1", "F2"], 5.0, 2.0, &["T1"]),
            task("T4", 12, &["F1", "F2"], 10.0, 2.0, &["T2", "T3"]),
        ],
        submission_time: 0.0,
    }
}

pub fn mri_instance() -> Instance {
    Instance::new(mri_nodes(), vec![mri_w1(), mri_w2()])
}

/// Small deterministic instance generator for cross-solver tests. Each task
/// copies its features and fits from a randomly chosen "home" node, so at
/// least one feasible node always exists. Capacity mode alternates between
/// concurrent and off with the seed.
pub fn random_case(seed: u64, max_nodes: usize, max_tasks: usize) -> (Instance, Workflow) {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };

    let n_nodes = 1 + (next() * max_nodes as f64) as usize;
    let n_tasks = 1 + (next() * max_tasks as f64) as usize;
    let pool = ["F1", "F2", "F3"];

    let nodes: Vec<Node> = (0..n_nodes)
        .map(|i| Node {
            id: format!("N{i}"),
            cores: 2 + (next() * 14.0) as u64,
            memory: 8.0 + next() * 56.0,
            storage: f64::INFINITY,
            features: pool
                .iter()
                .filter(|_| next() < 0.6)
                .map(|s| s.to_string())
                .collect(),
            processing_speed: 0.5 + next() * 3.5,
            data_transfer_rate: 1.0 + next() * 9.0,
        })
        .collect();

    let edge_prob = 0.2 + next() * 0.5;
    let tasks: Vec<Task> = (0..n_tasks)
        .map(|i| {
            let home = &nodes[(next() * n_nodes as f64) as usize];
            let features: BTreeSet<String> = home
                .features
                .iter()
                .filter(|_| next() < 0.5)
                .cloned()
                .collect();
            Task {
                id: format!("T{i}"),
                cores: 1 + (next() * (home.cores as f64 - 1.0)).floor() as u64,
                memory: next() * home.memory * 0.8,
                data_out: next() * 8.0,
                features,
                duration: Some(DurationSpec::Work(1.0 + next() * 20.0)),
                dependencies: (0..i)
                    .filter(|_| next() < edge_prob)
                    .map(|j| format!("T{j}"))
                    .collect(),
            }
        })
        .collect();

    let workflow = Workflow {
        id: format!("R{seed}"),
        tasks,
        submission_time: 0.0,
    };
    let mut instance = Instance::new(nodes, vec![workflow.clone()]);
    if seed % 2 == 1 {
        instance.capacity_mode = crate::model::CapacityMode::Off;
    }
    (instance, workflow)
}
