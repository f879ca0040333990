//! Parsers for the JSON cluster/workflow formats, the Standard Task Graph
//! layout, and the synthetic instance generator for scale tests.
//!
//! The JSON formats accept scalars and singleton lists interchangeably for
//! numeric fields (the wild files mix both). Nodes and tasks are returned in
//! canonical ascending-id order, and per-node duration lists are interpreted
//! against that order. Missing optional fields take documented defaults:
//! transfer rate 100 GB/s, processing speed 1, empty feature set, and
//! unconstrained memory/storage.

mod stg;
mod synthetic;

pub use stg::{parse_stg, CommCostMode, StgOptions};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{validate_workflow, DurationSpec, Instance, ModelError, Node, Task, Workflow};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn parse_json(text: &str) -> Result<Value, IngestError> {
    serde_json::from_str(text).map_err(|e| IngestError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Accepts a bare number or a singleton list of one number.
fn scalar(value: &Value, path: &str) -> Result<f64, IngestError> {
    match value {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| IngestError::schema(path, "not a finite number")),
        Value::Array(items) if items.len() == 1 => scalar(&items[0], path),
        Value::Array(_) => Err(IngestError::schema(
            path,
            "expected a number or a one-element list",
        )),
        other => Err(IngestError::schema(
            path,
            format!("expected a number, found {other}"),
        )),
    }
}

fn non_negative(value: &Value, path: &str) -> Result<f64, IngestError> {
    let x = scalar(value, path)?;
    if x < 0.0 {
        return Err(IngestError::schema(path, "must be non-negative"));
    }
    Ok(x)
}

fn positive(value: &Value, path: &str) -> Result<f64, IngestError> {
    let x = scalar(value, path)?;
    if x <= 0.0 {
        return Err(IngestError::schema(path, "must be positive"));
    }
    Ok(x)
}

fn count(value: &Value, path: &str) -> Result<u64, IngestError> {
    let x = non_negative(value, path)?;
    if x.fract() != 0.0 {
        return Err(IngestError::schema(path, "must be an integer"));
    }
    Ok(x as u64)
}

fn string_set(value: &Value, path: &str) -> Result<BTreeSet<String>, IngestError> {
    let items = value
        .as_array()
        .ok_or_else(|| IngestError::schema(path, "expected a list of strings"))?;
    items
        .iter()
        .map(|item| {
            item.as_str()
                .map(str::to_string)
                .ok_or_else(|| IngestError::schema(path, "feature tags must be strings"))
        })
        .collect()
}

/// Parses a cluster description: a top-level `"nodes"` object keyed by node
/// name. Nodes come back sorted by id.
pub fn parse_cluster(text: &str) -> Result<Vec<Node>, IngestError> {
    parse_cluster_full(text).map(|(nodes, _)| nodes)
}

/// Like [`parse_cluster`] but also returns the optional explicit pairwise
/// transfer-rate matrix (`"pairwise_dtr"`), indexed in node order with
/// unspecified entries filled by the bottleneck rule.
pub fn parse_cluster_full(text: &str) -> Result<(Vec<Node>, Option<Vec<Vec<f64>>>), IngestError> {
    let root = parse_json(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| IngestError::schema("$", "expected a JSON object"))?;
    let nodes_obj = obj
        .get("nodes")
        .ok_or_else(|| IngestError::schema("nodes", "missing top-level \"nodes\" object"))?
        .as_object()
        .ok_or_else(|| IngestError::schema("nodes", "expected an object of nodes"))?;

    let mut nodes = Vec::with_capacity(nodes_obj.len());
    for (name, body) in nodes_obj {
        let path = |field: &str| format!("nodes.{name}.{field}");
        let body = body
            .as_object()
            .ok_or_else(|| IngestError::schema(format!("nodes.{name}"), "expected an object"))?;
        let cores = body
            .get("cores")
            .ok_or_else(|| IngestError::schema(path("cores"), "missing"))?;
        nodes.push(Node {
            id: name.clone(),
            cores: count(cores, &path("cores"))?,
            memory: match body.get("memory") {
                Some(v) => non_negative(v, &path("memory"))?,
                None => f64::INFINITY,
            },
            storage: match body.get("storage") {
                Some(v) => non_negative(v, &path("storage"))?,
                None => f64::INFINITY,
            },
            features: match body.get("features") {
                Some(v) => string_set(v, &path("features"))?,
                None => BTreeSet::new(),
            },
            processing_speed: match body.get("processing_speed") {
                Some(v) => positive(v, &path("processing_speed"))?,
                None => 1.0,
            },
            data_transfer_rate: match body.get("data_transfer_rate") {
                Some(v) => positive(v, &path("data_transfer_rate"))?,
                None => 100.0,
            },
        });
    }
    nodes.sort_by(|a, b| a.id.cmp(&b.id));

    let pairwise = match obj.get("pairwise_dtr") {
        None => None,
        Some(value) => Some(parse_pairwise(value, &nodes)?),
    };
    Ok((nodes, pairwise))
}

fn parse_pairwise(value: &Value, nodes: &[Node]) -> Result<Vec<Vec<f64>>, IngestError> {
    let index = |name: &str| -> Result<usize, IngestError> {
        nodes
            .iter()
            .position(|n| n.id == name)
            .ok_or_else(|| IngestError::schema(format!("pairwise_dtr.{name}"), "unknown node"))
    };
    let obj = value
        .as_object()
        .ok_or_else(|| IngestError::schema("pairwise_dtr", "expected an object"))?;
    // Bottleneck-rule defaults, then explicit entries symmetrically on top.
    let n = nodes.len();
    let mut matrix = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            matrix[a][b] = nodes[a].data_transfer_rate.min(nodes[b].data_transfer_rate);
        }
    }
    for (from, row) in obj {
        let a = index(from)?;
        let row = row.as_object().ok_or_else(|| {
            IngestError::schema(format!("pairwise_dtr.{from}"), "expected an object")
        })?;
        for (to, rate) in row {
            let b = index(to)?;
            let rate = positive(rate, &format!("pairwise_dtr.{from}.{to}"))?;
            matrix[a][b] = rate;
            matrix[b][a] = rate;
        }
    }
    Ok(matrix)
}

/// Parses a workload description: a top-level object mapping workflow names
/// to `{"tasks": {...}}`. Each parsed workflow is validated, so broken DAGs
/// fail here with a named error rather than surfacing later.
pub fn parse_workload(text: &str) -> Result<Vec<Workflow>, IngestError> {
    let root = parse_json(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| IngestError::schema("$", "expected a JSON object"))?;

    let mut workflows = Vec::with_capacity(obj.len());
    for (wf_name, body) in obj {
        let body = body
            .as_object()
            .ok_or_else(|| IngestError::schema(wf_name, "expected an object"))?;
        let tasks_obj = body
            .get("tasks")
            .ok_or_else(|| IngestError::schema(format!("{wf_name}.tasks"), "missing"))?
            .as_object()
            .ok_or_else(|| {
                IngestError::schema(format!("{wf_name}.tasks"), "expected an object of tasks")
            })?;
        let submission_time = match body.get("submission_time") {
            Some(v) => non_negative(v, &format!("{wf_name}.submission_time"))?,
            None => 0.0,
        };

        let mut tasks = Vec::with_capacity(tasks_obj.len());
        for (task_name, spec) in tasks_obj {
            tasks.push(parse_task(wf_name, task_name, spec)?);
        }
        tasks.sort_by(|a, b| a.id.cmp(&b.id));

        let workflow = Workflow {
            id: wf_name.clone(),
            tasks,
            submission_time,
        };
        validate_workflow(&workflow)?;
        workflows.push(workflow);
    }
    workflows.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(workflows)
}

fn parse_task(wf_name: &str, task_name: &str, spec: &Value) -> Result<Task, IngestError> {
    let path = |field: &str| format!("{wf_name}.tasks.{task_name}.{field}");
    let spec = spec.as_object().ok_or_else(|| {
        IngestError::schema(format!("{wf_name}.tasks.{task_name}"), "expected an object")
    })?;

    let duration = match (spec.get("duration"), spec.get("work")) {
        (Some(value), _) => Some(parse_duration(value, &path("duration"))?),
        (None, Some(value)) => Some(DurationSpec::Work(non_negative(value, &path("work"))?)),
        (None, None) => None,
    };
    let dependencies = match spec.get("dependencies") {
        None => Vec::new(),
        Some(value) => value
            .as_array()
            .ok_or_else(|| IngestError::schema(path("dependencies"), "expected a list"))?
            .iter()
            .map(|d| {
                d.as_str().map(str::to_string).ok_or_else(|| {
                    IngestError::schema(path("dependencies"), "task names must be strings")
                })
            })
            .collect::<Result<_, _>>()?,
    };

    Ok(Task {
        id: task_name.to_string(),
        cores: match spec.get("cores") {
            Some(v) => count(v, &path("cores"))?,
            None => 0,
        },
        memory: match spec.get("memory_required") {
            Some(v) => non_negative(v, &path("memory_required"))?,
            None => 0.0,
        },
        data_out: match spec.get("data") {
            Some(v) => non_negative(v, &path("data"))?,
            None => 0.0,
        },
        features: match spec.get("features") {
            Some(v) => string_set(v, &path("features"))?,
            None => BTreeSet::new(),
        },
        duration,
        dependencies,
    })
}

/// A scalar (or singleton list) means the same seconds on every node; a
/// longer list gives explicit per-node seconds in canonical node order.
fn parse_duration(value: &Value, path: &str) -> Result<DurationSpec, IngestError> {
    match value {
        Value::Array(items) if items.len() > 1 => {
            let list = items
                .iter()
                .enumerate()
                .map(|(i, v)| non_negative(v, &format!("{path}[{i}]")))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(DurationSpec::PerNode(list))
        }
        other => Ok(DurationSpec::Uniform(non_negative(other, path)?)),
    }
}

/// Parses a cluster file and a workload file into one instance, checking the
/// cross-file invariants (per-node duration list lengths).
pub fn load_instance(cluster_text: &str, workload_text: &str) -> Result<Instance, IngestError> {
    let (nodes, pairwise) = parse_cluster_full(cluster_text)?;
    let workflows = parse_workload(workload_text)?;
    let mut instance = Instance::new(nodes, workflows);
    instance.pairwise_dtr = pairwise;
    instance.validate()?;
    Ok(instance)
}

fn number(x: f64) -> Value {
    // Whole numbers serialize without a trailing ".0" wobble either way;
    // serde_json handles f64 deterministically.
    json!(x)
}

/// Canonical JSON for a cluster, the inverse of [`parse_cluster_full`].
/// Unconstrained (infinite) capacities are omitted.
pub fn serialize_cluster(nodes: &[Node], pairwise: Option<&Vec<Vec<f64>>>) -> String {
    let mut nodes_obj = Map::new();
    for node in nodes {
        let mut body = Map::new();
        body.insert("cores".into(), json!(node.cores));
        if node.memory.is_finite() {
            body.insert("memory".into(), number(node.memory));
        }
        if node.storage.is_finite() {
            body.insert("storage".into(), number(node.storage));
        }
        body.insert("features".into(), json!(node.features));
        body.insert("processing_speed".into(), number(node.processing_speed));
        body.insert("data_transfer_rate".into(), number(node.data_transfer_rate));
        nodes_obj.insert(node.id.clone(), Value::Object(body));
    }
    let mut root = Map::new();
    root.insert("nodes".into(), Value::Object(nodes_obj));
    if let Some(matrix) = pairwise {
        let mut outer = Map::new();
        for (a, row) in matrix.iter().enumerate() {
            let mut inner = Map::new();
            for (b, rate) in row.iter().enumerate() {
                if a != b {
                    inner.insert(nodes[b].id.clone(), number(*rate));
                }
            }
            outer.insert(nodes[a].id.clone(), Value::Object(inner));
        }
        root.insert("pairwise_dtr".into(), Value::Object(outer));
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("maps serialize")
}

/// Canonical JSON for a set of workflows, the inverse of [`parse_workload`].
pub fn serialize_workload(workflows: &[Workflow]) -> String {
    let mut root = Map::new();
    for wf in workflows {
        let mut tasks_obj = Map::new();
        for task in &wf.tasks {
            let mut body = Map::new();
            body.insert("cores".into(), json!(task.cores));
            if task.memory > 0.0 {
                body.insert("memory_required".into(), number(task.memory));
            }
            body.insert("features".into(), json!(task.features));
            if task.data_out > 0.0 {
                body.insert("data".into(), number(task.data_out));
            }
            match &task.duration {
                Some(DurationSpec::Uniform(secs)) => {
                    body.insert("duration".into(), number(*secs));
                }
                Some(DurationSpec::PerNode(list)) => {
                    body.insert(
                        "duration".into(),
                        Value::Array(list.iter().map(|d| number(*d)).collect()),
                    );
                }
                Some(DurationSpec::Work(work)) => {
                    body.insert("work".into(), number(*work));
                }
                None => {}
            }
            body.insert("dependencies".into(), json!(task.dependencies));
            tasks_obj.insert(task.id.clone(), Value::Object(body));
        }
        let mut wf_obj = Map::new();
        wf_obj.insert("tasks".into(), Value::Object(tasks_obj));
        if wf.submission_time > 0.0 {
            wf_obj.insert("submission_time".into(), number(wf.submission_time));
        }
        root.insert(wf.id.clone(), Value::Object(wf_obj));
    }
    serde_json::to_string_pretty(&Value::Object(root)).expect("maps serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGURE_CLUSTER: &str = include_str!("../../../../data/figure_cluster.json");
    const FIGURE_WORKFLOW: &str = include_str!("../../../../data/figure_workflow.json");
    const MRI_CLUSTER: &str = include_str!("../../../../data/mri_cluster.json");
    const MRI_WORKLOAD: &str = include_str!("../../../../data/mri_workload.json");

    #[test]
    fn figure_cluster_values() {
        let nodes = parse_cluster(FIGURE_CLUSTER).unwrap();
        let node1 = nodes.iter().find(|n| n.id == "Node1").unwrap();
        assert_eq!(node1.cores, 4);
        assert_eq!(node1.memory, 1024.0);
        assert!(node1.features.contains("F1") && node1.features.len() == 1);
        assert_eq!(node1.processing_speed, 1024.0);
        assert_eq!(node1.data_transfer_rate, 100.0);
    }

    #[test]
    fn figure_workflow_values() {
        let workflows = parse_workload(FIGURE_WORKFLOW).unwrap();
        let wf = &workflows[0];
        let t1 = wf.tasks.iter().find(|t| t.id == "T1").unwrap();
        assert_eq!(t1.cores, 4);
        assert_eq!(t1.memory, 1024.0);
        assert!(t1.features.contains("F1"));
        assert_eq!(t1.data_out, 1024.0);
        assert_eq!(t1.duration, Some(DurationSpec::Uniform(10.0)));
        assert!(t1.dependencies.is_empty());
    }

    #[test]
    fn figure_pair_loads_as_instance() {
        let instance = load_instance(FIGURE_CLUSTER, FIGURE_WORKFLOW).unwrap();
        assert!(instance.validate().is_ok());
    }

    #[test]
    fn empty_nodes_object_is_an_empty_cluster() {
        let nodes = parse_cluster(r#"{"nodes": {}}"#).unwrap();
        assert!(nodes.is_empty());
    }

    #[test]
    fn negative_cores_name_the_field() {
        let err = parse_cluster(r#"{"nodes": {"Node1": {"cores": -1}}}"#).unwrap_err();
        match err {
            IngestError::Schema { path, .. } => assert_eq!(path, "nodes.Node1.cores"),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_cluster("{\"nodes\": {").unwrap_err();
        assert!(matches!(err, IngestError::Parse { .. }));
    }

    #[test]
    fn unknown_dependency_is_named() {
        let text = r#"{"W": {"tasks": {"T1": {"cores": 1, "duration": 1, "dependencies": ["T9"]}}}}"#;
        match parse_workload(text).unwrap_err() {
            IngestError::Model(ModelError::UnknownDependency { task, dependency }) => {
                assert_eq!(task, "T1");
                assert_eq!(dependency, "T9");
            }
            other => panic!("expected unknown dependency, got {other}"),
        }
    }

    #[test]
    fn cyclic_workflow_is_rejected() {
        let text = r#"{"W": {"tasks": {
            "A": {"duration": 1, "dependencies": ["B"]},
            "B": {"duration": 1, "dependencies": ["A"]}}}}"#;
        assert!(matches!(
            parse_workload(text).unwrap_err(),
            IngestError::Model(ModelError::CycleDetected(_))
        ));
    }

    #[test]
    fn mri_files_reproduce_the_table() {
        let instance = load_instance(MRI_CLUSTER, MRI_WORKLOAD).unwrap();
        assert_eq!(
            instance.nodes.iter().map(|n| n.cores).collect::<Vec<_>>(),
            vec![8, 48, 2572]
        );
        assert_eq!(instance.nodes[0].storage, 500.0);
        assert_eq!(instance.nodes[2].storage, 210_000.0);
        let w1 = &instance.workflows[0];
        assert_eq!(w1.id, "W1");
        let t2 = w1.tasks.iter().find(|t| t.id == "T2").unwrap();
        assert_eq!(t2.cores, 12);
        assert_eq!(t2.data_out, 5.0);
        assert_eq!(t2.duration, Some(DurationSpec::PerNode(vec![5.0, 5.0, 5.0])));
        assert_eq!(t2.dependencies, vec!["T1"]);
        let w2 = &instance.workflows[1];
        let t4 = w2.tasks.iter().find(|t| t.id == "T4").unwrap();
        assert_eq!(t4.cores, 12);
        assert_eq!(t4.data_out, 10.0);
        assert_eq!(t4.dependencies, vec!["T2", "T3"]);
    }

    #[test]
    fn parse_serialize_parse_is_idempotent() {
        for (cluster, workload) in [
            (FIGURE_CLUSTER, FIGURE_WORKFLOW),
            (MRI_CLUSTER, MRI_WORKLOAD),
        ] {
            let first = load_instance(cluster, workload).unwrap();
            let re_cluster = serialize_cluster(&first.nodes, first.pairwise_dtr.as_ref());
            let re_workload = serialize_workload(&first.workflows);
            let second = load_instance(&re_cluster, &re_workload).unwrap();
            assert_eq!(first, second);
        }
    }

    #[test]
    fn synthetic_instances_round_trip() {
        for seed in [1u64, 7, 42, 1999] {
            let spec = SyntheticSpec::new(4, 12, seed);
            let (nodes, workflow) = generate_synthetic(&spec).unwrap();
            let instance = Instance::new(nodes, vec![workflow]);
            let re_cluster = serialize_cluster(&instance.nodes, None);
            let re_workload = serialize_workload(&instance.workflows);
            let again = load_instance(&re_cluster, &re_workload).unwrap();
            assert_eq!(instance, again);
        }
    }

    #[test]
    fn pairwise_matrix_parses_and_overrides() {
        let text = r#"{"nodes": {
            "A": {"cores": 4, "data_transfer_rate": 100},
            "B": {"cores": 4, "data_transfer_rate": 100}},
            "pairwise_dtr": {"A": {"B": 10}}}"#;
        let (nodes, pairwise) = parse_cluster_full(text).unwrap();
        let matrix = pairwise.unwrap();
        assert_eq!(matrix[0][1], 10.0);
        assert_eq!(matrix[1][0], 10.0);
        let mut inst = Instance::new(nodes, vec![]);
        inst.pairwise_dtr = Some(matrix);
        assert_eq!(inst.rate_between(0, 1), 10.0);
    }
}
