//! Parser for the Standard Task Graph Set layout: a task-count header line,
//! then one record per line of `index processing_time pred_count preds...`.
//! The set's dummy entry and exit tasks (zero processing time at the degree
//! boundaries) are retained with zero duration so task counts match the
//! published graphs.

use crate::model::{validate_workflow, DurationSpec, Task, Workflow};

use super::IngestError;

/// How communication costs are derived for the parsed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommCostMode {
    /// No data transfers at all.
    None,
    /// Each record carries one trailing value: the task's output data in GB.
    Explicit,
    /// Every task emits the same data volume, sized so a cross-node edge
    /// costs `default_dtt` seconds at the reference transfer rate.
    DefaultConstant,
}

#[derive(Debug, Clone)]
pub struct StgOptions {
    pub workflow_id: String,
    pub comm_cost_mode: CommCostMode,
    /// Seconds per cross-node edge in `DefaultConstant` mode.
    pub default_dtt: f64,
    /// GB/s assumed when converting `default_dtt` into a data volume.
    pub reference_rate: f64,
    /// When set, durations are materialized as explicit per-node seconds
    /// (`processing_time / speed` per node) instead of a work amount that
    /// adapts to node speeds at schedule time.
    pub speed_map: Option<Vec<f64>>,
}

impl Default for StgOptions {
    fn default() -> Self {
        StgOptions {
            workflow_id: "stg".into(),
            comm_cost_mode: CommCostMode::None,
            default_dtt: 0.01,
            reference_rate: 100.0,
            speed_map: None,
        }
    }
}

impl StgOptions {
    pub fn named(id: &str) -> Self {
        StgOptions {
            workflow_id: id.into(),
            ..StgOptions::default()
        }
    }

    pub fn with_comm(mut self, mode: CommCostMode) -> Self {
        self.comm_cost_mode = mode;
        self
    }
}

struct Record {
    index: usize,
    processing_time: f64,
    preds: Vec<usize>,
    data: f64,
}

pub fn parse_stg(text: &str, options: &StgOptions) -> Result<Workflow, IngestError> {
    let parse_err = |line: usize, message: String| IngestError::Parse {
        line,
        column: 1,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let declared: usize = header
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .map_err(|_| parse_err(header_line, format!("bad task-count header `{header}`")))?;

    let mut records = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let usize_at = |pos: usize, what: &str| -> Result<usize, IngestError> {
            fields
                .get(pos)
                .ok_or_else(|| parse_err(line_no, format!("missing {what}")))?
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("bad {what}")))
        };
        let index = usize_at(0, "task index")?;
        let processing_time: f64 = fields
            .get(1)
            .ok_or_else(|| parse_err(line_no, "missing processing time".into()))?
            .parse()
            .map_err(|_| parse_err(line_no, "bad processing time".into()))?;
        if processing_time < 0.0 {
            return Err(parse_err(line_no, "negative processing time".into()));
        }
        let pred_count = usize_at(2, "predecessor count")?;
        let mut preds = Vec::with_capacity(pred_count);
        for i in 0..pred_count {
            preds.push(usize_at(3 + i, "predecessor index")?);
        }
        let data = match fields.get(3 + pred_count) {
            None => 0.0,
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| parse_err(line_no, "bad trailing data volume".into()))?,
        };
        if fields.len() > 4 + pred_count {
            return Err(parse_err(line_no, "trailing fields after record".into()));
        }
        if index != records.len() {
            return Err(parse_err(
                line_no,
                format!("task index {index} out of order (expected {})", records.len()),
            ));
        }
        records.push(Record {
            index,
            processing_time,
            preds,
            data,
        });
    }

    // Headers in the set count computation tasks and exclude the two
    // dummies; plain counts are accepted too.
    if records.len() != declared && records.len() != declared + 2 {
        return Err(parse_err(
            1,
            format!(
                "header declares {declared} tasks but the file has {} records",
                records.len()
            ),
        ));
    }

    let width = records.len().saturating_sub(1).to_string().len().max(1);
    let name = |index: usize| format!("T{index:0width$}");
    let default_data = options.default_dtt * options.reference_rate;

    let tasks: Vec<Task> = records
        .iter()
        .map(|record| {
            for &p in &record.preds {
                if p >= records.len() {
                    return Err(parse_err(
                        1,
                        format!("task {} references missing predecessor {p}", record.index),
                    ));
                }
            }
            let duration = match &options.speed_map {
                Some(speeds) => DurationSpec::PerNode(
                    speeds
                        .iter()
                        .map(|s| record.processing_time / s)
                        .collect(),
                ),
                None => DurationSpec::Work(record.processing_time),
            };
            Ok(Task {
                id: name(record.index),
                cores: 1,
                memory: 0.0,
                data_out: match options.comm_cost_mode {
                    CommCostMode::None => 0.0,
                    CommCostMode::Explicit => record.data,
                    CommCostMode::DefaultConstant => default_data,
                },
                features: Default::default(),
                duration: Some(duration),
                dependencies: record.preds.iter().map(|&p| name(p)).collect(),
            })
        })
        .collect::<Result<_, _>>()?;

    let workflow = Workflow {
        id: options.workflow_id.clone(),
        tasks,
        submission_time: 0.0,
    };
    validate_workflow(&workflow)?;
    Ok(workflow)
}
