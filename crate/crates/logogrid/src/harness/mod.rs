//! Evaluation harness: dataset and prediction I/O, prompt rendering,
//! model-output scoring, per-dimension breakdowns, and an optional HTTP
//! gateway for querying models.

mod extract;
mod gateway;
mod prompt;
mod records;

pub use extract::extract_code;
pub use gateway::{query_model, GatewayConfig, GatewayError, PromptRequest, API_KEY_VAR};
pub use prompt::{goal_sentence, render_prompt, PromptStyle};
pub use records::{
    entry_json, load_dataset, load_predictions, report_from_json, report_to_json, save_dataset,
    DatasetEntry, DatasetError, LoadedDataset, Prediction,
};

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dsl::{classify_concepts, count_commands, parse_program, ConceptClass};
use crate::emulator::{classify_failure, run, FailureLabel, Outcome};
use crate::task::{grid_size, CodeConstraint, TaskType};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate prediction for task `{0}`")]
    DuplicatePrediction(String),
    #[error("prediction for unknown task `{0}`")]
    UnknownTask(String),
    #[error("task `{id}` carries no solution code, required for this breakdown")]
    MissingCode { id: String },
    #[error("task `{id}` has an unparseable solution code: {message}")]
    BadCode { id: String, message: String },
    #[error("unknown breakdown dimension `{0}`")]
    UnknownDimension(String),
}

/// Scoring result for one task.
#[derive(Clone, Debug)]
pub struct PerTask {
    pub id: String,
    pub outcome: Outcome,
    pub failure: FailureLabel,
}

/// Aggregate metrics over a dataset, with per-task detail.
#[derive(Clone, Debug)]
pub struct MetricsReport {
    pub n: usize,
    pub format_rate: f64,
    pub no_crash_rate: f64,
    pub success_rate: f64,
    pub per_task: Vec<PerTask>,
}

fn rate(per_task: &[PerTask], field: impl Fn(&PerTask) -> bool) -> f64 {
    if per_task.is_empty() {
        return 0.0;
    }
    per_task.iter().filter(|p| field(p)).count() as f64 / per_task.len() as f64
}

/// Scores one raw model output against a task.
pub fn assess(task: &crate::task::Task, raw_output: &str) -> (Outcome, FailureLabel) {
    let outcome = match extract_code(raw_output) {
        Some(code) => run(task, &code),
        None => Outcome::format_failure(),
    };
    let failure = classify_failure(task, raw_output);
    (outcome, failure)
}

/// Scores every dataset task against its prediction. Tasks with no
/// prediction are scored as empty output; per-task rows keep dataset
/// order, and rates are unweighted means.
pub fn evaluate_predictions(
    entries: &[DatasetEntry],
    predictions: &[Prediction],
) -> Result<MetricsReport, EvalError> {
    let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
    for prediction in predictions {
        if by_id
            .insert(prediction.id.as_str(), prediction.raw_output.as_str())
            .is_some()
        {
            return Err(EvalError::DuplicatePrediction(prediction.id.clone()));
        }
    }
    let known: std::collections::BTreeSet<&str> =
        entries.iter().map(|e| e.task.id.as_str()).collect();
    for prediction in predictions {
        if !known.contains(prediction.id.as_str()) {
            return Err(EvalError::UnknownTask(prediction.id.clone()));
        }
    }

    let per_task: Vec<PerTask> = entries
        .par_iter()
        .map(|entry| {
            let raw = by_id.get(entry.task.id.as_str()).copied().unwrap_or("");
            let (outcome, failure) = assess(&entry.task, raw);
            PerTask {
                id: entry.task.id.clone(),
                outcome,
                failure,
            }
        })
        .collect();

    Ok(MetricsReport {
        n: per_task.len(),
        format_rate: rate(&per_task, |p| p.outcome.format_ok),
        no_crash_rate: rate(&per_task, |p| p.outcome.no_crash),
        success_rate: rate(&per_task, |p| p.outcome.success),
        per_task,
    })
}

/// Axes along which evaluation results can be grouped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    TaskType,
    Constraints,
    Concepts,
    Length,
    GridSize,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::TaskType,
        Dimension::Constraints,
        Dimension::Concepts,
        Dimension::Length,
        Dimension::GridSize,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Dimension::TaskType => "task_type",
            Dimension::Constraints => "constraints",
            Dimension::Concepts => "concepts",
            Dimension::Length => "length",
            Dimension::GridSize => "grid_size",
        }
    }

    pub fn from_label(label: &str) -> Result<Dimension, EvalError> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.label() == label)
            .ok_or_else(|| EvalError::UnknownDimension(label.to_string()))
    }

    /// Every group of the dimension, in presentation order.
    fn groups(self) -> Vec<&'static str> {
        match self {
            Dimension::TaskType => vec!["Find", "Draw", "Math", "Logic"],
            Dimension::Constraints => vec!["None", "AtMost", "Exactly", "StartBy", "Hybrid"],
            Dimension::Concepts => {
                vec!["Basic Actions", "Loops", "Variables", "Loops and Variables"]
            }
            Dimension::Length => vec!["Short (1-5)", "Medium (6-10)", "Long (11-17)"],
            Dimension::GridSize => vec!["<=3", "4", "5", "6", ">=7"],
        }
    }
}

fn task_type_group(task_type: TaskType) -> &'static str {
    match task_type {
        TaskType::Find => "Find",
        TaskType::Draw => "Draw",
        TaskType::Math => "Math",
        TaskType::Logic => "Logic",
    }
}

fn constraint_group(constraints: &[CodeConstraint]) -> &'static str {
    match constraints {
        [] => "None",
        [CodeConstraint::AtMost(_)] => "AtMost",
        [CodeConstraint::Exactly(_)] => "Exactly",
        [CodeConstraint::StartBy(_)] => "StartBy",
        _ => "Hybrid",
    }
}

fn concept_group(concepts: ConceptClass) -> &'static str {
    match concepts {
        ConceptClass::BasicActions => "Basic Actions",
        ConceptClass::Loops => "Loops",
        ConceptClass::Variables => "Variables",
        ConceptClass::LoopsAndVariables => "Loops and Variables",
    }
}

fn length_group(commands: u32) -> &'static str {
    match commands {
        0..=5 => "Short (1-5)",
        6..=10 => "Medium (6-10)",
        _ => "Long (11-17)",
    }
}

fn grid_size_group(size: u32) -> &'static str {
    match size {
        0..=3 => "<=3",
        4 => "4",
        5 => "5",
        6 => "6",
        _ => ">=7",
    }
}

/// One group of a breakdown table.
#[derive(Clone, Debug, PartialEq)]
pub struct BreakdownRow {
    pub group: String,
    pub n: usize,
    pub success_rate: f64,
}

/// Groups a report's per-task outcomes along a dimension. Every canonical
/// group appears even when empty, so group sizes always sum to the dataset
/// size. The concepts and length dimensions read each entry's solution code.
pub fn breakdown(
    entries: &[DatasetEntry],
    report: &MetricsReport,
    dimension: Dimension,
) -> Result<Vec<BreakdownRow>, EvalError> {
    let success_by_id: BTreeMap<&str, bool> = report
        .per_task
        .iter()
        .map(|p| (p.id.as_str(), p.outcome.success))
        .collect();

    let mut tally: BTreeMap<&'static str, (usize, usize)> = BTreeMap::new();
    for entry in entries {
        let task = &entry.task;
        let group = match dimension {
            Dimension::TaskType => task_type_group(task.task_type),
            Dimension::Constraints => constraint_group(&task.constraints),
            Dimension::Concepts | Dimension::Length => {
                let code = entry
                    .code
                    .as_deref()
                    .ok_or_else(|| EvalError::MissingCode {
                        id: task.id.clone(),
                    })?;
                let program = parse_program(code).map_err(|e| EvalError::BadCode {
                    id: task.id.clone(),
                    message: e.to_string(),
                })?;
                if dimension == Dimension::Concepts {
                    concept_group(classify_concepts(&program))
                } else {
                    length_group(count_commands(&program))
                }
            }
            Dimension::GridSize => grid_size_group(grid_size(task)),
        };
        let slot = tally.entry(group).or_default();
        slot.0 += 1;
        if success_by_id
            .get(task.id.as_str())
            .copied()
            .unwrap_or(false)
        {
            slot.1 += 1;
        }
    }

    Ok(dimension
        .groups()
        .into_iter()
        .map(|group| {
            let (n, successes) = tally.get(group).copied().unwrap_or((0, 0));
            BreakdownRow {
                group: group.to_string(),
                n,
                success_rate: if n == 0 {
                    0.0
                } else {
                    successes as f64 / n as f64
                },
            }
        })
        .collect())
}
