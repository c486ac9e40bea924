//! JSONL wire format for datasets, predictions, and evaluation reports.
//! Unknown fields are tolerated with a warning and survive a load/save
//! round trip; structural problems are reported with their line number.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dsl::Command;
use crate::emulator::FailureLabel;
use crate::task::{
    validate_task, CodeConstraint, Color, Direction, Edge, Goal, GoalKind, GridWorld, Item, Pose,
    Position, Segment, Task, TaskCodePair, TaskType,
};

use super::{MetricsReport, PerTask};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct TurtleRecord {
    row: u32,
    col: u32,
    dir: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ItemRecord {
    row: u32,
    col: u32,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    color: Option<String>,
    #[serde(default = "default_count")]
    count: u32,
}

fn default_count() -> u32 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CellColorRecord {
    row: u32,
    col: u32,
    color: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SegmentRecord {
    a: [u32; 2],
    b: [u32; 2],
    color: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct GridRecord {
    rows: u32,
    cols: u32,
    turtle: TurtleRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    items: Vec<ItemRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cell_colors: Vec<CellColorRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    walls: Vec<[[u32; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    forbidden: Vec<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    target_segments: Vec<SegmentRecord>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct GoalRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_color: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    avoid_colors: Vec<String>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ConstraintRecord {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TaskRecord {
    id: String,
    task_type: String,
    goal: GoalRecord,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    constraints: Vec<ConstraintRecord>,
    grid: GridRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code: Option<String>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

/// One dataset record: a task, optionally its solution code, and any
/// unknown JSON fields carried along for the round trip.
#[derive(Clone, Debug)]
pub struct DatasetEntry {
    pub task: Task,
    pub code: Option<String>,
    extra: Map<String, Value>,
    grid_extra: Map<String, Value>,
    goal_extra: Map<String, Value>,
}

impl DatasetEntry {
    pub fn from_task(task: Task) -> DatasetEntry {
        DatasetEntry {
            task,
            code: None,
            extra: Map::new(),
            grid_extra: Map::new(),
            goal_extra: Map::new(),
        }
    }

    pub fn from_pair(pair: TaskCodePair) -> DatasetEntry {
        DatasetEntry {
            code: Some(pair.code),
            ..DatasetEntry::from_task(pair.task)
        }
    }

    /// The entry as a task/solution pair, when it carries code.
    pub fn pair(&self) -> Option<TaskCodePair> {
        self.code.as_ref().map(|code| TaskCodePair {
            task: self.task.clone(),
            code: code.clone(),
        })
    }
}

/// A parsed dataset plus non-fatal warnings gathered while loading.
#[derive(Debug, Default)]
pub struct LoadedDataset {
    pub entries: Vec<DatasetEntry>,
    pub warnings: Vec<String>,
}

impl LoadedDataset {
    pub fn tasks(&self) -> Vec<Task> {
        self.entries.iter().map(|e| e.task.clone()).collect()
    }

    /// All entries as pairs; None when any entry is missing its code.
    pub fn pairs(&self) -> Option<Vec<TaskCodePair>> {
        self.entries.iter().map(DatasetEntry::pair).collect()
    }
}

fn parse_color(name: &str) -> Result<Color, String> {
    Color::from_name(name).ok_or_else(|| format!("unknown color `{name}`"))
}

fn parse_position(raw: [u32; 2]) -> Position {
    Position::new(raw[0], raw[1])
}

fn entry_from_record(record: TaskRecord) -> Result<DatasetEntry, String> {
    let task_type = TaskType::from_label(&record.task_type)
        .ok_or_else(|| format!("unknown task_type `{}`", record.task_type))?;

    let g = record.goal;
    let goal = Goal {
        kind: GoalKind::from_label(&g.kind)
            .ok_or_else(|| format!("unknown goal kind `{}`", g.kind))?,
        target_kind: g.target_kind,
        target_color: g.target_color.as_deref().map(parse_color).transpose()?,
        target_count: g.target_count,
        avoid_colors: g
            .avoid_colors
            .iter()
            .map(|c| parse_color(c))
            .collect::<Result<_, _>>()?,
    };

    let mut constraints = Vec::new();
    for c in &record.constraints {
        let constraint = match c.kind.as_str() {
            "at_most" => CodeConstraint::AtMost(c.n.ok_or("at_most constraint needs a field `n`")?),
            "exactly" => {
                CodeConstraint::Exactly(c.n.ok_or("exactly constraint needs a field `n`")?)
            }
            "start_by" => {
                let prefix = c
                    .prefix
                    .as_ref()
                    .ok_or("start_by constraint needs a field `prefix`")?;
                let commands = prefix
                    .iter()
                    .map(|s| {
                        Command::from_surface(s)
                            .ok_or_else(|| format!("unknown command `{s}` in start_by prefix"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                CodeConstraint::StartBy(commands)
            }
            other => return Err(format!("unknown constraint kind `{other}`")),
        };
        constraints.push(constraint);
    }

    let gr = record.grid;
    let direction = Direction::from_label(&gr.turtle.dir)
        .ok_or_else(|| format!("unknown direction `{}`", gr.turtle.dir))?;
    let mut grid = GridWorld::bare(
        gr.rows,
        gr.cols,
        Pose::new(Position::new(gr.turtle.row, gr.turtle.col), direction),
    );
    for it in &gr.items {
        grid.items.push(Item {
            position: Position::new(it.row, it.col),
            kind: it.kind.clone(),
            shape: it.shape.clone(),
            color: it.color.as_deref().map(parse_color).transpose()?,
            count: it.count,
        });
    }
    for cc in &gr.cell_colors {
        let pos = Position::new(cc.row, cc.col);
        if grid
            .cell_colors
            .insert(pos, parse_color(&cc.color)?)
            .is_some()
        {
            return Err(format!("cell ({}, {}) is colored twice", cc.row, cc.col));
        }
    }
    for wall in &gr.walls {
        grid.walls
            .insert(Edge::new(parse_position(wall[0]), parse_position(wall[1])));
    }
    for f in &gr.forbidden {
        grid.forbidden.insert(parse_position(*f));
    }
    for seg in &gr.target_segments {
        grid.target_segments.insert(Segment::new(
            parse_position(seg.a),
            parse_position(seg.b),
            parse_color(&seg.color)?,
        ));
    }

    Ok(DatasetEntry {
        task: Task {
            id: record.id,
            task_type,
            goal,
            constraints,
            grid,
        },
        code: record.code,
        extra: record.extra,
        grid_extra: gr.extra,
        goal_extra: g.extra,
    })
}

fn record_from_entry(entry: &DatasetEntry) -> TaskRecord {
    let task = &entry.task;
    let grid = &task.grid;
    TaskRecord {
        id: task.id.clone(),
        task_type: task.task_type.label().to_string(),
        goal: GoalRecord {
            kind: task.goal.kind.label().to_string(),
            target_kind: task.goal.target_kind.clone(),
            target_color: task.goal.target_color.map(|c| c.name().to_string()),
            target_count: task.goal.target_count,
            avoid_colors: task
                .goal
                .avoid_colors
                .iter()
                .map(|c| c.name().to_string())
                .collect(),
            extra: entry.goal_extra.clone(),
        },
        constraints: task
            .constraints
            .iter()
            .map(|c| match c {
                CodeConstraint::AtMost(n) => ConstraintRecord {
                    kind: "at_most".to_string(),
                    n: Some(*n),
                    prefix: None,
                },
                CodeConstraint::Exactly(n) => ConstraintRecord {
                    kind: "exactly".to_string(),
                    n: Some(*n),
                    prefix: None,
                },
                CodeConstraint::StartBy(prefix) => ConstraintRecord {
                    kind: "start_by".to_string(),
                    n: None,
                    prefix: Some(prefix.iter().map(|cmd| cmd.surface()).collect()),
                },
            })
            .collect(),
        grid: GridRecord {
            rows: grid.rows,
            cols: grid.cols,
            turtle: TurtleRecord {
                row: grid.turtle.position.row,
                col: grid.turtle.position.col,
                dir: grid.turtle.direction.label().to_string(),
            },
            items: grid
                .items
                .iter()
                .map(|it| ItemRecord {
                    row: it.position.row,
                    col: it.position.col,
                    kind: it.kind.clone(),
                    shape: it.shape.clone(),
                    color: it.color.map(|c| c.name().to_string()),
                    count: it.count,
                })
                .collect(),
            cell_colors: grid
                .cell_colors
                .iter()
                .map(|(pos, color)| CellColorRecord {
                    row: pos.row,
                    col: pos.col,
                    color: color.name().to_string(),
                })
                .collect(),
            walls: grid
                .walls
                .iter()
                .map(|w| [[w.a.row, w.a.col], [w.b.row, w.b.col]])
                .collect(),
            forbidden: grid.forbidden.iter().map(|p| [p.row, p.col]).collect(),
            target_segments: grid
                .target_segments
                .iter()
                .map(|s| SegmentRecord {
                    a: [s.a.row, s.a.col],
                    b: [s.b.row, s.b.col],
                    color: s.color.name().to_string(),
                })
                .collect(),
            extra: entry.grid_extra.clone(),
        },
        code: entry.code.clone(),
        extra: entry.extra.clone(),
    }
}

fn unknown_field_warnings(path: &Path, line: usize, record: &TaskRecord) -> Vec<String> {
    let mut warnings = Vec::new();
    let mut warn = |scope: &str, map: &Map<String, Value>| {
        for key in map.keys() {
            warnings.push(format!(
                "{}, line {line}: unknown {scope} field `{key}` (preserved)",
                path.display()
            ));
        }
    };
    warn("task", &record.extra);
    warn("grid", &record.grid.extra);
    warn("goal", &record.goal.extra);
    warnings
}

/// Loads a JSONL dataset. Every record must parse, convert, and pass task
/// validation; ids must be unique. Unknown fields produce warnings and are
/// preserved by `save_dataset`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<LoadedDataset, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut loaded = LoadedDataset::default();
    let mut seen_ids = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let fail = |message: String| DatasetError::Line {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let line = line.map_err(|source| DatasetError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TaskRecord =
            serde_json::from_str(&line).map_err(|e| fail(format!("malformed record: {e}")))?;
        loaded
            .warnings
            .extend(unknown_field_warnings(path, line_no, &record));
        let entry = entry_from_record(record).map_err(&fail)?;
        let report = validate_task(&entry.task);
        if !report.is_valid() {
            return Err(fail(format!(
                "invalid task `{}`: {}",
                entry.task.id,
                report.violations.join("; ")
            )));
        }
        if !seen_ids.insert(entry.task.id.clone()) {
            return Err(fail(format!("duplicate task id `{}`", entry.task.id)));
        }
        loaded.entries.push(entry);
    }
    Ok(loaded)
}

/// Writes entries as JSONL, one record per line, preserving any unknown
/// fields the entries were loaded with.
pub fn save_dataset(path: impl AsRef<Path>, entries: &[DatasetEntry]) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let fail = |source: std::io::Error| DatasetError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = BufWriter::new(File::create(path).map_err(fail)?);
    for entry in entries {
        writeln!(writer, "{}", entry_json(entry)).map_err(fail)?;
    }
    writer.flush().map_err(fail)
}

/// Serializes one entry to the JSON line `save_dataset` would write for it.
pub fn entry_json(entry: &DatasetEntry) -> String {
    let record = record_from_entry(entry);
    serde_json::to_string(&record).expect("records always serialize")
}

/// A model's answer for one task.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub raw_output: String,
}

/// Loads a predictions JSONL file.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let prediction = serde_json::from_str(&line).map_err(|e| DatasetError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("malformed prediction: {e}"),
        })?;
        out.push(prediction);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct PerTaskRecord {
    id: String,
    format: bool,
    no_crash: bool,
    success: bool,
    failure_label: String,
}

#[derive(Serialize, Deserialize)]
struct ReportRecord {
    n: usize,
    format_rate: f64,
    no_crash_rate: f64,
    success_rate: f64,
    per_task: Vec<PerTaskRecord>,
}

/// Serializes a metrics report as pretty-printed JSON.
pub fn report_to_json(report: &MetricsReport) -> String {
    let record = ReportRecord {
        n: report.n,
        format_rate: report.format_rate,
        no_crash_rate: report.no_crash_rate,
        success_rate: report.success_rate,
        per_task: report
            .per_task
            .iter()
            .map(|p| PerTaskRecord {
                id: p.id.clone(),
                format: p.outcome.format_ok,
                no_crash: p.outcome.no_crash,
                success: p.outcome.success,
                failure_label: p.failure.label().to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&record).expect("reports always serialize")
}

/// Reads back the per-task outcomes of a report written by `report_to_json`.
pub fn report_from_json(text: &str) -> Result<MetricsReport, serde_json::Error> {
    let record: ReportRecord = serde_json::from_str(text)?;
    let per_task = record
        .per_task
        .into_iter()
        .map(|p| {
            let failure = match p.failure_label.as_str() {
                "success" => FailureLabel::Success,
                "repetition" => FailureLabel::Repetition,
                "format" => FailureLabel::Format,
                "code_constraints" => FailureLabel::CodeConstraints,
                "grid_constraints" => FailureLabel::GridConstraints,
                _ => FailureLabel::GoalNotAchieved,
            };
            PerTask {
                id: p.id,
                outcome: crate::emulator::Outcome {
                    format_ok: p.format,
                    no_crash: p.no_crash,
                    success: p.success,
                    goal_achieved: None,
                    constraint_report: None,
                    crash: None,
                },
                failure,
            }
        })
        .collect();
    Ok(MetricsReport {
        n: record.n,
        format_rate: record.format_rate,
        no_crash_rate: record.no_crash_rate,
        success_rate: record.success_rate,
        per_task,
    })
}
