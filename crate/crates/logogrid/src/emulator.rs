//! Executes turtle programs on grid worlds and judges the result on the
//! format / no-crash / success ladder.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::{
    check_constraints, flatten_actions, parse_program, Command, ConstraintReport, Program,
};
use crate::harness::extract_code;
use crate::task::{Color, Edge, GridWorld, ItemKey, Pose, Position, Segment, Task};

/// Why a run crashed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrashReason {
    /// A move tried to cross a wall.
    WallHit,
    /// A move tried to enter a forbidden cell.
    ForbiddenCell,
    /// A move tried to leave the grid.
    OutOfBounds,
}

/// Crash site: which flattened command failed and why.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrashInfo {
    pub reason: CrashReason,
    pub at_command_index: usize,
}

/// Everything observable about one execution: the pose after every executed
/// command (starting with the start pose), the items collected, the draw
/// events in order, and the crash that cut the run short, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub poses: Vec<Pose>,
    pub collected: BTreeMap<ItemKey, u32>,
    pub drawn: Vec<Segment>,
    pub crash: Option<CrashInfo>,
}

impl Trace {
    pub fn final_pose(&self) -> Pose {
        *self
            .poses
            .last()
            .expect("a trace always has the start pose")
    }

    /// Cells the turtle stood on, in no particular order.
    pub fn visited(&self) -> BTreeSet<Position> {
        self.poses.iter().map(|p| p.position).collect()
    }
}

fn collect_at(world: &GridWorld, pos: Position, collected: &mut BTreeMap<ItemKey, u32>) {
    for item in world.items_at(pos) {
        *collected.entry(item.key()).or_insert(0) += item.count;
    }
}

/// Runs a parsed program on a world. The pen starts black; turns and pen
/// changes never crash; a move crashes when it would leave the grid, cross
/// a wall, or enter a forbidden cell. Items on a cell are collected the
/// first time the turtle enters it, the start cell included.
pub fn execute(program: &Program, world: &GridWorld) -> Trace {
    let mut pose = world.turtle;
    let mut pen = Color::Black;
    let mut poses = vec![pose];
    let mut visited = BTreeSet::from([pose.position]);
    let mut collected = BTreeMap::new();
    let mut drawn = Vec::new();
    let mut crash = None;
    collect_at(world, pose.position, &mut collected);

    for (index, command) in flatten_actions(program).into_iter().enumerate() {
        match command {
            Command::Forward | Command::Backward => {
                let dir = if command == Command::Forward {
                    pose.direction
                } else {
                    pose.direction.opposite()
                };
                let Some(target) = pose.position.step(dir, world.rows, world.cols) else {
                    crash = Some(CrashInfo {
                        reason: CrashReason::OutOfBounds,
                        at_command_index: index,
                    });
                    break;
                };
                if world.walls.contains(&Edge::new(pose.position, target)) {
                    crash = Some(CrashInfo {
                        reason: CrashReason::WallHit,
                        at_command_index: index,
                    });
                    break;
                }
                if world.forbidden.contains(&target) {
                    crash = Some(CrashInfo {
                        reason: CrashReason::ForbiddenCell,
                        at_command_index: index,
                    });
                    break;
                }
                drawn.push(Segment::new(pose.position, target, pen));
                pose.position = target;
                if visited.insert(target) {
                    collect_at(world, target, &mut collected);
                }
            }
            Command::Left => pose.direction = pose.direction.left(),
            Command::Right => pose.direction = pose.direction.right(),
            Command::SetColor(color) => pen = color,
        }
        poses.push(pose);
    }

    Trace {
        poses,
        collected,
        drawn,
        crash,
    }
}

/// Final color of every drawn edge: later draw events overwrite earlier
/// ones, and white edges are dropped as invisible.
pub fn visible_segments(drawn: &[Segment]) -> BTreeSet<Segment> {
    let mut by_edge: BTreeMap<Edge, Color> = BTreeMap::new();
    for seg in drawn {
        by_edge.insert(seg.edge(), seg.color);
    }
    by_edge
        .into_iter()
        .filter(|(_, color)| *color != Color::White)
        .map(|(edge, color)| Segment::new(edge.a, edge.b, color))
        .collect()
}

/// Judges a crash-free trace against the task's goal.
pub fn evaluate_goal(task: &Task, trace: &Trace) -> bool {
    debug_assert!(
        trace.crash.is_none(),
        "evaluate_goal needs a crash-free trace"
    );
    let goal = &task.goal;
    let grid = &task.grid;

    if !goal.avoid_colors.is_empty() {
        for pose in &trace.poses {
            if let Some(color) = grid.cell_colors.get(&pose.position) {
                if goal.avoid_colors.contains(color) {
                    return false;
                }
            }
        }
    }

    match goal.kind {
        crate::task::GoalKind::Find => {
            let here = trace.final_pose().position;
            grid.items_at(here).any(|item| goal.matches(item))
        }
        crate::task::GoalKind::CollectAll => grid
            .items
            .iter()
            .filter(|item| goal.matches(item))
            .all(|item| trace.collected.contains_key(&item.key())),
        crate::task::GoalKind::CollectExactly => {
            let wanted = goal.target_count.unwrap_or(0);
            let collected: u32 = trace
                .collected
                .iter()
                .filter(|((_, kind, _, color), _)| {
                    goal.target_kind.as_ref().map_or(true, |k| kind == k)
                        && goal.target_color.map_or(true, |c| *color == Some(c))
                })
                .map(|(_, count)| count)
                .sum();
            collected == wanted
        }
        crate::task::GoalKind::Draw => visible_segments(&trace.drawn) == grid.target_segments,
    }
}

/// Full judgment of a code text against a task. The three metrics form a
/// ladder: success implies no_crash implies format_ok.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub format_ok: bool,
    pub no_crash: bool,
    pub success: bool,
    /// Goal verdict; absent when the code failed to parse or crashed.
    pub goal_achieved: Option<bool>,
    /// Constraint verdicts; absent when the code failed to parse.
    pub constraint_report: Option<ConstraintReport>,
    pub crash: Option<CrashInfo>,
}

impl Outcome {
    pub(crate) fn format_failure() -> Outcome {
        Outcome {
            format_ok: false,
            no_crash: false,
            success: false,
            goal_achieved: None,
            constraint_report: None,
            crash: None,
        }
    }
}

/// Parses, executes, and judges `code` against `task`.
pub fn run(task: &Task, code: &str) -> Outcome {
    let Ok(program) = parse_program(code) else {
        return Outcome::format_failure();
    };
    let trace = execute(&program, &task.grid);
    let constraint_report = check_constraints(&program, &task.constraints);
    let no_crash = trace.crash.is_none();
    let goal_achieved = no_crash.then(|| evaluate_goal(task, &trace));
    let success = no_crash && goal_achieved == Some(true) && constraint_report.passed();
    Outcome {
        format_ok: true,
        no_crash,
        success,
        goal_achieved,
        constraint_report: Some(constraint_report),
        crash: trace.crash,
    }
}

/// Diagnosis of a model output, from most to least specific.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FailureLabel {
    Success,
    Repetition,
    Format,
    CodeConstraints,
    GridConstraints,
    GoalNotAchieved,
}

impl FailureLabel {
    pub fn label(self) -> &'static str {
        match self {
            FailureLabel::Success => "success",
            FailureLabel::Repetition => "repetition",
            FailureLabel::Format => "format",
            FailureLabel::CodeConstraints => "code_constraints",
            FailureLabel::GridConstraints => "grid_constraints",
            FailureLabel::GoalNotAchieved => "goal_not_achieved",
        }
    }
}

/// Does the code text degenerate into the same block of lines written over
/// and over? True when some block of at least `MIN_BLOCK` statement lines
/// appears at least three times in a row. Works on raw lines so that even
/// unparseable output can be diagnosed.
fn has_repetition(code: &str) -> bool {
    const MIN_BLOCK: usize = 4;
    const MIN_RUNS: usize = 3;
    let lines: Vec<&str> = code
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim_start().is_empty())
        .skip_while(|l| l.trim_start().starts_with("def Run():"))
        .collect();
    if lines.len() < MIN_BLOCK * MIN_RUNS {
        return false;
    }
    for block in MIN_BLOCK..=lines.len() / MIN_RUNS {
        for start in 0..=lines.len() - block * MIN_RUNS {
            let first = &lines[start..start + block];
            if (1..MIN_RUNS)
                .all(|run| &lines[start + run * block..start + (run + 1) * block] == first)
            {
                return true;
            }
        }
    }
    false
}

/// Classifies a raw model output for a task. Success wins over everything;
/// degenerate repetition is recognized even when the code does not parse;
/// then parse failures, crashes, constraint misses, and finally a plain
/// unachieved goal.
pub fn classify_failure(task: &Task, raw_output: &str) -> FailureLabel {
    let extracted = extract_code(raw_output);
    let code = extracted.as_deref().unwrap_or("");
    let outcome = run(task, code);
    if outcome.success {
        return FailureLabel::Success;
    }
    if extracted.is_some() && has_repetition(code) {
        return FailureLabel::Repetition;
    }
    if !outcome.format_ok {
        return FailureLabel::Format;
    }
    if !outcome.no_crash {
        return FailureLabel::GridConstraints;
    }
    if outcome.goal_achieved == Some(true) {
        return FailureLabel::CodeConstraints;
    }
    FailureLabel::GoalNotAchieved
}
