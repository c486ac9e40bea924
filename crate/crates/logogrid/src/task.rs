//! Domain types for grid-world turtle tasks: the grid itself, goals, code
//! constraints, and the task/solution pairs that datasets are made of.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::dsl::{self, Command};

/// Heading of the turtle. Rows grow downward, so `North` decreases the row
/// index and `East` increases the column index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn left(self) -> Direction {
        match self {
            Direction::North => Direction::West,
            Direction::West => Direction::South,
            Direction::South => Direction::East,
            Direction::East => Direction::North,
        }
    }

    pub fn right(self) -> Direction {
        match self {
            Direction::North => Direction::East,
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
        }
    }

    pub fn opposite(self) -> Direction {
        self.left().left()
    }

    /// (row delta, column delta) of one step in this direction.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::North => "N",
            Direction::East => "E",
            Direction::South => "S",
            Direction::West => "W",
        }
    }

    pub fn from_label(s: &str) -> Option<Direction> {
        match s {
            "N" => Some(Direction::North),
            "E" => Some(Direction::East),
            "S" => Some(Direction::South),
            "W" => Some(Direction::West),
            _ => None,
        }
    }
}

/// Cell coordinate; row 0 is the top row, column 0 the leftmost column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub row: u32,
    pub col: u32,
}

impl Position {
    pub fn new(row: u32, col: u32) -> Position {
        Position { row, col }
    }

    /// One step in `dir`, or None when the step leaves a `rows` x `cols` grid.
    pub fn step(self, dir: Direction, rows: u32, cols: u32) -> Option<Position> {
        let (dr, dc) = dir.delta();
        let row = self.row as i64 + dr;
        let col = self.col as i64 + dc;
        if row < 0 || col < 0 || row >= rows as i64 || col >= cols as i64 {
            return None;
        }
        Some(Position::new(row as u32, col as u32))
    }

    pub fn manhattan(self, other: Position) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    fn is_adjacent(self, other: Position) -> bool {
        self.manhattan(other) == 1
    }
}

/// Turtle state: where it stands and which way it faces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pose {
    pub position: Position,
    pub direction: Direction,
}

impl Pose {
    pub fn new(position: Position, direction: Direction) -> Pose {
        Pose {
            position,
            direction,
        }
    }
}

/// Pen and cell colors. The order here is also the canonical enumeration
/// order used by the code generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Red,
    Blue,
    Green,
    White,
    Black,
    Yellow,
}

impl Color {
    pub const ALL: [Color; 6] = [
        Color::Red,
        Color::Blue,
        Color::Green,
        Color::White,
        Color::Black,
        Color::Yellow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
            Color::Green => "green",
            Color::White => "white",
            Color::Black => "black",
            Color::Yellow => "yellow",
        }
    }

    pub fn from_name(s: &str) -> Option<Color> {
        Color::ALL.iter().copied().find(|c| c.name() == s)
    }
}

/// Something placed on a cell: a fruit, a shape, or any other named thing.
/// `shape` is only meaningful for `kind == "shape"`, and `count` says how
/// many of the thing sit on the cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub position: Position,
    pub kind: String,
    pub shape: Option<String>,
    pub color: Option<Color>,
    pub count: u32,
}

impl Item {
    /// Identity of the item within a grid; at most one item per key exists.
    pub fn key(&self) -> ItemKey {
        (
            self.position,
            self.kind.clone(),
            self.shape.clone(),
            self.color,
        )
    }
}

pub type ItemKey = (Position, String, Option<String>, Option<Color>);

/// Unordered pair of orthogonally adjacent cells, stored with the smaller
/// (row, col) endpoint first. Used for walls and for path bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: Position,
    pub b: Position,
}

impl Edge {
    pub fn new(a: Position, b: Position) -> Edge {
        if a <= b {
            Edge { a, b }
        } else {
            Edge { a: b, b: a }
        }
    }

    pub fn is_adjacent(self) -> bool {
        self.a.is_adjacent(self.b)
    }
}

/// A colored line between two adjacent cells, as drawn by the pen or as
/// required by a drawing goal. Endpoints are kept in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub a: Position,
    pub b: Position,
    pub color: Color,
}

impl Segment {
    pub fn new(a: Position, b: Position, color: Color) -> Segment {
        let edge = Edge::new(a, b);
        Segment {
            a: edge.a,
            b: edge.b,
            color,
        }
    }

    pub fn edge(self) -> Edge {
        Edge::new(self.a, self.b)
    }
}

/// The world a program runs in: grid dimensions, the turtle's start pose,
/// and everything placed on the grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridWorld {
    pub rows: u32,
    pub cols: u32,
    pub turtle: Pose,
    pub items: Vec<Item>,
    pub cell_colors: BTreeMap<Position, Color>,
    pub walls: BTreeSet<Edge>,
    pub forbidden: BTreeSet<Position>,
    pub target_segments: BTreeSet<Segment>,
}

impl GridWorld {
    /// Empty world with only dimensions and the turtle pose set.
    pub fn bare(rows: u32, cols: u32, turtle: Pose) -> GridWorld {
        GridWorld {
            rows,
            cols,
            turtle,
            items: Vec::new(),
            cell_colors: BTreeMap::new(),
            walls: BTreeSet::new(),
            forbidden: BTreeSet::new(),
            target_segments: BTreeSet::new(),
        }
    }

    pub fn in_bounds(&self, pos: Position) -> bool {
        pos.row < self.rows && pos.col < self.cols
    }

    pub fn items_at(&self, pos: Position) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |it| it.position == pos)
    }
}

/// What the turtle must accomplish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GoalKind {
    Find,
    CollectAll,
    CollectExactly,
    Draw,
}

impl GoalKind {
    pub fn label(self) -> &'static str {
        match self {
            GoalKind::Find => "find",
            GoalKind::CollectAll => "collect_all",
            GoalKind::CollectExactly => "collect_exactly",
            GoalKind::Draw => "draw",
        }
    }

    pub fn from_label(s: &str) -> Option<GoalKind> {
        match s {
            "find" => Some(GoalKind::Find),
            "collect_all" => Some(GoalKind::CollectAll),
            "collect_exactly" => Some(GoalKind::CollectExactly),
            "draw" => Some(GoalKind::Draw),
            _ => None,
        }
    }
}

/// Goal of a task. `target_kind`/`target_color` filter the items a find or
/// collect goal refers to, `target_count` is the exact total for
/// `CollectExactly`, and cells colored with any color in `avoid_colors`
/// must never be stood on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub kind: GoalKind,
    pub target_kind: Option<String>,
    pub target_color: Option<Color>,
    pub target_count: Option<u32>,
    pub avoid_colors: BTreeSet<Color>,
}

impl Goal {
    /// Does `item` match the goal's kind/color filter?
    pub fn matches(&self, item: &Item) -> bool {
        self.target_kind.as_ref().map_or(true, |k| item.kind == *k)
            && self.target_color.map_or(true, |c| item.color == Some(c))
    }
}

/// Restriction on the written form of a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeConstraint {
    /// At most `n` written commands.
    AtMost(u32),
    /// Exactly `n` written commands.
    Exactly(u32),
    /// The written code must begin with these commands at top level.
    StartBy(Vec<Command>),
}

impl CodeConstraint {
    pub fn kind_label(&self) -> &'static str {
        match self {
            CodeConstraint::AtMost(_) => "at_most",
            CodeConstraint::Exactly(_) => "exactly",
            CodeConstraint::StartBy(_) => "start_by",
        }
    }
}

/// Flavor of the task as presented to a solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskType {
    Find,
    Draw,
    Math,
    Logic,
}

impl TaskType {
    pub fn label(self) -> &'static str {
        match self {
            TaskType::Find => "find",
            TaskType::Draw => "draw",
            TaskType::Math => "math",
            TaskType::Logic => "logic",
        }
    }

    pub fn from_label(s: &str) -> Option<TaskType> {
        match s {
            "find" => Some(TaskType::Find),
            "draw" => Some(TaskType::Draw),
            "math" => Some(TaskType::Math),
            "logic" => Some(TaskType::Logic),
            _ => None,
        }
    }
}

/// A complete task: grid, goal, and code constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub task_type: TaskType,
    pub goal: Goal,
    pub constraints: Vec<CodeConstraint>,
    pub grid: GridWorld,
}

/// A task together with a solution's program text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskCodePair {
    pub task: Task,
    pub code: String,
}

/// Outcome of `validate_task`: empty means the task is well-formed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Longer side of the task's grid.
pub fn grid_size(task: &Task) -> u32 {
    task.grid.rows.max(task.grid.cols)
}

/// Checks structural invariants of a task and internal consistency between
/// its goal and its grid. Never fails; every problem found becomes one
/// violation line in the report.
pub fn validate_task(task: &Task) -> ValidationReport {
    let mut v = Vec::new();
    let grid = &task.grid;

    if grid.rows == 0 {
        v.push("grid must have at least one row".to_string());
    }
    if grid.cols == 0 {
        v.push("grid must have at least one column".to_string());
    }
    if grid.rows == 0 || grid.cols == 0 {
        return ValidationReport { violations: v };
    }

    let turtle = grid.turtle.position;
    if !grid.in_bounds(turtle) {
        v.push(format!(
            "turtle at ({}, {}) is outside the {}x{} grid",
            turtle.row, turtle.col, grid.rows, grid.cols
        ));
    }
    if grid.forbidden.contains(&turtle) {
        v.push(format!(
            "turtle starts on the forbidden cell ({}, {})",
            turtle.row, turtle.col
        ));
    }

    let mut seen_items = BTreeSet::new();
    for item in &grid.items {
        if !grid.in_bounds(item.position) {
            v.push(format!(
                "item `{}` at ({}, {}) is outside the grid",
                item.kind, item.position.row, item.position.col
            ));
        }
        if item.count == 0 {
            v.push(format!(
                "item `{}` at ({}, {}) has count 0",
                item.kind, item.position.row, item.position.col
            ));
        }
        if item.shape.is_some() && item.kind != "shape" {
            v.push(format!(
                "item `{}` at ({}, {}) carries a shape name but is not of kind `shape`",
                item.kind, item.position.row, item.position.col
            ));
        }
        if !seen_items.insert(item.key()) {
            v.push(format!(
                "duplicate item `{}` at ({}, {})",
                item.kind, item.position.row, item.position.col
            ));
        }
    }

    for pos in grid.cell_colors.keys() {
        if !grid.in_bounds(*pos) {
            v.push(format!(
                "colored cell ({}, {}) is outside the grid",
                pos.row, pos.col
            ));
        }
    }

    for wall in &grid.walls {
        if !grid.in_bounds(wall.a) || !grid.in_bounds(wall.b) {
            v.push(format!(
                "wall between ({}, {}) and ({}, {}) leaves the grid",
                wall.a.row, wall.a.col, wall.b.row, wall.b.col
            ));
        }
        if !wall.is_adjacent() {
            v.push(format!(
                "wall between ({}, {}) and ({}, {}) does not join adjacent cells",
                wall.a.row, wall.a.col, wall.b.row, wall.b.col
            ));
        }
    }

    for pos in &grid.forbidden {
        if !grid.in_bounds(*pos) {
            v.push(format!(
                "forbidden cell ({}, {}) is outside the grid",
                pos.row, pos.col
            ));
        }
    }

    for seg in &grid.target_segments {
        let edge = seg.edge();
        if !grid.in_bounds(edge.a) || !grid.in_bounds(edge.b) {
            v.push(format!(
                "target segment ({}, {})-({}, {}) leaves the grid",
                edge.a.row, edge.a.col, edge.b.row, edge.b.col
            ));
        }
        if !edge.is_adjacent() {
            v.push(format!(
                "target segment ({}, {})-({}, {}) does not join adjacent cells",
                edge.a.row, edge.a.col, edge.b.row, edge.b.col
            ));
        }
        if seg.color == Color::White {
            v.push(format!(
                "target segment ({}, {})-({}, {}) is white, which can never be drawn visibly",
                edge.a.row, edge.a.col, edge.b.row, edge.b.col
            ));
        }
    }

    let goal = &task.goal;
    match goal.kind {
        GoalKind::Find | GoalKind::CollectAll => {
            if goal.target_kind.is_none() {
                v.push(format!("{} goal needs a target kind", goal.kind.label()));
            }
            if goal.target_count.is_some() {
                v.push(format!(
                    "{} goal must not carry a target count",
                    goal.kind.label()
                ));
            }
            if goal.target_kind.is_some() && !grid.items.iter().any(|it| goal.matches(it)) {
                v.push("no item on the grid matches the goal target".to_string());
            }
        }
        GoalKind::CollectExactly => {
            if goal.target_kind.is_none() {
                v.push("collect_exactly goal needs a target kind".to_string());
            }
            match goal.target_count {
                None => v.push("collect_exactly goal needs a target count".to_string()),
                Some(0) => v.push("collect_exactly target count must be at least 1".to_string()),
                Some(n) => {
                    let available: u32 = grid
                        .items
                        .iter()
                        .filter(|it| goal.matches(it))
                        .map(|it| it.count)
                        .sum();
                    if available < n {
                        v.push(format!(
                            "collect_exactly asks for {n} but the grid only holds {available}"
                        ));
                    }
                }
            }
        }
        GoalKind::Draw => {
            if goal.target_kind.is_some() || goal.target_color.is_some() {
                v.push("draw goal must not carry an item target".to_string());
            }
            if goal.target_count.is_some() {
                v.push("draw goal must not carry a target count".to_string());
            }
            if grid.target_segments.is_empty() {
                v.push("draw goal needs target segments on the grid".to_string());
            }
        }
    }
    if goal.kind != GoalKind::Draw && !grid.target_segments.is_empty() {
        v.push("only draw tasks may carry target segments".to_string());
    }

    for c in &task.constraints {
        match c {
            CodeConstraint::AtMost(0) => {
                v.push("at_most constraint must allow at least one command".to_string())
            }
            CodeConstraint::Exactly(0) => {
                v.push("exactly constraint must require at least one command".to_string())
            }
            CodeConstraint::StartBy(prefix) if prefix.is_empty() => {
                v.push("start_by constraint needs a non-empty prefix".to_string())
            }
            _ => {}
        }
    }

    ValidationReport { violations: v }
}

fn push_canonical(out: &mut String, task: &Task, canonical_code: &str) {
    use std::fmt::Write;

    let grid = &task.grid;
    let _ = writeln!(out, "task_type:{}", task.task_type.label());

    let goal = &task.goal;
    let _ = write!(out, "goal:{}", goal.kind.label());
    let _ = write!(out, ",{}", goal.target_kind.as_deref().unwrap_or("-"));
    let _ = write!(out, ",{}", goal.target_color.map_or("-", |c| c.name()));
    match goal.target_count {
        Some(n) => {
            let _ = write!(out, ",{n}");
        }
        None => out.push_str(",-"),
    }
    out.push_str(",avoid:");
    for c in &goal.avoid_colors {
        let _ = write!(out, "{},", c.name());
    }
    out.push('\n');

    out.push_str("constraints:");
    for c in &task.constraints {
        match c {
            CodeConstraint::AtMost(n) => {
                let _ = write!(out, "at_most({n});");
            }
            CodeConstraint::Exactly(n) => {
                let _ = write!(out, "exactly({n});");
            }
            CodeConstraint::StartBy(prefix) => {
                out.push_str("start_by(");
                for cmd in prefix {
                    let _ = write!(out, "{},", cmd.surface());
                }
                out.push_str(");");
            }
        }
    }
    out.push('\n');

    let _ = writeln!(out, "grid:{}x{}", grid.rows, grid.cols);
    let _ = writeln!(
        out,
        "turtle:{},{},{}",
        grid.turtle.position.row,
        grid.turtle.position.col,
        grid.turtle.direction.label()
    );

    let mut items: Vec<&Item> = grid.items.iter().collect();
    items.sort();
    out.push_str("items:");
    for it in items {
        let _ = write!(
            out,
            "{},{},{},{},{},{};",
            it.position.row,
            it.position.col,
            it.kind,
            it.shape.as_deref().unwrap_or("-"),
            it.color.map_or("-", |c| c.name()),
            it.count
        );
    }
    out.push('\n');

    out.push_str("colors:");
    for (pos, color) in &grid.cell_colors {
        let _ = write!(out, "{},{},{};", pos.row, pos.col, color.name());
    }
    out.push('\n');

    out.push_str("walls:");
    for w in &grid.walls {
        let _ = write!(out, "{},{}-{},{};", w.a.row, w.a.col, w.b.row, w.b.col);
    }
    out.push('\n');

    out.push_str("forbidden:");
    for pos in &grid.forbidden {
        let _ = write!(out, "{},{};", pos.row, pos.col);
    }
    out.push('\n');

    out.push_str("segments:");
    for s in &grid.target_segments {
        let _ = write!(
            out,
            "{},{}-{},{},{};",
            s.a.row,
            s.a.col,
            s.b.row,
            s.b.col,
            s.color.name()
        );
    }
    out.push('\n');

    out.push_str("code:\n");
    out.push_str(canonical_code);
}

/// Content hash of a task/solution pair: a hex SHA-256 digest over a
/// canonical rendering that sorts every set-like collection, normalizes the
/// code to its canonical printed form, and leaves the id out entirely.
/// Two pairs hash equal exactly when they describe the same task and the
/// same program.
pub fn canonical_hash(pair: &TaskCodePair) -> Result<String, dsl::FormatError> {
    let program = dsl::parse_program(&pair.code)?;
    let canonical_code = dsl::print_program(&program);
    let mut buf = String::with_capacity(512);
    push_canonical(&mut buf, &pair.task, &canonical_code);
    let digest = Sha256::digest(buf.as_bytes());
    Ok(hex::encode(digest))
}
