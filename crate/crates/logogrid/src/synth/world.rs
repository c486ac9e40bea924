//! Builds a grid world in which a given program solves a given goal: the
//! program is walked over an empty grid from a seeded start pose, goal
//! content is laid along its trajectory, and distractors fill the rest
//! without ever touching cells or edges the trajectory uses.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dsl::{flatten_actions, Command, Program};
use crate::emulator::{execute, visible_segments};
use crate::task::{Color, Direction, Edge, Goal, GoalKind, GridWorld, Item, Pose, Position};

use super::SynthParams;

/// No grid within the allowed dimensions can host the trajectory (or, for
/// draw goals, the program draws nothing visible).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unsatisfiable;

impl fmt::Display for Unsatisfiable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("no grid world satisfies the code and goal")
    }
}

impl std::error::Error for Unsatisfiable {}

pub const FRUIT_KINDS: [&str; 4] = ["strawberry", "lemon", "apple", "cherry"];
pub const SHAPE_NAMES: [&str; 4] = ["triangle", "circle", "rectangle", "star"];

/// Cells the program passes through, relative to a start at (0, 0) with
/// the given heading. Offsets may be negative.
fn relative_path(program: &Program, start: Direction) -> Vec<(i64, i64)> {
    let mut direction = start;
    let (mut row, mut col) = (0i64, 0i64);
    let mut cells = vec![(row, col)];
    for command in flatten_actions(program) {
        match command {
            Command::Forward => {
                let (dr, dc) = direction.delta();
                row += dr;
                col += dc;
                cells.push((row, col));
            }
            Command::Backward => {
                let (dr, dc) = direction.opposite().delta();
                row += dr;
                col += dc;
                cells.push((row, col));
            }
            Command::Left => direction = direction.left(),
            Command::Right => direction = direction.right(),
            Command::SetColor(_) => {}
        }
    }
    cells
}

/// Every start pose from which the whole trajectory stays on the grid.
fn feasible_starts(program: &Program, rows: u32, cols: u32) -> Vec<Pose> {
    let mut starts = Vec::new();
    for direction in Direction::ALL {
        let path = relative_path(program, direction);
        let min_row = path.iter().map(|p| p.0).min().unwrap_or(0);
        let max_row = path.iter().map(|p| p.0).max().unwrap_or(0);
        let min_col = path.iter().map(|p| p.1).min().unwrap_or(0);
        let max_col = path.iter().map(|p| p.1).max().unwrap_or(0);
        for row in 0..rows as i64 {
            if row + min_row < 0 || row + max_row >= rows as i64 {
                continue;
            }
            for col in 0..cols as i64 {
                if col + min_col < 0 || col + max_col >= cols as i64 {
                    continue;
                }
                starts.push(Pose::new(Position::new(row as u32, col as u32), direction));
            }
        }
    }
    starts
}

fn splits_into(total: u32, parts: usize, rng: &mut impl Rng) -> Vec<u32> {
    if parts <= 1 {
        return vec![total];
    }
    let mut cuts = BTreeSet::new();
    while cuts.len() < parts - 1 {
        cuts.insert(rng.gen_range(1..total));
    }
    let mut previous = 0;
    let mut sizes = Vec::with_capacity(parts);
    for cut in cuts {
        sizes.push(cut - previous);
        previous = cut;
    }
    sizes.push(total - previous);
    sizes
}

fn make_item(kind: &str, rng: &mut impl Rng) -> (String, Option<String>) {
    if kind == "shape" {
        let shape = SHAPE_NAMES[rng.gen_range(0..SHAPE_NAMES.len())];
        (kind.to_string(), Some(shape.to_string()))
    } else {
        (kind.to_string(), None)
    }
}

fn place_goal_items(
    grid: &mut GridWorld,
    goal: &Goal,
    visited: &[Position],
    final_cell: Position,
    rng: &mut impl Rng,
) -> Result<(), Unsatisfiable> {
    let kind = goal.target_kind.as_deref().ok_or(Unsatisfiable)?;
    match goal.kind {
        GoalKind::Find => {
            let (kind, shape) = make_item(kind, rng);
            grid.items.push(Item {
                position: final_cell,
                kind,
                shape,
                color: goal.target_color,
                count: 1,
            });
        }
        GoalKind::CollectAll => {
            let mut cells = visited.to_vec();
            cells.shuffle(rng);
            let take = rng.gen_range(1..=cells.len().min(5));
            for cell in cells.into_iter().take(take) {
                let (kind, shape) = make_item(kind, rng);
                grid.items.push(Item {
                    position: cell,
                    kind,
                    shape,
                    color: goal.target_color,
                    count: 1,
                });
            }
        }
        GoalKind::CollectExactly => {
            let total = goal.target_count.filter(|t| *t > 0).ok_or(Unsatisfiable)?;
            let mut cells = visited.to_vec();
            cells.shuffle(rng);
            let parts = rng.gen_range(1..=cells.len().min(total as usize).min(5));
            for (cell, count) in cells.into_iter().zip(splits_into(total, parts, rng)) {
                let (kind, shape) = make_item(kind, rng);
                grid.items.push(Item {
                    position: cell,
                    kind,
                    shape,
                    color: goal.target_color,
                    count,
                });
            }
        }
        GoalKind::Draw => unreachable!("draw goals place segments, not items"),
    }
    Ok(())
}

/// A decoy item that must not satisfy the goal filter when the goal is
/// about reaching or clearing matching items.
fn make_decoy(goal: &Goal, position: Position, rng: &mut impl Rng) -> Option<Item> {
    for _ in 0..8 {
        let item = if rng.gen_bool(0.5) {
            Item {
                position,
                kind: FRUIT_KINDS[rng.gen_range(0..FRUIT_KINDS.len())].to_string(),
                shape: None,
                color: None,
                count: rng.gen_range(1..=5),
            }
        } else {
            Item {
                position,
                kind: "shape".to_string(),
                shape: Some(SHAPE_NAMES[rng.gen_range(0..SHAPE_NAMES.len())].to_string()),
                color: Some(Color::ALL[rng.gen_range(0..Color::ALL.len())]),
                count: 1,
            }
        };
        let must_not_match = matches!(goal.kind, GoalKind::Find | GoalKind::CollectAll);
        if !(must_not_match && goal.matches(&item)) {
            return Some(item);
        }
    }
    None
}

/// Edges the trajectory actually crosses; walls must stay off these.
fn path_edges(poses: &[Pose]) -> BTreeSet<Edge> {
    poses
        .windows(2)
        .filter(|w| w[0].position != w[1].position)
        .map(|w| Edge::new(w[0].position, w[1].position))
        .collect()
}

fn all_edges(rows: u32, cols: u32) -> Vec<Edge> {
    let mut edges = Vec::new();
    for row in 0..rows {
        for col in 0..cols {
            let here = Position::new(row, col);
            if col + 1 < cols {
                edges.push(Edge::new(here, Position::new(row, col + 1)));
            }
            if row + 1 < rows {
                edges.push(Edge::new(here, Position::new(row + 1, col)));
            }
        }
    }
    edges
}

/// Builds a world the program solves for the goal: seeded dimensions and
/// start pose, goal content on the trajectory, then walls, forbidden
/// cells, colored cells, and decoy items scattered off it.
pub fn build_world(
    code: &Program,
    goal: &Goal,
    params: &SynthParams,
    rng: &mut impl Rng,
) -> Result<GridWorld, Unsatisfiable> {
    let rows = rng.gen_range(params.grid_rows.clone());
    let cols = rng.gen_range(params.grid_cols.clone());
    let starts = feasible_starts(code, rows, cols);
    if starts.is_empty() {
        return Err(Unsatisfiable);
    }
    let start = starts[rng.gen_range(0..starts.len())];

    let mut grid = GridWorld::bare(rows, cols, start);
    let trace = execute(code, &grid);
    debug_assert!(trace.crash.is_none(), "bare-grid trajectory cannot crash");
    let visited: Vec<Position> = trace.visited().into_iter().collect();
    let final_cell = trace.final_pose().position;

    if goal.kind == GoalKind::Draw {
        grid.target_segments = visible_segments(&trace.drawn);
        if grid.target_segments.is_empty() {
            return Err(Unsatisfiable);
        }
    } else {
        place_goal_items(&mut grid, goal, &visited, final_cell, rng)?;
    }

    let visited_set: BTreeSet<Position> = visited.iter().copied().collect();
    let mut free: Vec<Position> = (0..rows)
        .flat_map(|row| (0..cols).map(move |col| Position::new(row, col)))
        .filter(|cell| !visited_set.contains(cell))
        .collect();

    for &color in &goal.avoid_colors {
        if free.is_empty() {
            break;
        }
        let paint = rng.gen_range(1..=free.len().min(3));
        for _ in 0..paint {
            let cell = free.remove(rng.gen_range(0..free.len()));
            grid.cell_colors.insert(cell, color);
        }
    }

    for cell in free {
        if !rng.gen_bool(params.distractor_density) {
            continue;
        }
        match rng.gen_range(0..3) {
            0 => {
                grid.forbidden.insert(cell);
            }
            1 => {
                let color = Color::ALL[rng.gen_range(0..Color::ALL.len())];
                grid.cell_colors.insert(cell, color);
            }
            _ => {
                if let Some(item) = make_decoy(goal, cell, rng) {
                    grid.items.push(item);
                }
            }
        }
    }

    let crossed = path_edges(&trace.poses);
    for edge in all_edges(rows, cols) {
        if !crossed.contains(&edge) && rng.gen_bool(params.distractor_density) {
            grid.walls.insert(edge);
        }
    }

    Ok(grid)
}
