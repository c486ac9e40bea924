//! Task perturbations for probing what makes a task hard: dropping code
//! constraints, dropping grid obstacles, or parking the turtle right next
//! to its target. Ops compose and are applied in a fixed A, B, C order;
//! an op whose component is absent leaves the task unchanged.

use rand::Rng;

use crate::task::{Direction, Edge, GoalKind, Item, Pose, Position, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PerturbationOp {
    /// A: clear every code constraint.
    RemoveCodeConstraints,
    /// B: clear walls and forbidden cells.
    RemoveGridConstraints,
    /// C: move the turtle adjacent to the nearest matching item, facing it.
    SimplifySpatial,
}

impl PerturbationOp {
    pub const ALL: [PerturbationOp; 3] = [
        PerturbationOp::RemoveCodeConstraints,
        PerturbationOp::RemoveGridConstraints,
        PerturbationOp::SimplifySpatial,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PerturbationOp::RemoveCodeConstraints => "A",
            PerturbationOp::RemoveGridConstraints => "B",
            PerturbationOp::SimplifySpatial => "C",
        }
    }

    pub fn from_label(label: &str) -> Option<PerturbationOp> {
        PerturbationOp::ALL
            .into_iter()
            .find(|op| op.label() == label)
    }
}

fn nearest_matching_item(task: &Task) -> Option<&Item> {
    task.grid
        .items
        .iter()
        .filter(|item| task.goal.matches(item))
        .min_by_key(|item| {
            (
                task.grid.turtle.position.manhattan(item.position),
                item.position,
            )
        })
}

fn facing(from: Position, to: Position) -> Direction {
    if to.row < from.row {
        Direction::North
    } else if to.row > from.row {
        Direction::South
    } else if to.col > from.col {
        Direction::East
    } else {
        Direction::West
    }
}

fn simplify_spatial(task: &mut Task, rng: &mut impl Rng) {
    if task.goal.kind == GoalKind::Draw {
        return;
    }
    let Some(target) = nearest_matching_item(task).map(|item| item.position) else {
        return;
    };
    let grid = &task.grid;
    let candidates: Vec<Position> = Direction::ALL
        .into_iter()
        .filter_map(|dir| target.step(dir, grid.rows, grid.cols))
        .filter(|cell| !grid.forbidden.contains(cell))
        .filter(|cell| {
            grid.cell_colors
                .get(cell)
                .map_or(true, |color| !task.goal.avoid_colors.contains(color))
        })
        .collect();
    if candidates.is_empty() {
        return;
    }
    let unwalled: Vec<Position> = candidates
        .iter()
        .copied()
        .filter(|cell| !grid.walls.contains(&Edge::new(*cell, target)))
        .collect();
    let pool = if unwalled.is_empty() {
        &candidates
    } else {
        &unwalled
    };
    let cell = pool[rng.gen_range(0..pool.len())];
    task.grid.turtle = Pose::new(cell, facing(cell, target));
}

/// Applies the requested ops to a copy of the task, always in A, B, C
/// order regardless of how `ops` is arranged.
pub fn perturb(task: &Task, ops: &[PerturbationOp], rng: &mut impl Rng) -> Task {
    let mut out = task.clone();
    for op in PerturbationOp::ALL {
        if !ops.contains(&op) {
            continue;
        }
        match op {
            PerturbationOp::RemoveCodeConstraints => out.constraints.clear(),
            PerturbationOp::RemoveGridConstraints => {
                out.grid.walls.clear();
                out.grid.forbidden.clear();
            }
            PerturbationOp::SimplifySpatial => simplify_spatial(&mut out, rng),
        }
    }
    out
}
