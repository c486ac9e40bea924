//! Turns a task into the text prompt a model sees, either as natural
//! language sentences or as an ASCII picture of the grid. Rendering is
//! deterministic: the same task and style always produce the same bytes.
//!
//! The prompt deliberately never contains the literal program header, so
//! that code extraction applied to a prompt-plus-answer transcript can
//! only latch onto the model's own code.

use std::collections::{BTreeMap, BTreeSet};

use crate::task::{CodeConstraint, Color, Direction, GoalKind, GridWorld, Item, Position, Task};

/// How the grid is described inside the prompt.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PromptStyle {
    Nl,
    Ascii,
}

impl PromptStyle {
    pub fn label(self) -> &'static str {
        match self {
            PromptStyle::Nl => "nl",
            PromptStyle::Ascii => "ascii",
        }
    }

    pub fn from_label(label: &str) -> Option<PromptStyle> {
        match label {
            "nl" => Some(PromptStyle::Nl),
            "ascii" => Some(PromptStyle::Ascii),
            _ => None,
        }
    }
}

const PREAMBLE: &str = "You are presented with a visual programming task involving a goal, \
a grid, a turtle, various items (or lines). You need to write Python code that enables the \
turtle to accomplish the goal within the grid.";

const GRID_PROPERTIES: &str = "\
#### Grid properties:
- The grid is a rectangle of cells. Rows are numbered from top to bottom and columns from left to right, both starting at 0.
- The turtle occupies one cell and faces north, east, south, or west.
- Moving across the grid border, through a wall, or onto a forbidden cell makes the turtle crash.
- The turtle picks up every item lying on a cell it enters, including its starting cell.
- Each move paints the line between the two cells in the current pen color; the pen starts black.
- Painting the same line again replaces its color, and lines painted white are invisible.";

const AVAILABLE_FUNCTIONS: &str = "\
#### Available functions:
- move_forward(): move one cell forward in the facing direction.
- move_back(): move one cell backward while keeping the facing direction.
- turn_left(): turn 90 degrees to the left, staying on the same cell.
- turn_right(): turn 90 degrees to the right, staying on the same cell.
- setpc(\"<color>\"): set the pen color; valid colors are \"red\", \"blue\", \"green\", \"white\", \"black\" and \"yellow\".
- for i in range(n): repeat the indented block n times, where n is between 2 and 10.

Write the solution as one Python function named Run with no parameters, its body indented consistently, one command per line.";

const INSTRUCTION: &str =
    "Now, write a correct Python code that successfully solves the following task.";

fn direction_word(dir: Direction) -> &'static str {
    match dir {
        Direction::North => "north",
        Direction::East => "east",
        Direction::South => "south",
        Direction::West => "west",
    }
}

fn direction_arrow(dir: Direction) -> char {
    match dir {
        Direction::North => '^',
        Direction::East => '>',
        Direction::South => 'v',
        Direction::West => '<',
    }
}

fn color_cell_letter(color: Color) -> char {
    match color {
        Color::Red => 'R',
        Color::Blue => 'B',
        Color::Green => 'G',
        Color::White => 'W',
        Color::Black => 'K',
        Color::Yellow => 'Y',
    }
}

/// Naive English plural of the final word of a noun phrase.
fn plural(phrase: &str) -> String {
    let chars: Vec<char> = phrase.chars().collect();
    if let Some(&last) = chars.last() {
        if last == 'y' {
            let before = chars.len().checked_sub(2).map(|i| chars[i]);
            if !matches!(before, Some('a' | 'e' | 'i' | 'o' | 'u')) {
                return format!("{}ies", &phrase[..phrase.len() - 1]);
            }
        }
        if matches!(last, 's' | 'x' | 'z') || phrase.ends_with("ch") || phrase.ends_with("sh") {
            return format!("{phrase}es");
        }
    }
    format!("{phrase}s")
}

fn counted(n: u32, phrase: &str) -> String {
    if n == 1 {
        format!("1 {phrase}")
    } else {
        format!("{n} {}", plural(phrase))
    }
}

/// Joins names as prose: "red", "red and blue", "red, blue and green".
fn prose_list(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [head @ .., last] => format!("{} and {last}", head.join(", ")),
    }
}

/// The item's everyday name: shapes go by their shape, everything else by kind.
fn item_name(item: &Item) -> String {
    match (&item.shape, item.kind.as_str()) {
        (Some(shape), "shape") => shape.clone(),
        _ => item.kind.clone(),
    }
}

fn item_phrase(item: &Item) -> String {
    let name = item_name(item);
    match item.color {
        Some(color) => format!("{} {name}", color.name()),
        None => name,
    }
}

fn article(phrase: &str) -> &'static str {
    match phrase.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn quantified_item(item: &Item) -> String {
    let phrase = item_phrase(item);
    if item.count == 1 {
        format!("{} {phrase}", article(&phrase))
    } else {
        counted(item.count, &phrase)
    }
}

fn cell_ref(position: Position) -> String {
    format!("row {}, column {}", position.row, position.col)
}

/// The goal line of the prompt, e.g. "Find the strawberry with just 6 commands."
pub fn goal_sentence(task: &Task) -> String {
    let goal = &task.goal;
    let noun = || {
        let kind = goal
            .target_kind
            .clone()
            .unwrap_or_else(|| "item".to_string());
        match goal.target_color {
            Some(color) => format!("{} {kind}", color.name()),
            None => kind,
        }
    };
    let mut sentence = match goal.kind {
        GoalKind::Find => format!("Find the {}", noun()),
        GoalKind::CollectAll => format!("Collect all {}", plural(&noun())),
        GoalKind::CollectExactly => format!(
            "Collect exactly {}",
            counted(goal.target_count.unwrap_or(1), &noun())
        ),
        GoalKind::Draw => {
            let colors: BTreeSet<Color> =
                task.grid.target_segments.iter().map(|s| s.color).collect();
            let names: Vec<String> = colors.iter().map(|c| c.name().to_string()).collect();
            if names.len() == 1 {
                format!("Draw the picture in {}", names[0])
            } else {
                format!("Draw the picture using the colors {}", prose_list(&names))
            }
        }
    };
    for constraint in &task.constraints {
        match constraint {
            CodeConstraint::AtMost(n) => {
                sentence.push_str(&format!(" with just {}", counted(*n, "command")));
            }
            CodeConstraint::Exactly(n) => {
                sentence.push_str(&format!(" with exactly {}", counted(*n, "command")));
            }
            CodeConstraint::StartBy(prefix) => {
                let commands: Vec<String> = prefix.iter().map(|c| c.surface()).collect();
                sentence.push_str(&format!(
                    ", using a code starting with {}",
                    commands.join(", ")
                ));
            }
        }
    }
    if !goal.avoid_colors.is_empty() {
        let names: Vec<String> = goal
            .avoid_colors
            .iter()
            .map(|c| c.name().to_string())
            .collect();
        let word = if names.len() == 1 { "color" } else { "colors" };
        sentence.push_str(&format!(
            " without standing on the {word} {}",
            prose_list(&names)
        ));
    }
    sentence.push('.');
    sentence
}

fn segment_lines(grid: &GridWorld) -> Vec<String> {
    let mut lines = Vec::new();
    if grid.target_segments.is_empty() {
        return lines;
    }
    lines.push("The picture to draw consists of these lines:".to_string());
    for segment in &grid.target_segments {
        lines.push(format!(
            "- a {} line from {} to {}",
            segment.color.name(),
            cell_ref(segment.a),
            cell_ref(segment.b)
        ));
    }
    lines
}

fn nl_task_body(task: &Task) -> String {
    let grid = &task.grid;
    let mut lines = Vec::new();
    lines.push(format!(
        "The grid has {} and {}.",
        counted(grid.rows, "row"),
        counted(grid.cols, "column")
    ));
    lines.push(format!(
        "The turtle is at {}, facing {}.",
        cell_ref(grid.turtle.position),
        direction_word(grid.turtle.direction)
    ));
    for item in &grid.items {
        let verb = if item.count == 1 { "is" } else { "are" };
        lines.push(format!(
            "There {verb} {} at {}.",
            quantified_item(item),
            cell_ref(item.position)
        ));
    }
    for (position, color) in &grid.cell_colors {
        lines.push(format!(
            "The cell at {} is colored {}.",
            cell_ref(*position),
            color.name()
        ));
    }
    for wall in &grid.walls {
        lines.push(format!(
            "There is a wall between {} and {}.",
            cell_ref(wall.a),
            cell_ref(wall.b)
        ));
    }
    for position in &grid.forbidden {
        lines.push(format!("The cell at {} is forbidden.", cell_ref(*position)));
    }
    lines.extend(segment_lines(grid));
    lines.join("\n")
}

struct CellView<'a> {
    turtle: bool,
    forbidden: bool,
    items: Vec<&'a Item>,
    color: Option<Color>,
}

fn cell_view<'a>(grid: &'a GridWorld, position: Position) -> CellView<'a> {
    CellView {
        turtle: grid.turtle.position == position,
        forbidden: grid.forbidden.contains(&position),
        items: grid
            .items
            .iter()
            .filter(|item| item.position == position)
            .collect(),
        color: grid.cell_colors.get(&position).copied(),
    }
}

/// Picks one lowercase marker per distinct item name, preferring letters
/// from the name itself.
fn item_letters(grid: &GridWorld) -> BTreeMap<String, char> {
    let mut letters = BTreeMap::new();
    let mut used = BTreeSet::new();
    for item in &grid.items {
        let name = item_name(item);
        if letters.contains_key(&name) {
            continue;
        }
        let from_name = name
            .chars()
            .filter(char::is_ascii_alphabetic)
            .map(|c| c.to_ascii_lowercase())
            .find(|c| !used.contains(c) && *c != 'v');
        let letter = from_name
            .or_else(|| ('a'..='z').find(|c| !used.contains(c) && *c != 'v'))
            .unwrap_or('?');
        used.insert(letter);
        letters.insert(name, letter);
    }
    letters
}

fn ascii_task_body(task: &Task) -> String {
    let grid = &task.grid;
    let rows = grid.rows as usize;
    let cols = grid.cols as usize;
    let letters = item_letters(grid);

    let mut canvas = vec![vec![' '; 2 * cols + 1]; 2 * rows + 1];
    for r in 0..=rows {
        for c in 0..=cols {
            canvas[2 * r][2 * c] = '+';
        }
    }
    for c in 0..cols {
        canvas[0][2 * c + 1] = '-';
        canvas[2 * rows][2 * c + 1] = '-';
    }
    for r in 0..rows {
        canvas[2 * r + 1][0] = '|';
        canvas[2 * r + 1][2 * cols] = '|';
    }
    for wall in &grid.walls {
        let (a, b) = (wall.a, wall.b);
        if a.row == b.row {
            canvas[2 * a.row as usize + 1][2 * b.col as usize] = '|';
        } else {
            canvas[2 * b.row as usize][2 * a.col as usize + 1] = '-';
        }
    }

    let mut seen_colors = BTreeSet::new();
    let mut seen_forbidden = false;
    let mut seen_empty = false;
    let mut notes = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let position = Position::new(r as u32, c as u32);
            let view = cell_view(grid, position);
            let mut covered: Vec<String> = Vec::new();
            let marker = if view.turtle {
                if view.forbidden {
                    covered.push("is forbidden".to_string());
                }
                covered.extend(hidden_item_clause(&view.items));
                if let Some(color) = view.color {
                    covered.push(format!("is colored {}", color.name()));
                }
                direction_arrow(grid.turtle.direction)
            } else if view.forbidden {
                seen_forbidden = true;
                covered.extend(hidden_item_clause(&view.items));
                if let Some(color) = view.color {
                    covered.push(format!("is colored {}", color.name()));
                }
                '#'
            } else if let Some(first) = view.items.first() {
                covered.extend(hidden_item_clause(&view.items[1..]));
                if let Some(color) = view.color {
                    covered.push(format!("is colored {}", color.name()));
                }
                letters[&item_name(first)]
            } else if let Some(color) = view.color {
                seen_colors.insert(color);
                color_cell_letter(color)
            } else {
                seen_empty = true;
                '.'
            };
            canvas[2 * r + 1][2 * c + 1] = marker;
            if !covered.is_empty() {
                notes.push(format!(
                    "- the cell at {} also {}",
                    cell_ref(position),
                    covered.join(" and ")
                ));
            }
        }
    }

    let mut lines = Vec::new();
    lines.push(format!(
        "The grid has {} and {}.",
        counted(grid.rows, "row"),
        counted(grid.cols, "column")
    ));
    for row in &canvas {
        lines.push(row.iter().collect());
    }

    lines.push("Legend:".to_string());
    lines.push(format!(
        "- `{}` = the turtle, facing {}",
        direction_arrow(grid.turtle.direction),
        direction_word(grid.turtle.direction)
    ));
    if seen_forbidden {
        lines.push("- `#` = forbidden cell".to_string());
    }
    for (name, letter) in &letters {
        lines.push(format!("- `{letter}` = {name}"));
    }
    for color in &seen_colors {
        lines.push(format!(
            "- `{}` = cell colored {}",
            color_cell_letter(*color),
            color.name()
        ));
    }
    if seen_empty {
        lines.push("- `.` = empty cell".to_string());
    }
    lines.push("- `+`, `-`, `|` = grid corners, borders and walls".to_string());

    for item in &grid.items {
        if item.count > 1 {
            lines.push(format!(
                "Note: `{}` at {} stands for {}.",
                letters[&item_name(item)],
                cell_ref(item.position),
                counted(item.count, &item_phrase(item))
            ));
        }
    }
    for note in notes {
        lines.push(format!("Note: {}.", note.trim_start_matches("- ")));
    }
    lines.extend(segment_lines(&task.grid));
    lines.join("\n")
}

fn hidden_item_clause(items: &[&Item]) -> Option<String> {
    if items.is_empty() {
        return None;
    }
    let phrases: Vec<String> = items.iter().map(|item| quantified_item(item)).collect();
    Some(format!("holds {}", prose_list(&phrases)))
}

/// Renders the full model prompt for a task.
pub fn render_prompt(task: &Task, style: PromptStyle) -> String {
    let body = match style {
        PromptStyle::Nl => nl_task_body(task),
        PromptStyle::Ascii => ascii_task_body(task),
    };
    format!(
        "{PREAMBLE}\n\n{GRID_PROPERTIES}\n\n{AVAILABLE_FUNCTIONS}\n\n{INSTRUCTION}\n\n\
### Task:\n{body}\n\n### Goal:\n{}\n\n### Correct code:\n",
        goal_sentence(task)
    )
}
