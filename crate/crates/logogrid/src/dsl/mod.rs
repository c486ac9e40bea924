//! The turtle programming language: a `def Run():` header followed by move,
//! turn, and pen commands, with bounded `for i in range(n):` loops.

mod parse;

pub use parse::{parse_program, FormatError};

use crate::task::{CodeConstraint, Color};

/// One primitive command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Forward,
    Backward,
    Left,
    Right,
    SetColor(Color),
}

impl Command {
    /// The command as it appears in program text, e.g. `move_forward()`.
    pub fn surface(self) -> String {
        match self {
            Command::Forward => "move_forward()".to_string(),
            Command::Backward => "move_back()".to_string(),
            Command::Left => "turn_left()".to_string(),
            Command::Right => "turn_right()".to_string(),
            Command::SetColor(c) => format!("setpc(\"{}\")", c.name()),
        }
    }

    /// Parses a single surface command such as `turn_left()`.
    pub fn from_surface(s: &str) -> Option<Command> {
        match s {
            "move_forward()" => Some(Command::Forward),
            "move_back()" => Some(Command::Backward),
            "turn_left()" => Some(Command::Left),
            "turn_right()" => Some(Command::Right),
            _ => {
                let inner = s.strip_prefix("setpc(\"")?.strip_suffix("\")")?;
                Color::from_name(inner).map(Command::SetColor)
            }
        }
    }
}

/// One written statement: a command or a loop over a non-empty body.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statement {
    Action(Command),
    Repeat { times: u8, body: Vec<Statement> },
}

/// A whole program. An empty body prints as a lone `pass`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Vec<Statement>,
}

/// Programming concepts a program exercises, determined by whether it uses
/// loops and/or the pen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptClass {
    BasicActions,
    Loops,
    Variables,
    LoopsAndVariables,
}

impl ConceptClass {
    pub fn label(self) -> &'static str {
        match self {
            ConceptClass::BasicActions => "basic_actions",
            ConceptClass::Loops => "loops",
            ConceptClass::Variables => "variables",
            ConceptClass::LoopsAndVariables => "loops_and_variables",
        }
    }
}

/// Renders a program in canonical surface syntax: 2-space indentation,
/// double-quoted colors, one statement per line, trailing newline.
pub fn print_program(program: &Program) -> String {
    fn rec(stmts: &[Statement], depth: usize, out: &mut String) {
        for stmt in stmts {
            for _ in 0..depth {
                out.push_str("  ");
            }
            match stmt {
                Statement::Action(cmd) => {
                    out.push_str(&cmd.surface());
                    out.push('\n');
                }
                Statement::Repeat { times, body } => {
                    out.push_str(&format!("for i in range({times}):\n"));
                    rec(body, depth + 1, out);
                }
            }
        }
    }

    let mut out = String::from("def Run():\n");
    if program.body.is_empty() {
        out.push_str("  pass\n");
    } else {
        rec(&program.body, 1, &mut out);
    }
    out
}

/// Number of written statements. A loop counts as one plus its body; it is
/// never unrolled.
pub fn count_commands(program: &Program) -> u32 {
    fn rec(stmts: &[Statement]) -> u32 {
        stmts
            .iter()
            .map(|s| match s {
                Statement::Action(_) => 1,
                Statement::Repeat { body, .. } => 1 + rec(body),
            })
            .sum()
    }
    rec(&program.body)
}

/// Unrolls every loop into the flat command sequence the turtle executes.
pub fn flatten_actions(program: &Program) -> Vec<Command> {
    fn rec(stmts: &[Statement], out: &mut Vec<Command>) {
        for stmt in stmts {
            match stmt {
                Statement::Action(cmd) => out.push(*cmd),
                Statement::Repeat { times, body } => {
                    for _ in 0..*times {
                        rec(body, out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    rec(&program.body, &mut out);
    out
}

/// Concept class of a program: loops and pen commands each add a concept.
pub fn classify_concepts(program: &Program) -> ConceptClass {
    fn scan(stmts: &[Statement], loops: &mut bool, pen: &mut bool) {
        for stmt in stmts {
            match stmt {
                Statement::Action(Command::SetColor(_)) => *pen = true,
                Statement::Action(_) => {}
                Statement::Repeat { body, .. } => {
                    *loops = true;
                    scan(body, loops, pen);
                }
            }
        }
    }
    let (mut loops, mut pen) = (false, false);
    scan(&program.body, &mut loops, &mut pen);
    match (loops, pen) {
        (false, false) => ConceptClass::BasicActions,
        (true, false) => ConceptClass::Loops,
        (false, true) => ConceptClass::Variables,
        (true, true) => ConceptClass::LoopsAndVariables,
    }
}

/// Verdict for one constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub constraint: CodeConstraint,
    pub passed: bool,
}

/// Per-constraint verdicts; an empty constraint list passes trivially.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ConstraintReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Leading commands of the program at top level, stopping at the first loop.
/// A `start_by` prefix is matched against these written commands, so a loop
/// sitting at a checked position fails the match.
fn top_level_prefix(program: &Program, len: usize) -> Option<Vec<Command>> {
    let mut out = Vec::with_capacity(len);
    for stmt in program.body.iter().take(len) {
        match stmt {
            Statement::Action(cmd) => out.push(*cmd),
            Statement::Repeat { .. } => return None,
        }
    }
    (out.len() == len).then_some(out)
}

/// Checks every constraint against the written program.
pub fn check_constraints(program: &Program, constraints: &[CodeConstraint]) -> ConstraintReport {
    let count = count_commands(program);
    let checks = constraints
        .iter()
        .map(|constraint| {
            let passed = match constraint {
                CodeConstraint::AtMost(n) => count <= *n,
                CodeConstraint::Exactly(n) => count == *n,
                CodeConstraint::StartBy(prefix) => {
                    top_level_prefix(program, prefix.len()).as_deref() == Some(prefix.as_slice())
                }
            };
            ConstraintCheck {
                constraint: constraint.clone(),
                passed,
            }
        })
        .collect();
    ConstraintReport { checks }
}
