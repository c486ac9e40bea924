//! Text-to-AST parsing for the turtle language. The parser is strict about
//! vocabulary (only the five commands and `for i in range(n):` loops) but
//! accepts any consistent indentation scheme; the canonical printer always
//! emits two spaces per level.

use super::{Command, Program, Statement};

/// Why a program text was rejected. Line and column are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        column,
        message: message.into(),
    }
}

struct Line<'a> {
    no: usize,
    indent: usize,
    content: &'a str,
}

/// Parses program text into an AST.
///
/// Accepted: a `def Run():` header at column 1, then one statement per line.
/// Loop bodies must be indented deeper than their header and consistently
/// within a block. Blank lines and trailing whitespace are ignored; comments,
/// unknown calls, tabs in indentation, and loop counts outside 2..=10 are
/// rejected. A body consisting of a single `pass` denotes the empty program.
pub fn parse_program(text: &str) -> Result<Program, FormatError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = raw.trim_end();
        let content = line.trim_start();
        if content.is_empty() {
            continue;
        }
        let indent = line.len() - content.len();
        if let Some(tab) = line[..indent].find('\t') {
            return Err(err(no, tab + 1, "indentation must use spaces, not tabs"));
        }
        lines.push(Line {
            no,
            indent,
            content,
        });
    }

    let Some(first) = lines.first() else {
        return Err(err(1, 1, "missing `def Run():` header"));
    };
    if first.content != "def Run():" {
        return Err(err(
            first.no,
            first.indent + 1,
            "program must start with `def Run():`",
        ));
    }
    if first.indent != 0 {
        return Err(err(first.no, 1, "`def Run():` must start at column 1"));
    }

    let body_lines = &lines[1..];
    let Some(first_stmt) = body_lines.first() else {
        return Err(err(first.no, 1, "`def Run():` needs an indented body"));
    };
    if body_lines.len() == 1 && first_stmt.content == "pass" {
        if first_stmt.indent == 0 {
            return Err(err(first_stmt.no, 1, "the body must be indented"));
        }
        return Ok(Program::default());
    }
    for line in body_lines {
        if line.content == "pass" {
            return Err(err(
                line.no,
                line.indent + 1,
                "`pass` is only allowed as the sole statement of an empty body",
            ));
        }
    }

    let mut pos = 0;
    let body = parse_block(body_lines, &mut pos, 0)?;
    if pos < body_lines.len() {
        let line = &body_lines[pos];
        return Err(err(
            line.no,
            line.indent + 1,
            "unindent does not match any enclosing block",
        ));
    }
    Ok(Program { body })
}

fn parse_block(
    lines: &[Line],
    pos: &mut usize,
    parent_indent: usize,
) -> Result<Vec<Statement>, FormatError> {
    let first = &lines[*pos];
    if first.indent <= parent_indent {
        return Err(err(
            first.no,
            first.indent + 1,
            "expected an indented block",
        ));
    }
    let block_indent = first.indent;
    let mut out = Vec::new();
    while *pos < lines.len() {
        let line = &lines[*pos];
        if line.indent < block_indent {
            break; // dedent; an enclosing block (or the caller) takes over
        }
        if line.indent > block_indent {
            return Err(err(
                line.no,
                line.indent + 1,
                "unexpected indentation level",
            ));
        }
        if let Some(times) = parse_for_header(line)? {
            *pos += 1;
            if *pos >= lines.len() || lines[*pos].indent <= block_indent {
                return Err(err(line.no, line.indent + 1, "loop body is empty"));
            }
            let body = parse_block(lines, pos, block_indent)?;
            out.push(Statement::Repeat { times, body });
        } else {
            out.push(Statement::Action(parse_command_line(line)?));
            *pos += 1;
        }
    }
    Ok(out)
}

fn parse_for_header(line: &Line) -> Result<Option<u8>, FormatError> {
    let c = line.content;
    if c != "for" && !c.starts_with("for ") {
        return Ok(None);
    }
    let col = |offset: usize| line.indent + offset + 1;
    let rest = c
        .strip_prefix("for ")
        .ok_or_else(|| err(line.no, col(3), "malformed loop header"))?;
    let rest = rest
        .strip_prefix("i ")
        .ok_or_else(|| err(line.no, col(4), "the loop variable must be `i`"))?;
    let rest = rest
        .strip_prefix("in ")
        .ok_or_else(|| err(line.no, col(6), "malformed loop header; expected `in`"))?;
    let rest = rest
        .strip_prefix("range(")
        .ok_or_else(|| err(line.no, col(9), "malformed loop header; expected `range(`"))?;
    let digits_offset = c.len() - rest.len();
    let close = rest
        .find(')')
        .ok_or_else(|| err(line.no, col(c.len() - 1), "loop header is missing `)`"))?;
    let digits = &rest[..close];
    if &rest[close + 1..] != ":" {
        return Err(err(
            line.no,
            col(digits_offset + close + 1),
            "loop header must end with `):`",
        ));
    }
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(err(
            line.no,
            col(digits_offset),
            "loop count must be a number",
        ));
    }
    let n: u32 = digits
        .parse()
        .map_err(|_| err(line.no, col(digits_offset), "loop count must be a number"))?;
    if !(2..=10).contains(&n) {
        return Err(err(
            line.no,
            col(digits_offset),
            format!("loop count must be between 2 and 10, got {n}"),
        ));
    }
    Ok(Some(n as u8))
}

fn parse_command_line(line: &Line) -> Result<Command, FormatError> {
    let c = line.content;
    if let Some(cmd) = Command::from_surface(c) {
        return Ok(cmd);
    }
    let col = line.indent + 1;
    if c.starts_with("setpc(") {
        if let Some(inner) = c
            .strip_prefix("setpc(\"")
            .and_then(|r| r.strip_suffix("\")"))
        {
            return Err(err(line.no, col + 7, format!("unknown color `{inner}`")));
        }
        return Err(err(
            line.no,
            col + 6,
            "pen color must be a double-quoted color name, e.g. setpc(\"red\")",
        ));
    }
    if let Some(hash) = c.find('#') {
        return Err(err(
            line.no,
            line.indent + hash + 1,
            "comments are not allowed",
        ));
    }
    Err(err(line.no, col, format!("unrecognized statement `{c}`")))
}
