//! Toolkit for grid-based turtle programming tasks: a parser and printer
//! for the little Python-like command language, a deterministic emulator
//! with success metrics, a task synthesizer, prompt rendering and model
//! evaluation, and failure-weighted dataset resampling.
//!
//! The living pieces:
//!
//! * [`task`]: grids, items, goals, constraints, and task validation.
//! * [`dsl`]: parsing, printing, and analyzing turtle programs.
//! * [`emulator`]: running programs against grids and scoring outcomes.
//! * [`synth`]: generating new task/code pairs around references.
//! * [`harness`]: datasets, prompts, model gateway, metrics, breakdowns.
//! * [`curriculum`]: failure-driven sampling weights and resampling.

pub mod curriculum;
pub mod dsl;
pub mod emulator;
pub mod harness;
pub mod synth;
pub mod task;
