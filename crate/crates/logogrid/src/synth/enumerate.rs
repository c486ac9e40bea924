//! Candidate solution codes for a reference program: deterministic
//! backtracking over the DSL grammar at the lengths a difficulty level
//! asks for, keeping only programs in the reference's concept class.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dsl::{classify_concepts, count_commands, Command, ConceptClass, Program, Statement};
use crate::task::Color;

use super::Difficulty;

/// One open statement sequence: the root program or a loop body under
/// construction. `times` is None exactly for the root.
struct Frame {
    stmts: Vec<Statement>,
    budget: u32,
    times: Option<u8>,
}

struct Search {
    alphabet: Vec<Command>,
    allow_loop: bool,
    need_loop: bool,
    need_set_color: bool,
    quota: usize,
    found: Vec<Program>,
}

impl Search {
    fn full(&self) -> bool {
        self.found.len() >= self.quota
    }

    fn dfs(&mut self, stack: &mut Vec<Frame>, has_loop: bool, has_set_color: bool) {
        if self.full() {
            return;
        }
        let top = stack.last().expect("stack never empty");
        if top.budget == 0 {
            match top.times {
                None => {
                    if (!self.need_loop || has_loop) && (!self.need_set_color || has_set_color) {
                        self.found.push(Program {
                            body: top.stmts.clone(),
                        });
                    }
                }
                Some(times) => {
                    let body_frame = stack.pop().expect("checked non-empty");
                    let parent = stack.last_mut().expect("body frames have parents");
                    parent.stmts.push(Statement::Repeat {
                        times,
                        body: body_frame.stmts,
                    });
                    self.dfs(stack, has_loop, has_set_color);
                    let parent = stack.last_mut().expect("still has parent");
                    let Some(Statement::Repeat { body, .. }) = parent.stmts.pop() else {
                        unreachable!("pushed a repeat just above");
                    };
                    stack.push(Frame {
                        stmts: body,
                        budget: 0,
                        times: Some(times),
                    });
                }
            }
            return;
        }

        let total_budget: u32 = stack.iter().map(|f| f.budget).sum();
        if self.need_loop && !has_loop && total_budget < 2 {
            return;
        }

        for i in 0..self.alphabet.len() {
            let command = self.alphabet[i];
            let top = stack.last_mut().expect("checked non-empty");
            top.stmts.push(Statement::Action(command));
            top.budget -= 1;
            let set_color = matches!(command, Command::SetColor(_));
            self.dfs(stack, has_loop, has_set_color || set_color);
            let top = stack.last_mut().expect("checked non-empty");
            top.stmts.pop();
            top.budget += 1;
            if self.full() {
                return;
            }
        }

        let budget = stack.last().expect("checked non-empty").budget;
        if self.allow_loop && budget >= 2 {
            for times in 2..=10u8 {
                for body_budget in 1..=budget - 1 {
                    let top = stack.last_mut().expect("checked non-empty");
                    top.budget -= 1 + body_budget;
                    stack.push(Frame {
                        stmts: Vec::new(),
                        budget: body_budget,
                        times: Some(times),
                    });
                    self.dfs(stack, true, has_set_color);
                    stack.pop();
                    let top = stack.last_mut().expect("checked non-empty");
                    top.budget += 1 + body_budget;
                    if self.full() {
                        return;
                    }
                }
            }
        }
    }
}

fn programs_of_length(length: u32, reference_class: ConceptClass, quota: usize) -> Vec<Program> {
    let uses_loops = matches!(
        reference_class,
        ConceptClass::Loops | ConceptClass::LoopsAndVariables
    );
    let uses_set_color = matches!(
        reference_class,
        ConceptClass::Variables | ConceptClass::LoopsAndVariables
    );
    let mut alphabet = vec![
        Command::Forward,
        Command::Backward,
        Command::Left,
        Command::Right,
    ];
    if uses_set_color {
        alphabet.extend(Color::ALL.map(Command::SetColor));
    }
    let mut search = Search {
        alphabet,
        allow_loop: uses_loops,
        need_loop: uses_loops,
        need_set_color: uses_set_color,
        quota,
        found: Vec::new(),
    };
    let mut stack = vec![Frame {
        stmts: Vec::new(),
        budget: length,
        times: None,
    }];
    search.dfs(&mut stack, false, false);
    search.found
}

/// Target command counts for a difficulty, relative to the reference.
pub fn target_lengths(reference_count: u32, difficulty: Difficulty) -> Vec<u32> {
    match difficulty {
        Difficulty::Easy => vec![reference_count],
        Difficulty::Medium | Difficulty::Hard => {
            vec![reference_count + 1, reference_count + 2]
        }
    }
}

/// Enumerates up to `limit` distinct programs in the reference's concept
/// class at the difficulty's target lengths, shorter lengths first, then
/// shuffles the accepted set with the seed. Returns fewer when the space
/// is smaller than `limit`.
pub fn enumerate_codes(
    reference: &Program,
    difficulty: Difficulty,
    limit: usize,
    seed: u64,
) -> Vec<Program> {
    let class = classify_concepts(reference);
    let mut found = Vec::new();
    for length in target_lengths(count_commands(reference), difficulty) {
        let remaining = limit.saturating_sub(found.len());
        if remaining == 0 {
            break;
        }
        found.extend(programs_of_length(length, class, remaining));
    }
    found.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::print_program;
    use std::collections::BTreeSet;

    fn actions(commands: &[Command]) -> Program {
        Program {
            body: commands.iter().map(|c| Statement::Action(*c)).collect(),
        }
    }

    fn printed_set(programs: &[Program]) -> BTreeSet<String> {
        programs.iter().map(print_program).collect()
    }

    #[test]
    fn single_move_reference_yields_the_four_moves() {
        let reference = actions(&[Command::Forward]);
        let found = enumerate_codes(&reference, Difficulty::Easy, 10, 1);
        assert_eq!(found.len(), 4);
        let expected: BTreeSet<String> = [
            Command::Forward,
            Command::Backward,
            Command::Left,
            Command::Right,
        ]
        .iter()
        .map(|c| actions(&[*c]))
        .map(|p| print_program(&p))
        .collect();
        assert_eq!(printed_set(&found), expected);
    }

    #[test]
    fn medium_space_for_a_single_move_has_eighty_programs() {
        let reference = actions(&[Command::Forward]);
        let found = enumerate_codes(&reference, Difficulty::Medium, 200, 1);
        assert_eq!(found.len(), 80);
        assert_eq!(printed_set(&found).len(), 80);
        for program in &found {
            let n = count_commands(program);
            assert!(n == 2 || n == 3);
            assert_eq!(classify_concepts(program), ConceptClass::BasicActions);
        }
    }

    #[test]
    fn loop_references_only_yield_loop_programs() {
        let reference = Program {
            body: vec![
                Statement::Action(Command::Forward),
                Statement::Repeat {
                    times: 3,
                    body: vec![Statement::Action(Command::Forward)],
                },
            ],
        };
        let found = enumerate_codes(&reference, Difficulty::Easy, 50, 2);
        assert!(!found.is_empty());
        for program in &found {
            assert_eq!(count_commands(program), 3);
            assert_eq!(classify_concepts(program), ConceptClass::Loops);
        }
    }

    #[test]
    fn pen_color_references_keep_pen_commands_and_stay_loop_free() {
        let reference = actions(&[Command::SetColor(Color::Red), Command::Forward]);
        let found = enumerate_codes(&reference, Difficulty::Easy, 30, 3);
        assert_eq!(found.len(), 30);
        for program in &found {
            assert_eq!(classify_concepts(program), ConceptClass::Variables);
        }
    }

    #[test]
    fn results_are_distinct_and_capped_by_the_limit() {
        let reference = actions(&[Command::Forward, Command::Forward]);
        let found = enumerate_codes(&reference, Difficulty::Medium, 10, 4);
        assert_eq!(found.len(), 10);
        assert_eq!(printed_set(&found).len(), 10);
    }

    #[test]
    fn enumeration_is_deterministic_per_seed() {
        let reference = actions(&[Command::Forward, Command::Left]);
        let a = enumerate_codes(&reference, Difficulty::Medium, 40, 9);
        let b = enumerate_codes(&reference, Difficulty::Medium, 40, 9);
        assert_eq!(printed_set(&a), printed_set(&b));
        assert_eq!(
            a.iter().map(print_program).collect::<Vec<_>>(),
            b.iter().map(print_program).collect::<Vec<_>>()
        );
        let c = enumerate_codes(&reference, Difficulty::Medium, 40, 10);
        assert_eq!(printed_set(&a), printed_set(&c));
        assert_ne!(
            a.iter().map(print_program).collect::<Vec<_>>(),
            c.iter().map(print_program).collect::<Vec<_>>()
        );
    }

    #[test]
    fn empty_reference_easy_yields_the_empty_program() {
        let reference = Program { body: Vec::new() };
        let found = enumerate_codes(&reference, Difficulty::Easy, 5, 0);
        assert_eq!(found.len(), 1);
        assert!(found[0].body.is_empty());
    }
}
