//! Randomized invariant checks: the printer/parser round trip, canonical
//! hashing, and core emulator laws.

use proptest::prelude::*;

use logogrid::dsl::{
    count_commands, flatten_actions, parse_program, print_program, Command, Program, Statement,
};
use logogrid::emulator::{execute, run};
use logogrid::task::{
    canonical_hash, Color, Direction, Goal, GoalKind, GridWorld, Item, Pose, Position, Task,
    TaskCodePair, TaskType,
};

fn command_strategy() -> impl Strategy<Value = Command> {
    prop_oneof![
        Just(Command::Forward),
        Just(Command::Backward),
        Just(Command::Left),
        Just(Command::Right),
        (0..Color::ALL.len()).prop_map(|i| Command::SetColor(Color::ALL[i])),
    ]
}

fn statement_strategy() -> impl Strategy<Value = Statement> {
    command_strategy()
        .prop_map(Statement::Action)
        .prop_recursive(3, 24, 4, |inner| {
            (2..=10u8, prop::collection::vec(inner, 1..4))
                .prop_map(|(times, body)| Statement::Repeat { times, body })
        })
}

fn program_strategy() -> impl Strategy<Value = Program> {
    prop::collection::vec(statement_strategy(), 1..7).prop_map(|body| Program { body })
}

/// Re-indents canonical two-space output to four spaces per level.
fn reindent(code: &str) -> String {
    code.lines()
        .map(|line| {
            let spaces = line.len() - line.trim_start_matches(' ').len();
            format!("{}{}\n", " ".repeat(spaces * 2), &line[spaces..])
        })
        .collect()
}

fn probe_task(code: String) -> TaskCodePair {
    let mut grid = GridWorld::bare(3, 3, Pose::new(Position::new(1, 1), Direction::North));
    grid.items.push(Item {
        position: Position::new(0, 1),
        kind: "strawberry".to_string(),
        shape: None,
        color: None,
        count: 1,
    });
    TaskCodePair {
        task: Task {
            id: "probe".to_string(),
            task_type: TaskType::Find,
            goal: Goal {
                kind: GoalKind::Find,
                target_kind: Some("strawberry".to_string()),
                target_color: None,
                target_count: None,
                avoid_colors: Default::default(),
            },
            constraints: Vec::new(),
            grid,
        },
        code,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printing_then_parsing_returns_the_same_program(program in program_strategy()) {
        let printed = print_program(&program);
        let reparsed = parse_program(&printed).expect("canonical output must parse");
        prop_assert_eq!(&reparsed, &program);
        prop_assert_eq!(print_program(&reparsed), printed);
    }

    #[test]
    fn wider_consistent_indentation_parses_to_the_same_program(program in program_strategy()) {
        let printed = print_program(&program);
        let wide = reindent(&printed);
        let reparsed = parse_program(&wide).expect("4-space output must parse");
        prop_assert_eq!(reparsed, program);
    }

    #[test]
    fn canonical_hash_ignores_id_and_formatting(program in program_strategy(), id in "[a-z0-9]{1,12}") {
        let printed = print_program(&program);
        let mut pair = probe_task(printed.clone());
        let base = canonical_hash(&pair).unwrap();

        pair.task.id = id;
        prop_assert_eq!(canonical_hash(&pair).unwrap(), base.clone());

        pair.code = reindent(&printed);
        prop_assert_eq!(canonical_hash(&pair).unwrap(), base);
    }

    #[test]
    fn turns_and_pen_changes_never_move_or_crash(
        commands in prop::collection::vec(
            prop_oneof![
                Just(Command::Left),
                Just(Command::Right),
                (0..Color::ALL.len()).prop_map(|i| Command::SetColor(Color::ALL[i])),
            ],
            0..20,
        )
    ) {
        let program = Program {
            body: commands.into_iter().map(Statement::Action).collect(),
        };
        let world = GridWorld::bare(2, 2, Pose::new(Position::new(0, 0), Direction::North));
        let trace = execute(&program, &world);
        prop_assert!(trace.crash.is_none());
        prop_assert_eq!(trace.final_pose().position, Position::new(0, 0));
        prop_assert!(trace.drawn.is_empty());
    }

    #[test]
    fn a_left_turn_undoes_a_right_turn(direction in prop_oneof![
        Just(Direction::North),
        Just(Direction::East),
        Just(Direction::South),
        Just(Direction::West),
    ]) {
        prop_assert_eq!(direction.right().left(), direction);
        prop_assert_eq!(direction.left().right(), direction);
        prop_assert_eq!(direction.opposite().opposite(), direction);
    }

    #[test]
    fn stepping_back_after_forward_restores_the_position(direction in prop_oneof![
        Just(Direction::North),
        Just(Direction::East),
        Just(Direction::South),
        Just(Direction::West),
    ]) {
        let program = Program {
            body: vec![
                Statement::Action(Command::Forward),
                Statement::Action(Command::Backward),
            ],
        };
        let start = Pose::new(Position::new(1, 1), direction);
        let trace = execute(&program, &GridWorld::bare(3, 3, start));
        prop_assert!(trace.crash.is_none());
        prop_assert_eq!(trace.final_pose(), start);
    }

    #[test]
    fn a_crash_free_trace_has_one_pose_per_executed_command(program in program_strategy()) {
        let moves = flatten_actions(&program).len() as u32;
        let side = 2 * moves + 3;
        let center = Position::new(moves + 1, moves + 1);
        let world = GridWorld::bare(side, side, Pose::new(center, Direction::North));
        let trace = execute(&program, &world);
        prop_assert!(trace.crash.is_none());
        prop_assert_eq!(trace.poses.len(), flatten_actions(&program).len() + 1);
    }

    #[test]
    fn the_metric_ladder_holds_for_arbitrary_input(text in "(?s).{0,200}") {
        let pair = probe_task(String::new());
        let outcome = run(&pair.task, &text);
        prop_assert!(!outcome.success || outcome.no_crash);
        prop_assert!(!outcome.no_crash || outcome.format_ok);
    }

    #[test]
    fn command_counting_matches_a_flat_reimplementation(program in program_strategy()) {
        fn written(stmts: &[Statement]) -> u32 {
            stmts
                .iter()
                .map(|s| match s {
                    Statement::Action(_) => 1,
                    Statement::Repeat { body, .. } => 1 + written(body),
                })
                .sum()
        }
        prop_assert_eq!(count_commands(&program), written(&program.body));
    }
}
