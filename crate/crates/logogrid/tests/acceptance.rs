//! End-to-end acceptance suite. Each test checks one numbered criterion
//! and prints a single PASS line when it holds (run with `--nocapture` to
//! see the lines as they appear).

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use logogrid::curriculum::{compute_weights, resample, ResamplePlan, SampleOutcome};
use logogrid::dsl::{
    classify_concepts, count_commands, flatten_actions, parse_program, print_program, Command,
    ConceptClass, Program, Statement,
};
use logogrid::emulator::{classify_failure, evaluate_goal, execute, run};
use logogrid::harness::{
    breakdown, evaluate_predictions, load_dataset, DatasetEntry, Dimension, Prediction,
};
use logogrid::synth::{
    perturb, split_dataset, synthesize, Difficulty, PerturbationOp, SplitSizes, SynthParams,
};
use logogrid::task::{
    canonical_hash, validate_task, Color, Direction, Goal, GoalKind, GridWorld, Item, ItemKey,
    Pose, Position, Task, TaskCodePair, TaskType,
};

fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tasks.jsonl")
}

fn fixture_pairs() -> Vec<TaskCodePair> {
    let loaded = load_dataset(fixture_path()).expect("fixture corpus must load");
    assert!(
        loaded.warnings.is_empty(),
        "unexpected warnings: {:?}",
        loaded.warnings
    );
    loaded.pairs().expect("every fixture task ships with code")
}

fn fixture(id: &str) -> TaskCodePair {
    fixture_pairs()
        .into_iter()
        .find(|p| p.task.id == id)
        .unwrap_or_else(|| panic!("fixture {id} missing"))
}

fn conclude(number: u32, summary: &str) {
    println!("criterion {number:02} PASS: {summary}");
}

fn random_command(rng: &mut ChaCha12Rng) -> Command {
    match rng.gen_range(0..8) {
        0 | 5 => Command::Forward,
        1 | 6 => Command::Backward,
        2 => Command::Left,
        3 => Command::Right,
        _ => Command::SetColor(Color::ALL[rng.gen_range(0..Color::ALL.len())]),
    }
}

fn random_program(rng: &mut ChaCha12Rng) -> Program {
    fn gen_body(rng: &mut ChaCha12Rng, len: usize, depth: usize) -> Vec<Statement> {
        (0..len)
            .map(|_| {
                if depth < 2 && rng.gen_bool(0.3) {
                    let len = rng.gen_range(1..=3);
                    Statement::Repeat {
                        times: rng.gen_range(2..=10),
                        body: gen_body(rng, len, depth + 1),
                    }
                } else {
                    Statement::Action(random_command(rng))
                }
            })
            .collect()
    }
    let len = rng.gen_range(1..=6);
    Program {
        body: gen_body(rng, len, 0),
    }
}

#[test]
fn criterion_01_reference_suite_solves_and_classifies() {
    let pairs = fixture_pairs();
    assert_eq!(pairs.len(), 5);

    let expected: BTreeMap<&str, (u32, ConceptClass)> = BTreeMap::from([
        ("28", (8, ConceptClass::BasicActions)),
        ("38", (10, ConceptClass::BasicActions)),
        ("65", (11, ConceptClass::Variables)),
        ("73", (7, ConceptClass::LoopsAndVariables)),
        ("87", (6, ConceptClass::Loops)),
    ]);

    for pair in &pairs {
        let (count, concepts) = expected[pair.task.id.as_str()];
        assert!(
            validate_task(&pair.task).is_valid(),
            "task {} fails validation",
            pair.task.id
        );
        let outcome = run(&pair.task, &pair.code);
        assert!(
            outcome.success,
            "task {} solution must succeed",
            pair.task.id
        );
        let program = parse_program(&pair.code).unwrap();
        assert_eq!(count_commands(&program), count, "task {}", pair.task.id);
        assert_eq!(
            classify_concepts(&program),
            concepts,
            "task {}",
            pair.task.id
        );
    }

    let loops = parse_program(&fixture("87").code).unwrap();
    assert_eq!(flatten_actions(&loops).len(), 7);

    conclude(
        1,
        "all 5 reference tasks validate, solve, and classify as expected",
    );
}

#[test]
fn criterion_02_metric_ladder_never_inverts() {
    let probe = fixture("87");
    let mut rng = ChaCha12Rng::seed_from_u64(2001);

    const FRAGMENTS: [&str; 10] = [
        "def Run():",
        "  move_forward()",
        "  move_back()",
        "  turn_left()",
        "  turn_right()",
        "  setpc(\"red\")",
        "  for i in range(3):",
        "    move_forward()",
        "  for j in range(12):",
        "\tmove_forward()",
    ];

    for _ in 0..10_000 {
        let text: String = match rng.gen_range(0..5) {
            0 => {
                let len = rng.gen_range(0..120);
                (0..len).map(|_| rng.gen_range(' '..='~')).collect()
            }
            1 => {
                let n = rng.gen_range(1..10);
                let mut s = String::new();
                for _ in 0..n {
                    s.push_str(FRAGMENTS[rng.gen_range(0..FRAGMENTS.len())]);
                    s.push('\n');
                }
                s
            }
            2 => print_program(&random_program(&mut rng)),
            3 => {
                let mut code = print_program(&random_program(&mut rng)).into_bytes();
                let i = rng.gen_range(0..code.len());
                code[i] = rng.gen_range(b' '..=b'~');
                String::from_utf8_lossy(&code).into_owned()
            }
            _ => {
                let len = rng.gen_range(0..60);
                (0..len)
                    .map(|_| char::from_u32(rng.gen_range(1..0xD800)).unwrap_or('?'))
                    .collect()
            }
        };
        let outcome = run(&probe.task, &text);
        assert!(
            !outcome.success || outcome.no_crash,
            "success without no_crash on {text:?}"
        );
        assert!(
            !outcome.no_crash || outcome.format_ok,
            "no_crash without format on {text:?}"
        );
        let label = classify_failure(&probe.task, &text);
        assert!(!label.label().is_empty());
    }

    let mut entries = Vec::new();
    let mut predictions = Vec::new();
    for (i, difficulty) in [Difficulty::Easy, Difficulty::Medium]
        .into_iter()
        .enumerate()
    {
        let params = SynthParams::new(difficulty, 250, 2002 + i as u64);
        let output = synthesize(&probe, &params).unwrap();
        assert_eq!(output.pairs.len(), 250);
        for (j, pair) in output.pairs.into_iter().enumerate() {
            let raw = match j % 4 {
                0 => pair.code.clone(),
                1 => "here is some prose without any code".to_string(),
                2 => "def Run():\n  for i in range(10):\n    move_forward()\n  for i in \
                      range(10):\n    move_forward()\n"
                    .to_string(),
                _ => "def Run():\n  turn_left()\n  turn_right()\n".to_string(),
            };
            predictions.push(Prediction {
                id: pair.task.id.clone(),
                raw_output: raw,
            });
            entries.push(DatasetEntry::from_pair(pair));
        }
    }
    let report = evaluate_predictions(&entries, &predictions).unwrap();
    assert_eq!(report.n, 500);
    assert!(report.success_rate <= report.no_crash_rate);
    assert!(report.no_crash_rate <= report.format_rate);
    assert!(report.success_rate >= 0.2, "solutions must succeed");
    assert!(report.format_rate < 1.0, "prose must fail format");
    for per_task in &report.per_task {
        assert!(!per_task.outcome.success || per_task.outcome.no_crash);
        assert!(!per_task.outcome.no_crash || per_task.outcome.format_ok);
    }

    conclude(
        2,
        "format >= no-crash >= success on 10k fuzzed outputs and a 500-task report",
    );
}

#[test]
fn criterion_03_print_parse_round_trip() {
    let mut rng = ChaCha12Rng::seed_from_u64(3001);
    for _ in 0..10_000 {
        let program = random_program(&mut rng);
        let printed = print_program(&program);
        let reparsed = parse_program(&printed)
            .unwrap_or_else(|e| panic!("canonical output failed to parse: {e}\n{printed}"));
        assert_eq!(
            reparsed, program,
            "round trip changed the program:\n{printed}"
        );
    }
    conclude(3, "10k random programs survive print -> parse unchanged");
}

#[test]
fn criterion_04_trace_laws_on_crash_free_runs() {
    let mut rng = ChaCha12Rng::seed_from_u64(4001);
    for _ in 0..1_000 {
        let program = random_program(&mut rng);
        let flat = flatten_actions(&program);
        let side = 2 * flat.len() as u32 + 3;
        let center = Position::new(flat.len() as u32 + 1, flat.len() as u32 + 1);
        let mut world = GridWorld::bare(side, side, Pose::new(center, Direction::North));

        let path: Vec<Position> = execute(&program, &world).visited().into_iter().collect();
        let mut cells: Vec<Position> = path.clone();
        for _ in 0..5 {
            cells.push(Position::new(
                rng.gen_range(0..side),
                rng.gen_range(0..side),
            ));
        }
        for (i, cell) in cells.iter().enumerate() {
            if rng.gen_bool(0.6) {
                world.items.push(Item {
                    position: *cell,
                    kind: format!("k{i}"),
                    shape: None,
                    color: None,
                    count: rng.gen_range(1..=4),
                });
            }
        }

        let trace = execute(&program, &world);
        assert!(trace.crash.is_none());
        assert_eq!(trace.poses.len(), flat.len() + 1);

        let mut pen = Color::Black;
        let mut moves = 0;
        for (i, command) in flat.iter().enumerate() {
            let before = trace.poses[i];
            let after = trace.poses[i + 1];
            match command {
                Command::Forward => {
                    assert_eq!(after.direction, before.direction);
                    assert_eq!(
                        Some(after.position),
                        before.position.step(before.direction, side, side)
                    );
                    assert!(trace.drawn[moves].edge().is_adjacent());
                    assert_eq!(
                        trace.drawn[moves],
                        logogrid::task::Segment::new(before.position, after.position, pen)
                    );
                    moves += 1;
                }
                Command::Backward => {
                    assert_eq!(after.direction, before.direction);
                    assert_eq!(
                        Some(after.position),
                        before
                            .position
                            .step(before.direction.opposite(), side, side)
                    );
                    assert_eq!(
                        trace.drawn[moves],
                        logogrid::task::Segment::new(before.position, after.position, pen)
                    );
                    moves += 1;
                }
                Command::Left => {
                    assert_eq!(after.position, before.position);
                    assert_eq!(after.direction, before.direction.left());
                }
                Command::Right => {
                    assert_eq!(after.position, before.position);
                    assert_eq!(after.direction, before.direction.right());
                }
                Command::SetColor(color) => {
                    assert_eq!(after, before);
                    pen = *color;
                }
            }
        }
        assert_eq!(trace.drawn.len(), moves);

        let visited = trace.visited();
        let expected: BTreeMap<ItemKey, u32> = world
            .items
            .iter()
            .filter(|item| visited.contains(&item.position))
            .map(|item| (item.key(), item.count))
            .collect();
        assert_eq!(
            trace.collected, expected,
            "collection must mirror visited items"
        );
    }
    conclude(
        4,
        "1k crash-free traces obey pose, drawing, and collection laws",
    );
}

#[test]
fn criterion_05_synthesis_scales_to_500_per_difficulty() {
    let reference = fixture("87");
    let reference_hash = canonical_hash(&reference).unwrap();
    let started = Instant::now();

    for (difficulty, seed) in [
        (Difficulty::Easy, 5001u64),
        (Difficulty::Medium, 5002),
        (Difficulty::Hard, 5003),
    ] {
        let params = SynthParams::new(difficulty, 500, seed);
        let output = synthesize(&reference, &params).unwrap();
        assert_eq!(
            output.pairs.len(),
            500,
            "{} returned {} tasks",
            difficulty.label(),
            output.pairs.len()
        );

        let mut hashes = BTreeSet::new();
        for pair in &output.pairs {
            assert!(validate_task(&pair.task).is_valid());
            assert!(run(&pair.task, &pair.code).success);
            let hash = canonical_hash(pair).unwrap();
            assert_ne!(hash, reference_hash, "reference leaked into output");
            assert!(hashes.insert(hash), "duplicate task in output");

            let count = count_commands(&parse_program(&pair.code).unwrap());
            match difficulty {
                Difficulty::Easy => assert_eq!(count, 6),
                _ => assert!(count == 7 || count == 8, "count {count}"),
            }
            if difficulty == Difficulty::Hard {
                assert_eq!(pair.task.constraints.len(), 2);
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}");
    conclude(
        5,
        "500 valid, solvable, distinct tasks per difficulty within the time budget",
    );
}

#[test]
fn criterion_06_split_partitions_ten_thousand_tasks() {
    let items: Vec<u32> = (0..10_000).collect();
    let sizes = SplitSizes {
        train: None,
        val: 1000,
        eval: 1000,
    };
    let split = split_dataset(&items, &sizes, 6001).unwrap();
    assert_eq!(split.train.len(), 8000);
    assert_eq!(split.val.len(), 1000);
    assert_eq!(split.eval.len(), 1000);

    let train: BTreeSet<u32> = split.train.iter().copied().collect();
    let val: BTreeSet<u32> = split.val.iter().copied().collect();
    let eval: BTreeSet<u32> = split.eval.iter().copied().collect();
    assert!(train.is_disjoint(&val));
    assert!(train.is_disjoint(&eval));
    assert!(val.is_disjoint(&eval));
    let mut union: Vec<u32> = train.union(&val).copied().collect();
    union.extend(&eval);
    union.sort_unstable();
    assert_eq!(union, items);

    conclude(
        6,
        "10k tasks split 8000/1000/1000 with no overlap and full coverage",
    );
}

#[test]
fn criterion_07_resampling_matches_the_weight_law() {
    let outcomes: Vec<SampleOutcome> = (0..100)
        .map(|index| SampleOutcome {
            index,
            failed: index < 50,
        })
        .collect();

    let weights = compute_weights(&outcomes, 1.0).unwrap();
    let plan = ResamplePlan {
        beta: 1.0,
        n_draws: 100_000,
        seed: 7001,
    };
    let draws = resample(100, &weights.normalized, &plan).unwrap();
    let mut counts = vec![0u64; 100];
    for index in draws {
        counts[index] += 1;
    }
    let failed_total: u64 = counts[..50].iter().sum();
    let passed_total: u64 = counts[50..].iter().sum();
    let ratio = failed_total as f64 / passed_total as f64;
    assert!(
        (1.96..=2.04).contains(&ratio),
        "failed:passed ratio {ratio} outside [1.96, 2.04]"
    );

    let uniform = compute_weights(&outcomes, 0.0).unwrap();
    let plan = ResamplePlan {
        beta: 0.0,
        n_draws: 100_000,
        seed: 7002,
    };
    let draws = resample(100, &uniform.normalized, &plan).unwrap();
    let mut counts = vec![0u64; 100];
    for index in draws {
        counts[index] += 1;
    }
    let expected = 1000.0;
    let chi_square: f64 = counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum();
    assert!(
        chi_square < 134.642,
        "chi-square {chi_square} rejects uniformity at alpha = 0.01 (df = 99)"
    );

    conclude(
        7,
        "beta=1 doubles failed-task mass and beta=0 resampling is uniform",
    );
}

#[test]
fn criterion_08_dropping_constraints_never_breaks_a_solution() {
    let reference = fixture("87");
    let mut pairs = Vec::new();
    for (difficulty, seed) in [(Difficulty::Easy, 8001u64), (Difficulty::Hard, 8002)] {
        let params = SynthParams::new(difficulty, 100, seed);
        pairs.extend(synthesize(&reference, &params).unwrap().pairs);
    }
    assert_eq!(pairs.len(), 200);

    let mut rng = ChaCha12Rng::seed_from_u64(8003);
    for pair in &pairs {
        assert!(run(&pair.task, &pair.code).success);

        let eased = perturb(
            &pair.task,
            &[PerturbationOp::RemoveCodeConstraints],
            &mut rng,
        );
        assert!(eased.constraints.is_empty());
        assert!(
            run(&eased, &pair.code).success,
            "removing code constraints broke {}",
            pair.task.id
        );

        let cleared = perturb(
            &pair.task,
            &[PerturbationOp::RemoveGridConstraints],
            &mut rng,
        );
        assert!(cleared.grid.walls.is_empty() && cleared.grid.forbidden.is_empty());
        assert!(
            run(&cleared, &pair.code).success,
            "removing grid constraints broke {}",
            pair.task.id
        );

        let both = perturb(
            &pair.task,
            &[
                PerturbationOp::RemoveCodeConstraints,
                PerturbationOp::RemoveGridConstraints,
            ],
            &mut rng,
        );
        assert!(run(&both, &pair.code).success);
    }

    conclude(
        8,
        "constraint-removing perturbations preserve success on 200 tasks",
    );
}

#[test]
fn criterion_09_brute_force_agrees_on_small_grids() {
    fn find_reference() -> TaskCodePair {
        let mut grid = GridWorld::bare(2, 2, Pose::new(Position::new(1, 0), Direction::North));
        grid.items.push(Item {
            position: Position::new(0, 1),
            kind: "strawberry".to_string(),
            shape: None,
            color: None,
            count: 1,
        });
        TaskCodePair {
            task: Task {
                id: "tiny-find".to_string(),
                task_type: TaskType::Find,
                goal: Goal {
                    kind: GoalKind::Find,
                    target_kind: Some("strawberry".to_string()),
                    target_color: None,
                    target_count: None,
                    avoid_colors: BTreeSet::new(),
                },
                constraints: Vec::new(),
                grid,
            },
            code: "def Run():\n  move_forward()\n  turn_right()\n  move_forward()\n".to_string(),
        }
    }

    fn collect_reference() -> TaskCodePair {
        let mut grid = GridWorld::bare(2, 2, Pose::new(Position::new(1, 0), Direction::North));
        grid.items.push(Item {
            position: Position::new(0, 0),
            kind: "strawberry".to_string(),
            shape: None,
            color: None,
            count: 2,
        });
        TaskCodePair {
            task: Task {
                id: "tiny-collect".to_string(),
                task_type: TaskType::Math,
                goal: Goal {
                    kind: GoalKind::CollectExactly,
                    target_kind: Some("strawberry".to_string()),
                    target_color: None,
                    target_count: Some(2),
                    avoid_colors: BTreeSet::new(),
                },
                constraints: Vec::new(),
                grid,
            },
            code: "def Run():\n  move_forward()\n".to_string(),
        }
    }

    /// Exhaustive search over move-only programs of up to `max_len`
    /// commands; true when any of them solves the task.
    fn solvable_by_search(task: &Task, max_len: usize) -> bool {
        const MOVES: [Command; 4] = [
            Command::Forward,
            Command::Backward,
            Command::Left,
            Command::Right,
        ];
        for len in 1..=max_len {
            for mut encoded in 0..4usize.pow(len as u32) {
                let mut body = Vec::with_capacity(len);
                for _ in 0..len {
                    body.push(Statement::Action(MOVES[encoded % 4]));
                    encoded /= 4;
                }
                let program = Program { body };
                let trace = execute(&program, &task.grid);
                if trace.crash.is_none() && evaluate_goal(task, &trace) {
                    return true;
                }
            }
        }
        false
    }

    let mut total = 0;
    for reference in [find_reference(), collect_reference()] {
        assert!(run(&reference.task, &reference.code).success);
        for (difficulty, count, seed) in [
            (Difficulty::Easy, 13usize, 9001u64),
            (Difficulty::Medium, 12, 9002),
        ] {
            let mut params = SynthParams::new(difficulty, count, seed);
            params.grid_rows = 2..=3;
            params.grid_cols = 2..=3;
            let output = synthesize(&reference, &params).unwrap();
            assert!(
                output.pairs.len() >= count / 2,
                "only {} tasks from {} at {}",
                output.pairs.len(),
                reference.task.id,
                difficulty.label()
            );
            for pair in &output.pairs {
                assert!(pair.task.constraints.is_empty());
                assert!(run(&pair.task, &pair.code).success);
                assert!(
                    solvable_by_search(&pair.task, 6),
                    "search found no solution for {}",
                    pair.task.id
                );
                total += 1;
            }
        }
    }
    assert!(total >= 40, "only {total} tasks oracle-checked");

    conclude(
        9,
        "an exhaustive searcher independently solves every sampled small task",
    );
}

#[test]
fn criterion_10_breakdowns_count_every_group() {
    let mut entries = Vec::new();
    let mut predictions = Vec::new();
    let composition = [("87", 33usize), ("73", 33), ("38", 10), ("28", 9)];
    for (id, copies) in composition {
        let base = fixture(id);
        for i in 0..copies {
            let mut pair = base.clone();
            pair.task.id = format!("{id}-{i:03}");
            predictions.push(Prediction {
                id: pair.task.id.clone(),
                raw_output: pair.code.clone(),
            });
            entries.push(DatasetEntry::from_pair(pair));
        }
    }
    let report = evaluate_predictions(&entries, &predictions).unwrap();
    assert_eq!(report.n, 85);
    assert!((report.success_rate - 1.0).abs() < 1e-12);

    let by_type = breakdown(&entries, &report, Dimension::TaskType).unwrap();
    let ns: Vec<(String, usize)> = by_type.iter().map(|r| (r.group.clone(), r.n)).collect();
    assert_eq!(
        ns,
        vec![
            ("Find".to_string(), 33),
            ("Draw".to_string(), 33),
            ("Math".to_string(), 10),
            ("Logic".to_string(), 9),
        ]
    );

    let by_constraint = breakdown(&entries, &report, Dimension::Constraints).unwrap();
    let ns: Vec<(String, usize)> = by_constraint
        .iter()
        .map(|r| (r.group.clone(), r.n))
        .collect();
    assert_eq!(
        ns,
        vec![
            ("None".to_string(), 52),
            ("AtMost".to_string(), 33),
            ("Exactly".to_string(), 0),
            ("StartBy".to_string(), 0),
            ("Hybrid".to_string(), 0),
        ]
    );

    let by_concept = breakdown(&entries, &report, Dimension::Concepts).unwrap();
    let ns: Vec<(String, usize)> = by_concept.iter().map(|r| (r.group.clone(), r.n)).collect();
    assert_eq!(
        ns,
        vec![
            ("Basic Actions".to_string(), 19),
            ("Loops".to_string(), 33),
            ("Variables".to_string(), 0),
            ("Loops and Variables".to_string(), 33),
        ]
    );

    fn corridor_pair(id: &str, turns: usize) -> TaskCodePair {
        let mut grid = GridWorld::bare(2, 1, Pose::new(Position::new(1, 0), Direction::North));
        grid.items.push(Item {
            position: Position::new(0, 0),
            kind: "strawberry".to_string(),
            shape: None,
            color: None,
            count: 1,
        });
        let mut code = String::from("def Run():\n  move_forward()\n");
        for i in 0..turns {
            code.push_str(if i % 2 == 0 {
                "  turn_left()\n"
            } else {
                "  turn_right()\n"
            });
        }
        TaskCodePair {
            task: Task {
                id: id.to_string(),
                task_type: TaskType::Find,
                goal: Goal {
                    kind: GoalKind::Find,
                    target_kind: Some("strawberry".to_string()),
                    target_color: None,
                    target_count: None,
                    avoid_colors: BTreeSet::new(),
                },
                constraints: Vec::new(),
                grid,
            },
            code,
        }
    }

    let boundary: Vec<TaskCodePair> = [(5u32, "len5"), (6, "len6"), (10, "len10"), (11, "len11")]
        .into_iter()
        .map(|(count, id)| {
            let pair = corridor_pair(id, count as usize - 1);
            assert_eq!(count_commands(&parse_program(&pair.code).unwrap()), count);
            pair
        })
        .collect();
    let entries: Vec<DatasetEntry> = boundary
        .iter()
        .cloned()
        .map(DatasetEntry::from_pair)
        .collect();
    let predictions: Vec<Prediction> = boundary
        .iter()
        .map(|p| Prediction {
            id: p.task.id.clone(),
            raw_output: p.code.clone(),
        })
        .collect();
    let report = evaluate_predictions(&entries, &predictions).unwrap();
    let by_length = breakdown(&entries, &report, Dimension::Length).unwrap();
    let ns: Vec<(String, usize)> = by_length.iter().map(|r| (r.group.clone(), r.n)).collect();
    assert_eq!(
        ns,
        vec![
            ("Short (1-5)".to_string(), 1),
            ("Medium (6-10)".to_string(), 2),
            ("Long (11-17)".to_string(), 1),
        ]
    );

    fn sized_pair(dim: u32) -> TaskCodePair {
        let mut grid = GridWorld::bare(
            dim,
            dim,
            Pose::new(Position::new(dim - 1, 0), Direction::North),
        );
        grid.items.push(Item {
            position: Position::new(dim - 2, 0),
            kind: "strawberry".to_string(),
            shape: None,
            color: None,
            count: 1,
        });
        TaskCodePair {
            task: Task {
                id: format!("size{dim}"),
                task_type: TaskType::Find,
                goal: Goal {
                    kind: GoalKind::Find,
                    target_kind: Some("strawberry".to_string()),
                    target_color: None,
                    target_count: None,
                    avoid_colors: BTreeSet::new(),
                },
                constraints: Vec::new(),
                grid,
            },
            code: "def Run():\n  move_forward()\n".to_string(),
        }
    }

    let sized: Vec<TaskCodePair> = (2..=7).map(sized_pair).collect();
    let entries: Vec<DatasetEntry> = sized.iter().cloned().map(DatasetEntry::from_pair).collect();
    let predictions: Vec<Prediction> = sized
        .iter()
        .map(|p| Prediction {
            id: p.task.id.clone(),
            raw_output: p.code.clone(),
        })
        .collect();
    let report = evaluate_predictions(&entries, &predictions).unwrap();
    let by_size = breakdown(&entries, &report, Dimension::GridSize).unwrap();
    let ns: Vec<(String, usize)> = by_size.iter().map(|r| (r.group.clone(), r.n)).collect();
    assert_eq!(
        ns,
        vec![
            ("<=3".to_string(), 2),
            ("4".to_string(), 1),
            ("5".to_string(), 1),
            ("6".to_string(), 1),
            (">=7".to_string(), 1),
        ]
    );

    conclude(
        10,
        "type, constraint, concept, length, and grid-size groups all tally",
    );
}
