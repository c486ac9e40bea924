//! Task synthesis. Starting from a reference task whose code solves it,
//! this module enumerates nearby candidate programs, derives constraints
//! and a goal for each, builds grid worlds the candidates provably solve,
//! and assembles the survivors into a validated, deduplicated batch.
//! Also home to dataset splitting, redundancy checking, and the task
//! perturbation ops.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dsl::{
    check_constraints, count_commands, parse_program, print_program, Command, FormatError, Program,
    Statement,
};
use crate::emulator::{evaluate_goal, execute, run};
use crate::task::{
    canonical_hash, validate_task, CodeConstraint, Color, Goal, GoalKind, Task, TaskCodePair,
};

mod enumerate;
mod perturb;
mod world;

pub use enumerate::{enumerate_codes, target_lengths};
pub use perturb::{perturb, PerturbationOp};
pub use world::{build_world, Unsatisfiable, FRUIT_KINDS, SHAPE_NAMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Difficulty {
    /// Same command count as the reference.
    Easy,
    /// One or two extra commands.
    Medium,
    /// One or two extra commands, an extra constraint, and possibly a
    /// mutated goal.
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn label(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    pub fn from_label(label: &str) -> Option<Difficulty> {
        Difficulty::ALL.into_iter().find(|d| d.label() == label)
    }
}

#[derive(Clone, Debug)]
pub struct SynthParams {
    pub difficulty: Difficulty,
    /// How many tasks to return.
    pub count: usize,
    pub seed: u64,
    /// Upper bound on world-building attempts for one reference/difficulty
    /// combination.
    pub per_combination_cap: usize,
    pub grid_rows: RangeInclusive<u32>,
    pub grid_cols: RangeInclusive<u32>,
    /// Chance that a free cell or edge receives a distractor.
    pub distractor_density: f64,
    /// Canonical hashes of tasks the output must not collide with.
    pub exclude_hashes: BTreeSet<String>,
}

impl SynthParams {
    pub fn new(difficulty: Difficulty, count: usize, seed: u64) -> SynthParams {
        SynthParams {
            difficulty,
            count,
            seed,
            per_combination_cap: 3000,
            grid_rows: 2..=9,
            grid_cols: 2..=9,
            distractor_density: 0.15,
            exclude_hashes: BTreeSet::new(),
        }
    }

    /// How many candidate programs to enumerate.
    pub fn code_limit(&self) -> usize {
        self.count.clamp(64, 1024)
    }

    /// Pool size to aim for before sampling, leaving slack for dedup and
    /// exclusion losses.
    pub fn pool_target(&self) -> usize {
        self.count + self.count / 5 + 10
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("reference code does not parse: {0}")]
    BadReference(#[from] FormatError),
    #[error("reference code does not solve task `{id}`")]
    ReferenceNotSolved { id: String },
    #[error("the code is not a successful solution of the task")]
    NotASolution,
    #[error("split sizes need {needed} items but the dataset has {have}")]
    SplitTooSmall { needed: usize, have: usize },
}

/// Counters describing one `synthesize` call, for manifests and logs.
#[derive(Clone, Debug, Serialize)]
pub struct SynthStats {
    pub requested: usize,
    /// Candidate programs enumerated.
    pub codes: usize,
    /// World-building attempts spent.
    pub attempts: usize,
    /// Pairs that validated and ran to success, before dedup.
    pub built: usize,
    /// Distinct pairs after dedup.
    pub unique: usize,
    /// Pairs dropped because their hash was excluded.
    pub excluded: usize,
    pub returned: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub pairs: Vec<TaskCodePair>,
    pub stats: SynthStats,
}

/// RNG for one reference/difficulty combination. Keyed by hashing so that
/// combinations are independent and insertion order cannot matter.
fn combination_rng(seed: u64, reference_id: &str, difficulty: Difficulty) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(reference_id.as_bytes());
    hasher.update(difficulty.label().as_bytes());
    ChaCha12Rng::from_seed(hasher.finalize().into())
}

/// Top-level commands before the first loop.
fn leading_actions(program: &Program) -> Vec<Command> {
    let mut out = Vec::new();
    for stmt in &program.body {
        match stmt {
            Statement::Action(cmd) => out.push(*cmd),
            Statement::Repeat { .. } => break,
        }
    }
    out
}

/// Refits the reference task's constraints and goal to a candidate
/// program. Count constraints are restated for the candidate's own count;
/// a prefix constraint keeps its length but takes the candidate's opening
/// commands. Hard additionally appends the first constraint kind not
/// already present and flips a coin to mutate the goal's color or count.
/// Returns None when the candidate cannot satisfy a prefix constraint.
fn derive_constraints_and_goal(
    reference: &Task,
    candidate: &Program,
    difficulty: Difficulty,
    rng: &mut impl Rng,
) -> Option<(Vec<CodeConstraint>, Goal)> {
    let count = count_commands(candidate);
    let leading = leading_actions(candidate);

    let mut constraints = Vec::with_capacity(reference.constraints.len() + 1);
    for constraint in &reference.constraints {
        let refit = match constraint {
            CodeConstraint::AtMost(_) => CodeConstraint::AtMost(count),
            CodeConstraint::Exactly(_) => CodeConstraint::Exactly(count),
            CodeConstraint::StartBy(prefix) => {
                if leading.len() < prefix.len() {
                    return None;
                }
                CodeConstraint::StartBy(leading[..prefix.len()].to_vec())
            }
        };
        constraints.push(refit);
    }

    if difficulty == Difficulty::Hard {
        let kinds: BTreeSet<&str> = constraints.iter().map(|c| c.kind_label()).collect();
        if !kinds.contains("at_most") {
            constraints.push(CodeConstraint::AtMost(count));
        } else if !kinds.contains("exactly") {
            constraints.push(CodeConstraint::Exactly(count));
        } else if !kinds.contains("start_by") {
            if leading.is_empty() {
                return None;
            }
            let len = rng.gen_range(1..=leading.len().min(3));
            constraints.push(CodeConstraint::StartBy(leading[..len].to_vec()));
        }
    }

    let mut goal = reference.goal.clone();
    if difficulty == Difficulty::Hard && rng.gen_bool(0.5) {
        if let Some(current) = goal.target_color {
            let options: Vec<Color> = Color::ALL.into_iter().filter(|c| *c != current).collect();
            goal.target_color = Some(options[rng.gen_range(0..options.len())]);
        } else if goal.kind == GoalKind::CollectExactly {
            let original = goal.target_count.unwrap_or(0);
            let mut fresh = rng.gen_range(1..=15u32);
            while fresh == original {
                fresh = rng.gen_range(1..=15u32);
            }
            goal.target_count = Some(fresh);
        }
    }

    Some((constraints, goal))
}

/// Generates up to `params.count` new task/code pairs around a reference
/// pair. Every returned task validates, its code solves it, and no task
/// repeats the reference or anything in `params.exclude_hashes`. Output
/// ids have the form `{reference}-{difficulty}-{hash prefix}` and pairs
/// come back sorted by canonical hash.
pub fn synthesize(
    reference: &TaskCodePair,
    params: &SynthParams,
) -> Result<SynthOutput, SynthError> {
    let reference_program = parse_program(&reference.code)?;
    if !run(&reference.task, &reference.code).success {
        return Err(SynthError::ReferenceNotSolved {
            id: reference.task.id.clone(),
        });
    }
    let reference_hash = canonical_hash(reference)?;
    let mut rng = combination_rng(params.seed, &reference.task.id, params.difficulty);

    let enum_seed = rng.gen();
    let codes = enumerate_codes(
        &reference_program,
        params.difficulty,
        params.code_limit(),
        enum_seed,
    );
    let codes_enumerated = codes.len();

    let candidates: Vec<(Program, Vec<CodeConstraint>, Goal)> = codes
        .into_iter()
        .filter_map(|code| {
            derive_constraints_and_goal(&reference.task, &code, params.difficulty, &mut rng)
                .map(|(constraints, goal)| (code, constraints, goal))
        })
        .collect();

    let pool_target = params.pool_target();
    let mut pool: Vec<TaskCodePair> = Vec::new();
    let mut attempts = 0;
    let mut next = 0;
    while !candidates.is_empty()
        && pool.len() < pool_target
        && attempts < params.per_combination_cap
    {
        let (program, constraints, goal) = &candidates[next % candidates.len()];
        next += 1;
        attempts += 1;
        let Ok(grid) = build_world(program, goal, params, &mut rng) else {
            continue;
        };
        let pair = TaskCodePair {
            task: Task {
                id: String::new(),
                task_type: reference.task.task_type,
                goal: goal.clone(),
                constraints: constraints.clone(),
                grid,
            },
            code: print_program(program),
        };
        if !validate_task(&pair.task).is_valid() {
            continue;
        }
        if !run(&pair.task, &pair.code).success {
            continue;
        }
        pool.push(pair);
    }
    let built = pool.len();

    let mut seen = BTreeSet::new();
    let mut hashed: Vec<(String, TaskCodePair)> = Vec::with_capacity(pool.len());
    for pair in pool {
        let hash = canonical_hash(&pair)?;
        if seen.insert(hash.clone()) {
            hashed.push((hash, pair));
        }
    }
    let unique = hashed.len();

    let mut excluded = 0;
    hashed.retain(|(hash, _)| {
        let drop = *hash == reference_hash || params.exclude_hashes.contains(hash);
        if drop {
            excluded += 1;
        }
        !drop
    });

    hashed.shuffle(&mut rng);
    hashed.truncate(params.count);
    hashed.sort_by(|a, b| a.0.cmp(&b.0));

    let pairs: Vec<TaskCodePair> = hashed
        .into_iter()
        .map(|(hash, mut pair)| {
            pair.task.id = format!(
                "{}-{}-{}",
                reference.task.id,
                params.difficulty.label(),
                &hash[..10]
            );
            pair
        })
        .collect();

    let returned = pairs.len();
    let warning = (returned < params.count).then(|| {
        format!(
            "requested {} tasks but only {} distinct tasks could be produced",
            params.count, returned
        )
    });

    Ok(SynthOutput {
        pairs,
        stats: SynthStats {
            requested: params.count,
            codes: codes_enumerated,
            attempts,
            built,
            unique,
            excluded,
            returned,
            warning,
        },
    })
}

fn pair_key(pair: &TaskCodePair) -> String {
    canonical_hash(pair).unwrap_or_else(|_| format!("unparsed:{:?}:{}", pair.task, pair.code))
}

/// Drops later duplicates, comparing pairs by canonical hash (falling back
/// to the raw text when the code does not parse). Order is preserved.
pub fn deduplicate(pairs: &[TaskCodePair]) -> Vec<TaskCodePair> {
    let mut seen = BTreeSet::new();
    pairs
        .iter()
        .filter(|pair| seen.insert(pair_key(pair)))
        .cloned()
        .collect()
}

fn program_succeeds(task: &Task, program: &Program) -> bool {
    let trace = execute(program, &task.grid);
    trace.crash.is_none()
        && evaluate_goal(task, &trace)
        && check_constraints(program, &task.constraints).passed()
}

/// Every one-step reduction of a statement sequence: dropping a statement,
/// shrinking a loop by one pass (unrolling a 2-pass loop inline), or
/// reducing inside a loop body. Reductions that would empty a loop body
/// are not emitted; the whole-loop deletion covers that case.
fn seq_mutants(stmts: &[Statement]) -> Vec<Vec<Statement>> {
    let mut out = Vec::new();
    for (i, stmt) in stmts.iter().enumerate() {
        let mut deleted = stmts.to_vec();
        deleted.remove(i);
        out.push(deleted);
        if let Statement::Repeat { times, body } = stmt {
            if *times >= 3 {
                let mut shrunk = stmts.to_vec();
                shrunk[i] = Statement::Repeat {
                    times: times - 1,
                    body: body.clone(),
                };
                out.push(shrunk);
            } else {
                let mut spliced = stmts.to_vec();
                spliced.splice(i..=i, body.iter().cloned());
                out.push(spliced);
            }
            for mutated_body in seq_mutants(body) {
                if mutated_body.is_empty() {
                    continue;
                }
                let mut v = stmts.to_vec();
                v[i] = Statement::Repeat {
                    times: *times,
                    body: mutated_body,
                };
                out.push(v);
            }
        }
    }
    out
}

/// True when some one-step reduction of `code` still solves the task,
/// i.e. the solution carries a command it does not need. The code must be
/// a successful solution to begin with.
pub fn is_redundant(task: &Task, code: &str) -> Result<bool, SynthError> {
    let program = parse_program(code)?;
    if !run(task, code).success {
        return Err(SynthError::NotASolution);
    }
    Ok(seq_mutants(&program.body)
        .into_iter()
        .any(|body| program_succeeds(task, &Program { body })))
}

/// Requested sizes for `split_dataset`. `train: None` takes everything
/// left after the validation and evaluation splits.
#[derive(Clone, Copy, Debug, Default)]
pub struct SplitSizes {
    pub train: Option<usize>,
    pub val: usize,
    pub eval: usize,
}

#[derive(Clone, Debug)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub eval: Vec<T>,
}

/// Splits items into disjoint train/val/eval subsets by seeded shuffle.
/// Within each split the original dataset order is kept.
pub fn split_dataset<T: Clone>(
    items: &[T],
    sizes: &SplitSizes,
    seed: u64,
) -> Result<DatasetSplit<T>, SynthError> {
    let have = items.len();
    let fixed = sizes.val + sizes.eval;
    let needed = fixed + sizes.train.unwrap_or(0);
    if needed > have {
        return Err(SynthError::SplitTooSmall { needed, have });
    }

    let mut indices: Vec<usize> = (0..have).collect();
    indices.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));

    let train_len = sizes.train.unwrap_or(have - fixed);
    let mut val = indices[..sizes.val].to_vec();
    let mut eval = indices[sizes.val..fixed].to_vec();
    let mut train = indices[fixed..fixed + train_len].to_vec();
    val.sort_unstable();
    eval.sort_unstable();
    train.sort_unstable();

    let pick = |ix: &[usize]| ix.iter().map(|&i| items[i].clone()).collect();
    Ok(DatasetSplit {
        train: pick(&train),
        val: pick(&val),
        eval: pick(&eval),
    })
}
