//! Command-line front end for the logogrid toolkit.
//!
//! Exit codes: 0 on success, 1 for usage or configuration mistakes, 2 for
//! bad input data, 3 when a remote endpoint fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use logogrid::curriculum::{
    compute_weights, load_outcomes, resample, CurriculumError, ResampleManifest, ResamplePlan,
};
use logogrid::emulator::{classify_failure, run, CrashReason, FailureLabel, Outcome};
use logogrid::harness::{
    breakdown, entry_json, evaluate_predictions, load_dataset, load_predictions, query_model,
    render_prompt, report_to_json, save_dataset, DatasetEntry, Dimension, GatewayConfig,
    GatewayError, LoadedDataset, PromptRequest, PromptStyle,
};
use logogrid::synth::{
    is_redundant, perturb, split_dataset, synthesize, Difficulty, PerturbationOp, SplitSizes,
    SynthParams,
};
use logogrid::task::{canonical_hash, Task, TaskCodePair};

#[derive(Parser)]
#[command(
    name = "logogrid",
    version,
    about = "Grid-world turtle tasks: synthesis, prompts, scoring, and curricula"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program against a task and report the outcome
    Run {
        /// Task dataset (JSONL)
        #[arg(long)]
        task: PathBuf,
        /// Which task to use when the dataset holds several
        #[arg(long)]
        id: Option<String>,
        /// File holding the program text
        #[arg(long)]
        code: PathBuf,
        /// Print the outcome as JSON
        #[arg(long)]
        json: bool,
    },
    /// Check that every bundled solution in a dataset succeeds
    Check {
        /// Task dataset (JSONL)
        #[arg(long)]
        dataset: PathBuf,
        /// Also flag solutions that still succeed after a one-step reduction
        #[arg(long)]
        redundancy: bool,
    },
    /// Synthesize new task/solution pairs from reference solutions
    Synth(SynthArgs),
    /// Shuffle a dataset into train/val/eval files
    Split {
        /// Input dataset (JSONL)
        #[arg(long)]
        input: PathBuf,
        /// Training records; whatever remains when omitted
        #[arg(long)]
        train: Option<usize>,
        /// Validation records
        #[arg(long)]
        val: usize,
        /// Evaluation records
        #[arg(long)]
        eval: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for train.jsonl, val.jsonl, and eval.jsonl
        #[arg(long)]
        out: PathBuf,
    },
    /// Print model prompts for tasks
    Render {
        /// Task dataset (JSONL)
        #[arg(long)]
        task: PathBuf,
        /// Render only this task
        #[arg(long)]
        id: Option<String>,
        /// Prompt style: nl or ascii
        #[arg(long, default_value = "nl")]
        style: String,
    },
    /// Score model predictions against a dataset
    Eval {
        /// Task dataset (JSONL)
        #[arg(long)]
        dataset: PathBuf,
        /// Predictions (JSONL with id and raw_output)
        #[arg(long)]
        predictions: PathBuf,
        /// Write the full report as JSON here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Success-rate table along a dimension (task_type, constraints,
        /// concepts, length, grid_size); repeatable
        #[arg(long = "breakdown")]
        breakdowns: Vec<String>,
    },
    /// Relax tasks and print the results as JSONL
    Perturb {
        /// Task dataset (JSONL)
        #[arg(long)]
        task: PathBuf,
        /// Comma-separated ops: A drops code constraints, B drops walls and
        /// forbidden cells, C moves the turtle next to its target
        #[arg(long)]
        ops: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a failure-boosted sample of dataset indices
    Resample {
        /// Outcomes (JSONL with index and failed)
        #[arg(long)]
        outcomes: PathBuf,
        /// Boost added to each failed sample's weight
        #[arg(long)]
        beta: f64,
        /// How many indices to draw
        #[arg(long)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file, one index per line; a manifest is written alongside
        #[arg(long)]
        out: PathBuf,
    },
    /// Send task prompts to a chat-completions endpoint
    Query(QueryArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Reference dataset (JSONL); every record needs a solution
    #[arg(long)]
    reference: PathBuf,
    /// Difficulty: easy, medium, hard, or all
    #[arg(long, default_value = "all")]
    difficulty: String,
    /// Tasks to produce per reference and difficulty
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for one JSONL per difficulty plus manifest.json
    #[arg(long)]
    out: PathBuf,
    /// Cap on world-building attempts per reference and difficulty
    #[arg(long)]
    cap: Option<usize>,
    /// Chance that a free cell or edge receives a distractor
    #[arg(long)]
    distractors: Option<f64>,
}

#[derive(Args)]
struct QueryArgs {
    /// Task dataset (JSONL)
    #[arg(long)]
    dataset: PathBuf,
    /// Base URL of the endpoint, e.g. https://host/v1
    #[arg(long)]
    endpoint: String,
    /// Model name to request
    #[arg(long)]
    model: String,
    /// Predictions output (JSONL)
    #[arg(long)]
    out: PathBuf,
    /// Prompt style: nl or ascii
    #[arg(long, default_value = "nl")]
    style: String,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Parallel requests in flight
    #[arg(long)]
    concurrency: Option<usize>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CmdResult = Result<(), Failure>;

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn data(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn external(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 3,
        error: error.into(),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Run {
            task,
            id,
            code,
            json,
        } => cmd_run(&task, id.as_deref(), &code, json),
        Command::Check {
            dataset,
            redundancy,
        } => cmd_check(&dataset, redundancy),
        Command::Synth(args) => cmd_synth(&args),
        Command::Split {
            input,
            train,
            val,
            eval,
            seed,
            out,
        } => cmd_split(&input, SplitSizes { train, val, eval }, seed, &out),
        Command::Render { task, id, style } => cmd_render(&task, id.as_deref(), &style),
        Command::Eval {
            dataset,
            predictions,
            out,
            breakdowns,
        } => cmd_eval(&dataset, &predictions, out.as_deref(), &breakdowns),
        Command::Perturb { task, ops, seed } => cmd_perturb(&task, &ops, seed),
        Command::Resample {
            outcomes,
            beta,
            draws,
            seed,
            out,
        } => cmd_resample(&outcomes, beta, draws, seed, &out),
        Command::Query(args) => cmd_query(&args),
    }
}

/// Loads a dataset, echoing any soft warnings to stderr.
fn load_warned(path: &Path) -> Result<LoadedDataset, Failure> {
    let loaded = load_dataset(path).map_err(data)?;
    for warning in &loaded.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(loaded)
}

fn pick_task(path: &Path, id: Option<&str>) -> Result<Task, Failure> {
    let loaded = load_warned(path)?;
    let mut tasks = loaded.tasks();
    match id {
        Some(id) => tasks
            .into_iter()
            .find(|t| t.id == id)
            .ok_or_else(|| data(anyhow!("no task `{id}` in {}", path.display()))),
        None if tasks.len() == 1 => Ok(tasks.remove(0)),
        None if tasks.is_empty() => Err(data(anyhow!("{} holds no tasks", path.display()))),
        None => Err(usage(anyhow!(
            "{} holds {} tasks; pick one with --id",
            path.display(),
            tasks.len()
        ))),
    }
}

fn crash_label(reason: CrashReason) -> &'static str {
    match reason {
        CrashReason::WallHit => "wall_hit",
        CrashReason::ForbiddenCell => "forbidden_cell",
        CrashReason::OutOfBounds => "out_of_bounds",
    }
}

fn outcome_json(outcome: &Outcome, label: FailureLabel) -> serde_json::Value {
    serde_json::json!({
        "format_ok": outcome.format_ok,
        "no_crash": outcome.no_crash,
        "success": outcome.success,
        "goal_achieved": outcome.goal_achieved,
        "constraints_passed": outcome.constraint_report.as_ref().map(|r| r.passed()),
        "crash": outcome.crash.as_ref().map(|crash| serde_json::json!({
            "reason": crash_label(crash.reason),
            "at_command_index": crash.at_command_index,
        })),
        "label": label.label(),
    })
}

fn print_outcome(outcome: &Outcome, label: FailureLabel) {
    println!(
        "format:      {}",
        if outcome.format_ok { "ok" } else { "failed" }
    );
    match &outcome.crash {
        Some(crash) => println!(
            "crash:       {} at command {}",
            crash_label(crash.reason),
            crash.at_command_index
        ),
        None if outcome.format_ok => println!("crash:       none"),
        None => println!("crash:       -"),
    }
    match outcome.goal_achieved {
        Some(true) => println!("goal:        achieved"),
        Some(false) => println!("goal:        not achieved"),
        None => println!("goal:        -"),
    }
    match &outcome.constraint_report {
        Some(report) => println!(
            "constraints: {}",
            if report.passed() {
                "passed"
            } else {
                "violated"
            }
        ),
        None => println!("constraints: -"),
    }
    println!(
        "success:     {}",
        if outcome.success { "yes" } else { "no" }
    );
    println!("label:       {}", label.label());
}

fn cmd_run(task_path: &Path, id: Option<&str>, code_path: &Path, json: bool) -> CmdResult {
    let task = pick_task(task_path, id)?;
    let code = fs::read_to_string(code_path)
        .with_context(|| format!("cannot read {}", code_path.display()))
        .map_err(data)?;
    let outcome = run(&task, &code);
    let label = classify_failure(&task, &code);
    if json {
        let value = outcome_json(&outcome, label);
        println!(
            "{}",
            serde_json::to_string_pretty(&value).expect("outcomes always serialize")
        );
    } else {
        print_outcome(&outcome, label);
    }
    Ok(())
}

fn cmd_check(dataset: &Path, redundancy: bool) -> CmdResult {
    let loaded = load_warned(dataset)?;
    let mut problems = 0usize;
    let mut solutions = 0usize;
    for entry in &loaded.entries {
        let Some(code) = &entry.code else { continue };
        solutions += 1;
        if !run(&entry.task, code).success {
            let label = classify_failure(&entry.task, code).label();
            println!("task {}: solution fails ({label})", entry.task.id);
            problems += 1;
            continue;
        }
        if redundancy && is_redundant(&entry.task, code).map_err(data)? {
            println!("task {}: solution is reducible", entry.task.id);
            problems += 1;
        }
    }
    let n = loaded.entries.len();
    if problems == 0 {
        println!("{n} records ok ({solutions} solutions checked)");
        Ok(())
    } else {
        Err(data(anyhow!("{problems} of {n} records have problems")))
    }
}

fn cmd_synth(args: &SynthArgs) -> CmdResult {
    let difficulties: Vec<Difficulty> = if args.difficulty == "all" {
        Difficulty::ALL.to_vec()
    } else {
        let difficulty = Difficulty::from_label(&args.difficulty).ok_or_else(|| {
            usage(anyhow!(
                "unknown difficulty `{}` (easy, medium, hard, or all)",
                args.difficulty
            ))
        })?;
        vec![difficulty]
    };
    let loaded = load_warned(&args.reference)?;
    let references = loaded
        .pairs()
        .ok_or_else(|| data(anyhow!("every reference record needs a code field")))?;
    if references.is_empty() {
        return Err(data(anyhow!("reference dataset is empty")));
    }
    let mut exclude = BTreeSet::new();
    for pair in &references {
        let hash = canonical_hash(pair).map_err(|err| {
            data(anyhow!(
                "reference `{}` does not parse: {err}",
                pair.task.id
            ))
        })?;
        exclude.insert(hash);
    }

    let combos: Vec<(&TaskCodePair, Difficulty)> = references
        .iter()
        .flat_map(|reference| difficulties.iter().map(move |&d| (reference, d)))
        .collect();
    let results: Vec<_> = combos
        .par_iter()
        .map(|&(reference, difficulty)| {
            let mut params = SynthParams::new(difficulty, args.count, args.seed);
            if let Some(cap) = args.cap {
                params.per_combination_cap = cap;
            }
            if let Some(density) = args.distractors {
                params.distractor_density = density;
            }
            params.exclude_hashes = exclude.clone();
            synthesize(reference, &params)
                .map(|output| (reference.task.id.clone(), difficulty, output))
                .map_err(|err| {
                    data(anyhow!(
                        "reference `{}` ({}): {err}",
                        reference.task.id,
                        difficulty.label()
                    ))
                })
        })
        .collect();
    let mut outputs = Vec::new();
    for result in results {
        outputs.push(result?);
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .map_err(data)?;
    let mut manifest_combos = Vec::new();
    for (reference_id, difficulty, output) in &outputs {
        if let Some(warning) = &output.stats.warning {
            eprintln!(
                "warning: reference `{reference_id}` ({}): {warning}",
                difficulty.label()
            );
        }
        manifest_combos.push(serde_json::json!({
            "reference": reference_id,
            "difficulty": difficulty.label(),
            "stats": output.stats,
        }));
    }
    for &difficulty in &difficulties {
        let entries: Vec<DatasetEntry> = outputs
            .iter()
            .filter(|(_, d, _)| *d == difficulty)
            .flat_map(|(_, _, output)| output.pairs.iter().cloned().map(DatasetEntry::from_pair))
            .collect();
        let path = args.out.join(format!("{}.jsonl", difficulty.label()));
        save_dataset(&path, &entries).map_err(data)?;
        println!(
            "{}: {} tasks -> {}",
            difficulty.label(),
            entries.len(),
            path.display()
        );
    }
    let manifest = serde_json::json!({
        "seed": args.seed,
        "count_per_reference": args.count,
        "references": references.iter().map(|r| r.task.id.clone()).collect::<Vec<_>>(),
        "difficulties": difficulties.iter().map(|d| d.label()).collect::<Vec<_>>(),
        "combinations": manifest_combos,
    });
    let manifest_path = args.out.join("manifest.json");
    let manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    fs::write(&manifest_path, manifest_text + "\n")
        .with_context(|| format!("cannot write {}", manifest_path.display()))
        .map_err(data)?;
    println!("manifest -> {}", manifest_path.display());
    Ok(())
}

fn cmd_split(input: &Path, sizes: SplitSizes, seed: u64, out: &Path) -> CmdResult {
    let loaded = load_warned(input)?;
    let split = split_dataset(&loaded.entries, &sizes, seed).map_err(data)?;
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(data)?;
    let parts = [
        ("train", &split.train),
        ("val", &split.val),
        ("eval", &split.eval),
    ];
    for (name, entries) in parts {
        let path = out.join(format!("{name}.jsonl"));
        save_dataset(&path, entries).map_err(data)?;
        println!("{name}: {} records -> {}", entries.len(), path.display());
    }
    Ok(())
}

fn cmd_render(task_path: &Path, id: Option<&str>, style: &str) -> CmdResult {
    let style = PromptStyle::from_label(style)
        .ok_or_else(|| usage(anyhow!("unknown style `{style}` (nl or ascii)")))?;
    let loaded = load_warned(task_path)?;
    let tasks = loaded.tasks();
    if let Some(id) = id {
        let task = tasks
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| data(anyhow!("no task `{id}` in {}", task_path.display())))?;
        print!("{}", render_prompt(task, style));
    } else if tasks.len() == 1 {
        print!("{}", render_prompt(&tasks[0], style));
    } else {
        for task in &tasks {
            println!("=== task {} ===", task.id);
            print!("{}", render_prompt(task, style));
            println!();
        }
    }
    Ok(())
}

fn cmd_eval(
    dataset: &Path,
    predictions_path: &Path,
    out: Option<&Path>,
    breakdowns: &[String],
) -> CmdResult {
    let dimensions = breakdowns
        .iter()
        .map(|label| Dimension::from_label(label).map_err(usage))
        .collect::<Result<Vec<_>, _>>()?;
    let loaded = load_warned(dataset)?;
    let predictions = load_predictions(predictions_path).map_err(data)?;
    let report = evaluate_predictions(&loaded.entries, &predictions).map_err(data)?;
    println!(
        "n {}  format {:.3}  no_crash {:.3}  success {:.3}",
        report.n, report.format_rate, report.no_crash_rate, report.success_rate
    );
    for dimension in dimensions {
        let rows = breakdown(&loaded.entries, &report, dimension).map_err(data)?;
        println!();
        println!("{}", dimension.label());
        for row in rows {
            println!(
                "  {:<20} n {:>5}  success {:.3}",
                row.group, row.n, row.success_rate
            );
        }
    }
    if let Some(path) = out {
        fs::write(path, report_to_json(&report) + "\n")
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(data)?;
        println!("report -> {}", path.display());
    }
    Ok(())
}

fn parse_ops(raw: &str) -> Result<Vec<PerturbationOp>, Failure> {
    let mut ops = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let op = PerturbationOp::from_label(part)
            .ok_or_else(|| usage(anyhow!("unknown perturbation `{part}` (A, B, or C)")))?;
        ops.push(op);
    }
    if ops.is_empty() {
        return Err(usage(anyhow!("--ops needs at least one of A, B, C")));
    }
    Ok(ops)
}

fn cmd_perturb(task_path: &Path, ops: &str, seed: u64) -> CmdResult {
    let ops = parse_ops(ops)?;
    let loaded = load_warned(task_path)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for entry in &loaded.entries {
        let perturbed = perturb(&entry.task, &ops, &mut rng);
        println!("{}", entry_json(&DatasetEntry::from_task(perturbed)));
    }
    Ok(())
}

fn curriculum_failure(error: CurriculumError) -> Failure {
    match error {
        CurriculumError::NegativeBeta(_) | CurriculumError::ZeroDraws => usage(error),
        _ => data(error),
    }
}

fn cmd_resample(outcomes_path: &Path, beta: f64, draws: usize, seed: u64, out: &Path) -> CmdResult {
    let outcomes = load_outcomes(outcomes_path).map_err(curriculum_failure)?;
    let weights = compute_weights(&outcomes, beta).map_err(curriculum_failure)?;
    let plan = ResamplePlan {
        beta,
        n_draws: draws,
        seed,
    };
    let indices =
        resample(outcomes.len(), &weights.normalized, &plan).map_err(curriculum_failure)?;
    let mut text = String::new();
    for index in &indices {
        text.push_str(&index.to_string());
        text.push('\n');
    }
    fs::write(out, text)
        .with_context(|| format!("cannot write {}", out.display()))
        .map_err(data)?;
    let manifest = ResampleManifest::new(&outcomes, &plan);
    let mut manifest_path = out.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let manifest_path = PathBuf::from(manifest_path);
    let manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifests always serialize");
    fs::write(&manifest_path, manifest_text + "\n")
        .with_context(|| format!("cannot write {}", manifest_path.display()))
        .map_err(data)?;
    println!("{} draws -> {}", indices.len(), out.display());
    println!("manifest -> {}", manifest_path.display());
    Ok(())
}

fn gateway_failure(error: GatewayError) -> Failure {
    match error {
        GatewayError::MissingApiKey => usage(error),
        GatewayError::Auth { .. } | GatewayError::Unreachable { .. } => external(error),
    }
}

fn cmd_query(args: &QueryArgs) -> CmdResult {
    let style = PromptStyle::from_label(&args.style)
        .ok_or_else(|| usage(anyhow!("unknown style `{}` (nl or ascii)", args.style)))?;
    let loaded = load_warned(&args.dataset)?;
    if loaded.entries.is_empty() {
        return Err(data(anyhow!("dataset is empty")));
    }
    let prompts: Vec<PromptRequest> = loaded
        .entries
        .iter()
        .map(|entry| PromptRequest {
            task_id: entry.task.id.clone(),
            text: render_prompt(&entry.task, style),
        })
        .collect();
    let mut config = GatewayConfig::new(&args.endpoint, &args.model);
    if let Some(temperature) = args.temperature {
        config.temperature = temperature;
    }
    if let Some(max_tokens) = args.max_tokens {
        config.max_tokens = Some(max_tokens);
    }
    if let Some(concurrency) = args.concurrency {
        config.concurrency = concurrency.max(1);
    }
    let total = prompts.len();
    let mut done = 0usize;
    let predictions = query_model(&config, &prompts, |prediction| {
        done += 1;
        log::info!("{done}/{total} task {} answered", prediction.id);
    })
    .map_err(gateway_failure)?;
    let mut text = String::new();
    for prediction in &predictions {
        text.push_str(&serde_json::to_string(prediction).expect("predictions always serialize"));
        text.push('\n');
    }
    fs::write(&args.out, text)
        .with_context(|| format!("cannot write {}", args.out.display()))
        .map_err(data)?;
    println!(
        "{} predictions -> {}",
        predictions.len(),
        args.out.display()
    );
    Ok(())
}
