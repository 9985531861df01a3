//! Command line driver for the random jigsaw laboratory.
//!
//! Machine-readable output goes to stdout (JSON reports, CSV tables,
//! generated puzzles); progress and human summaries go to stderr or behind
//! explicit flags, so pipes stay clean.

use std::fmt::Write;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jig_core::entropy::{
    closed_form_report, exact_distributions, mc_entropy_estimates, ExperimentParams,
    DEFAULT_ENUM_BUDGET,
};
use jig_core::greedy::{estimate_raw_count, solution_scale_log2};
use jig_core::io::{puzzle_to_json, read_puzzle};
use jig_core::model::{generate_puzzle, piece_type_census, ModelVariant, PieceBag};
use jig_core::solver::{
    distinct_classes_capped, enumerate_assemblies_budgeted, SearchBudget, VerdictReason,
    DEFAULT_CLASS_LIMIT,
};
use jig_core::sweep::{run_sweep, SweepConfig};

#[derive(Parser)]
#[command(name = "jig", version, about = "Laboratory for random jigsaw puzzles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random puzzle and write it as JSON.
    Gen(GenArgs),
    /// Reassemble a stored puzzle and report uniqueness.
    Solve(SolveArgs),
    /// Entropy report by closed formula, exhaustive enumeration, or sampling.
    Entropy(EntropyArgs),
    /// Estimate the raw assembly count with random greedy fills.
    Greedy(GreedyArgs),
    /// Deterministic sweep over a grid of (n, q) cells.
    Sweep(SweepArgs),
    /// Closed-form census of piece rotation classes.
    Census(CensusArgs),
}

fn parse_model(s: &str) -> Result<ModelVariant, String> {
    ModelVariant::from_str(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct GenArgs {
    /// Board side length.
    #[arg(long)]
    n: usize,
    /// Number of edge colors.
    #[arg(long)]
    q: u32,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Piece model: `rot` or `fixed`.
    #[arg(long, default_value = "rot", value_parser = parse_model)]
    model: ModelVariant,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Puzzle file produced by `gen`; its `model` field decides how pieces
    /// may be placed.
    #[arg(long)]
    input: PathBuf,
    /// Count every assembly instead of stopping at the second class.
    #[arg(long)]
    count: bool,
    /// Cap on recorded classes while counting.
    #[arg(long, default_value_t = DEFAULT_CLASS_LIMIT)]
    class_limit: usize,
    /// Abort after this many search nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Abort after this many milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// Emit a JSON verdict instead of text.
    #[arg(long)]
    json: bool,
    /// Write the verdict here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EntropyMethod {
    /// Closed forms only; exact picture entropy at every size.
    Formula,
    /// Exhaustive enumeration of all colorings; tiny boards only.
    Exact,
    /// Monte Carlo sampling of boards.
    Mc,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u32,
    #[arg(long, default_value = "rot", value_parser = parse_model)]
    model: ModelVariant,
    #[arg(long, value_enum, default_value_t = EntropyMethod::Formula)]
    method: EntropyMethod,
    /// Sampled boards when the method is `mc` (at least 100).
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Master seed for `mc` sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on colorings an `exact` pass may visit.
    #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
    enum_budget: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    /// Estimate for the bag of this stored puzzle.
    #[arg(long, conflicts_with_all = ["n", "q", "seed"])]
    input: Option<PathBuf>,
    /// Board side length when generating the bag in place.
    #[arg(long, required_unless_present = "input")]
    n: Option<usize>,
    /// Number of edge colors when generating the bag in place.
    #[arg(long, required_unless_present = "input")]
    q: Option<u32>,
    /// Seed for the generated board.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Piece model when generating; stored puzzles carry their own.
    #[arg(long, default_value = "rot", value_parser = parse_model)]
    model: ModelVariant,
    /// Independent greedy walks.
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    /// Master seed for the walks.
    #[arg(long, default_value_t = 0)]
    walk_seed: u64,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Board sides, comma separated.
    #[arg(long)]
    n: Option<String>,
    /// Color counts, comma separated.
    #[arg(long)]
    q: Option<String>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelVariant>,
    /// Trials per (n, q) cell.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Count assemblies per trial instead of probing for a second class.
    #[arg(long)]
    count: bool,
    #[arg(long)]
    class_limit: Option<usize>,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long)]
    time_budget_ms: Option<u64>,
    /// Worker threads; 0 picks the machine's parallelism. Falls back to the
    /// JIG_JOBS environment variable.
    #[arg(long)]
    jobs: Option<usize>,
    /// Record real wall times in the CSV (breaks run-to-run byte identity).
    #[arg(long)]
    timings: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Print the per-cell rate table to stdout instead of the CSV.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct CensusArgs {
    /// Number of edge colors.
    #[arg(long)]
    q: u32,
    /// Write the counts here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Sends finished report text to the chosen sink.
fn emit(output: Option<&PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing to {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Entropy(args) => cmd_entropy(args),
        Command::Greedy(args) => cmd_greedy(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Census(args) => cmd_census(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let coloring = generate_puzzle(args.n, args.q, args.seed)?;
    let text = puzzle_to_json(&coloring, args.model);
    match &args.output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing puzzle to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let (coloring, model) = read_puzzle(&args.input)?;
    let bag = PieceBag::extract(&coloring, model);
    let budget = SearchBudget {
        max_nodes: args.max_nodes,
        time_limit: args.time_limit_ms.map(Duration::from_millis),
    };

    let (resolved, unique_edge, classes, truncated, raw_count) = if args.count {
        let (set, report) = enumerate_assemblies_budgeted(&bag, args.class_limit, &budget)?;
        let unique = report.complete && !set.truncated && set.class_count() == 1;
        (
            report.complete,
            unique,
            set.class_count() as u64,
            set.truncated,
            Some(set.raw_count),
        )
    } else {
        let probe = distinct_classes_capped(&bag, 2, &budget)?;
        (
            probe.resolved,
            probe.resolved && probe.found == 1,
            probe.found,
            probe.found >= 2,
            None,
        )
    };

    let duplicates = bag.has_duplicates();
    let n = coloring.n();
    let unique_vertex = match model {
        ModelVariant::RotationsAllowed => {
            n == 1 || (!duplicates && bag.all_orbit_four() && unique_edge)
        }
        ModelVariant::FixedOrientation => unique_edge && !duplicates,
    };
    let reason = match model {
        ModelVariant::FixedOrientation => None,
        ModelVariant::RotationsAllowed if !resolved => None,
        ModelVariant::RotationsAllowed => Some(if unique_vertex {
            VerdictReason::Unique
        } else if duplicates {
            VerdictReason::DuplicatePieces
        } else if !bag.all_orbit_four() {
            VerdictReason::SymmetricPiece
        } else {
            VerdictReason::MultipleEdgeColorings
        }),
    };

    let mut text = String::new();
    if args.json {
        let value = serde_json::json!({
            "n": n,
            "q": coloring.q(),
            "model": model.slug(),
            "resolved": resolved,
            "distinct_classes": classes,
            "truncated": truncated,
            "raw_count": raw_count.as_ref().map(|c| c.to_string()),
            "unique_edge": unique_edge,
            "unique_vertex": unique_vertex,
            "duplicates": duplicates,
            "reason": reason,
        });
        text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
    } else {
        let _ = writeln!(text, "board: {n}x{n}, q = {}, model = {model}", coloring.q());
        if !resolved {
            let _ = writeln!(text, "verdict: unresolved, search budget exhausted");
            let _ = writeln!(text, "distinct classes found so far: {classes}");
            return emit(args.output.as_ref(), &text);
        }
        let _ = match (args.count, truncated) {
            (true, false) => writeln!(text, "distinct classes: {classes}"),
            (true, true) => writeln!(text, "distinct classes: {classes} (cap hit)"),
            (false, _) if classes == 1 => writeln!(text, "distinct classes: 1"),
            (false, _) => writeln!(text, "distinct classes: at least 2"),
        };
        if let Some(count) = &raw_count {
            let _ = writeln!(text, "raw assemblies: {count}");
        }
        let _ = writeln!(text, "unique edge assembly: {unique_edge}");
        let _ = writeln!(text, "unique vertex assembly: {unique_vertex}");
        if let Some(reason) = reason {
            let _ = writeln!(text, "reason: {reason}");
        }
    }
    emit(args.output.as_ref(), &text)
}

fn cmd_entropy(args: EntropyArgs) -> Result<()> {
    let report = match args.method {
        EntropyMethod::Formula => closed_form_report(args.n, args.q, args.model)?,
        EntropyMethod::Exact => {
            exact_distributions(args.n, args.q, args.model, args.enum_budget)?.report
        }
        EntropyMethod::Mc => {
            let params = ExperimentParams {
                n: args.n,
                q: args.q,
                model: args.model,
                trials: args.trials,
                seed: args.seed,
            };
            mc_entropy_estimates(&params)?.report
        }
    };
    emit(args.output.as_ref(), &report.to_json())
}

fn cmd_greedy(args: GreedyArgs) -> Result<()> {
    let (bag, seed) = match &args.input {
        Some(path) => {
            let (coloring, model) = read_puzzle(path)?;
            (PieceBag::extract(&coloring, model), None)
        }
        None => {
            let (n, q) = (
                args.n.expect("clap enforces n without input"),
                args.q.expect("clap enforces q without input"),
            );
            let coloring = generate_puzzle(n, q, args.seed)?;
            (PieceBag::extract(&coloring, args.model), Some(args.seed))
        }
    };
    if args.runs == 0 {
        bail!("field `runs`: at least one greedy walk is needed");
    }
    let summary = estimate_raw_count(&bag, args.runs, args.walk_seed);
    let scale = solution_scale_log2(bag.n(), bag.q()).ok();
    let value = serde_json::json!({
        "n": bag.n(),
        "q": bag.q(),
        "model": bag.model().slug(),
        "board_seed": seed,
        "runs": summary.runs,
        "mean_raw_count": summary.mean,
        "stderr": summary.stderr,
        "success_rate": summary.success_rate,
        "expected_log2_scale": scale,
    });
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    emit(args.output.as_ref(), &text)
}

fn parse_flag_list<T: FromStr>(flag: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("field `{flag}`: bad entry `{}`: {e}", part.trim()))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            SweepConfig::from_config_text(&text)?
        }
        None => SweepConfig::default(),
    };
    if let Some(list) = &args.n {
        config.n_values = parse_flag_list("n", list)?;
    }
    if let Some(list) = &args.q {
        config.q_values = parse_flag_list("q", list)?;
    }
    if let Some(model) = args.model {
        config.model = model;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if args.count {
        config.count_assemblies = true;
    }
    if let Some(limit) = args.class_limit {
        config.class_limit = limit;
    }
    if let Some(nodes) = args.node_budget {
        config.node_budget = Some(nodes);
    }
    if let Some(ms) = args.time_budget_ms {
        config.time_budget = Duration::from_millis(ms);
    }
    if args.timings {
        config.record_timings = true;
    }
    config.jobs = match args.jobs {
        Some(jobs) => jobs,
        None => match std::env::var("JIG_JOBS") {
            Ok(text) => text
                .parse()
                .map_err(|e| anyhow::anyhow!("environment variable JIG_JOBS: {e}"))?,
            Err(_) => config.jobs,
        },
    };

    let result = run_sweep(&config)?;
    let csv = result.to_csv();
    match &args.output {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("writing CSV to {}", path.display()))?,
        None if !args.table => print!("{csv}"),
        None => {}
    }
    if let Some(path) = &args.summary {
        fs::write(path, result.summary.to_json())
            .with_context(|| format!("writing summary to {}", path.display()))?;
    }
    if args.table {
        print!("{}", result.summary.to_table());
    }
    Ok(())
}

fn cmd_census(args: CensusArgs) -> Result<()> {
    let census = piece_type_census(args.q)?;
    let value = serde_json::json!({
        "q": args.q,
        "orbit_one": census.r1,
        "orbit_two": census.r2,
        "orbit_four": census.r4,
        "total_classes": census.total,
    });
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    emit(args.output.as_ref(), &text)
}
