//! Deterministic parameter sweeps over (n, q) cells.
//!
//! Each trial generates a board from a seed derived from the master seed
//! and the cell coordinates, so results never depend on thread scheduling:
//! records land in slots indexed by task and are emitted sorted by
//! `(n, q, trial)`. Timing is recorded only on request, so that two runs of
//! the same sweep produce byte-identical CSV no matter how many worker
//! threads they used.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::model::{generate_puzzle, ModelVariant, PieceBag};
use crate::seeding::{derive_seed, MAX_SEED_N, MAX_SEED_Q, MAX_SEED_TRIAL};
use crate::solver::{
    distinct_classes_capped, enumerate_assemblies_budgeted, SearchBudget, DEFAULT_CLASS_LIMIT,
};

/// Exact CSV column set, in order.
pub const CSV_HEADER: &str = "n,q,model,trial,seed,unique_edge,unique_vertex,distinct_classes,raw_count,duplicates,wall_ms,outcome";

/// Default wall-clock allowance per trial.
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(10);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("config line {line}: expected `key = value`, found `{text}`")]
    Line { line: usize, text: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value for `{key}`: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
}

/// Everything a sweep needs to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub q_values: Vec<u32>,
    pub model: ModelVariant,
    pub trials: u64,
    pub master_seed: u64,
    /// Class cap when assemblies are being counted.
    pub class_limit: usize,
    /// Node cap per trial search, on top of the time budget.
    pub node_budget: Option<u64>,
    /// Wall-clock cap per trial search.
    pub time_budget: Duration,
    /// Count all assemblies instead of only probing uniqueness.
    pub count_assemblies: bool,
    /// Worker threads; 0 picks the machine's parallelism.
    pub jobs: usize,
    /// Record real wall times. Off by default: run times vary, and the
    /// default output must be byte-identical across repeats and thread
    /// counts, so `wall_ms` stays 0 unless explicitly requested.
    pub record_timings: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_values: vec![5],
            q_values: vec![2, 3, 4],
            model: ModelVariant::RotationsAllowed,
            trials: 100,
            master_seed: 0,
            class_limit: DEFAULT_CLASS_LIMIT,
            node_budget: None,
            time_budget: DEFAULT_TIME_BUDGET,
            count_assemblies: false,
            jobs: 0,
            record_timings: false,
        }
    }
}

impl SweepConfig {
    /// Parses the `key = value` config format: one pair per line, `#`
    /// comments, comma-separated lists for `n` and `q`. Unset keys keep
    /// their defaults.
    pub fn from_config_text(text: &str) -> Result<SweepConfig, SweepError> {
        let mut config = SweepConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| SweepError::Line {
                line,
                text: content.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| SweepError::Value {
                line,
                key: key.to_string(),
                message,
            };
            match key {
                "n" => config.n_values = parse_list(value).map_err(bad)?,
                "q" => config.q_values = parse_list(value).map_err(bad)?,
                "model" => {
                    config.model =
                        ModelVariant::from_str(value).map_err(|e| bad(e.to_string()))?
                }
                "trials" => config.trials = parse_one(value).map_err(bad)?,
                "seed" => config.master_seed = parse_one(value).map_err(bad)?,
                "class_limit" => config.class_limit = parse_one(value).map_err(bad)?,
                "node_budget" => {
                    config.node_budget = match value {
                        "none" => None,
                        _ => Some(parse_one(value).map_err(bad)?),
                    }
                }
                "time_budget_ms" => {
                    config.time_budget = Duration::from_millis(parse_one(value).map_err(bad)?)
                }
                "count_assemblies" => config.count_assemblies = parse_bool(value).map_err(bad)?,
                "jobs" => config.jobs = parse_one(value).map_err(bad)?,
                "timings" => config.record_timings = parse_bool(value).map_err(bad)?,
                _ => {
                    return Err(SweepError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(config)
    }

    fn validate(&self) -> Result<(), SweepError> {
        let field = |field: &'static str, message: String| SweepError::Field { field, message };
        if self.n_values.is_empty() {
            return Err(field("n", "at least one board side is needed".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0 || n >= MAX_SEED_N) {
            return Err(field("n", format!("side {n} outside 1..{MAX_SEED_N}")));
        }
        if self.q_values.is_empty() {
            return Err(field("q", "at least one color count is needed".into()));
        }
        if let Some(&q) = self.q_values.iter().find(|&&q| q == 0 || q >= MAX_SEED_Q) {
            return Err(field("q", format!("color count {q} outside 1..{MAX_SEED_Q}")));
        }
        if self.trials == 0 || self.trials > MAX_SEED_TRIAL {
            return Err(field(
                "trials",
                format!("{} outside 1..={MAX_SEED_TRIAL}", self.trials),
            ));
        }
        if self.class_limit == 0 {
            return Err(field("class_limit", "must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|part| part.trim().parse::<T>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_one<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| e.to_string())
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected `true` or `false`, found `{value}`")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    /// The uniqueness question was settled within budget.
    Ok,
    /// A budget interrupted the search; flags are conservative.
    Budget,
}

impl std::fmt::Display for TrialOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrialOutcome::Ok => "ok",
            TrialOutcome::Budget => "budget",
        })
    }
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub n: usize,
    pub q: u32,
    pub model: ModelVariant,
    pub trial: u64,
    pub seed: u64,
    pub unique_edge: bool,
    pub unique_vertex: bool,
    /// Distinct assembly classes found (a lower bound on budget rows; the
    /// probe stops at 2 when assemblies are not being counted).
    pub distinct_classes: u64,
    /// Exact raw assembly count; only present when counting was requested
    /// and trustworthy only on `ok` rows.
    pub raw_count: Option<BigUint>,
    pub duplicates: bool,
    /// 0 unless the sweep recorded timings.
    pub wall_ms: u64,
    pub outcome: TrialOutcome,
}

impl TrialRecord {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.q,
            self.model,
            self.trial,
            self.seed,
            self.unique_edge,
            self.unique_vertex,
            self.distinct_classes,
            self.raw_count
                .as_ref()
                .map(|c| c.to_string())
                .unwrap_or_default(),
            self.duplicates,
            self.wall_ms,
            self.outcome,
        )
    }
}

/// Per-cell aggregates. Rates over uniqueness use only resolved rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub q: u32,
    pub trials: u64,
    pub resolved: u64,
    pub budget_hits: u64,
    pub unique_edge: u64,
    pub unique_vertex: u64,
    pub multiple_assembly: u64,
    pub duplicated_bags: u64,
    pub p_unique_edge: f64,
    pub p_unique_vertex: f64,
    pub p_duplicates: f64,
}

/// Whole-sweep aggregates, serialized as the summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub model: ModelVariant,
    pub master_seed: u64,
    pub trials_per_cell: u64,
    pub cells: Vec<CellSummary>,
}

impl SweepSummary {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summaries always serialize");
        text.push('\n');
        text
    }

    /// Plain-text table of the per-cell rates.
    pub fn to_table(&self) -> String {
        let mut out = String::from(
            "  n    q  trials  resolved  p_unique_edge  p_unique_vertex  p_duplicates\n",
        );
        for cell in &self.cells {
            out.push_str(&format!(
                "{:>3} {:>4} {:>7} {:>9} {:>14.4} {:>16.4} {:>13.4}\n",
                cell.n,
                cell.q,
                cell.trials,
                cell.resolved,
                cell.p_unique_edge,
                cell.p_unique_vertex,
                cell.p_duplicates,
            ));
        }
        out
    }
}

/// All records plus their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: SweepSummary,
}

impl SweepResult {
    /// The full CSV text: headline plus one row per trial, sorted by
    /// `(n, q, trial)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for record in &self.records {
            out.push_str(&record.csv_row());
            out.push('\n');
        }
        out
    }
}

fn run_trial(config: &SweepConfig, n: usize, q: u32, trial: u64) -> TrialRecord {
    let seed = derive_seed(config.master_seed, n, q, trial);
    let start = Instant::now();
    let coloring = generate_puzzle(n, q, seed).expect("sweep parameters were validated");
    let bag = PieceBag::extract(&coloring, config.model);
    let duplicates = bag.has_duplicates();
    let budget = SearchBudget {
        max_nodes: config.node_budget,
        time_limit: Some(config.time_budget),
    };

    let (resolved, unique_edge, distinct_found, raw_count) = if config.count_assemblies {
        let (set, report) = enumerate_assemblies_budgeted(&bag, config.class_limit, &budget)
            .expect("extracted bags fill their board");
        let unique = report.complete && !set.truncated && set.class_count() == 1;
        (
            report.complete,
            unique,
            set.class_count() as u64,
            Some(set.raw_count),
        )
    } else {
        let probe = distinct_classes_capped(&bag, 2, &budget)
            .expect("extracted bags fill their board");
        (probe.resolved, probe.resolved && probe.found == 1, probe.found, None)
    };

    let unique_vertex = match config.model {
        ModelVariant::RotationsAllowed => {
            n == 1 || (!duplicates && bag.all_orbit_four() && unique_edge)
        }
        ModelVariant::FixedOrientation => unique_edge && !duplicates,
    };

    TrialRecord {
        n,
        q,
        model: config.model,
        trial,
        seed,
        unique_edge,
        unique_vertex,
        // a bag cut from a real board always assembles at least once
        distinct_classes: distinct_found.max(1),
        raw_count,
        duplicates,
        wall_ms: if config.record_timings {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
        outcome: if resolved {
            TrialOutcome::Ok
        } else {
            TrialOutcome::Budget
        },
    }
}

fn summarize(config: &SweepConfig, records: &[TrialRecord]) -> SweepSummary {
    let mut cells = Vec::new();
    for &n in &config.n_values {
        for &q in &config.q_values {
            let rows: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.n == n && r.q == q)
                .collect();
            let trials = rows.len() as u64;
            let resolved = rows.iter().filter(|r| r.outcome == TrialOutcome::Ok).count() as u64;
            let unique_edge = rows.iter().filter(|r| r.unique_edge).count() as u64;
            let unique_vertex = rows.iter().filter(|r| r.unique_vertex).count() as u64;
            let duplicated = rows.iter().filter(|r| r.duplicates).count() as u64;
            let rate = |count: u64, denom: u64| {
                if denom == 0 {
                    0.0
                } else {
                    count as f64 / denom as f64
                }
            };
            cells.push(CellSummary {
                n,
                q,
                trials,
                resolved,
                budget_hits: trials - resolved,
                unique_edge,
                unique_vertex,
                multiple_assembly: resolved - unique_edge,
                duplicated_bags: duplicated,
                p_unique_edge: rate(unique_edge, resolved),
                p_unique_vertex: rate(unique_vertex, resolved),
                p_duplicates: rate(duplicated, trials),
            });
        }
    }
    SweepSummary {
        schema_version: 1,
        model: config.model,
        master_seed: config.master_seed,
        trials_per_cell: config.trials,
        cells,
    }
}

/// Runs every trial of every cell, on `jobs` worker threads, and returns
/// records sorted by `(n, q, trial)` together with per-cell aggregates.
/// Output is identical for every thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let mut tasks = Vec::new();
    for &n in &config.n_values {
        for &q in &config.q_values {
            for trial in 0..config.trials {
                tasks.push((n, q, trial));
            }
        }
    }

    let jobs = if config.jobs == 0 {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    } else {
        config.jobs
    }
    .min(tasks.len().max(1));

    let mut slots: Vec<Option<TrialRecord>> = vec![None; tasks.len()];
    if jobs <= 1 {
        for (slot, &(n, q, trial)) in slots.iter_mut().zip(&tasks) {
            *slot = Some(run_trial(config, n, q, trial));
        }
    } else {
        let cursor = AtomicUsize::new(0);
        let sink: Mutex<&mut Vec<Option<TrialRecord>>> = Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| {
                    let mut local: Vec<(usize, TrialRecord)> = Vec::new();
                    loop {
                        let index = cursor.fetch_add(1, Ordering::Relaxed);
                        let Some(&(n, q, trial)) = tasks.get(index) else {
                            break;
                        };
                        local.push((index, run_trial(config, n, q, trial)));
                    }
                    let mut guard = sink.lock().expect("no worker panics while merging");
                    for (index, record) in local {
                        guard[index] = Some(record);
                    }
                });
            }
        });
    }

    // tasks were generated in (n, q, trial) order, so slot order is sorted
    let records: Vec<TrialRecord> = slots
        .into_iter()
        .map(|slot| slot.expect("every task ran"))
        .collect();
    let summary = summarize(config, &records);
    Ok(SweepResult { records, summary })
}
