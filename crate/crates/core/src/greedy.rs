//! Randomized greedy filling and an unbiased assembly-count estimator.
//!
//! The assembler fills the board column by column, drawing uniformly among
//! the distinct edge tuples that still fit. Multiplying the branch-set
//! sizes along one such walk (and scoring dead ends as zero) gives an
//! estimate whose expectation over the walk's randomness is exactly the raw
//! assembly count, because each completed fill is reached with probability
//! one over the product of its branch choices.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::PieceBag;
use crate::search::{FillOrder, FillState, TypeTable};
use crate::seeding::derive_seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GreedyError {
    #[error("the assembly-count scale needs 2 <= q <= n, got q = {q} with n = {n}")]
    QRange { n: usize, q: u32 },
}

/// One greedy walk over the board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOutcome {
    /// True when every cell was filled.
    pub success: bool,
    /// Product of branch-set sizes along the walk; zero on a dead end.
    pub estimate: BigUint,
    /// Cells filled before stopping; equals `n^2` on success.
    pub path_length: usize,
}

/// Sample statistics over repeated greedy walks.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSummary {
    pub runs: u64,
    /// Mean of the per-run estimates, `sum / runs`.
    pub mean: f64,
    /// Standard error of the mean; zero when fewer than two runs.
    pub stderr: f64,
    /// Fraction of walks that filled the whole board.
    pub success_rate: f64,
}

/// Fills the board greedily, visiting cells top to bottom in each column
/// and columns left to right, choosing uniformly among the distinct fitting
/// tuples at every step.
pub fn greedy_fill(bag: &PieceBag, seed: u64) -> GreedyOutcome {
    let n = bag.n();
    let cells = n * n;
    assert_eq!(
        bag.mass(),
        cells as u64,
        "greedy fill needs a bag of exactly n^2 pieces"
    );
    let table = TypeTable::from_bag(bag);
    let mut state = FillState::new(&table);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimate = BigUint::from(1u32);
    let mut branches = Vec::new();
    for k in 0..cells {
        let (r, c) = FillOrder::ColMajor.cell(n, k);
        state.collect_branches(&table, r, c, &mut branches);
        if branches.is_empty() {
            return GreedyOutcome {
                success: false,
                estimate: BigUint::zero(),
                path_length: k,
            };
        }
        estimate *= branches.len() as u64;
        let (ti, piece) = branches[rng.random_range(0..branches.len())];
        state.place(ti, r, c, piece);
    }
    GreedyOutcome {
        success: true,
        estimate,
        path_length: cells,
    }
}

/// Runs `runs` independent greedy walks and summarizes their estimates.
///
/// Walk `i` uses the seed derived from `(master_seed, n, q, i)`, so
/// summaries are reproducible and extend deterministically when `runs`
/// grows.
pub fn estimate_raw_count(bag: &PieceBag, runs: u64, master_seed: u64) -> EstimatorSummary {
    assert!(runs >= 1, "at least one run is needed");
    let mut sum = BigUint::zero();
    let mut sum_sq = BigUint::zero();
    let mut successes = 0u64;
    for run in 0..runs {
        let seed = derive_seed(master_seed, bag.n(), bag.q(), run);
        let outcome = greedy_fill(bag, seed);
        if outcome.success {
            successes += 1;
        }
        sum_sq += &outcome.estimate * &outcome.estimate;
        sum += outcome.estimate;
    }
    let runs_f = runs as f64;
    let mean = sum.to_f64().unwrap_or(f64::INFINITY) / runs_f;
    let stderr = if runs >= 2 {
        let sum_sq_f = sum_sq.to_f64().unwrap_or(f64::INFINITY);
        let variance = ((sum_sq_f - runs_f * mean * mean) / (runs_f - 1.0)).max(0.0);
        (variance / runs_f).sqrt()
    } else {
        0.0
    };
    EstimatorSummary {
        runs,
        mean,
        stderr,
        success_rate: successes as f64 / runs_f,
    }
}

/// Leading-order size of the raw assembly count in bits,
/// `n^2 * log2(min(q^2, n^2/q^2))`, valid for `2 <= q <= n`.
pub fn solution_scale_log2(n: usize, q: u32) -> Result<f64, GreedyError> {
    if q < 2 || (q as usize) > n {
        return Err(GreedyError::QRange { n, q });
    }
    let n2 = (n * n) as f64;
    let q2 = (q as f64) * (q as f64);
    Ok(n2 * (q2.min(n2 / q2)).log2())
}
