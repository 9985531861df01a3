//! Exact reassembly: enumeration, uniqueness verdicts, and brute oracles.
//!
//! An assembly of a bag is a full edge coloring of the board whose cut
//! pieces reproduce the bag with multiplicity. Assemblies are counted two
//! ways: raw (as colorings) and up to whole-board rotation (classes). The
//! naive oracle re-derives the same answers by scanning every coloring of
//! the board, which is only feasible for tiny parameters but independent of
//! the backtracking code.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::model::{for_each_coloring, EdgeColoring, ModelVariant, Piece, PieceBag};
use crate::search::{dfs, Budget, FillOrder, Interrupt, TypeTable};

/// Default cap on the number of recorded assembly classes.
pub const DEFAULT_CLASS_LIMIT: usize = 1_000_000;
/// Default cap on the colorings an exhaustive oracle scan may visit.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1 << 25;
/// Default node allowance for the labeled placement oracle.
pub const DEFAULT_VERTEX_ORACLE_NODES: u64 = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("bag holds {actual} pieces but an {n}x{n} board needs {expected}")]
    BagMass { n: usize, actual: u64, expected: u64 },
    #[error("oracle space of {total} colorings exceeds the budget of {budget}")]
    OracleBudget { total: u128, budget: u64 },
    #[error("node budget of {budget} exhausted before the answer resolved")]
    NodeBudget { budget: u64 },
}

/// Wall-clock and node bounds for a single search call.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub const UNBOUNDED: SearchBudget = SearchBudget {
        max_nodes: None,
        time_limit: None,
    };

    fn start(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            deadline: self.time_limit.map(|limit| Instant::now() + limit),
        }
    }
}

/// Everything the exhaustive solver found for one bag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    /// Number of assemblies counted as edge colorings.
    pub raw_count: BigUint,
    /// Assembly classes found, one canonical representative each, sorted.
    /// Under fixed orientation every coloring is its own class.
    pub distinct_classes: Vec<EdgeColoring>,
    /// True when more classes exist than `limit` allowed to record.
    pub truncated: bool,
    /// The cap that was in force while recording classes.
    pub limit: usize,
}

impl SolutionSet {
    pub fn class_count(&self) -> usize {
        self.distinct_classes.len()
    }
}

/// Result of probing for assembly classes up to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassProbe {
    /// Distinct classes discovered before stopping.
    pub found: u64,
    /// True when the question "are there at least `cap` classes?" was
    /// settled: either the cap was hit or the tree was exhausted.
    pub resolved: bool,
    pub nodes: u64,
}

/// Why a board fails (or passes) the strong uniqueness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictReason {
    DuplicatePieces,
    SymmetricPiece,
    MultipleEdgeColorings,
    Unique,
}

impl std::fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            VerdictReason::DuplicatePieces => "duplicate pieces",
            VerdictReason::SymmetricPiece => "symmetric piece",
            VerdictReason::MultipleEdgeColorings => "multiple edge colorings",
            VerdictReason::Unique => "unique",
        };
        f.write_str(text)
    }
}

/// Uniqueness verdict for a board under rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssemblyVerdict {
    /// The bag assembles into exactly one class of colorings.
    pub unique_edge: bool,
    /// Every reassembly also places every piece back in its original
    /// position and orientation, up to rotating the whole board.
    pub unique_vertex: bool,
    /// First failed requirement, or `Unique`.
    pub reason: VerdictReason,
}

/// An assembly count that may be a budget-limited lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCount {
    pub count: BigUint,
    /// False when the search stopped on a budget and `count` is only a
    /// lower bound.
    pub exact: bool,
}

fn check_mass(bag: &PieceBag) -> Result<(), SolverError> {
    let expected = (bag.n() * bag.n()) as u64;
    if bag.mass() != expected {
        return Err(SolverError::BagMass {
            n: bag.n(),
            actual: bag.mass(),
            expected,
        });
    }
    Ok(())
}

fn class_key(coloring: EdgeColoring, model: ModelVariant) -> EdgeColoring {
    match model {
        ModelVariant::RotationsAllowed => coloring.canonical(),
        ModelVariant::FixedOrientation => coloring,
    }
}

/// Exhaustively reassembles `bag`, counting every assembly and recording up
/// to `limit` distinct classes.
///
/// The class list is cut off at `limit` (setting `truncated`) but the raw
/// count keeps running to the end. Raising the limit never drops a class
/// that a lower limit reported.
pub fn enumerate_assemblies(bag: &PieceBag, limit: usize) -> Result<SolutionSet, SolverError> {
    let (set, report) = enumerate_assemblies_budgeted(bag, limit, &SearchBudget::UNBOUNDED)?;
    debug_assert!(report.complete);
    Ok(set)
}

/// Outcome flags for a budgeted enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationReport {
    /// False when a budget interrupted the search; counts are then lower
    /// bounds.
    pub complete: bool,
    pub nodes: u64,
}

/// [`enumerate_assemblies`] under a node and wall-clock budget.
pub fn enumerate_assemblies_budgeted(
    bag: &PieceBag,
    limit: usize,
    budget: &SearchBudget,
) -> Result<(SolutionSet, EnumerationReport), SolverError> {
    check_mass(bag)?;
    let model = bag.model();
    let q = bag.q();
    let table = TypeTable::from_bag(bag);
    let mut raw: u64 = 0;
    let mut classes: BTreeSet<EdgeColoring> = BTreeSet::new();
    let mut truncated = false;
    let report = dfs(&table, FillOrder::RowMajor, budget.start(), &mut |state| {
        raw += 1;
        let key = class_key(state.to_coloring(q), model);
        if !classes.contains(&key) {
            if classes.len() < limit {
                classes.insert(key);
            } else {
                truncated = true;
            }
        }
        ControlFlow::Continue(())
    });
    Ok((
        SolutionSet {
            raw_count: BigUint::from(raw),
            distinct_classes: classes.into_iter().collect(),
            truncated,
            limit,
        },
        EnumerationReport {
            complete: report.interrupt.is_none(),
            nodes: report.nodes,
        },
    ))
}

/// Counts assemblies of `bag` by scanning every coloring of the board and
/// comparing bags. Errors out when the state space `q^(2n(n+1))` exceeds
/// `budget` colorings.
///
/// A bag whose mass does not fill the board simply matches no coloring.
pub fn naive_oracle_count(bag: &PieceBag, budget: u64) -> Result<SolutionSet, SolverError> {
    let n = bag.n();
    let q = bag.q();
    let exponent = (2 * n * (n + 1)) as u32;
    let total = (q as u128)
        .checked_pow(exponent)
        .unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(SolverError::OracleBudget { total, budget });
    }
    let model = bag.model();
    let mut raw: u64 = 0;
    let mut classes: BTreeSet<EdgeColoring> = BTreeSet::new();
    for_each_coloring(n, q, |coloring| {
        if PieceBag::extract(coloring, model) == *bag {
            raw += 1;
            classes.insert(class_key(coloring.clone(), model));
        }
        ControlFlow::Continue(())
    });
    Ok(SolutionSet {
        raw_count: BigUint::from(raw),
        distinct_classes: classes.into_iter().collect(),
        truncated: false,
        limit: usize::MAX,
    })
}

/// Searches until `cap` distinct classes have been seen, the tree is
/// exhausted, or the budget runs out.
pub fn distinct_classes_capped(
    bag: &PieceBag,
    cap: u64,
    budget: &SearchBudget,
) -> Result<ClassProbe, SolverError> {
    check_mass(bag)?;
    assert!(cap >= 1, "a probe for zero classes answers nothing");
    let model = bag.model();
    let q = bag.q();
    let table = TypeTable::from_bag(bag);
    let mut classes: BTreeSet<EdgeColoring> = BTreeSet::new();
    let report = dfs(&table, FillOrder::RowMajor, budget.start(), &mut |state| {
        let key = class_key(state.to_coloring(q), model);
        classes.insert(key);
        if classes.len() as u64 >= cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    let found = classes.len() as u64;
    let resolved = match report.interrupt {
        None => true,
        Some(Interrupt::Visitor) => true,
        Some(Interrupt::Nodes) | Some(Interrupt::Time) => false,
    };
    Ok(ClassProbe {
        found,
        resolved,
        nodes: report.nodes,
    })
}

/// True when the pieces of `coloring` admit exactly one assembly class.
pub fn has_unique_edge_assembly(coloring: &EdgeColoring, model: ModelVariant) -> bool {
    let bag = PieceBag::extract(coloring, model);
    let probe = distinct_classes_capped(&bag, 2, &SearchBudget::UNBOUNDED)
        .expect("extracted bags fill their board");
    debug_assert!(probe.resolved);
    probe.found == 1
}

/// Strong uniqueness verdict for a board with rotations allowed.
///
/// A 1x1 board is trivially unique. For larger boards the verdict holds
/// exactly when the bag has no repeated type, every type has four distinct
/// rotations, and the edge-level assembly class is unique; `reason` names
/// the first requirement that failed.
pub fn vertex_uniqueness(coloring: &EdgeColoring) -> AssemblyVerdict {
    if coloring.n() == 1 {
        return AssemblyVerdict {
            unique_edge: true,
            unique_vertex: true,
            reason: VerdictReason::Unique,
        };
    }
    let bag = PieceBag::extract(coloring, ModelVariant::RotationsAllowed);
    let duplicates = bag.has_duplicates();
    let all_orbit_four = bag.all_orbit_four();
    let unique_edge = has_unique_edge_assembly(coloring, ModelVariant::RotationsAllowed);
    let unique_vertex = !duplicates && all_orbit_four && unique_edge;
    let reason = if unique_vertex {
        VerdictReason::Unique
    } else if duplicates {
        VerdictReason::DuplicatePieces
    } else if !all_orbit_four {
        VerdictReason::SymmetricPiece
    } else {
        VerdictReason::MultipleEdgeColorings
    };
    AssemblyVerdict {
        unique_edge,
        unique_vertex,
        reason,
    }
}

/// Checks vertex uniqueness by enumerating labeled placements: every piece
/// keeps its identity and orientation label, and the board is unique in the
/// strong sense exactly when four labeled assemblies exist (the four whole
/// board rotations).
///
/// Independent of [`vertex_uniqueness`]; intended as a cross-check at small
/// parameters. `max_nodes` bounds the placement tree.
pub fn vertex_uniqueness_oracle(
    coloring: &EdgeColoring,
    max_nodes: Option<u64>,
) -> Result<bool, SolverError> {
    let n = coloring.n();
    let mut pieces = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            pieces.push(coloring.piece_at(r, c));
        }
    }
    let mut used = vec![false; pieces.len()];
    let mut h = vec![0; (n + 1) * n];
    let mut v = vec![0; n * (n + 1)];
    let mut assemblies: u32 = 0;
    let mut nodes: u64 = 0;

    struct Frame<'a> {
        n: usize,
        pieces: &'a [Piece],
        used: &'a mut [bool],
        h: &'a mut [u32],
        v: &'a mut [u32],
        assemblies: &'a mut u32,
        nodes: &'a mut u64,
        max_nodes: Option<u64>,
    }

    fn place_all(f: &mut Frame<'_>, k: usize) -> Result<ControlFlow<()>, SolverError> {
        let n = f.n;
        if k == n * n {
            *f.assemblies += 1;
            if *f.assemblies > 4 {
                return Ok(ControlFlow::Break(()));
            }
            return Ok(ControlFlow::Continue(()));
        }
        let (r, c) = (k / n, k % n);
        let north = (r > 0).then(|| f.h[r * n + c]);
        let west = (c > 0).then(|| f.v[r * (n + 1) + c]);
        for i in 0..f.pieces.len() {
            if f.used[i] {
                continue;
            }
            for o in 0..4 {
                let t = f.pieces[i].rotated(o);
                if north.is_some_and(|col| col != t.north()) {
                    continue;
                }
                if west.is_some_and(|col| col != t.west()) {
                    continue;
                }
                *f.nodes += 1;
                if let Some(max) = f.max_nodes {
                    if *f.nodes > max {
                        return Err(SolverError::NodeBudget { budget: max });
                    }
                }
                f.h[r * n + c] = t.north();
                f.h[(r + 1) * n + c] = t.south();
                f.v[r * (n + 1) + c] = t.west();
                f.v[r * (n + 1) + c + 1] = t.east();
                f.used[i] = true;
                let flow = place_all(f, k + 1)?;
                f.used[i] = false;
                if flow.is_break() {
                    return Ok(flow);
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    let mut frame = Frame {
        n,
        pieces: &pieces,
        used: &mut used,
        h: &mut h,
        v: &mut v,
        assemblies: &mut assemblies,
        nodes: &mut nodes,
        max_nodes,
    };
    // a break only means the count already exceeded four
    let _ = place_all(&mut frame, 0)?;
    Ok(assemblies == 4)
}

/// Counts raw assemblies of `bag`, stopping at the budget if one is given.
pub fn count_raw_assemblies(bag: &PieceBag, budget: &SearchBudget) -> Result<RawCount, SolverError> {
    check_mass(bag)?;
    let table = TypeTable::from_bag(bag);
    let mut raw: u64 = 0;
    let report = dfs(&table, FillOrder::RowMajor, budget.start(), &mut |_| {
        raw += 1;
        ControlFlow::Continue(())
    });
    Ok(RawCount {
        count: BigUint::from(raw),
        exact: report.interrupt.is_none(),
    })
}
