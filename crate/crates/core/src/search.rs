//! Shared backtracking engine for board filling.
//!
//! The solver and the greedy assembler both place pieces cell by cell and
//! branch over the distinct edge tuples still available from the bag. They
//! share this engine so that their branch sets are identical by
//! construction; only the traversal policy differs.

use std::ops::ControlFlow;
use std::time::Instant;

use crate::model::{Color, EdgeColoring, ModelVariant, Piece, PieceBag};

/// Cell visiting order for a fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FillOrder {
    /// Left to right, top to bottom; used by the exhaustive solver.
    RowMajor,
    /// Top to bottom, left to right; used by the greedy assembler.
    ColMajor,
}

impl FillOrder {
    pub(crate) fn cell(self, n: usize, k: usize) -> (usize, usize) {
        match self {
            FillOrder::RowMajor => (k / n, k % n),
            FillOrder::ColMajor => (k % n, k / n),
        }
    }
}

/// Per-type placement data: the distinct orientations a piece type offers.
pub(crate) struct TypeTable {
    pub n: usize,
    /// Distinct placeable tuples per type, sorted; under fixed orientation
    /// this is the single tuple as cut.
    pub tuples: Vec<Vec<Piece>>,
    pub multiplicity: Vec<u64>,
}

impl TypeTable {
    pub(crate) fn from_bag(bag: &PieceBag) -> TypeTable {
        let mut tuples = Vec::with_capacity(bag.counts().len());
        let mut multiplicity = Vec::with_capacity(bag.counts().len());
        for (&piece, &count) in bag.counts() {
            let rots = match bag.model() {
                ModelVariant::RotationsAllowed => piece.distinct_rotations(),
                ModelVariant::FixedOrientation => vec![piece],
            };
            tuples.push(rots);
            multiplicity.push(count);
        }
        TypeTable {
            n: bag.n(),
            tuples,
            multiplicity,
        }
    }

    pub(crate) fn cells(&self) -> usize {
        self.n * self.n
    }
}

/// A partially filled board plus the remaining type multiplicities.
///
/// Edges are written at placement time and only ever read for cells whose
/// north or west neighbor has already been placed, so no undo is needed:
/// re-placing a cell overwrites all four of its edge slots.
pub(crate) struct FillState {
    n: usize,
    h: Vec<Color>,
    v: Vec<Color>,
    remaining: Vec<u64>,
}

impl FillState {
    pub(crate) fn new(table: &TypeTable) -> FillState {
        let n = table.n;
        FillState {
            n,
            h: vec![0; (n + 1) * n],
            v: vec![0; n * (n + 1)],
            remaining: table.multiplicity.clone(),
        }
    }

    /// Distinct tuples from the remaining types that fit cell `(r, c)`,
    /// honoring the colors already fixed by the north and west neighbors.
    pub(crate) fn collect_branches(
        &self,
        table: &TypeTable,
        r: usize,
        c: usize,
        out: &mut Vec<(usize, Piece)>,
    ) {
        out.clear();
        let north = (r > 0).then(|| self.h[r * self.n + c]);
        let west = (c > 0).then(|| self.v[r * (self.n + 1) + c]);
        for (ti, rots) in table.tuples.iter().enumerate() {
            if self.remaining[ti] == 0 {
                continue;
            }
            for &t in rots {
                if north.is_some_and(|col| col != t.north()) {
                    continue;
                }
                if west.is_some_and(|col| col != t.west()) {
                    continue;
                }
                out.push((ti, t));
            }
        }
    }

    /// Writes the four edges of `piece` at `(r, c)` and consumes one copy
    /// of type `ti`.
    pub(crate) fn place(&mut self, ti: usize, r: usize, c: usize, piece: Piece) {
        let n = self.n;
        self.h[r * n + c] = piece.north();
        self.h[(r + 1) * n + c] = piece.south();
        self.v[r * (n + 1) + c] = piece.west();
        self.v[r * (n + 1) + c + 1] = piece.east();
        self.remaining[ti] -= 1;
    }

    pub(crate) fn unplace(&mut self, ti: usize) {
        self.remaining[ti] += 1;
    }

    pub(crate) fn to_coloring(&self, q: u32) -> EdgeColoring {
        EdgeColoring::from_flat(self.n, q, self.h.clone(), self.v.clone())
            .expect("filled board is a valid coloring")
    }
}

/// Resource bounds for a search.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Budget {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

#[cfg(test)]
impl Budget {
    pub(crate) const UNBOUNDED: Budget = Budget {
        max_nodes: None,
        deadline: None,
    };
}

/// Why a search returned before exhausting the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Interrupt {
    /// The node budget ran out.
    Nodes,
    /// The deadline passed.
    Time,
    /// The leaf visitor asked to stop.
    Visitor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SearchReport {
    /// `None` when the whole tree was traversed.
    pub interrupt: Option<Interrupt>,
    pub nodes: u64,
}

const DEADLINE_POLL_MASK: u64 = 0x3FF;

struct Dfs<'a, F> {
    table: &'a TypeTable,
    order: FillOrder,
    budget: Budget,
    on_leaf: &'a mut F,
    state: FillState,
    scratch: Vec<Vec<(usize, Piece)>>,
    nodes: u64,
}

impl<F> Dfs<'_, F>
where
    F: FnMut(&FillState) -> ControlFlow<()>,
{
    fn run(&mut self) -> Option<Interrupt> {
        match self.descend(0) {
            ControlFlow::Continue(()) => None,
            ControlFlow::Break(stop) => Some(stop),
        }
    }

    fn descend(&mut self, k: usize) -> ControlFlow<Interrupt> {
        if k == self.table.cells() {
            return match (self.on_leaf)(&self.state) {
                ControlFlow::Continue(()) => ControlFlow::Continue(()),
                ControlFlow::Break(()) => ControlFlow::Break(Interrupt::Visitor),
            };
        }
        let (r, c) = self.order.cell(self.table.n, k);
        let mut branches = std::mem::take(&mut self.scratch[k]);
        self.state.collect_branches(self.table, r, c, &mut branches);
        let mut flow = ControlFlow::Continue(());
        for &(ti, piece) in &branches {
            self.nodes += 1;
            if let Some(max) = self.budget.max_nodes {
                if self.nodes > max {
                    flow = ControlFlow::Break(Interrupt::Nodes);
                    break;
                }
            }
            if self.nodes & DEADLINE_POLL_MASK == 0 {
                if let Some(deadline) = self.budget.deadline {
                    if Instant::now() >= deadline {
                        flow = ControlFlow::Break(Interrupt::Time);
                        break;
                    }
                }
            }
            self.state.place(ti, r, c, piece);
            let inner = self.descend(k + 1);
            self.state.unplace(ti);
            if inner.is_break() {
                flow = inner;
                break;
            }
        }
        self.scratch[k] = branches;
        flow
    }
}

/// Depth-first traversal over all fills of the bag behind `table`, invoking
/// `on_leaf` at every completed board.
pub(crate) fn dfs<F>(
    table: &TypeTable,
    order: FillOrder,
    budget: Budget,
    on_leaf: &mut F,
) -> SearchReport
where
    F: FnMut(&FillState) -> ControlFlow<()>,
{
    let cells = table.cells();
    let mut driver = Dfs {
        table,
        order,
        budget,
        on_leaf,
        state: FillState::new(table),
        scratch: vec![Vec::new(); cells],
        nodes: 0,
    };
    let interrupt = driver.run();
    SearchReport {
        interrupt,
        nodes: driver.nodes,
    }
}
