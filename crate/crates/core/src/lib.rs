//! Laboratory for random jigsaw puzzles.
//!
//! An `n x n` board is colored by drawing every edge segment (interior and
//! boundary) independently and uniformly from `q` colors. Cutting along the
//! interior edges yields `n^2` unit pieces, each described by its four edge
//! colors. The library asks, in several exact and statistical ways, how much
//! of the original picture the resulting bag of pieces remembers:
//!
//! * [`model`]: boards, pieces, rotation classes, bag extraction, census.
//! * [`solver`]: exact reassembly enumeration and uniqueness verdicts.
//! * [`entropy`]: closed forms, exhaustive distributions, Monte Carlo
//!   estimates of picture and bag entropy.
//! * [`greedy`]: randomized greedy filling and an unbiased estimator for
//!   the number of raw assemblies.
//! * [`sweep`]: deterministic multi-threaded parameter sweeps with CSV and
//!   JSON reporting.
//! * [`io`]: the on-disk puzzle format.
//! * [`seeding`]: stable derivation of per-trial RNG seeds.

pub mod entropy;
pub mod greedy;
pub mod io;
pub mod model;
mod search;
pub mod seeding;
pub mod solver;
pub mod sweep;

pub use model::{
    expected_multiplicity, generate_puzzle, piece_type_census, CanonicalPiece, Color,
    EdgeColoring, ModelError, ModelVariant, Piece, PieceBag, PieceCensus,
};
pub use solver::{AssemblyVerdict, RawCount, SolutionSet, SolverError, VerdictReason};
