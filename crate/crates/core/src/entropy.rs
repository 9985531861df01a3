//! Entropy of the picture and of the bag of pieces.
//!
//! Three routes to the same quantities, each with its own range:
//!
//! * closed forms for the picture entropy at any size, plus a leading-order
//!   lower bound for the bag entropy in the many-colors regime;
//! * exhaustive enumeration of every coloring for tiny boards, giving exact
//!   distributions of the picture class, the bag, and each type count;
//! * Monte Carlo sampling for anything bigger, with plug-in marginal
//!   entropies and delta-method error bars.
//!
//! All entropies are in bits.

use std::collections::{BTreeMap, HashMap};
use std::ops::ControlFlow;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{
    expected_multiplicity, for_each_coloring, generate_puzzle, Color, EdgeColoring, ModelVariant,
    Piece, PieceBag,
};
use crate::seeding::derive_seed;

/// Default cap on the colorings an exhaustive pass may visit.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("n must be at least 1")]
    ZeroSide,
    #[error("q must be at least 1")]
    ZeroColors,
    #[error("the leading-order bound needs n >= 2 and q >= sqrt(n) * log2(n); got n = {n}, q = {q} against threshold {threshold:.3}")]
    OutOfRegime { n: usize, q: u32, threshold: f64 },
    #[error("q must lie in 2..=n, got q = {q} with n = {n}")]
    QRange { n: usize, q: u32 },
    #[error("exhaustive pass over q^(2n(n+1)) = {total} colorings exceeds the budget of {budget}")]
    EnumBudget { total: u128, budget: u64 },
    #[error("trials must be at least 100, got {got}")]
    TooFewTrials { got: u64 },
}

/// How an [`EntropyReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    ExactEnumeration,
    MonteCarlo,
}

fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific form parses")
}

fn ser_opt12<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(x) => s.serialize_some(&round_sig12(*x)),
        None => s.serialize_none(),
    }
}

/// Entropy figures for one parameter point. Fields that a method cannot
/// produce stay `None` and serialize as `null`; numbers serialize with 12
/// significant digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub n: usize,
    pub q: u32,
    pub model: ModelVariant,
    pub method: Method,
    /// Entropy of the picture (the coloring up to whole-board rotation
    /// when rotations are allowed).
    #[serde(serialize_with = "ser_opt12")]
    pub h_img: Option<f64>,
    /// Entropy of the bag of pieces.
    #[serde(serialize_with = "ser_opt12")]
    pub h_box: Option<f64>,
    /// Sum of per-type marginal entropies, an upper bound for `h_box`.
    #[serde(serialize_with = "ser_opt12")]
    pub h_box_subadditive: Option<f64>,
    /// Standard error of `h_box_subadditive` when it was estimated.
    #[serde(serialize_with = "ser_opt12")]
    pub h_box_subadditive_stderr: Option<f64>,
    /// Leading-order lower bound for `h_box` in the many-colors regime.
    #[serde(serialize_with = "ser_opt12")]
    pub h_box_leading_bound: Option<f64>,
    /// `h_img - h_box` for exact runs, or its leading-order value.
    #[serde(serialize_with = "ser_opt12")]
    pub gap: Option<f64>,
    /// Probability that the bag reassembles into exactly one class.
    #[serde(serialize_with = "ser_opt12")]
    pub p_unique_edge: Option<f64>,
}

impl EntropyReport {
    fn blank(n: usize, q: u32, model: ModelVariant, method: Method) -> EntropyReport {
        EntropyReport {
            n,
            q,
            model,
            method,
            h_img: None,
            h_box: None,
            h_box_subadditive: None,
            h_box_subadditive_stderr: None,
            h_box_leading_bound: None,
            gap: None,
            p_unique_edge: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports always serialize");
        text.push('\n');
        text
    }
}

/// Parameters of a Monte Carlo entropy experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentParams {
    pub n: usize,
    pub q: u32,
    pub model: ModelVariant,
    pub trials: u64,
    pub seed: u64,
}

impl ExperimentParams {
    /// The exponent `beta` with `q = n^beta`; undefined on a 1x1 board.
    pub fn beta(&self) -> Option<f64> {
        (self.n >= 2).then(|| (self.q as f64).ln() / (self.n as f64).ln())
    }
}

fn check_params(n: usize, q: u32) -> Result<(), EntropyError> {
    if n == 0 {
        return Err(EntropyError::ZeroSide);
    }
    if q == 0 {
        return Err(EntropyError::ZeroColors);
    }
    Ok(())
}

/// Exact picture entropy in bits.
///
/// With rotations allowed this is
/// `2 n (n+1) log2 q - 2 + q^(-n(n+1)) + q^(-3n(n+1)/2)`,
/// which accounts for the boards that collide with their own rotations;
/// with fixed orientation every coloring is its own picture and the entropy
/// is plain `2 n (n+1) log2 q`.
pub fn h_img_closed_form(n: usize, q: u32, model: ModelVariant) -> Result<f64, EntropyError> {
    check_params(n, q)?;
    let m = (n * (n + 1)) as f64;
    let qf = q as f64;
    let base = 2.0 * m * qf.log2();
    match model {
        ModelVariant::FixedOrientation => Ok(base),
        ModelVariant::RotationsAllowed => {
            Ok(base - 2.0 + qf.powf(-m) + qf.powf(-1.5 * m))
        }
    }
}

/// Leading-order lower bound for the bag entropy in bits, valid for
/// `n >= 2` once `q >= sqrt(n) * log2(n)`.
pub fn h_box_leading_bound(n: usize, q: u32, model: ModelVariant) -> Result<f64, EntropyError> {
    check_params(n, q)?;
    let nf = n as f64;
    let threshold = nf.sqrt() * nf.log2();
    if n < 2 || (q as f64) < threshold {
        return Err(EntropyError::OutOfRegime { n, q, threshold });
    }
    let n2 = nf * nf;
    let shared = 4.0 * n2 * (q as f64).log2() - 2.0 * n2 * nf.log2();
    Ok(match model {
        ModelVariant::RotationsAllowed => shared - (2.0 - std::f64::consts::LOG2_E) * n2,
        ModelVariant::FixedOrientation => shared + std::f64::consts::LOG2_E * n2,
    })
}

/// Leading-order picture-minus-bag entropy gap in bits,
/// `2 n^2 log2(min(q, n/q))`, valid for `2 <= q <= n`.
pub fn entropy_gap_leading(n: usize, q: u32) -> Result<f64, EntropyError> {
    if q < 2 || (q as usize) > n {
        return Err(EntropyError::QRange { n, q });
    }
    let nf = n as f64;
    let qf = q as f64;
    Ok(2.0 * nf * nf * qf.min(nf / qf).log2())
}

/// Closed-form report: exact picture entropy plus whatever leading-order
/// quantities apply at `(n, q)`.
pub fn closed_form_report(
    n: usize,
    q: u32,
    model: ModelVariant,
) -> Result<EntropyReport, EntropyError> {
    let mut report = EntropyReport::blank(n, q, model, Method::ClosedForm);
    report.h_img = Some(h_img_closed_form(n, q, model)?);
    report.h_box_leading_bound = h_box_leading_bound(n, q, model).ok();
    report.gap = entropy_gap_leading(n, q).ok();
    Ok(report)
}

/// Exact distributions from one exhaustive pass over all colorings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistributions {
    pub report: EntropyReport,
    /// Distinct pictures (classes under rotation, or colorings when fixed).
    pub class_count: u64,
    /// Distinct bags.
    pub bag_count: u64,
    /// Colorings visited, `q^(2n(n+1))`.
    pub total_colorings: u64,
}

fn enumeration_size(n: usize, q: u32, budget: u64) -> Result<u64, EntropyError> {
    let exponent = (2 * n * (n + 1)) as u32;
    let total = (q as u128).checked_pow(exponent).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(EntropyError::EnumBudget {
            total,
            budget,
        });
    }
    Ok(total as u64)
}

fn bag_runs(
    coloring: &EdgeColoring,
    model: ModelVariant,
    pieces: &mut Vec<Piece>,
    runs: &mut Vec<(Piece, u64)>,
) {
    let n = coloring.n();
    pieces.clear();
    for r in 0..n {
        for c in 0..n {
            let p = coloring.piece_at(r, c);
            pieces.push(match model {
                ModelVariant::RotationsAllowed => p.canonicalize().piece,
                ModelVariant::FixedOrientation => p,
            });
        }
    }
    pieces.sort_unstable();
    runs.clear();
    for &p in pieces.iter() {
        match runs.last_mut() {
            Some(last) if last.0 == p => last.1 += 1,
            _ => runs.push((p, 1)),
        }
    }
}

fn raw_edges(coloring: &EdgeColoring) -> Vec<Color> {
    coloring.h.iter().chain(coloring.v.iter()).copied().collect()
}

fn class_key_from_edges(edges: &[Color], n: usize, q: u32) -> Vec<Color> {
    let nh = (n + 1) * n;
    EdgeColoring::from_flat(n, q, edges[..nh].to_vec(), edges[nh..].to_vec())
        .expect("stored edges form a valid coloring")
        .canonical()
        .serialize_pieces()
}

struct BagAcc {
    colorings: u64,
    /// Raw edges of the first coloring seen with this bag; consulted
    /// lazily to decide whether a later coloring is a genuinely different
    /// assembly class.
    first_edges: Vec<Color>,
    first_class: Option<Vec<Color>>,
    multiple_classes: bool,
}

/// Walks every coloring once and extracts the exact distributions of the
/// picture, the bag, and each per-type count.
///
/// `p_unique_edge` is the exact probability that a uniform coloring's bag
/// admits exactly one assembly class: while scanning, colorings are grouped
/// by bag and a bag is marked multiple as soon as two of its colorings
/// disagree as pictures.
pub fn exact_distributions(
    n: usize,
    q: u32,
    model: ModelVariant,
    budget: u64,
) -> Result<ExactDistributions, EntropyError> {
    check_params(n, q)?;
    let t = enumeration_size(n, q, budget)?;
    let tf = t as f64;
    let log2_t = tf.log2();

    let mut stab1 = 0u64;
    let mut stab2 = 0u64;
    let mut stab4 = 0u64;
    let mut bags: HashMap<Vec<(Piece, u64)>, BagAcc> = HashMap::new();
    let mut marginals: HashMap<Piece, BTreeMap<u64, u64>> = HashMap::new();
    let mut pieces_scratch = Vec::with_capacity(n * n);
    let mut runs_scratch: Vec<(Piece, u64)> = Vec::with_capacity(n * n);

    for_each_coloring(n, q, |coloring| {
        if model == ModelVariant::RotationsAllowed {
            match coloring.symmetry_order() {
                1 => stab1 += 1,
                2 => stab2 += 1,
                _ => stab4 += 1,
            }
        }
        bag_runs(coloring, model, &mut pieces_scratch, &mut runs_scratch);
        for &(p, k) in runs_scratch.iter() {
            *marginals.entry(p).or_default().entry(k).or_insert(0) += 1;
        }
        match bags.get_mut(runs_scratch.as_slice()) {
            Some(acc) => {
                acc.colorings += 1;
                if !acc.multiple_classes {
                    match model {
                        // distinct colorings are distinct assemblies outright
                        ModelVariant::FixedOrientation => acc.multiple_classes = true,
                        ModelVariant::RotationsAllowed => {
                            let current = coloring.canonical().serialize_pieces();
                            let first = acc.first_class.get_or_insert_with(|| {
                                class_key_from_edges(&acc.first_edges, n, q)
                            });
                            if *first != current {
                                acc.multiple_classes = true;
                            }
                        }
                    }
                }
            }
            None => {
                bags.insert(
                    runs_scratch.clone(),
                    BagAcc {
                        colorings: 1,
                        first_edges: match model {
                            ModelVariant::RotationsAllowed => raw_edges(coloring),
                            ModelVariant::FixedOrientation => Vec::new(),
                        },
                        first_class: None,
                        multiple_classes: false,
                    },
                );
            }
        }
        ControlFlow::Continue(())
    });

    let h_img = match model {
        ModelVariant::RotationsAllowed => log2_t - ((2 * stab1 + stab2) as f64) / tf,
        ModelVariant::FixedOrientation => log2_t,
    };

    let mut size_hist: BTreeMap<u64, u64> = BTreeMap::new();
    for acc in bags.values() {
        *size_hist.entry(acc.colorings).or_insert(0) += 1;
    }
    let mut box_plogp = 0.0;
    for (&size, &how_many) in &size_hist {
        box_plogp += how_many as f64 * size as f64 * (size as f64).log2();
    }
    let h_box = log2_t - box_plogp / tf;

    let sorted_marginals: BTreeMap<Piece, BTreeMap<u64, u64>> = marginals.into_iter().collect();
    let mut subadditive = 0.0;
    for hist in sorted_marginals.values() {
        let mut present = 0u64;
        let mut plogp = 0.0;
        for (&_k, &count) in hist {
            present += count;
            plogp += count as f64 * (count as f64).log2();
        }
        let zero = t - present;
        if zero > 0 {
            plogp += zero as f64 * (zero as f64).log2();
        }
        subadditive += log2_t - plogp / tf;
    }

    let unique_colorings: u64 = bags
        .values()
        .filter(|acc| !acc.multiple_classes)
        .map(|acc| acc.colorings)
        .sum();

    let class_count = match model {
        ModelVariant::RotationsAllowed => {
            debug_assert_eq!(stab1 % 4, 0);
            debug_assert_eq!(stab2 % 2, 0);
            stab1 / 4 + stab2 / 2 + stab4
        }
        ModelVariant::FixedOrientation => t,
    };

    let mut report = EntropyReport::blank(n, q, model, Method::ExactEnumeration);
    report.h_img = Some(h_img);
    report.h_box = Some(h_box);
    report.h_box_subadditive = Some(subadditive);
    report.h_box_leading_bound = h_box_leading_bound(n, q, model).ok();
    report.gap = Some(h_img - h_box);
    report.p_unique_edge = Some(unique_colorings as f64 / tf);

    Ok(ExactDistributions {
        report,
        class_count,
        bag_count: bags.len() as u64,
        total_colorings: t,
    })
}

/// Exact bag entropy alone, on a slimmer accumulator than
/// [`exact_distributions`]; useful for comparing nearby color counts.
pub fn exact_box_entropy(
    n: usize,
    q: u32,
    model: ModelVariant,
    budget: u64,
) -> Result<f64, EntropyError> {
    check_params(n, q)?;
    let t = enumeration_size(n, q, budget)?;
    let tf = t as f64;
    let mut bags: HashMap<Vec<(Piece, u64)>, u64> = HashMap::new();
    let mut pieces_scratch = Vec::with_capacity(n * n);
    let mut runs_scratch: Vec<(Piece, u64)> = Vec::with_capacity(n * n);
    for_each_coloring(n, q, |coloring| {
        bag_runs(coloring, model, &mut pieces_scratch, &mut runs_scratch);
        match bags.get_mut(runs_scratch.as_slice()) {
            Some(count) => *count += 1,
            None => {
                bags.insert(runs_scratch.clone(), 1);
            }
        }
        ControlFlow::Continue(())
    });
    let mut size_hist: BTreeMap<u64, u64> = BTreeMap::new();
    for &count in bags.values() {
        *size_hist.entry(count).or_insert(0) += 1;
    }
    let mut plogp = 0.0;
    for (&size, &how_many) in &size_hist {
        plogp += how_many as f64 * size as f64 * (size as f64).log2();
    }
    Ok(tf.log2() - plogp / tf)
}

/// Per-type occupancy statistics from a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeStat {
    pub piece: Piece,
    pub orbit: u32,
    /// Sample mean of the type's multiplicity per board.
    pub observed_mean: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    /// Expected multiplicity: `orbit * n^2 / q^4` with rotations,
    /// `n^2 / q^4` with fixed orientation.
    pub expected_mean: f64,
}

/// Monte Carlo entropy estimates plus sampling diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimates {
    pub report: EntropyReport,
    /// Fraction of sampled boards whose bag repeats a type.
    pub duplicate_rate: f64,
    pub duplicate_stderr: f64,
    pub type_stats: Vec<TypeStat>,
}

/// Samples `trials` boards and estimates the subadditive bag-entropy bound
/// by plug-in marginal entropies, with a delta-method standard error.
///
/// The picture entropy is filled in from the closed form (it is exact at
/// every size). Everything is deterministic given `params.seed`: trial `i`
/// uses the seed derived from `(seed, n, q, i)`.
pub fn mc_entropy_estimates(params: &ExperimentParams) -> Result<McEstimates, EntropyError> {
    check_params(params.n, params.q)?;
    if params.trials < 100 {
        return Err(EntropyError::TooFewTrials { got: params.trials });
    }
    let (n, q, model) = (params.n, params.q, params.model);
    let trials = params.trials;
    let tf = trials as f64;

    let mut hist: BTreeMap<Piece, BTreeMap<u64, u64>> = BTreeMap::new();
    let mut per_trial: Vec<Vec<(Piece, u64)>> = Vec::with_capacity(trials as usize);
    let mut dup_trials = 0u64;
    for trial in 0..trials {
        let seed = derive_seed(params.seed, n, q, trial);
        let coloring = generate_puzzle(n, q, seed).expect("parameters were validated");
        let bag = PieceBag::extract(&coloring, model);
        if bag.has_duplicates() {
            dup_trials += 1;
        }
        let runs: Vec<(Piece, u64)> = bag.counts().iter().map(|(&p, &c)| (p, c)).collect();
        for &(p, k) in &runs {
            *hist.entry(p).or_default().entry(k).or_insert(0) += 1;
        }
        per_trial.push(runs);
    }

    // plug-in marginal entropies and per-type moments
    struct TypeCache {
        neg_log: HashMap<u64, f64>,
        zero_neg_log: Option<f64>,
    }
    let mut caches: HashMap<Piece, TypeCache> = HashMap::new();
    let mut subadditive = 0.0;
    let mut baseline = 0.0; // Σ over types of -log2 p̂(0), where defined
    let mut type_stats = Vec::with_capacity(hist.len());
    for (piece, kh) in &hist {
        let mut present = 0u64;
        let mut plogp = 0.0;
        let mut sum_k = 0.0;
        let mut sum_k2 = 0.0;
        let mut neg_log = HashMap::with_capacity(kh.len());
        for (&k, &count) in kh {
            present += count;
            let cf = count as f64;
            plogp += cf * cf.log2();
            sum_k += k as f64 * cf;
            sum_k2 += (k as f64) * (k as f64) * cf;
            neg_log.insert(k, -(cf / tf).log2());
        }
        let zero = trials - present;
        let zero_neg_log = (zero > 0).then(|| {
            plogp += zero as f64 * (zero as f64).log2();
            -(zero as f64 / tf).log2()
        });
        if let Some(z) = zero_neg_log {
            baseline += z;
        }
        subadditive += tf.log2() - plogp / tf;

        let mean = sum_k / tf;
        let variance = ((sum_k2 - tf * mean * mean) / (tf - 1.0)).max(0.0);
        let orbit = piece.canonicalize().orbit;
        let expected_mean = match model {
            ModelVariant::RotationsAllowed => {
                expected_multiplicity(orbit, n, q).expect("orbit sizes are 1, 2, or 4")
            }
            ModelVariant::FixedOrientation => (n * n) as f64 / (q as f64).powi(4),
        };
        type_stats.push(TypeStat {
            piece: *piece,
            orbit,
            observed_mean: mean,
            stderr: (variance / tf).sqrt(),
            expected_mean,
        });
        caches.insert(
            *piece,
            TypeCache {
                neg_log,
                zero_neg_log,
            },
        );
    }

    // delta method: the subadditive estimate is the mean over trials of
    // g_t = Σ_J -log2 p̂_J(count in trial t), so its standard error is the
    // standard error of that mean
    let mut g_values = Vec::with_capacity(per_trial.len());
    for runs in &per_trial {
        let mut g = baseline;
        for (p, k) in runs {
            let cache = &caches[p];
            g += cache.neg_log[k] - cache.zero_neg_log.unwrap_or(0.0);
        }
        g_values.push(g);
    }
    let g_mean = g_values.iter().sum::<f64>() / tf;
    debug_assert!(
        (g_mean - subadditive).abs() < 1e-6,
        "per-trial decomposition must average to the plug-in total"
    );
    let g_var = g_values
        .iter()
        .map(|g| (g - g_mean) * (g - g_mean))
        .sum::<f64>()
        / (tf - 1.0);
    let subadd_stderr = (g_var / tf).sqrt();

    let dup_rate = dup_trials as f64 / tf;

    let mut report = EntropyReport::blank(n, q, model, Method::MonteCarlo);
    report.h_img = Some(h_img_closed_form(n, q, model)?);
    report.h_box_subadditive = Some(subadditive);
    report.h_box_subadditive_stderr = Some(subadd_stderr);
    report.h_box_leading_bound = h_box_leading_bound(n, q, model).ok();

    Ok(McEstimates {
        report,
        duplicate_rate: dup_rate,
        duplicate_stderr: (dup_rate * (1.0 - dup_rate) / tf).sqrt(),
        type_stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROT: ModelVariant = ModelVariant::RotationsAllowed;
    const FIXED: ModelVariant = ModelVariant::FixedOrientation;

    #[test]
    fn closed_form_hand_values() {
        assert!((h_img_closed_form(1, 2, ROT).unwrap() - 2.375).abs() < 1e-12);
        assert!((h_img_closed_form(2, 2, ROT).unwrap() - 10.017578125).abs() < 1e-12);
        assert_eq!(h_img_closed_form(2, 2, FIXED).unwrap(), 12.0);
        // a single color carries no information, with or without rotations
        assert_eq!(h_img_closed_form(3, 1, ROT).unwrap(), 0.0);
        assert_eq!(h_img_closed_form(3, 1, FIXED).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_rejects_degenerate_parameters() {
        assert_eq!(h_img_closed_form(0, 2, ROT).unwrap_err(), EntropyError::ZeroSide);
        assert_eq!(h_img_closed_form(2, 0, ROT).unwrap_err(), EntropyError::ZeroColors);
    }

    #[test]
    fn leading_bound_values_and_regime() {
        let rot = h_box_leading_bound(16, 16, ROT).unwrap();
        assert!((rot - 1905.3299304675746).abs() < 1e-9);
        let fixed = h_box_leading_bound(16, 16, FIXED).unwrap();
        assert!((fixed - 2417.3299304675746).abs() < 1e-9);

        assert!(matches!(
            h_box_leading_bound(16, 15, ROT).unwrap_err(),
            EntropyError::OutOfRegime { .. }
        ));
        assert!(matches!(
            h_box_leading_bound(1, 100, ROT).unwrap_err(),
            EntropyError::OutOfRegime { .. }
        ));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(entropy_gap_leading(4, 2).unwrap(), 32.0);
        assert_eq!(entropy_gap_leading(2, 2).unwrap(), 0.0);
        assert!(matches!(
            entropy_gap_leading(4, 5).unwrap_err(),
            EntropyError::QRange { .. }
        ));
        assert!(matches!(
            entropy_gap_leading(4, 1).unwrap_err(),
            EntropyError::QRange { .. }
        ));
    }

    #[test]
    fn exact_single_cell_distributions() {
        let exact = exact_distributions(1, 2, ROT, DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(exact.total_colorings, 16);
        assert_eq!(exact.class_count, 6);
        assert_eq!(exact.bag_count, 6);
        let h_img = exact.report.h_img.unwrap();
        let h_box = exact.report.h_box.unwrap();
        assert!((h_img - 2.375).abs() < 1e-12);
        // a single piece remembers the whole picture
        assert!((h_box - h_img).abs() < 1e-12);
        assert!(exact.report.h_box_subadditive.unwrap() > h_box + 1e-6);
        assert_eq!(exact.report.p_unique_edge.unwrap(), 1.0);
        assert!((exact.report.gap.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_closed_form_at_2x2() {
        for model in [ROT, FIXED] {
            let exact = exact_distributions(2, 2, model, DEFAULT_ENUM_BUDGET).unwrap();
            let closed = h_img_closed_form(2, 2, model).unwrap();
            assert!(
                (exact.report.h_img.unwrap() - closed).abs() < 1e-12,
                "{model}"
            );
        }
    }

    #[test]
    fn exact_inequalities_are_strict_at_2x2() {
        for model in [ROT, FIXED] {
            let exact = exact_distributions(2, 2, model, DEFAULT_ENUM_BUDGET).unwrap();
            let report = &exact.report;
            assert!(report.h_box.unwrap() + 1e-6 < report.h_img.unwrap(), "{model}");
            assert!(
                report.h_box.unwrap() + 1e-6 < report.h_box_subadditive.unwrap(),
                "{model}"
            );
            let p = report.p_unique_edge.unwrap();
            assert!(p > 0.0 && p < 1.0, "{model}: p = {p}");
        }
    }

    #[test]
    fn exact_respects_budget() {
        let err = exact_distributions(3, 3, ROT, DEFAULT_ENUM_BUDGET).unwrap_err();
        assert!(matches!(err, EntropyError::EnumBudget { .. }));
    }

    #[test]
    fn slim_box_pass_agrees_with_full_pass() {
        for (n, q, model) in [(1, 3, ROT), (2, 2, ROT), (2, 2, FIXED)] {
            let full = exact_distributions(n, q, model, DEFAULT_ENUM_BUDGET).unwrap();
            let slim = exact_box_entropy(n, q, model, DEFAULT_ENUM_BUDGET).unwrap();
            assert!((full.report.h_box.unwrap() - slim).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_colors_cannot_lose_bag_entropy() {
        // refining each color into two sub-colors only adds information
        for (n, q) in [(1, 2), (1, 3), (2, 1), (2, 2)] {
            let coarse = exact_box_entropy(n, q, ROT, DEFAULT_ENUM_BUDGET).unwrap();
            let fine = exact_box_entropy(n, 2 * q, ROT, DEFAULT_ENUM_BUDGET).unwrap();
            assert!(fine > coarse, "n={n} q={q}: {coarse} vs {fine}");
        }
    }

    #[test]
    fn image_entropy_grows_with_colors() {
        for n in [1, 2] {
            let mut last = -1.0;
            for q in 1..=if n == 1 { 4 } else { 3 } {
                let exact = exact_distributions(n, q, ROT, DEFAULT_ENUM_BUDGET).unwrap();
                let h_img = exact.report.h_img.unwrap();
                assert!(h_img > last + 1e-6, "n={n} q={q}: {h_img} after {last}");
                last = h_img;
            }
        }
    }

    #[test]
    fn monochromatic_bags_always_repeat() {
        let params = ExperimentParams {
            n: 2,
            q: 1,
            model: ROT,
            trials: 200,
            seed: 9,
        };
        let mc = mc_entropy_estimates(&params).unwrap();
        assert_eq!(mc.duplicate_rate, 1.0);
        assert_eq!(mc.duplicate_stderr, 0.0);
        assert_eq!(mc.type_stats.len(), 1);
        let stat = &mc.type_stats[0];
        assert_eq!(stat.expected_mean, 4.0);
        assert_eq!(stat.observed_mean, 4.0);
    }

    #[test]
    fn mc_requires_enough_trials() {
        let params = ExperimentParams {
            n: 2,
            q: 2,
            model: ROT,
            trials: 99,
            seed: 0,
        };
        assert_eq!(
            mc_entropy_estimates(&params).unwrap_err(),
            EntropyError::TooFewTrials { got: 99 }
        );
    }

    #[test]
    fn mc_is_deterministic() {
        let params = ExperimentParams {
            n: 3,
            q: 2,
            model: ROT,
            trials: 200,
            seed: 42,
        };
        let a = mc_entropy_estimates(&params).unwrap();
        let b = mc_entropy_estimates(&params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mc_tracks_exact_subadditive_total() {
        let exact = exact_distributions(2, 2, ROT, DEFAULT_ENUM_BUDGET).unwrap();
        let params = ExperimentParams {
            n: 2,
            q: 2,
            model: ROT,
            trials: 4000,
            seed: 7,
        };
        let mc = mc_entropy_estimates(&params).unwrap();
        let estimate = mc.report.h_box_subadditive.unwrap();
        let target = exact.report.h_box_subadditive.unwrap();
        // plug-in estimators bias low by O(support/trials); allow that plus
        // five standard errors
        let slack = 5.0 * mc.report.h_box_subadditive_stderr.unwrap() + 0.05;
        assert!(
            (estimate - target).abs() < slack,
            "estimate {estimate} vs exact {target}"
        );
        // exact duplicate probability over all 4096 boards
        let mut boards = 0u64;
        let mut repeats = 0u64;
        crate::model::for_each_coloring(2, 2, |coloring| {
            boards += 1;
            if PieceBag::extract(coloring, ROT).has_duplicates() {
                repeats += 1;
            }
            std::ops::ControlFlow::<()>::Continue(())
        });
        let exact_rate = repeats as f64 / boards as f64;
        assert!(
            (mc.duplicate_rate - exact_rate).abs() <= 4.0 * mc.duplicate_stderr + 1e-9,
            "duplicate rate {} vs exact {exact_rate}",
            mc.duplicate_rate
        );
    }

    #[test]
    fn mc_type_stats_match_expectations() {
        let params = ExperimentParams {
            n: 2,
            q: 2,
            model: ROT,
            trials: 3000,
            seed: 3,
        };
        let mc = mc_entropy_estimates(&params).unwrap();
        assert_eq!(mc.type_stats.len(), 6, "all six classes appear");
        for stat in &mc.type_stats {
            assert!(
                (stat.observed_mean - stat.expected_mean).abs()
                    <= 4.0 * stat.stderr + 1e-9,
                "type {}: mean {} expected {}",
                stat.piece,
                stat.observed_mean,
                stat.expected_mean
            );
        }
    }

    #[test]
    fn beta_is_undefined_on_single_cells() {
        let p = ExperimentParams {
            n: 1,
            q: 3,
            model: ROT,
            trials: 100,
            seed: 0,
        };
        assert_eq!(p.beta(), None);
        let p = ExperimentParams { n: 4, ..p };
        assert!((p.beta().unwrap() - 3.0f64.ln() / 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn reports_serialize_with_twelve_digits_and_fixed_keys() {
        let mut report = EntropyReport::blank(2, 2, ROT, Method::ClosedForm);
        report.h_img = Some(1.0 / 3.0);
        let json = report.to_json();
        assert!(json.contains("\"h_img\": 0.333333333333"), "{json}");
        assert!(json.contains("\"h_box\": null"), "{json}");
        assert!(json.contains("\"method\": \"closed_form\""), "{json}");
        for key in [
            "n", "q", "model", "method", "h_img", "h_box", "h_box_subadditive",
            "h_box_subadditive_stderr", "h_box_leading_bound", "gap", "p_unique_edge",
        ] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key} in {json}");
        }
    }

    #[test]
    fn closed_form_report_fills_applicable_fields() {
        let r = closed_form_report(4, 2, ROT).unwrap();
        assert!(r.h_img.is_some());
        assert!(r.h_box_leading_bound.is_none(), "q below the regime");
        assert_eq!(r.gap, Some(32.0));

        let r = closed_form_report(16, 16, ROT).unwrap();
        assert!(r.h_box_leading_bound.is_some());
        assert!(r.gap.is_some());
    }
}
