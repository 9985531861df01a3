//! Randomized structural invariants of the model and the estimators.

use std::ops::ControlFlow;

use jig_core::entropy::entropy_gap_leading;
use jig_core::greedy::{greedy_fill, solution_scale_log2};
use jig_core::io::{puzzle_from_json, puzzle_to_json};
use jig_core::model::{generate_puzzle, piece_type_census};
use jig_core::solver::count_raw_assemblies;
use jig_core::{EdgeColoring, ModelVariant, Piece, PieceBag};
use proptest::prelude::*;

fn arb_model() -> impl Strategy<Value = ModelVariant> {
    prop_oneof![
        Just(ModelVariant::RotationsAllowed),
        Just(ModelVariant::FixedOrientation),
    ]
}

fn arb_board() -> impl Strategy<Value = EdgeColoring> {
    (1usize..=4, 1u32..=5, any::<u64>()).prop_map(|(n, q, seed)| {
        generate_puzzle(n, q, seed).expect("parameters are in range")
    })
}

fn arb_piece() -> impl Strategy<Value = Piece> {
    ([0u32..5, 0u32..5, 0u32..5, 0u32..5])
        .prop_map(|[n, e, s, w]| Piece::new(n, e, s, w))
}

proptest! {
    #[test]
    fn piece_rotations_form_a_cyclic_group(piece in arb_piece(), a in 0u32..8, b in 0u32..8) {
        prop_assert_eq!(piece.rotated(a).rotated(b), piece.rotated(a + b));
        prop_assert_eq!(piece.rotated(4), piece);
        let canon = piece.canonicalize();
        prop_assert_eq!(canon.piece.canonicalize().piece, canon.piece);
        prop_assert_eq!(piece.distinct_rotations().len() as u32, canon.orbit);
        prop_assert!(canon.orbit == 1 || canon.orbit == 2 || canon.orbit == 4);
    }

    #[test]
    fn board_rotation_has_order_four(board in arb_board()) {
        let once = board.rotate_cw();
        let back = once.rotate_cw().rotate_cw().rotate_cw();
        prop_assert_eq!(&back, &board);
        prop_assert_eq!(once.n(), board.n());
        prop_assert_eq!(once.q(), board.q());
    }

    #[test]
    fn canonical_form_is_rotation_invariant(board in arb_board()) {
        let canon = board.canonical();
        prop_assert_eq!(&board.rotate_cw().canonical(), &canon);
        prop_assert_eq!(&canon.canonical(), &canon);
        let order = board.symmetry_order();
        prop_assert_eq!(order * board.rotation_orbit(), 4);
        prop_assert_eq!(board.rotate_cw().symmetry_order(), order);
    }

    #[test]
    fn adjacent_pieces_share_their_common_edge(board in arb_board()) {
        let n = board.n();
        for r in 0..n {
            for c in 0..n {
                let piece = board.piece_at(r, c);
                prop_assert_eq!(piece.north(), board.h_at(r, c));
                prop_assert_eq!(piece.south(), board.h_at(r + 1, c));
                prop_assert_eq!(piece.west(), board.v_at(r, c));
                prop_assert_eq!(piece.east(), board.v_at(r, c + 1));
                if r + 1 < n {
                    prop_assert_eq!(piece.south(), board.piece_at(r + 1, c).north());
                }
                if c + 1 < n {
                    prop_assert_eq!(piece.east(), board.piece_at(r, c + 1).west());
                }
            }
        }
    }

    #[test]
    fn extraction_with_rotations_ignores_board_rotation(board in arb_board()) {
        let bag = PieceBag::extract(&board, ModelVariant::RotationsAllowed);
        let rotated = PieceBag::extract(&board.rotate_cw(), ModelVariant::RotationsAllowed);
        prop_assert_eq!(bag.counts(), rotated.counts());
        prop_assert_eq!(bag.mass(), (board.n() * board.n()) as u64);
    }

    #[test]
    fn greedy_success_means_full_board(board in arb_board(), model in arb_model(), seed in any::<u64>()) {
        let bag = PieceBag::extract(&board, model);
        let outcome = greedy_fill(&bag, seed);
        let cells = board.n() * board.n();
        if outcome.success {
            prop_assert_eq!(outcome.path_length, cells);
            prop_assert!(outcome.estimate > 0u32.into());
        } else {
            prop_assert!(outcome.path_length < cells);
            prop_assert_eq!(outcome.estimate, 0u32.into());
        }
    }

    #[test]
    fn puzzle_json_round_trips(board in arb_board(), model in arb_model()) {
        let text = puzzle_to_json(&board, model);
        let (parsed, parsed_model) = puzzle_from_json(&text).expect("serializer output parses");
        prop_assert_eq!(parsed, board);
        prop_assert_eq!(parsed_model, model);
    }

    #[test]
    fn census_orbits_cover_all_tuples(q in 1u32..=40) {
        let census = piece_type_census(q).unwrap();
        let tuples = (q as u64).pow(4);
        prop_assert_eq!(census.r1 + 2 * census.r2 + 4 * census.r4, tuples);
        prop_assert_eq!(census.r1 + census.r2 + census.r4, census.total);
    }

    #[test]
    fn assembly_scale_matches_the_entropy_gap(n in 2usize..=64, frac in 0.0f64..=1.0) {
        let q = 2 + ((n - 2) as f64 * frac) as u32;
        prop_assume!(q >= 2 && (q as usize) <= n);
        let scale = solution_scale_log2(n, q).unwrap();
        let gap = entropy_gap_leading(n, q).unwrap();
        prop_assert!((scale - gap).abs() <= 1e-9 * scale.abs().max(1.0), "{scale} vs {gap}");
    }
}

#[test]
fn every_cut_bag_reassembles_to_its_own_board() {
    for seed in 0..12 {
        let board = generate_puzzle(3, 3, seed).unwrap();
        for model in [ModelVariant::RotationsAllowed, ModelVariant::FixedOrientation] {
            let bag = PieceBag::extract(&board, model);
            let raw = count_raw_assemblies(&bag, &jig_core::solver::SearchBudget::UNBOUNDED)
                .unwrap();
            assert!(raw.exact);
            assert!(raw.count >= 1u32.into(), "seed {seed} {model}");

            let set = jig_core::solver::enumerate_assemblies(&bag, 1_000_000).unwrap();
            assert!(!set.truncated, "seed {seed} {model}");
            let own_class = match model {
                ModelVariant::RotationsAllowed => board.canonical(),
                ModelVariant::FixedOrientation => board.clone(),
            };
            assert!(
                set.distinct_classes.contains(&own_class),
                "seed {seed} {model}: the cut board is missing from its own solutions"
            );
        }
    }
}

#[test]
fn exhaustive_pass_agrees_with_census_at_one_cell() {
    // cutting one piece from every 1x1 board visits each tuple once
    let mut seen = std::collections::BTreeSet::new();
    jig_core::model::for_each_coloring(1, 3, |board: &EdgeColoring| {
        seen.insert(board.piece_at(0, 0).canonicalize().piece);
        ControlFlow::<()>::Continue(())
    });
    let census = piece_type_census(3).unwrap();
    assert_eq!(seen.len() as u64, census.total);
}
