use std::collections::BTreeSet;

use cannon_core::nca::{apply_move, legal_moves, Decision, Move, NcaRule, NcaSystem, Reducer};
use cannon_core::word::{Alphabet, AnchorMode, Symbol, Word};
use cannon_core::Limits;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

const LETTERS: [&str; 3] = ["a", "b", "c"];

fn word(v: &[usize]) -> Word {
    v.iter().map(|&i| Symbol::new(LETTERS[i]).unwrap()).collect()
}

fn rule() -> impl Strategy<Value = NcaRule> {
    let anchor = prop_oneof![5 => Just(AnchorMode::None), 1 => Just(AnchorMode::Left), 1 => Just(AnchorMode::Right), 1 => Just(AnchorMode::Both)];
    (1usize..=3)
        .prop_flat_map(move |n| (proptest::collection::vec(0..3usize, n), proptest::collection::vec(0..3usize, 0..n), anchor.clone()))
        .prop_map(|(l, r, a)| NcaRule::new(word(&l), word(&r), a))
}

fn system() -> impl Strategy<Value = NcaSystem> {
    proptest::collection::vec(rule(), 1..6).prop_map(|rules| {
        let all: BTreeSet<Symbol> = LETTERS.iter().map(|s| Symbol::new(s).unwrap()).collect();
        NcaSystem::new(Alphabet::new(all.clone(), all), rules)
    })
}

/// All words reachable from `w`, with no sharing between branches.
fn brute_force(sys: &NcaSystem, w: &Word) -> bool {
    w.is_empty() || legal_moves(sys, w).into_iter().any(|m| brute_force(sys, &apply_move(sys, w, m).unwrap()))
}

fn replays_to_empty(sys: &NcaSystem, w: &Word, moves: &[Move]) -> bool {
    let mut cur = w.clone();
    for &m in moves {
        match apply_move(sys, &cur, m) {
            Ok(next) => cur = next,
            Err(_) => return false,
        }
    }
    cur.is_empty() && moves.len() <= w.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn memoized_search_matches_brute_force(sys in system(), w in proptest::collection::vec(0..3usize, 0..9)) {
        let w = word(&w);
        let reducer = Reducer::new(&sys).unwrap();
        let decision = reducer.decide(&w, Limits::default()).unwrap();
        prop_assert_eq!(decision.is_accepted(), brute_force(&sys, &w));
        if let Decision::Accepted(moves) = decision {
            prop_assert!(replays_to_empty(&sys, &w, &moves));
        }
    }

    #[test]
    fn move_order_does_not_change_the_answer(sys in system(), w in proptest::collection::vec(0..3usize, 0..9), seed in any::<u64>()) {
        let w = word(&w);
        let reducer = Reducer::new(&sys).unwrap();
        let plain = reducer.decide(&w, Limits::default()).unwrap().is_accepted();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut shuffle = |moves: &mut Vec<Move>| moves.shuffle(&mut rng);
        let shuffled = reducer.decide_with_move_order(&w, Limits::default(), &mut shuffle).unwrap();
        prop_assert_eq!(shuffled.is_accepted(), plain);
        if let Decision::Accepted(moves) = shuffled {
            prop_assert!(replays_to_empty(&sys, &w, &moves));
        }
        let mut reverse = |moves: &mut Vec<Move>| moves.reverse();
        prop_assert_eq!(reducer.decide_with_move_order(&w, Limits::default(), &mut reverse).unwrap().is_accepted(), plain);
    }
}
