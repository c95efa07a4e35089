//! Property tests across the public surface.

use bumpforest::estimators::{merge_all, StreamStats};
use bumpforest::perm_forest::{
    bump_value, fixed_points, lehmer_rank, lehmer_unrank, sort_step, Permutation,
};
use bumpforest::point_process::{bump_at, extend_depth, Configuration, RngStream};
use bumpforest::word_engine::{bump_word, is_complete, recover_order, Cell, IndexSet, Word};
use proptest::prelude::*;

fn arb_perm(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = RngStream::new(seed, 0).rng();
        Permutation::random(n, &mut rng)
    })
}

fn arb_word(max_len: usize) -> impl Strategy<Value = Word> {
    (1u8..=4, proptest::collection::vec(0u8..4, 0..=max_len)).prop_map(|(r, mut letters)| {
        for l in &mut letters {
            *l %= r;
        }
        Word::from_letters(&letters, r).unwrap()
    })
}

/// Exhaustive search for a legal bump order, independent of the criterion.
fn has_legal_order(word: &Word, set: &IndexSet) -> bool {
    fn recurse(word: &Word, remaining: &[usize]) -> bool {
        if remaining.is_empty() {
            return true;
        }
        for (i, &cell) in remaining.iter().enumerate() {
            if word.cell(cell) == Some(Cell::Live(0)) {
                let next = bump_word(word, cell).unwrap();
                let mut rest = remaining.to_vec();
                rest.remove(i);
                if recurse(&next, &rest) {
                    return true;
                }
            }
        }
        false
    }
    recurse(word, set.indices())
}

proptest! {
    #[test]
    fn bump_then_sort_recovers_permutation(p in arb_perm(40)) {
        for m in fixed_points(&p) {
            let child = bump_value(&p, m).unwrap();
            prop_assert_eq!(sort_step(&child), p.clone());
            prop_assert!(!child.is_base() || p.n() == 1);
        }
    }

    #[test]
    fn lehmer_rank_round_trips(p in arb_perm(12)) {
        let rank = lehmer_rank(&p);
        prop_assert_eq!(lehmer_unrank(p.n(), rank).unwrap(), p);
    }

    #[test]
    fn config_bump_lowers_left_layers_only(seed in any::<u64>(), pick in any::<u64>()) {
        let stream = RngStream::new(seed, 1);
        let cfg = Configuration::sample(0.9, 6, &stream).unwrap();
        let zeros = cfg.layer_zero_indices();
        prop_assume!(!zeros.is_empty());
        let idx = zeros[(pick % zeros.len() as u64) as usize];
        let target = cfg.atoms()[idx];
        let bumped = bump_at(&cfg, idx).unwrap();
        // relative order is preserved and no layer ever increases
        let mut prev = 0.0f64;
        for atom in bumped.atoms() {
            prop_assert!(atom.location > prev);
            prev = atom.location;
            let original = cfg
                .atoms()
                .iter()
                .find(|a| a.location == atom.location)
                .expect("bump never adds atoms");
            prop_assert!(atom.layer <= original.layer);
            if atom.location > target.location {
                prop_assert_eq!(atom.layer, original.layer);
            } else {
                prop_assert_eq!(atom.layer, original.layer - 1);
            }
        }
        prop_assert!(bumped.atoms().iter().all(|a| a.location != target.location));
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), id in any::<u64>()) {
        let stream = RngStream::new(seed, id);
        let once = Configuration::sample(0.6, 5, &stream).unwrap();
        let again = Configuration::sample(0.6, 5, &stream).unwrap();
        prop_assert_eq!(&once, &again);
        // extending in two steps equals sampling in one
        let stepped = extend_depth(
            &Configuration::sample(0.6, 2, &stream).unwrap(),
            5,
            &stream,
        )
        .unwrap();
        prop_assert_eq!(once, stepped);
    }

    #[test]
    fn word_bump_paths_are_monotone(w in arb_word(10), picks in proptest::collection::vec(any::<u64>(), 0..6)) {
        let mut cur = w;
        for pick in picks {
            let zeros = cur.live_zero_positions();
            if zeros.is_empty() {
                break;
            }
            let cell = zeros[(pick % zeros.len() as u64) as usize];
            let next = bump_word(&cur, cell).unwrap();
            let dead_before = cur.cells().iter().filter(|c| **c == Cell::Dead).count();
            let dead_after = next.cells().iter().filter(|c| **c == Cell::Dead).count();
            prop_assert!(dead_after > dead_before);
            for (b, a) in cur.cells().iter().zip(next.cells()) {
                match (b, a) {
                    (Cell::Dead, after) => prop_assert_eq!(*after, Cell::Dead),
                    (Cell::Live(x), Cell::Live(y)) => prop_assert!(y <= x),
                    (Cell::Live(_), Cell::Dead) => {}
                }
            }
            cur = next;
        }
    }

    #[test]
    fn completeness_matches_search_on_random_words(w in arb_word(9), mask in any::<u64>()) {
        let mask = mask & ((1u64 << w.len()) - 1);
        let set = IndexSet::from_mask(mask);
        let criterion = is_complete(&w, &set);
        prop_assert_eq!(criterion, has_legal_order(&w, &set));
        if criterion {
            // the decoded order replays
            let order = recover_order(&w, &set).unwrap();
            let mut cur = w.clone();
            for &step in &order {
                cur = bump_word(&cur, set.indices()[step]).unwrap();
            }
        }
    }

    #[test]
    fn stats_merge_groupings_agree(values in proptest::collection::vec(0.0f64..100.0, 1..400), cut in any::<u64>()) {
        let mut whole = StreamStats::new();
        for &v in &values {
            whole.push(v);
        }
        // random contiguous 3-way split, merged two different ways
        let a = (cut % values.len() as u64) as usize;
        let b = a + ((cut >> 32) % (values.len() - a) as u64 + 1) as usize;
        let mut parts = Vec::new();
        for range in [&values[..a], &values[a..b], &values[b..]] {
            let mut s = StreamStats::new();
            for &v in range {
                s.push(v);
            }
            parts.push(s);
        }
        let tree = merge_all(parts.clone());
        let mut fold = StreamStats::new();
        for p in &parts {
            fold.merge(p);
        }
        prop_assert_eq!(tree.count(), fold.count());
        prop_assert_eq!(tree.count(), whole.count());
        prop_assert!((tree.mean() - fold.mean()).abs() <= 1e-12 * whole.mean().abs().max(1.0));
        prop_assert!((tree.variance() - fold.variance()).abs() <= 1e-10 * whole.variance().max(1.0));
    }
}
