//! Exhaustive verification suites: every combinatorial identity in the
//! library checked against brute force on small instances. The CLI exposes
//! these (`verify --suite ...`) and the acceptance tests run them; any
//! failure carries the first counterexample found.

use crate::bump_tree;
use crate::perm_forest::{self, Permutation};
use crate::word_engine::{
    self, bump_word, is_complete, mask_complete, recover_order, truncated_factorial, IndexSet, Word,
};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    WordIdentities,
    Completeness,
    Leaves,
    DoubleComplete,
    ForestFacts,
    DepthExpectations,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::WordIdentities,
        Suite::Completeness,
        Suite::Leaves,
        Suite::DoubleComplete,
        Suite::ForestFacts,
        Suite::DepthExpectations,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::WordIdentities => "word-identities",
            Suite::Completeness => "completeness",
            Suite::Leaves => "leaves",
            Suite::DoubleComplete => "double-complete",
            Suite::ForestFacts => "forest-facts",
            Suite::DepthExpectations => "depth-expectations",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .iter()
            .find(|suite| suite.name() == s)
            .copied()
            .ok_or_else(|| {
                format!(
                    "unknown suite {s:?}; expected one of {}",
                    Suite::ALL.map(|s| s.name()).join(", ")
                )
            })
    }
}

/// Size budgets for the exhaustive runs.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    /// Word length for the summation identity, permutation size for forest
    /// facts, length budget for depth expectations.
    pub n_max: usize,
    /// Alphabet bound.
    pub r_max: u32,
    /// Word length for per-word oracles (completeness, leaves, layouts).
    pub len_max: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            n_max: 8,
            r_max: 4,
            len_max: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub checks: u64,
    pub failure: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn run_suite(suite: Suite, budgets: Budgets) -> SuiteOutcome {
    let result = match suite {
        Suite::WordIdentities => word_identities(budgets),
        Suite::Completeness => completeness(budgets),
        Suite::Leaves => leaves(budgets),
        Suite::DoubleComplete => double_complete(budgets),
        Suite::ForestFacts => forest_facts(budgets),
        Suite::DepthExpectations => depth_expectations(budgets),
    };
    match result {
        Ok(checks) => SuiteOutcome {
            suite,
            checks,
            failure: None,
        },
        Err(failure) => SuiteOutcome {
            suite,
            checks: 0,
            failure: Some(failure),
        },
    }
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Summation identity: over all `r^n` words of length `n`, the number of
/// complete `j`-subsets totals `C(n,j) f_r(j) r^{n-j}`, exactly.
fn word_identities(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    for r in 1..=budgets.r_max {
        for n in 0..=budgets.n_max.min(10) {
            let mut per_size = vec![0u128; n + 1];
            word_engine::enumerate_words(n, r, |letters| {
                for mask in 0u64..(1 << n) {
                    if mask_complete(letters, mask, r) {
                        per_size[mask.count_ones() as usize] += 1;
                    }
                }
            });
            for (j, &total) in per_size.iter().enumerate() {
                let want = binomial_u128(n as u64, j as u64)
                    * truncated_factorial(r, j as u32)
                    * (r as u128).pow((n - j) as u32);
                if total != want {
                    return Err(format!(
                        "complete-subset total off at r={r} n={n} j={j}: counted {total}, formula {want}"
                    ));
                }
                checks += 1;
            }
        }
    }
    Ok(checks)
}

/// Counts the bump orders of `mask` that can run to completion, capped at 2.
/// This is the search oracle the criterion is checked against.
fn count_legal_orders(letters: &[u8], mask: u64, cap: u32) -> u32 {
    fn recurse(state: &mut [i32], remaining: u64, cap: u32) -> u32 {
        if remaining == 0 {
            return 1;
        }
        let mut found = 0;
        let mut m = remaining;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            m &= m - 1;
            if state[idx] != 0 {
                continue;
            }
            // bump idx, recurse, undo
            let mut saved = Vec::with_capacity(idx + 1);
            for (i, s) in state.iter_mut().enumerate().take(idx + 1) {
                saved.push(*s);
                if i == idx {
                    *s = -1;
                } else if *s >= 0 {
                    *s -= 1;
                }
            }
            found += recurse(state, remaining & !(1 << idx), cap - found);
            state[..=idx].copy_from_slice(&saved);
            if found >= cap {
                return found;
            }
        }
        found
    }
    let mut state: Vec<i32> = letters.iter().map(|&l| l as i32).collect();
    recurse(&mut state, mask, cap)
}

/// Criterion == search, and the legal order is unique and matches
/// `recover_order`.
fn completeness(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    for r in 1..=budgets.r_max {
        for n in 0..=budgets.len_max {
            let mut failure = None;
            word_engine::enumerate_words(n, r, |letters| {
                if failure.is_some() {
                    return;
                }
                let word = Word::from_letters(letters, r as u8).expect("letters in range");
                for mask in 0u64..(1 << n) {
                    let a = IndexSet::from_mask(mask);
                    let criterion = is_complete(&word, &a);
                    let orders = count_legal_orders(letters, mask, 2);
                    if criterion != (orders >= 1) {
                        failure = Some(format!(
                            "criterion {criterion} but search found {orders} orders: word {word}, cells {:?}",
                            a.indices()
                        ));
                        return;
                    }
                    if !criterion {
                        checks += 1;
                        continue;
                    }
                    if orders != 1 {
                        failure = Some(format!(
                            "expected a unique order, search found {orders}: word {word}, cells {:?}",
                            a.indices()
                        ));
                        return;
                    }
                    // the decoded order replays legally
                    let order = recover_order(&word, &a).expect("complete");
                    let mut cur = word.clone();
                    for &step in &order {
                        match bump_word(&cur, a.indices()[step]) {
                            Ok(next) => cur = next,
                            Err(e) => {
                                failure = Some(format!(
                                    "decoded order does not replay: word {word}, cells {:?}, {e}",
                                    a.indices()
                                ));
                                return;
                            }
                        }
                    }
                    checks += 1;
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    Ok(checks)
}

/// Leaf-count formula == direct construction: for every subset, count words
/// where bumping the subset ends with no live 0, by replaying actual bumps.
fn leaves(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    for r in 1..=budgets.r_max {
        for n in 0..=budgets.len_max {
            for mask in 0u64..(1 << n) {
                let a = IndexSet::from_mask(mask);
                let mut direct = 0u128;
                word_engine::enumerate_words(n, r, |letters| {
                    let word = Word::from_letters(letters, r as u8).expect("in range");
                    if !is_complete(&word, &a) {
                        return;
                    }
                    let order = recover_order(&word, &a).expect("complete");
                    let mut cur = word;
                    for &step in &order {
                        cur = bump_word(&cur, a.indices()[step]).expect("legal order");
                    }
                    if !cur.has_live_zero() {
                        direct += 1;
                    }
                });
                let formula = word_engine::count_leaf_fillings(&a, n, r);
                if direct != formula {
                    return Err(format!(
                        "leaf count off at r={r} n={n} cells {:?}: direct {direct}, formula {formula}",
                        a.indices()
                    ));
                }
                checks += 1;
            }
        }
    }
    Ok(checks)
}

/// Every relative layout of two index sets with `|A ∪ B| <= len_max`:
/// brute-force double-complete count == closed form, inside the uniform
/// bounds.
fn double_complete(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    let u_max = budgets.len_max.min(6);
    for u in 0..=u_max {
        // each union position belongs to A, B, or both
        let mut assignment = vec![0u8; u];
        loop {
            let mut a_idx = Vec::new();
            let mut b_idx = Vec::new();
            for (pos, &tag) in assignment.iter().enumerate() {
                match tag {
                    0 => a_idx.push(pos),
                    1 => b_idx.push(pos),
                    _ => {
                        a_idx.push(pos);
                        b_idx.push(pos);
                    }
                }
            }
            let a = IndexSet::new(a_idx).expect("increasing");
            let b = IndexSet::new(b_idx).expect("increasing");
            let shared = a
                .indices()
                .iter()
                .filter(|i| b.indices().contains(i))
                .count() as u32;
            let only_a = a.len() as u32 - shared;
            let only_b = b.len() as u32 - shared;
            for r in 1..=budgets.r_max {
                let brute = word_engine::count_double_complete(&a, &b, r);
                let closed = word_engine::count_double_complete_closed(&a, &b, r);
                if brute != closed {
                    return Err(format!(
                        "closed form off at r={r} A={:?} B={:?}: brute {brute}, closed {closed}",
                        a.indices(),
                        b.indices()
                    ));
                }
                let (lo, hi) = word_engine::bound_double_complete(only_a, only_b, shared, r);
                if brute < lo || brute > hi {
                    return Err(format!(
                        "count {brute} outside [{lo}, {hi}] at r={r} A={:?} B={:?}",
                        a.indices(),
                        b.indices()
                    ));
                }
                checks += 1;
            }
            // advance base-3 odometer
            let mut pos = 0;
            loop {
                if pos == u {
                    break;
                }
                assignment[pos] += 1;
                if assignment[pos] < 3 {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
            if pos == u {
                break;
            }
        }
    }
    Ok(checks)
}

/// Forest structure facts for every permutation size up to the budget:
/// partition into trees, the unique deepest leaf, and the identity-tree size
/// bounds.
fn forest_facts(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    for n in 1..=budgets.n_max.min(9) {
        let total: u64 = (1..=n as u64).product();
        let forest = perm_forest::build_forest(n, total).map_err(|e| e.to_string())?;
        let stats = forest.tree_stats();
        let covered: u64 = stats.iter().map(|t| t.size).sum();
        if covered != total {
            return Err(format!("n={n}: tree sizes cover {covered} of {total}"));
        }
        let bases = if n == 1 { 1 } else { total / n as u64 };
        if stats.len() as u64 != bases {
            return Err(format!("n={n}: {} trees, expected {bases}", stats.len()));
        }
        for t in &stats {
            if !forest.perm_of_rank(t.base).is_base() {
                return Err(format!(
                    "n={n}: tree base {} does not start with 1",
                    t.base_perm
                ));
            }
        }
        let (max_depth, deepest) = forest.deepest();
        let want_depth = (1u32 << (n - 1)) - 1;
        if max_depth != want_depth {
            return Err(format!(
                "n={n}: max depth {max_depth}, expected {want_depth}"
            ));
        }
        if deepest.len() != 1 {
            return Err(format!(
                "n={n}: {} nodes at the max depth, expected a unique one",
                deepest.len()
            ));
        }
        let deepest_perm = forest.perm_of_rank(deepest[0]);
        if deepest_perm != Permutation::rotation(n) {
            return Err(format!(
                "n={n}: deepest node {deepest_perm}, expected {}",
                Permutation::rotation(n)
            ));
        }
        if forest.base_of(deepest[0]) != 0 {
            return Err(format!("n={n}: longest path does not end at the identity"));
        }
        if forest.child_count_of(deepest[0]) != 0 {
            return Err(format!("n={n}: deepest node is not a leaf"));
        }
        let id_size = forest.identity_tree_size();
        let fact_nm1: u64 = (1..n as u64).product();
        if id_size < fact_nm1 || (id_size as f64) > std::f64::consts::E * fact_nm1 as f64 {
            return Err(format!(
                "n={n}: identity tree size {id_size} outside [{fact_nm1}, e*{fact_nm1}]"
            ));
        }
        checks += 1;
    }
    Ok(checks)
}

/// Enumerated per-depth expectations stay inside their Poisson remainder
/// bounds of the analytic values, at alpha = 1/2.
fn depth_expectations(budgets: Budgets) -> Result<u64, String> {
    let mut checks = 0u64;
    for r in 1..=budgets.r_max.min(4) {
        let table = crate::estimators::exact_depth_expectations(0.5, r, budgets.n_max.min(9))
            .map_err(|e| e.to_string())?;
        for row in &table.rows {
            let gap = (row.partial - row.analytic).abs();
            if gap > row.tail_bound + crate::estimators::ENUMERATION_FP_SLACK {
                return Err(format!(
                    "r={r} {} j={}: |{} - {}| = {gap} exceeds bound {}",
                    row.statistic, row.j, row.partial, row.analytic, row.tail_bound
                ));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

/// Structural cross-check used by the acceptance tests: descendant trees and
/// the exact separation-word dynamic agree for every permutation of size
/// `<= n_max`.
pub fn separation_correspondence(n_max: usize) -> Result<u64, String> {
    let mut checks = 0u64;
    for n in 1..=n_max {
        let total: u64 = (1..=n as u64).product();
        for rank in 0..total {
            let p = perm_forest::lehmer_unrank(n, rank).map_err(|e| e.to_string())?;
            let dt = perm_forest::desc_tree(&p, perm_forest::DEFAULT_DESC_MAX_NODES);
            let st = bump_tree::tree_of_separation_exact(&p, bump_tree::TreeCaps::default());
            let dt_sig = bump_tree::rooted_signature(&dt.parents(), &dt.depths(), None);
            if dt_sig != st.signature(None) {
                return Err(format!("separation dynamic disagrees at {p}"));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Budgets {
        Budgets {
            n_max: 5,
            r_max: 3,
            len_max: 4,
        }
    }

    #[test]
    fn all_suites_pass_on_small_budgets() {
        for suite in Suite::ALL {
            let outcome = run_suite(suite, small());
            assert!(outcome.passed(), "{}: {:?}", suite, outcome.failure);
            assert!(outcome.checks > 0);
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn search_oracle_counts_orders() {
        // word 0 0: bumping cell 1 first kills cell 0, so one order only
        assert_eq!(count_legal_orders(&[0, 0], 0b11, 10), 1);
        assert_eq!(count_legal_orders(&[1, 0], 0b11, 10), 1);
        assert_eq!(count_legal_orders(&[1, 1], 0b11, 10), 0);
        assert_eq!(count_legal_orders(&[0], 0b1, 10), 1);
    }

    #[test]
    fn correspondence_holds_up_to_five() {
        assert!(separation_correspondence(5).is_ok());
    }

    #[test]
    fn forest_facts_hold_through_n8() {
        let outcome = run_suite(
            Suite::ForestFacts,
            Budgets {
                n_max: 8,
                r_max: 4,
                len_max: 6,
            },
        );
        assert!(outcome.passed(), "{:?}", outcome.failure);
        assert_eq!(outcome.checks, 8);
    }
}
