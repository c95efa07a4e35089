//! Finite words over the alphabet `{0,...,r-1}` with a dead marker, the bump
//! move on them, and the counting functions built on completeness.
//!
//! A set of cell indices is *complete* when its cells can be bumped in some
//! order; completeness of `A = {a_1 < ... < a_j}` is equivalent to the
//! letter at `a_i` being at most `min(j - i, r - 1)` (1-based `i`), which
//! makes the letters of a complete set an inversion table and the legal bump
//! order unique. The counting layer (`truncated_factorial`,
//! `count_complete_fillings`, `count_leaf_fillings`, `count_double_complete`)
//! evaluates the resulting closed forms; brute-force enumeration remains the
//! source of truth and lives in [`crate::verify`].

use crate::point_process::Configuration;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WordError {
    #[error("letter {letter} not below alphabet bound {bound}")]
    LetterOutOfRange { letter: u8, bound: u8 },
    #[error("cell {0} is not a live 0")]
    NotLiveZero(usize),
    #[error("cell index {index} out of range for word of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("index set is not strictly increasing")]
    NotIncreasing,
    #[error("index set is not complete in the word")]
    NotComplete,
    #[error("word length {len} exceeds cap {cap}")]
    LengthCap { len: usize, cap: usize },
    #[error("configuration sampled to depth {depth}, need at least {need}")]
    DepthTooShallow { depth: u32, need: u32 },
    #[error("cannot parse word from {0:?}")]
    Parse(String),
}

/// One cell of a word: a live letter or the dead marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Live(u8),
    Dead,
}

/// A word over `{0,...,r-1}` plus dead cells. Equality is on the full cell
/// sequence, dead markers included, so words act as tree-node identities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    cells: Vec<Cell>,
    alphabet: u8,
}

impl Word {
    pub fn from_letters(letters: &[u8], alphabet: u8) -> Result<Self, WordError> {
        for &l in letters {
            if l >= alphabet {
                return Err(WordError::LetterOutOfRange {
                    letter: l,
                    bound: alphabet,
                });
            }
        }
        Ok(Word {
            cells: letters.iter().map(|&l| Cell::Live(l)).collect(),
            alphabet,
        })
    }

    pub fn empty(alphabet: u8) -> Self {
        Word {
            cells: Vec::new(),
            alphabet,
        }
    }

    /// Parses the display form: space-separated letters with `_` for dead
    /// cells; `∅` (or an empty string) is the empty word.
    pub fn parse(s: &str, alphabet: u8) -> Result<Self, WordError> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(Word::empty(alphabet));
        }
        let mut cells = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "_" {
                cells.push(Cell::Dead);
            } else {
                let letter: u8 = tok.parse().map_err(|_| WordError::Parse(s.to_string()))?;
                if letter >= alphabet {
                    return Err(WordError::LetterOutOfRange {
                        letter,
                        bound: alphabet,
                    });
                }
                cells.push(Cell::Live(letter));
            }
        }
        Ok(Word { cells, alphabet })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> Option<Cell> {
        self.cells.get(i).copied()
    }

    /// True when no cell is dead (a root word).
    pub fn is_root(&self) -> bool {
        self.cells.iter().all(|c| matches!(c, Cell::Live(_)))
    }

    pub fn live_letters(&self) -> Vec<u8> {
        self.cells
            .iter()
            .filter_map(|c| match c {
                Cell::Live(l) => Some(*l),
                Cell::Dead => None,
            })
            .collect()
    }

    /// 0-based indices of live cells holding the letter 0.
    pub fn live_zero_positions(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, Cell::Live(0)))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn has_live_zero(&self) -> bool {
        self.cells.iter().any(|c| matches!(c, Cell::Live(0)))
    }

    /// Live letters only, the way tree figures label nodes; `∅` if none.
    pub fn live_string(&self) -> String {
        let live = self.live_letters();
        if live.is_empty() {
            "∅".to_string()
        } else {
            live.iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self
            .cells
            .iter()
            .map(|c| match c {
                Cell::Live(l) => l.to_string(),
                Cell::Dead => "_".to_string(),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// A strictly increasing set of 0-based cell indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self, WordError> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(WordError::NotIncreasing);
        }
        Ok(IndexSet { indices })
    }

    /// Bit `i` of `mask` selects index `i`. Iterating masks in increasing
    /// numeric order walks subsets in colexicographic order.
    pub fn from_mask(mask: u64) -> Self {
        let mut indices = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            indices.push(i);
            m &= m - 1;
        }
        IndexSet { indices }
    }

    pub fn empty() -> Self {
        IndexSet {
            indices: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Bumps the live 0 at `cell`: that cell dies, every live cell to its left
/// decrements, and a live 0 to the left dies (shifted below zero).
pub fn bump_word(w: &Word, cell: usize) -> Result<Word, WordError> {
    match w.cell(cell) {
        None => {
            return Err(WordError::IndexOutOfRange {
                index: cell,
                len: w.len(),
            })
        }
        Some(Cell::Live(0)) => {}
        Some(_) => return Err(WordError::NotLiveZero(cell)),
    }
    let mut cells = w.cells.clone();
    cells[cell] = Cell::Dead;
    for c in cells.iter_mut().take(cell) {
        if let Cell::Live(l) = c {
            *c = if *l == 0 {
                Cell::Dead
            } else {
                Cell::Live(*l - 1)
            };
        }
    }
    Ok(Word {
        cells,
        alphabet: w.alphabet,
    })
}

/// One child per live 0, in cell order.
pub fn children(w: &Word) -> Vec<Word> {
    w.live_zero_positions()
        .into_iter()
        .map(|i| bump_word(w, i).expect("position holds a live 0"))
        .collect()
}

/// Completeness check on raw letters: the cells selected by `mask` can be
/// bumped in some order iff the letter at the i-th selected cell (1-based,
/// ascending) is at most `min(j - i, r - 1)`.
pub(crate) fn mask_complete(letters: &[u8], mask: u64, r: u32) -> bool {
    let j = mask.count_ones() as usize;
    let mut rank = 0usize;
    let mut m = mask;
    while m != 0 {
        let idx = m.trailing_zeros() as usize;
        m &= m - 1;
        let bound = (j - 1 - rank).min(r as usize - 1);
        if letters[idx] as usize > bound {
            return false;
        }
        rank += 1;
    }
    true
}

/// Replays the (unique) legal bump order of a complete `mask` and reports
/// whether the result is a leaf: no live 0 anywhere. At each step the legal
/// move is the leftmost live 0 inside the set, since bumping any cell to its
/// right would kill it.
pub(crate) fn mask_bump_is_leaf(letters: &[u8], mask: u64) -> bool {
    let mut state: Vec<i32> = letters.iter().map(|&l| l as i32).collect();
    let mut remaining = mask;
    while remaining != 0 {
        let mut pick = None;
        let mut m = remaining;
        while m != 0 {
            let idx = m.trailing_zeros() as usize;
            m &= m - 1;
            if state[idx] == 0 {
                pick = Some(idx);
                break;
            }
        }
        let idx = pick.expect("mask is complete");
        remaining &= !(1u64 << idx);
        state[idx] = -1;
        for s in state.iter_mut().take(idx) {
            if *s >= 0 {
                *s -= 1;
            }
        }
    }
    !state.contains(&0)
}

fn mask_of(a: &IndexSet) -> u64 {
    a.indices().iter().fold(0u64, |m, &i| m | (1u64 << i))
}

/// Inversion-table criterion for whether `a` can be bumped in some order.
///
/// Requires a root word (no dead cells) with all of `a` in range.
pub fn is_complete(w: &Word, a: &IndexSet) -> bool {
    assert!(w.is_root(), "completeness is defined on root words");
    if let Some(&max) = a.indices().last() {
        assert!(max < w.len(), "index {} out of range", max);
    }
    let letters = w.live_letters();
    mask_complete(&letters, mask_of(a), w.alphabet as u32)
}

/// The unique legal bump order of a complete set: `order[t]` is the position
/// within `a` (0-based) bumped at step `t`. The letters of `a` are read as an
/// inversion table and decoded.
pub fn recover_order(w: &Word, a: &IndexSet) -> Result<Vec<usize>, WordError> {
    if !is_complete(w, a) {
        return Err(WordError::NotComplete);
    }
    let j = a.len();
    let letters = w.live_letters();
    // Decode: code[t] counts later entries smaller than entry t, so entry t
    // is the (code[t]+1)-th smallest value still available.
    let mut available: Vec<usize> = (0..j).collect();
    let mut decoded = Vec::with_capacity(j);
    for t in 0..j {
        let code = letters[a.indices()[t]] as usize;
        decoded.push(available.remove(code));
    }
    let mut order = vec![0usize; j];
    for (i, &v) in decoded.iter().enumerate() {
        order[v] = i;
    }
    Ok(order)
}

fn factorial_u128(x: u32) -> u128 {
    (1..=x as u128).product()
}

/// `f_y(x)`: `x!` when `x <= y`, otherwise `y! * y^(x-y)`.
pub fn truncated_factorial(y: u32, x: u32) -> u128 {
    if x <= y {
        factorial_u128(x)
    } else {
        factorial_u128(y)
            .checked_mul((y as u128).pow(x - y))
            .expect("truncated factorial overflows u128")
    }
}

/// Number of letter assignments to `a` that make it complete; the ambient
/// word and the gaps between indices do not matter.
pub fn count_complete_fillings(a: &IndexSet, r: u32) -> u128 {
    truncated_factorial(r, a.len() as u32)
}

/// Number of length-`n` words over `{0..r-1}` in which bumping exactly the
/// set `a` produces a word with no live 0. Gap cells between consecutive
/// indices of `a` have been shifted a known number of times, which forbids
/// exactly one letter value in the later gaps and none in the earlier ones.
pub fn count_leaf_fillings(a: &IndexSet, n: usize, r: u32) -> u128 {
    assert!(r >= 1, "alphabet must be non-empty");
    let j = a.len() as u32;
    if let Some(&max) = a.indices().last() {
        assert!(max < n, "index {} outside ambient length {}", max, n);
    }
    if j < r {
        return factorial_u128(j)
            .checked_mul(((r - 1) as u128).pow(n as u32 - j))
            .expect("leaf count overflows u128");
    }
    // Gap i sits between the i-th and (i+1)-th chosen positions (1-based,
    // with sentinels 0 and n+1); its cells end up shifted j - i times.
    let positions: Vec<usize> = a.indices().iter().map(|&i| i + 1).collect();
    let mut unconstrained = 0u32;
    let mut constrained = 0u32;
    for i in 0..=j {
        let lo = if i == 0 { 0 } else { positions[i as usize - 1] };
        let hi = if i == j { n + 1 } else { positions[i as usize] };
        let gap = (hi - lo - 1) as u32;
        if i <= j - r {
            unconstrained += gap;
        } else {
            constrained += gap;
        }
    }
    truncated_factorial(r, j)
        .checked_mul((r as u128).pow(unconstrained))
        .and_then(|v| v.checked_mul(((r - 1) as u128).pow(constrained)))
        .expect("leaf count overflows u128")
}

/// Merged view of two index sets: for each position of the union, its rank
/// within `a` and/or `b` (0-based), if present.
fn union_ranks(a: &IndexSet, b: &IndexSet) -> Vec<(Option<usize>, Option<usize>)> {
    let mut union: Vec<usize> = a.indices().iter().chain(b.indices()).copied().collect();
    union.sort_unstable();
    union.dedup();
    union
        .iter()
        .map(|idx| {
            let ra = a.indices().iter().position(|x| x == idx);
            let rb = b.indices().iter().position(|x| x == idx);
            (ra, rb)
        })
        .collect()
}

/// Number of fillings of `A ∪ B` that make both sets complete, by direct
/// enumeration of all `r^|A∪B|` fillings against the completeness criterion
/// applied to each subword separately.
pub fn count_double_complete(a: &IndexSet, b: &IndexSet, r: u32) -> u128 {
    let ranks = union_ranks(a, b);
    let u = ranks.len();
    assert!(u <= 16, "union too large to enumerate");
    let ja = a.len();
    let jb = b.len();
    let mut letters = vec![0u8; u];
    let mut count = 0u128;
    loop {
        let mut sub_a = Vec::with_capacity(ja);
        let mut sub_b = Vec::with_capacity(jb);
        for (pos, &(ra, rb)) in ranks.iter().enumerate() {
            if ra.is_some() {
                sub_a.push(letters[pos]);
            }
            if rb.is_some() {
                sub_b.push(letters[pos]);
            }
        }
        let full_a = (1u64 << ja) - 1;
        let full_b = (1u64 << jb) - 1;
        if mask_complete(&sub_a, full_a, r) && mask_complete(&sub_b, full_b, r) {
            count += 1;
        }
        // odometer over {0..r-1}^u
        let mut pos = 0;
        loop {
            if pos == u {
                return count;
            }
            letters[pos] += 1;
            if (letters[pos] as u32) < r {
                break;
            }
            letters[pos] = 0;
            pos += 1;
        }
    }
}

/// Closed form for [`count_double_complete`]: the completeness criterion
/// constrains each position independently, so the count is the product over
/// union positions of `min(r, slack_A + 1, slack_B + 1)` where the slack of a
/// position of rank `i` (0-based) in a set of size `j` is `j - 1 - i`.
pub fn count_double_complete_closed(a: &IndexSet, b: &IndexSet, r: u32) -> u128 {
    let ja = a.len();
    let jb = b.len();
    let mut product = 1u128;
    for (ra, rb) in union_ranks(a, b) {
        let mut choices = r as u128;
        if let Some(i) = ra {
            choices = choices.min((ja - i) as u128);
        }
        if let Some(i) = rb {
            choices = choices.min((jb - i) as u128);
        }
        product = product
            .checked_mul(choices)
            .expect("double-complete count overflows u128");
    }
    product
}

/// Uniform bounds on the double-complete count over all relative layouts
/// with `|A\B| = a`, `|B\A| = b`, `|A∩B| = c`:
/// `f_r(min(a,b)+c) * f_r(max(a,b)) <= x <= (a+c)! (b+c)! / c!`.
pub fn bound_double_complete(a: u32, b: u32, c: u32, r: u32) -> (u128, u128) {
    let lower = truncated_factorial(r, a.min(b) + c) * truncated_factorial(r, a.max(b));
    let upper = factorial_u128(a + c) * factorial_u128(b + c) / factorial_u128(c);
    (lower, upper)
}

/// The layer word of a configuration: atoms in layers `< r`, listed in
/// location order, each cell holding its atom's layer.
pub fn word_of_config(c: &Configuration, r: u32) -> Result<Word, WordError> {
    if c.sampled_depth() < r {
        return Err(WordError::DepthTooShallow {
            depth: c.sampled_depth(),
            need: r,
        });
    }
    let letters: Vec<u8> = c
        .atoms()
        .iter()
        .filter(|a| a.layer < r)
        .map(|a| a.layer as u8)
        .collect();
    Word::from_letters(&letters, r as u8)
}

/// Visits every letter sequence of length `n` over `{0..r-1}`, in odometer
/// order (least-significant cell first).
pub fn enumerate_words(n: usize, r: u32, mut visit: impl FnMut(&[u8])) {
    assert!(r >= 1);
    let mut letters = vec![0u8; n];
    loop {
        visit(&letters);
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            letters[pos] += 1;
            if (letters[pos] as u32) < r {
                break;
            }
            letters[pos] = 0;
            pos += 1;
        }
    }
}
