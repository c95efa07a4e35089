//! The fixed-point forest on permutations.
//!
//! One sorting pass (`sort_step`) takes the first value of a permutation and
//! reinserts it at its matching position, creating a fixed point there.
//! Every permutation not starting with 1 points at its image, and the edges
//! form a forest whose tree bases are the permutations starting with 1.
//! Bumping a fixed point is the inverse move, so the children of a
//! permutation are its bumps and `desc_tree` is the closure under bumping.
//!
//! The whole forest is stored as parent-pointer arrays indexed by
//! lexicographic (Lehmer-code) rank so that `n = 9` fits comfortably in
//! memory; the ranking functions are public for reproducibility.

use crate::point_process::{Atom, Configuration};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PermError {
    #[error("empty permutation")]
    Empty,
    #[error("not a permutation of 1..={0}: each value must appear exactly once")]
    NotBijection(usize),
    #[error("cannot parse permutation from {0:?}")]
    Parse(String),
    #[error("{m} is not a fixed point above 1")]
    NotFixedPoint { m: usize },
    #[error("size {n} needs {needed} nodes, above the limit {limit}")]
    SizeLimit { n: usize, needed: u64, limit: u64 },
    #[error("rank {rank} out of range for size {n}")]
    RankOutOfRange { rank: u64, n: usize },
}

/// A permutation of `{1,...,n}` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self, PermError> {
        let n = values.len();
        if n == 0 {
            return Err(PermError::Empty);
        }
        let mut seen = vec![false; n];
        for &v in &values {
            if v == 0 || v as usize > n || seen[v as usize - 1] {
                return Err(PermError::NotBijection(n));
            }
            seen[v as usize - 1] = true;
        }
        Ok(Permutation { values })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Permutation {
            values: (1..=n as u32).collect(),
        }
    }

    /// The cyclic rotation `2 3 ... n 1`.
    pub fn rotation(n: usize) -> Self {
        assert!(n >= 1);
        let mut values: Vec<u32> = (2..=n as u32).collect();
        values.push(1);
        Permutation { values }
    }

    /// Uniform random permutation (Fisher-Yates).
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut values: Vec<u32> = (1..=n as u32).collect();
        values.shuffle(rng);
        Permutation { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Value at 1-based position `i`.
    pub fn value_at(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    /// A base starts with 1; the sorting process halts there.
    pub fn is_base(&self) -> bool {
        self.values[0] == 1
    }

    /// Digit string for `n <= 9` ("31245"), comma-separated beyond.
    pub fn parse(s: &str) -> Result<Self, PermError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(PermError::Parse(s.to_string()));
        }
        let values: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|t| t.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| PermError::Parse(s.to_string()))?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or(()))
                .collect::<Result<_, _>>()
                .map_err(|_| PermError::Parse(s.to_string()))?
        };
        Permutation::new(values)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n() <= 9 {
            for v in &self.values {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

/// One sorting pass: remove the first value `v` and reinsert it at position
/// `v`. Permutations starting with 1 are returned unchanged.
pub fn sort_step(p: &Permutation) -> Permutation {
    let v = p.values[0] as usize;
    if v == 1 {
        return p.clone();
    }
    let mut values = Vec::with_capacity(p.n());
    values.extend_from_slice(&p.values[1..v]);
    values.push(v as u32);
    values.extend_from_slice(&p.values[v..]);
    Permutation { values }
}

/// Fixed points other than 1, ascending: `{m > 1 : p(m) = m}`.
pub fn fixed_points(p: &Permutation) -> Vec<usize> {
    (2..=p.n())
        .filter(|&m| p.value_at(m) as usize == m)
        .collect()
}

/// Pulls the fixed point `m` to the front, shifting positions `2..=m`; the
/// inverse of [`sort_step`].
pub fn bump_value(p: &Permutation, m: usize) -> Result<Permutation, PermError> {
    if m < 2 || m > p.n() || p.value_at(m) as usize != m {
        return Err(PermError::NotFixedPoint { m });
    }
    let mut values = Vec::with_capacity(p.n());
    values.push(m as u32);
    values.extend_from_slice(&p.values[..m - 1]);
    values.extend_from_slice(&p.values[m..]);
    Ok(Permutation { values })
}

/// Lexicographic rank via the Lehmer code. `n <= 20` so the rank fits u64.
pub fn lehmer_rank(p: &Permutation) -> u64 {
    let n = p.n();
    assert!(n <= 20, "rank overflows u64 beyond n = 20");
    let mut rank = 0u64;
    for i in 0..n {
        let smaller_later = p.values[i + 1..]
            .iter()
            .filter(|&&v| v < p.values[i])
            .count() as u64;
        rank += smaller_later * factorial_u64(n - 1 - i);
    }
    rank
}

/// Inverse of [`lehmer_rank`].
pub fn lehmer_unrank(n: usize, rank: u64) -> Result<Permutation, PermError> {
    if n == 0 {
        return Err(PermError::Empty);
    }
    assert!(n <= 20);
    if rank >= factorial_u64(n) {
        return Err(PermError::RankOutOfRange { rank, n });
    }
    let mut available: Vec<u32> = (1..=n as u32).collect();
    let mut values = Vec::with_capacity(n);
    let mut rest = rank;
    for i in 0..n {
        let f = factorial_u64(n - 1 - i);
        let idx = (rest / f) as usize;
        rest %= f;
        values.push(available.remove(idx));
    }
    Ok(Permutation { values })
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn next_permutation(values: &mut [u32]) -> bool {
    let n = values.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && values[i - 1] >= values[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while values[j] <= values[i - 1] {
        j -= 1;
    }
    values.swap(i - 1, j);
    values[i..].reverse();
    true
}

/// A descendant tree: the root plus everything reachable by bumping, each
/// node keeping a parent link satisfying `sort_step(child) = parent`.
#[derive(Debug, Clone)]
pub struct DescTree {
    nodes: Vec<DescNode>,
    truncated: bool,
}

#[derive(Debug, Clone)]
pub struct DescNode {
    pub perm: Permutation,
    pub parent: Option<u32>,
    pub depth: u32,
    pub child_count: u32,
}

impl DescTree {
    pub fn size(&self) -> u64 {
        self.nodes.len() as u64
    }

    pub fn nodes(&self) -> &[DescNode] {
        &self.nodes
    }

    pub fn root(&self) -> &Permutation {
        &self.nodes[0].perm
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn parents(&self) -> Vec<Option<u32>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    pub fn depths(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.depth).collect()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.nodes.iter().any(|n| &n.perm == p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root().to_string(),
            "truncated": self.truncated,
            "nodes": self.nodes.iter().map(|n| serde_json::json!({
                "perm": n.perm.to_string(),
                "parent": n.parent,
                "depth": n.depth,
            })).collect::<Vec<_>>(),
        })
    }

    /// Indented listing in breadth-first order is unhelpful for reading; this
    /// renders depth-first so children sit under their parents.
    pub fn render_text(&self) -> String {
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(p) = n.parent {
                children[p as usize].push(i as u32);
            }
        }
        let mut out = String::new();
        let mut stack = vec![0u32];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id as usize];
            for _ in 0..node.depth {
                out.push_str("  ");
            }
            out.push_str(&node.perm.to_string());
            out.push('\n');
            for &c in children[id as usize].iter().rev() {
                stack.push(c);
            }
        }
        out
    }
}

fn desc_closure(p: &Permutation, max_depth: Option<u32>, max_nodes: u64) -> DescTree {
    let mut nodes = vec![DescNode {
        perm: p.clone(),
        parent: None,
        depth: 0,
        child_count: 0,
    }];
    let mut truncated = false;
    let mut next = 0usize;
    'bfs: while next < nodes.len() {
        let depth = nodes[next].depth;
        if max_depth.is_some_and(|cap| depth >= cap) {
            next += 1;
            continue;
        }
        let perm = nodes[next].perm.clone();
        for m in fixed_points(&perm) {
            if nodes.len() as u64 >= max_nodes {
                truncated = true;
                break 'bfs;
            }
            let child = bump_value(&perm, m).expect("m is a fixed point");
            nodes.push(DescNode {
                perm: child,
                parent: Some(next as u32),
                depth: depth + 1,
                child_count: 0,
            });
            nodes[next].child_count += 1;
        }
        next += 1;
    }
    DescTree { nodes, truncated }
}

pub const DEFAULT_DESC_MAX_NODES: u64 = 10_000_000;

/// Breadth-first closure of `p` under bumping.
pub fn desc_tree(p: &Permutation, max_nodes: u64) -> DescTree {
    desc_closure(p, None, max_nodes)
}

/// The radius-`r` neighborhood of the root of the descendant tree.
pub fn desc_ball(p: &Permutation, radius: u32, max_nodes: u64) -> DescTree {
    desc_closure(p, Some(radius), max_nodes)
}

pub const DEFAULT_FOREST_MAX_NODES: u64 = 362_880; // 9!

/// The whole forest on all `n!` permutations, as parent-pointer arrays over
/// lexicographic ranks.
#[derive(Debug, Clone)]
pub struct Forest {
    n: usize,
    parent: Vec<u32>, // u32::MAX marks a base
    depth: Vec<u32>,
    base: Vec<u32>,
    child_count: Vec<u32>,
}

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct TreeStat {
    pub base: u64,
    pub base_perm: String,
    pub size: u64,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForestSummary {
    pub n: usize,
    pub total_perms: u64,
    pub tree_count: u64,
    pub identity_tree_size: u64,
    pub max_depth: u32,
    pub deepest_perm: String,
    pub deepest_base: String,
    pub deepest_unique: bool,
    pub trees: Vec<TreeStat>,
}

pub fn build_forest(n: usize, max_nodes: u64) -> Result<Forest, PermError> {
    if n == 0 {
        return Err(PermError::Empty);
    }
    if n > 20 {
        return Err(PermError::SizeLimit {
            n,
            needed: u64::MAX,
            limit: max_nodes,
        });
    }
    let total = factorial_u64(n);
    if total > max_nodes {
        return Err(PermError::SizeLimit {
            n,
            needed: total,
            limit: max_nodes,
        });
    }
    let total = total as usize;
    let mut parent = vec![NO_PARENT; total];
    let mut values: Vec<u32> = (1..=n as u32).collect();
    let mut rank = 0usize;
    loop {
        if values[0] != 1 {
            let p = Permutation {
                values: values.clone(),
            };
            parent[rank] = lehmer_rank(&sort_step(&p)) as u32;
        }
        rank += 1;
        if !next_permutation(&mut values) {
            break;
        }
    }
    debug_assert_eq!(rank, total);

    // depth and base by walking parent chains, memoized
    let mut depth = vec![u32::MAX; total];
    let mut base = vec![NO_PARENT; total];
    let mut stack = Vec::new();
    for start in 0..total {
        if depth[start] != u32::MAX {
            continue;
        }
        let mut cur = start;
        while depth[cur] == u32::MAX && parent[cur] != NO_PARENT {
            stack.push(cur);
            cur = parent[cur] as usize;
        }
        if depth[cur] == u32::MAX {
            depth[cur] = 0;
            base[cur] = cur as u32;
        }
        let mut d = depth[cur];
        let b = base[cur];
        while let Some(node) = stack.pop() {
            d += 1;
            depth[node] = d;
            base[node] = b;
        }
    }

    let mut child_count = vec![0u32; total];
    for r in 0..total {
        if parent[r] != NO_PARENT {
            child_count[parent[r] as usize] += 1;
        }
    }

    Ok(Forest {
        n,
        parent,
        depth,
        base,
        child_count,
    })
}

impl Forest {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> u64 {
        self.parent.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent_of(&self, rank: u64) -> Option<u64> {
        let p = self.parent[rank as usize];
        (p != NO_PARENT).then_some(p as u64)
    }

    pub fn depth_of(&self, rank: u64) -> u32 {
        self.depth[rank as usize]
    }

    pub fn base_of(&self, rank: u64) -> u64 {
        self.base[rank as usize] as u64
    }

    pub fn child_count_of(&self, rank: u64) -> u32 {
        self.child_count[rank as usize]
    }

    pub fn perm_of_rank(&self, rank: u64) -> Permutation {
        lehmer_unrank(self.n, rank).expect("rank in range")
    }

    /// Per-tree size and height, ordered by base rank.
    pub fn tree_stats(&self) -> Vec<TreeStat> {
        let mut acc: BTreeMap<u32, (u64, u32)> = BTreeMap::new();
        for r in 0..self.parent.len() {
            let entry = acc.entry(self.base[r]).or_insert((0, 0));
            entry.0 += 1;
            entry.1 = entry.1.max(self.depth[r]);
        }
        acc.into_iter()
            .map(|(b, (size, max_depth))| TreeStat {
                base: b as u64,
                base_perm: self.perm_of_rank(b as u64).to_string(),
                size,
                max_depth,
            })
            .collect()
    }

    /// Maximum depth over the forest and every rank achieving it.
    pub fn deepest(&self) -> (u32, Vec<u64>) {
        let max = self.depth.iter().copied().max().unwrap_or(0);
        let ranks = self
            .depth
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == max)
            .map(|(r, _)| r as u64)
            .collect();
        (max, ranks)
    }

    /// Size of the tree based at the identity (rank 0).
    pub fn identity_tree_size(&self) -> u64 {
        self.base.iter().filter(|&&b| b == 0).count() as u64
    }

    pub fn summary(&self) -> ForestSummary {
        let trees = self.tree_stats();
        let (max_depth, deepest) = self.deepest();
        let deepest_rank = deepest[0];
        ForestSummary {
            n: self.n,
            total_perms: self.len(),
            tree_count: trees.len() as u64,
            identity_tree_size: self.identity_tree_size(),
            max_depth,
            deepest_perm: self.perm_of_rank(deepest_rank).to_string(),
            deepest_base: self.perm_of_rank(self.base_of(deepest_rank)).to_string(),
            deepest_unique: deepest.len() == 1,
            trees,
        }
    }

    /// Materializes the descendant tree of the base of the given rank.
    pub fn tree_of_base(&self, base_rank: u64) -> DescTree {
        desc_tree(&self.perm_of_rank(base_rank), self.len())
    }
}

/// The separation configuration of a permutation: an atom at location `i/n`
/// in layer `k` for every position with `p(i) - i = k >= 0`. Negative
/// separations emit nothing. Position `n` maps to location 1.0, which no bump
/// ever shifts, matching `p(n) = n` being unaffected by the sorting moves.
pub fn separation_config(p: &Permutation) -> Configuration {
    let n = p.n();
    let atoms: Vec<Atom> = (1..=n)
        .filter_map(|i| {
            let sep = p.value_at(i) as i64 - i as i64;
            (sep >= 0).then(|| Atom {
                location: i as f64 / n as f64,
                layer: sep as u32,
            })
        })
        .collect();
    Configuration::from_atoms(1.0, n as u32, atoms).expect("distinct locations by construction")
}

/// The raw separation word `p(i) - i`, including negative entries.
pub fn separation_word(p: &Permutation) -> Vec<i64> {
    (1..=p.n())
        .map(|i| p.value_at(i) as i64 - i as i64)
        .collect()
}
