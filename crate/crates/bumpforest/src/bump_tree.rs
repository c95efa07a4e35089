//! Bump trees: the rooted tree generated by repeatedly bumping, for words
//! and for point-process configurations.
//!
//! Nodes are stored as compact records (parent, depth, child count) rather
//! than full state copies, so memory stays linear in the tree size; the BFS
//! frontier carries the materialized states it still needs. Construction is
//! breadth-first so per-depth counts come out incrementally and depth caps
//! are exact.

use crate::perm_forest::{separation_word, Permutation};
use crate::point_process::{bump_at, Atom, Configuration, RngStream};
use crate::word_engine::{bump_word, Word, WordError};
use serde::Serialize;
use std::collections::VecDeque;

/// Safety caps for tree construction. The size distribution is heavy-tailed
/// near intensity 1, so capped samples are flagged and must never be folded
/// silently into moment estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeCaps {
    pub max_depth: u32,
    pub max_nodes: u64,
}

impl Default for TreeCaps {
    fn default() -> Self {
        TreeCaps {
            max_depth: 1_000,
            max_nodes: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    DepthCap,
    NodeCap,
}

#[derive(Debug, Clone)]
pub struct BumpNode {
    pub parent: Option<u32>,
    pub depth: u32,
    pub child_count: u32,
    pub is_leaf: bool,
}

/// A rooted bump tree with its size `D`, leaf count `U`, and per-depth
/// profile. A node is a leaf when its state has nothing left to bump; with a
/// depth cap in force a node at the cap keeps its true leaf status even
/// though its children are not generated.
#[derive(Debug, Clone)]
pub struct BumpTree {
    nodes: Vec<BumpNode>,
    per_depth: Vec<u64>,
    leaves: u64,
    max_depth: u32,
    truncated: Option<Truncation>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeSummary {
    #[serde(rename = "D")]
    pub size: u64,
    #[serde(rename = "U")]
    pub leaves: u64,
    pub max_depth: u32,
    pub per_depth: Vec<u64>,
    pub truncated: Option<Truncation>,
}

impl BumpTree {
    /// Vertex count `D`.
    pub fn size(&self) -> u64 {
        self.nodes.len() as u64
    }

    /// Leaf count `U`.
    pub fn leaf_count(&self) -> u64 {
        self.leaves
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Node counts by depth; entry `j` is the number of vertices at depth `j`.
    pub fn per_depth(&self) -> &[u64] {
        &self.per_depth
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncated
    }

    pub fn nodes(&self) -> &[BumpNode] {
        &self.nodes
    }

    /// Node labels (live-letter views), present only when recording was
    /// requested at build time.
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn summary(&self) -> TreeSummary {
        TreeSummary {
            size: self.size(),
            leaves: self.leaves,
            max_depth: self.max_depth,
            per_depth: self.per_depth.clone(),
            truncated: self.truncated,
        }
    }

    /// Full node list for small trees; requires labels to have been recorded.
    pub fn export_nodes(&self) -> Option<serde_json::Value> {
        let labels = self.labels.as_ref()?;
        Some(serde_json::Value::Array(
            self.nodes
                .iter()
                .zip(labels)
                .map(|(n, label)| {
                    serde_json::json!({
                        "label": label,
                        "parent": n.parent,
                        "depth": n.depth,
                        "leaf": n.is_leaf,
                    })
                })
                .collect(),
        ))
    }

    /// Canonical form of the rooted shape (optionally cut at a depth).
    pub fn signature(&self, depth_cap: Option<u32>) -> String {
        let parents = self.nodes.iter().map(|n| n.parent).collect::<Vec<_>>();
        let depths = self.nodes.iter().map(|n| n.depth).collect::<Vec<_>>();
        rooted_signature(&parents, &depths, depth_cap)
    }
}

/// Canonical string for a rooted tree given parent links (node 0 is the
/// root): each vertex maps to `(` + sorted child signatures + `)`, so two
/// trees get the same string iff they are isomorphic as rooted trees.
pub fn rooted_signature(parents: &[Option<u32>], depths: &[u32], depth_cap: Option<u32>) -> String {
    let n = parents.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            if depth_cap.is_none_or(|cap| depths[i] <= cap) {
                children[*p as usize].push(i as u32);
            }
        }
    }
    // bottom-up over depth levels; no recursion so deep chains are fine
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(depths[i as usize]));
    let mut sigs: Vec<String> = vec![String::new(); n];
    for i in order {
        let i = i as usize;
        if depth_cap.is_some_and(|cap| depths[i] > cap) {
            continue;
        }
        let mut parts: Vec<&str> = children[i]
            .iter()
            .map(|&c| sigs[c as usize].as_str())
            .collect();
        parts.sort_unstable();
        let mut s = String::with_capacity(2 + parts.iter().map(|p| p.len()).sum::<usize>());
        s.push('(');
        for p in parts {
            s.push_str(p);
        }
        s.push(')');
        sigs[i] = s;
    }
    std::mem::take(&mut sigs[0])
}

struct TreeAccum {
    nodes: Vec<BumpNode>,
    per_depth: Vec<u64>,
    leaves: u64,
    max_depth: u32,
    truncated: Option<Truncation>,
    labels: Option<Vec<String>>,
}

impl TreeAccum {
    fn new(record_labels: bool) -> Self {
        TreeAccum {
            nodes: Vec::new(),
            per_depth: Vec::new(),
            leaves: 0,
            max_depth: 0,
            truncated: None,
            labels: record_labels.then(Vec::new),
        }
    }

    fn push(&mut self, parent: Option<u32>, depth: u32, label: impl FnOnce() -> String) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(BumpNode {
            parent,
            depth,
            child_count: 0,
            is_leaf: false,
        });
        if let Some(p) = parent {
            self.nodes[p as usize].child_count += 1;
        }
        if self.per_depth.len() <= depth as usize {
            self.per_depth.resize(depth as usize + 1, 0);
        }
        self.per_depth[depth as usize] += 1;
        self.max_depth = self.max_depth.max(depth);
        if let Some(labels) = &mut self.labels {
            labels.push(label());
        }
        id
    }

    fn mark_leaf(&mut self, id: u32) {
        if !self.nodes[id as usize].is_leaf {
            self.nodes[id as usize].is_leaf = true;
            self.leaves += 1;
        }
    }

    fn mark_truncated(&mut self, reason: Truncation) {
        if self.truncated.is_none() {
            self.truncated = Some(reason);
        }
    }

    fn finish(self) -> BumpTree {
        BumpTree {
            nodes: self.nodes,
            per_depth: self.per_depth,
            leaves: self.leaves,
            max_depth: self.max_depth,
            truncated: self.truncated,
            labels: self.labels,
        }
    }
}

fn word_closure(
    root: &Word,
    depth_cap: Option<u32>,
    max_nodes: u64,
    record_labels: bool,
) -> BumpTree {
    assert!(root.is_root(), "bump trees grow from root words");
    let mut acc = TreeAccum::new(record_labels);
    let mut queue: VecDeque<(u32, Word)> = VecDeque::new();
    let id = acc.push(None, 0, || root.live_string());
    queue.push_back((id, root.clone()));
    'bfs: while let Some((id, word)) = queue.pop_front() {
        let zeros = word.live_zero_positions();
        if zeros.is_empty() {
            acc.mark_leaf(id);
            continue;
        }
        let depth = acc.nodes[id as usize].depth;
        if depth_cap.is_some_and(|cap| depth >= cap) {
            acc.mark_truncated(Truncation::DepthCap);
            continue;
        }
        for cell in zeros {
            if acc.nodes.len() as u64 >= max_nodes {
                acc.mark_truncated(Truncation::NodeCap);
                break 'bfs;
            }
            let child = bump_word(&word, cell).expect("cell holds a live 0");
            let child_id = acc.push(Some(id), depth + 1, || child.live_string());
            queue.push_back((child_id, child));
        }
    }
    // classify anything left unexpanded (node-cap abort)
    for (id, word) in queue {
        if !word.has_live_zero() {
            acc.mark_leaf(id);
        }
    }
    acc.finish()
}

/// Breadth-first closure of a root word under bumping.
pub fn tree_of_word(w: &Word, max_nodes: u64) -> BumpTree {
    word_closure(w, None, max_nodes, false)
}

/// Like [`tree_of_word`] but with node labels recorded for export.
pub fn tree_of_word_recorded(w: &Word, max_nodes: u64) -> BumpTree {
    word_closure(w, None, max_nodes, true)
}

/// The radius-`r` ball of the bump tree of `w`. Cutting at the radius is
/// definitional here, so only the node cap reports truncation... except that
/// an unexpanded frontier below the cut keeps the flag honest: a node at the
/// radius with live zeros marks the tree as depth-capped.
pub fn tree_of_word_ball(w: &Word, radius: u32, max_nodes: u64) -> BumpTree {
    word_closure(w, Some(radius), max_nodes, false)
}

struct ConfigEntry {
    id: u32,
    depth: u32,
    cfg: Configuration,
    horizon: u32, // root horizon already folded into cfg
}

struct RootLayers {
    layers: Vec<Vec<f64>>,
    all_locations: Vec<f64>, // sorted, for collision redraws
    alpha: f64,
}

impl RootLayers {
    fn extend_to(&mut self, depth: u32, stream: &RngStream) {
        while (self.layers.len() as u32) < depth {
            let layer = self.layers.len() as u32;
            let mut rng = stream.substream(layer as u64).rng();
            let count = crate::point_process::poisson_count(self.alpha, &mut rng);
            let locs =
                crate::point_process::draw_locations(count, &mut rng, &mut self.all_locations);
            self.layers.push(locs);
        }
    }
}

/// Inserts the root atoms of layers `entry.horizon..target` into an entry's
/// configuration. An original layer-`k` atom sits `k - s` layers deep at this
/// node, where `s` counts the bumps in the node's history that happened
/// strictly to its right; the history is read off the parent chain, whose
/// bump locations live in `bump_locs` (indexed by node id).
fn patch_entry(
    entry: &mut ConfigEntry,
    root: &RootLayers,
    target: u32,
    nodes: &[BumpNode],
    bump_locs: &[f64],
) {
    for k in entry.horizon..target {
        for &x in &root.layers[k as usize] {
            let mut shifts = 0u32;
            let mut cur = entry.id as usize;
            while let Some(parent) = nodes[cur].parent {
                if bump_locs[cur] > x {
                    shifts += 1;
                }
                cur = parent as usize;
            }
            debug_assert!(k >= shifts, "new layers sit above the bump count");
            entry.cfg.insert_atom(Atom {
                location: x,
                layer: k - shifts,
            });
        }
    }
    entry.horizon = target;
    entry.cfg.set_sampled_depth(target - entry.depth);
}

/// Builds the bump tree of a configuration, realizing deeper layers on
/// demand: the ball of radius `d` only depends on layers `0..d`, so the root
/// is extended whenever the BFS frontier is about to outrun the sampled
/// horizon. Returns the tree together with the root configuration at its
/// final sampled depth.
pub fn tree_of_config_full(
    c: &Configuration,
    stream: &RngStream,
    caps: TreeCaps,
) -> (BumpTree, Configuration) {
    let mut root = RootLayers {
        layers: {
            let mut layers: Vec<Vec<f64>> = vec![Vec::new(); c.sampled_depth() as usize];
            for a in c.atoms() {
                layers[a.layer as usize].push(a.location);
            }
            layers
        },
        all_locations: {
            let mut locs: Vec<f64> = c.atoms().iter().map(|a| a.location).collect();
            locs.sort_by(f64::total_cmp);
            locs
        },
        alpha: c.alpha(),
    };

    let mut acc = TreeAccum::new(false);
    let mut bump_locs: Vec<f64> = Vec::new(); // per node: location bumped to create it
    let mut queue: VecDeque<ConfigEntry> = VecDeque::new();
    let id = acc.push(None, 0, String::new);
    bump_locs.push(f64::NAN);
    queue.push_back(ConfigEntry {
        id,
        depth: 0,
        cfg: c.clone(),
        horizon: c.sampled_depth(),
    });

    'bfs: while let Some(mut entry) = queue.pop_front() {
        // classifying needs layers 0..depth+1 of the root
        let needed = entry.depth + 1;
        root.extend_to(needed, stream);
        let target = (root.layers.len() as u32).max(needed);
        if entry.horizon < target {
            patch_entry(&mut entry, &root, target, &acc.nodes, &bump_locs);
        }
        let zeros = entry.cfg.layer_zero_indices();
        if zeros.is_empty() {
            acc.mark_leaf(entry.id);
            continue;
        }
        if entry.depth >= caps.max_depth {
            acc.mark_truncated(Truncation::DepthCap);
            continue;
        }
        for idx in zeros {
            if acc.nodes.len() as u64 >= caps.max_nodes {
                acc.mark_truncated(Truncation::NodeCap);
                // classify what's left without expanding further
                while let Some(mut rest) = queue.pop_front() {
                    let needed = rest.depth + 1;
                    root.extend_to(needed, stream);
                    let target = (root.layers.len() as u32).max(needed);
                    if rest.horizon < target {
                        patch_entry(&mut rest, &root, target, &acc.nodes, &bump_locs);
                    }
                    if rest.cfg.layer_zero_indices().is_empty() {
                        acc.mark_leaf(rest.id);
                    }
                }
                break 'bfs;
            }
            let bumped_loc = entry.cfg.atoms()[idx].location;
            let child_cfg = bump_at(&entry.cfg, idx).expect("layer-0 atom");
            let child_id = acc.push(Some(entry.id), entry.depth + 1, String::new);
            bump_locs.push(bumped_loc);
            queue.push_back(ConfigEntry {
                id: child_id,
                depth: entry.depth + 1,
                cfg: child_cfg,
                horizon: entry.horizon,
            });
        }
    }

    let depth = root.layers.len() as u32;
    let mut atoms = Vec::new();
    for (k, layer) in root.layers.iter().enumerate() {
        for &x in layer {
            atoms.push(Atom {
                location: x,
                layer: k as u32,
            });
        }
    }
    let final_root = Configuration::from_atoms(c.alpha(), depth.max(1), atoms)
        .expect("atoms collision-free by construction");
    (acc.finish(), final_root)
}

/// [`tree_of_config_full`] without the extended root.
pub fn tree_of_config(c: &Configuration, stream: &RngStream, caps: TreeCaps) -> BumpTree {
    tree_of_config_full(c, stream, caps).0
}

const SUBSET_LENGTH_CAP: usize = 20;

/// Independent vertex-count oracle: vertices of the bump tree correspond
/// one-to-one with complete index subsets (the empty set giving the root), so
/// the size is the number of complete subsets.
pub fn vertex_count_via_subsets(w: &Word) -> Result<u64, WordError> {
    Ok(complete_subset_profile(w)?.iter().sum())
}

/// Complete-subset counts by subset size; entry `j` matches the number of
/// tree vertices at depth `j`.
pub fn complete_subset_profile(w: &Word) -> Result<Vec<u64>, WordError> {
    let n = w.len();
    if n > SUBSET_LENGTH_CAP {
        return Err(WordError::LengthCap {
            len: n,
            cap: SUBSET_LENGTH_CAP,
        });
    }
    assert!(w.is_root(), "profile is defined on root words");
    let letters = w.live_letters();
    let r = w.alphabet() as u32;
    let mut profile = vec![0u64; n + 1];
    for mask in 0u64..(1u64 << n) {
        if crate::word_engine::mask_complete(&letters, mask, r) {
            profile[mask.count_ones() as usize] += 1;
        }
    }
    Ok(profile)
}

/// The exact finite-size bump dynamic on separation words: bumping the
/// 0-separated position `m > 1` shifts everything left of it one step right
/// (dropping each separation by one) and plants the moved value at the front
/// as an `(m-1)`-separated point. This mirrors bumping on the permutation
/// itself, unlike the limit bump map, which has no insertion.
fn separation_children(word: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for (i, &v) in word.iter().enumerate().skip(1) {
        if v != 0 {
            continue;
        }
        let mut child = Vec::with_capacity(word.len());
        child.push(i as i64); // the moved value, (m-1)-separated at position 1
        child.extend(word[..i].iter().map(|&x| x - 1));
        child.extend_from_slice(&word[i + 1..]);
        out.push(child);
    }
    out
}

/// Builds the descendant tree of a permutation through the exact
/// separation-word dynamic, for structural comparison against
/// [`crate::perm_forest::desc_tree`].
pub fn tree_of_separation_exact(p: &Permutation, caps: TreeCaps) -> BumpTree {
    let mut acc = TreeAccum::new(false);
    let mut queue: VecDeque<(u32, Vec<i64>)> = VecDeque::new();
    let root = separation_word(p);
    let id = acc.push(None, 0, String::new);
    queue.push_back((id, root));
    'bfs: while let Some((id, word)) = queue.pop_front() {
        let kids = separation_children(&word);
        if kids.is_empty() {
            acc.mark_leaf(id);
            continue;
        }
        let depth = acc.nodes[id as usize].depth;
        if depth >= caps.max_depth {
            acc.mark_truncated(Truncation::DepthCap);
            continue;
        }
        for child in kids {
            if acc.nodes.len() as u64 >= caps.max_nodes {
                acc.mark_truncated(Truncation::NodeCap);
                break 'bfs;
            }
            let child_id = acc.push(Some(id), depth + 1, String::new);
            queue.push_back((child_id, child));
        }
    }
    for (id, word) in queue {
        if separation_children(&word).is_empty() {
            acc.mark_leaf(id);
        }
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm_forest::{desc_tree, lehmer_unrank, DEFAULT_DESC_MAX_NODES};
    use crate::word_engine::word_of_config;

    fn word(s: &str, r: u8) -> Word {
        Word::parse(s, r).unwrap()
    }

    #[test]
    fn figure_tree_of_21010() {
        let t = tree_of_word_recorded(&word("2 1 0 1 0", 3), 1 << 20);
        assert_eq!(t.size(), 19);
        assert_eq!(t.leaf_count(), 7);
        assert_eq!(t.max_depth(), 5);
        assert_eq!(t.per_depth(), &[1, 2, 4, 7, 4, 1]);
        assert!(t.truncation().is_none());
        let labels = t.labels().unwrap();
        let root_children: Vec<&str> = t
            .nodes()
            .iter()
            .enumerate()
            .filter(|(_, n)| n.parent == Some(0))
            .map(|(i, _)| labels[i].as_str())
            .collect();
        assert_eq!(root_children, vec!["1 0 1 0", "1 0 0"]);
    }

    #[test]
    fn degenerate_trees() {
        let t = tree_of_word(&Word::empty(3), 100);
        assert_eq!((t.size(), t.leaf_count(), t.max_depth()), (1, 1, 0));

        let t = tree_of_word(&word("0", 1), 100);
        assert_eq!((t.size(), t.leaf_count(), t.max_depth()), (2, 1, 1));
    }

    #[test]
    fn subset_oracle_matches_tree_size() {
        assert_eq!(vertex_count_via_subsets(&word("2 1 0 1 0", 3)).unwrap(), 19);
        assert_eq!(vertex_count_via_subsets(&Word::empty(2)).unwrap(), 1);
        assert_eq!(vertex_count_via_subsets(&word("0 0 0", 3)).unwrap(), 8);

        // exhaustive over all words of length <= 6, r <= 4
        for r in 1..=4u32 {
            for n in 0..=6usize {
                crate::word_engine::enumerate_words(n, r, |letters| {
                    let w = Word::from_letters(letters, r as u8).unwrap();
                    let t = tree_of_word(&w, 1 << 22);
                    assert!(t.truncation().is_none());
                    assert_eq!(t.size(), vertex_count_via_subsets(&w).unwrap(), "word {w}");
                    let profile = complete_subset_profile(&w).unwrap();
                    let mut per_depth = t.per_depth().to_vec();
                    per_depth.resize(profile.len(), 0);
                    assert_eq!(per_depth, profile, "word {w}");
                });
            }
        }
    }

    #[test]
    fn randomized_longer_words_match_oracle() {
        use rand::Rng;
        let mut rng = RngStream::new(7, 77).rng();
        for _ in 0..60 {
            let n = rng.random_range(7..=10usize);
            let r = rng.random_range(1..=4u32);
            let letters: Vec<u8> = (0..n).map(|_| rng.random_range(0..r) as u8).collect();
            let w = Word::from_letters(&letters, r as u8).unwrap();
            let t = tree_of_word(&w, 1 << 22);
            assert_eq!(t.size(), vertex_count_via_subsets(&w).unwrap(), "word {w}");
        }
    }

    #[test]
    fn node_cap_truncates() {
        let t = tree_of_word(&word("0 0 0", 3), 4);
        assert_eq!(t.truncation(), Some(Truncation::NodeCap));
        assert!(t.size() <= 4);
    }

    #[test]
    fn ball_respects_radius() {
        let t = tree_of_word_ball(&word("0 0 0", 3), 1, 1 << 20);
        assert_eq!(t.max_depth(), 1);
        assert_eq!(t.per_depth(), &[1, 3]);
        assert_eq!(t.truncation(), Some(Truncation::DepthCap));
    }

    #[test]
    fn config_tree_with_empty_deeper_layers_matches_word_tree() {
        let cfg = Configuration::from_atoms(
            1.0,
            6,
            vec![
                Atom {
                    location: 0.15,
                    layer: 2,
                },
                Atom {
                    location: 0.35,
                    layer: 1,
                },
                Atom {
                    location: 0.55,
                    layer: 0,
                },
                Atom {
                    location: 0.75,
                    layer: 1,
                },
                Atom {
                    location: 0.95,
                    layer: 0,
                },
            ],
        )
        .unwrap();
        let stream = RngStream::new(5, 0);
        let t = tree_of_config(&cfg, &stream, TreeCaps::default());
        assert_eq!(t.size(), 19);
        assert_eq!(t.leaf_count(), 7);
        assert_eq!(t.max_depth(), 5);
    }

    #[test]
    fn config_with_no_layer_zero_is_a_root_leaf() {
        let cfg = Configuration::from_atoms(
            0.5,
            3,
            vec![
                Atom {
                    location: 0.4,
                    layer: 1,
                },
                Atom {
                    location: 0.6,
                    layer: 2,
                },
            ],
        )
        .unwrap();
        let t = tree_of_config(&cfg, &RngStream::new(9, 9), TreeCaps::default());
        assert_eq!((t.size(), t.leaf_count()), (1, 1));
    }

    #[test]
    fn config_tree_agrees_with_word_tree_at_final_horizon() {
        let base = RngStream::new(11, 0);
        for trial in 0..200u64 {
            let stream = base.substream(trial);
            let cfg = Configuration::sample(0.4, 1, &stream).unwrap();
            let (tree, final_root) = tree_of_config_full(&cfg, &stream, TreeCaps::default());
            assert!(tree.truncation().is_none());
            let w = word_of_config(&final_root, final_root.sampled_depth()).unwrap();
            let wt = tree_of_word(&w, 1 << 22);
            assert_eq!(tree.size(), wt.size(), "trial {trial}");
            assert_eq!(tree.leaf_count(), wt.leaf_count(), "trial {trial}");
            assert_eq!(tree.per_depth(), wt.per_depth(), "trial {trial}");
            assert_eq!(tree.signature(None), wt.signature(None), "trial {trial}");
        }
    }

    #[test]
    fn stabilized_tree_ignores_deeper_layers() {
        // if the ball of radius r has no vertex at depth r, deeper layers
        // cannot change the tree
        let base = RngStream::new(13, 0);
        let mut checked = 0;
        for trial in 0..400u64 {
            let stream = base.substream(trial);
            let r = 6u32;
            let cfg = Configuration::sample(0.5, r, &stream).unwrap();
            let w = word_of_config(&cfg, r).unwrap();
            let ball = tree_of_word_ball(&w, r, 1 << 22);
            if ball.max_depth() >= r {
                continue;
            }
            checked += 1;
            let extended = crate::point_process::extend_depth(&cfg, r + 5, &stream).unwrap();
            let w2 = word_of_config(&extended, r + 5).unwrap();
            let full = tree_of_word(&w2, 1 << 22);
            assert_eq!(full.signature(None), ball.signature(None));
            assert_eq!(full.size(), ball.size());
        }
        assert!(checked > 300, "only {checked} stabilized samples");
    }

    #[test]
    fn separation_dynamic_reproduces_descendant_trees() {
        // exhaustive for n <= 6: the finite word dynamic and the permutation
        // dynamic build isomorphic trees
        for n in 1..=6usize {
            let total: u64 = (1..=n as u64).product();
            for rank in 0..total {
                let p = lehmer_unrank(n, rank).unwrap();
                let dt = desc_tree(&p, DEFAULT_DESC_MAX_NODES);
                let st = tree_of_separation_exact(&p, TreeCaps::default());
                assert_eq!(dt.size(), st.size(), "p = {p}");
                assert_eq!(
                    rooted_signature(&dt.parents(), &dt.depths(), None),
                    st.signature(None),
                    "p = {p}"
                );
            }
        }
    }

    #[test]
    fn signatures_distinguish_shapes() {
        let chain = tree_of_word(&word("1 0", 2), 100); // path of length 2
        let pair = tree_of_word(&word("0 0", 2), 100);
        assert_ne!(chain.signature(None), pair.signature(None));
        assert_eq!(chain.signature(Some(0)), pair.signature(Some(0)));
    }

    #[test]
    fn summary_serializes() {
        let t = tree_of_word(&word("0", 1), 100);
        let v = serde_json::to_value(t.summary()).unwrap();
        assert_eq!(v["D"], 2);
        assert_eq!(v["U"], 1);
        assert_eq!(v["per_depth"][0], 1);
        assert_eq!(v["truncated"], serde_json::Value::Null);
    }
}
