//! Fixed-point forest enumeration and Poisson bump-tree simulation.
//!
//! The library has two halves that meet in the middle:
//!
//! * **Exact combinatorics** — the sorting map on permutations, the forest it
//!   induces, descendant trees, and a word calculus (completeness, leaf
//!   counts, double-completeness) with brute-force enumeration oracles.
//! * **Stochastic side** — layered Poisson point-process configurations on
//!   `[0,1]`, the bump map, the random bump tree it generates, and Monte
//!   Carlo / exact evaluators for its size and leaf-count moments.
//!
//! Everything randomized is driven by [`point_process::RngStream`] so that a
//! `(seed, stream plan)` pair reproduces results bit for bit.

#![forbid(unsafe_code)]

pub mod bump_tree;
pub mod estimators;
pub mod perm_forest;
pub mod point_process;
pub mod verify;
pub mod word_engine;

pub use bump_tree::{tree_of_config, tree_of_word, BumpTree, TreeCaps, Truncation};
pub use perm_forest::{build_forest, desc_tree, DescTree, Forest, Permutation};
pub use point_process::{Atom, Configuration, RngStream};
pub use word_engine::{IndexSet, Word};
