//! Empirical local-limit comparison: the radius-`r` neighborhood of the
//! descendant tree of a uniform permutation against the radius-`r` bump-tree
//! ball of a Poisson(1) configuration.

use super::EstimatorError;
use crate::bump_tree::{rooted_signature, tree_of_word_ball};
use crate::perm_forest::{desc_ball, Permutation};
use crate::point_process::{Configuration, RngStream};
use crate::word_engine::word_of_config;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct LocalLimitReport {
    pub n: usize,
    pub radius: u32,
    pub trials: u64,
    pub seed: u64,
    /// Total-variation distance between the two empirical distributions over
    /// rooted-tree isomorphism classes.
    pub tv: f64,
    /// Delta-method standard error of the TV estimate (cross covariances
    /// ignored, which errs conservative).
    pub se: f64,
    pub perm_classes: usize,
    pub limit_classes: usize,
}

const BALL_NODE_CAP: u64 = 1 << 20;

/// Samples `trials` neighborhoods from each side and compares the empirical
/// class distributions. Permutation trials and configuration trials draw
/// from disjoint substreams of `stream`.
pub fn local_limit_check(
    n: usize,
    radius: u32,
    trials: u64,
    stream: &RngStream,
) -> Result<LocalLimitReport, EstimatorError> {
    if n < 100 {
        return Err(EstimatorError::Budget(format!(
            "permutation size {n} below 100; finite-size bias would swamp the comparison"
        )));
    }
    if radius > 4 {
        return Err(EstimatorError::Budget(format!(
            "radius {radius} above 4 blows up the neighborhood enumeration"
        )));
    }
    let perm_stream = stream.substream(0);
    let limit_stream = stream.substream(1);
    let mut tally: BTreeMap<String, [u64; 2]> = BTreeMap::new();

    for i in 0..trials {
        let mut rng = perm_stream.substream(i).rng();
        let p = Permutation::random(n, &mut rng);
        let ball = desc_ball(&p, radius, BALL_NODE_CAP);
        let sig = rooted_signature(&ball.parents(), &ball.depths(), None);
        tally.entry(sig).or_default()[0] += 1;
    }
    for i in 0..trials {
        let ts = limit_stream.substream(i);
        let cfg = Configuration::sample(1.0, radius.max(1), &ts).expect("alpha 1 is valid");
        let w = word_of_config(&cfg, radius)?;
        let ball = tree_of_word_ball(&w, radius, BALL_NODE_CAP);
        tally.entry(ball.signature(None)).or_default()[1] += 1;
    }

    let t = trials as f64;
    let mut tv = 0.0;
    let mut var = 0.0;
    let mut perm_classes = 0;
    let mut limit_classes = 0;
    for counts in tally.values() {
        let p = counts[0] as f64 / t;
        let q = counts[1] as f64 / t;
        tv += (p - q).abs();
        var += p * (1.0 - p) / t + q * (1.0 - q) / t;
        if counts[0] > 0 {
            perm_classes += 1;
        }
        if counts[1] > 0 {
            limit_classes += 1;
        }
    }
    Ok(LocalLimitReport {
        n,
        radius,
        trials,
        seed: stream.seed(),
        tv: tv / 2.0,
        se: var.sqrt() / 2.0,
        perm_classes,
        limit_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_zero_is_a_point_mass() {
        let report = local_limit_check(100, 0, 500, &RngStream::new(31, 0)).unwrap();
        assert_eq!(report.tv, 0.0);
        assert_eq!(report.perm_classes, 1);
        assert_eq!(report.limit_classes, 1);
    }

    #[test]
    fn radius_one_distributions_are_close() {
        // depth-1 balls compare #fixed points against #layer-0 atoms, both
        // near Poisson(1) at this size
        let report = local_limit_check(500, 1, 20_000, &RngStream::new(32, 0)).unwrap();
        assert!(report.tv < 0.05, "tv = {}", report.tv);
    }

    #[test]
    fn rejects_tiny_permutations() {
        assert!(local_limit_check(10, 2, 100, &RngStream::new(33, 0)).is_err());
        assert!(local_limit_check(200, 9, 100, &RngStream::new(33, 0)).is_err());
    }
}
