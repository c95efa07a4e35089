//! Monte Carlo drivers: bump-tree moment estimation, the Galton-Watson
//! baseline, and the running-mean divergence probe.
//!
//! Trial `i` always draws from `stream.substream(i)`, so the sampled values
//! do not depend on how trials are split across workers; worker results are
//! merged pairwise in index order, which pins the floating-point outcome for
//! a given `(seed, workers)` pair.

use super::analytic::{
    expected_leaves, expected_size, gw_moments, lower_divergence_threshold, second_moment_bounds,
    AnalyticValue,
};
use super::stats::{merge_all, StreamStats};
use super::{EstimateReport, EstimatorError, ReportRow};
use crate::bump_tree::{tree_of_config, TreeCaps};
use crate::point_process::{Configuration, RngStream};
use rand_distr::{Distribution, Poisson};

fn check_alpha_unit(alpha: f64) -> Result<(), EstimatorError> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(EstimatorError::InvalidAlpha(alpha))
    }
}

/// Runs `trials` independent trials split contiguously over `workers`
/// threads. `fold` pushes one trial's result into a per-worker accumulator
/// vector (one [`StreamStats`] per tracked statistic).
fn parallel_trials<F>(
    trials: u64,
    workers: usize,
    stats_per_worker: usize,
    fold: F,
) -> Vec<StreamStats>
where
    F: Fn(u64, &mut [StreamStats]) + Sync,
{
    let workers = workers.clamp(1, trials.max(1) as usize);
    let chunk = trials.div_ceil(workers as u64);
    let mut parts: Vec<Vec<StreamStats>> = Vec::with_capacity(workers);
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for w in 0..workers as u64 {
            let lo = w * chunk;
            let hi = ((w + 1) * chunk).min(trials);
            let fold = &fold;
            handles.push(scope.spawn(move || {
                let mut acc = vec![StreamStats::new(); stats_per_worker];
                for i in lo..hi {
                    fold(i, &mut acc);
                }
                acc
            }));
        }
        for h in handles {
            parts.push(h.join().expect("worker panicked"));
        }
    });
    (0..stats_per_worker)
        .map(|s| merge_all(parts.iter().map(|p| p[s]).collect()))
        .collect()
}

fn second_moment_analytic_label(alpha: f64, series_cutoff: usize) -> String {
    if alpha >= 1.0 || alpha >= lower_divergence_threshold() {
        return "divergent".to_string();
    }
    let mean = 1.0 / (1.0 - alpha);
    let bounds = second_moment_bounds(alpha, series_cutoff).expect("alpha validated");
    let lower = bounds
        .lower
        .finite()
        .map_or(mean * mean, |lo| lo.max(mean * mean));
    match bounds.upper {
        AnalyticValue::Finite(hi) => format!("[{lower},{hi}]"),
        AnalyticValue::Divergent => format!("[{lower},open)"),
    }
}

/// Samples bump trees of Poisson(`alpha`) configurations and reports the
/// size mean, leaf mean, and size second moment next to their analytic
/// values. Capped trees count toward the truncation rate and are excluded
/// from the moments.
pub fn estimate_bump_moments(
    alpha: f64,
    trials: u64,
    stream: &RngStream,
    caps: TreeCaps,
    workers: usize,
) -> Result<EstimateReport, EstimatorError> {
    check_alpha_unit(alpha)?;
    let stats = parallel_trials(trials, workers, 3, |i, acc| {
        let ts = stream.substream(i);
        let cfg = Configuration::sample(alpha, 1, &ts).expect("alpha validated");
        let tree = tree_of_config(&cfg, &ts, caps);
        if tree.truncation().is_some() {
            for s in acc.iter_mut() {
                s.record_truncated();
            }
        } else {
            let d = tree.size() as f64;
            acc[0].push(d);
            acc[1].push(tree.leaf_count() as f64);
            acc[2].push(d * d);
        }
    });
    let mut report = EstimateReport::new(stream.seed(), workers.max(1));
    let analytic = [
        expected_size(alpha)?.to_string(),
        expected_leaves(alpha)?.to_string(),
        second_moment_analytic_label(alpha, 1 << 16),
    ];
    for ((stat, name), analytic) in stats.iter().zip(["size", "leaves", "size2"]).zip(analytic) {
        report.rows.push(ReportRow {
            alpha,
            statistic: name.to_string(),
            estimate: stat.mean(),
            se: stat.se_mean(),
            analytic,
            trials,
            truncation_rate: stat.truncation_rate(),
            seed: stream.seed(),
        });
    }
    Ok(report)
}

fn gw_tree_size(dist: &Poisson<f64>, rng: &mut impl rand::Rng, cap: u64) -> (u64, bool) {
    let mut pending = 1u64;
    let mut size = 0u64;
    while pending > 0 {
        if size >= cap {
            return (size, true);
        }
        pending -= 1;
        size += 1;
        pending += dist.sample(rng) as u64;
    }
    (size, false)
}

/// Samples Galton-Watson trees with Poisson(`alpha`) offspring and reports
/// the size mean and second moment.
pub fn simulate_gw(
    alpha: f64,
    trials: u64,
    stream: &RngStream,
    max_nodes: u64,
    workers: usize,
) -> Result<EstimateReport, EstimatorError> {
    check_alpha_unit(alpha)?;
    if alpha >= 1.0 {
        return Err(EstimatorError::AlphaNotSubcritical(alpha));
    }
    let dist = Poisson::new(alpha).expect("alpha validated");
    let stats = parallel_trials(trials, workers, 2, |i, acc| {
        let mut rng = stream.substream(i).rng();
        let (size, truncated) = gw_tree_size(&dist, &mut rng, max_nodes);
        if truncated {
            for s in acc.iter_mut() {
                s.record_truncated();
            }
        } else {
            acc[0].push(size as f64);
            acc[1].push((size * size) as f64);
        }
    });
    let (mean, second) = gw_moments(alpha)?;
    let mut report = EstimateReport::new(stream.seed(), workers.max(1));
    for ((stat, name), analytic) in stats
        .iter()
        .zip(["gw_size", "gw_size2"])
        .zip([mean, second])
    {
        report.rows.push(ReportRow {
            alpha,
            statistic: name.to_string(),
            estimate: stat.mean(),
            se: stat.se_mean(),
            analytic: analytic.to_string(),
            trials,
            truncation_rate: stat.truncation_rate(),
            seed: stream.seed(),
        });
    }
    Ok(report)
}

/// Where the running mean of the tree size first exceeded each threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CrossingReport {
    pub alpha: f64,
    pub thresholds: Vec<f64>,
    /// Per threshold: the 1-based trial index at which the running mean
    /// first exceeded it, if it did within the budget.
    pub crossed_at: Vec<Option<u64>>,
    pub trials_run: u64,
    pub final_running_mean: f64,
    pub truncated_trees: u64,
    pub seed: u64,
}

/// Watches the running mean of the tree size grow. At intensity 1 the mean
/// diverges, so the running mean should escape any fixed bound; this probe
/// reports when it happens. Capped trees enter the mean at their capped
/// size, which only understates the crossing times.
pub fn running_mean_crossings(
    alpha: f64,
    thresholds: &[f64],
    max_trials: u64,
    caps: TreeCaps,
    stream: &RngStream,
) -> Result<CrossingReport, EstimatorError> {
    check_alpha_unit(alpha)?;
    let mut crossed_at: Vec<Option<u64>> = vec![None; thresholds.len()];
    let mut total = 0.0f64;
    let mut truncated = 0u64;
    let mut trials_run = 0u64;
    for i in 0..max_trials {
        let ts = stream.substream(i);
        let cfg = Configuration::sample(alpha, 1, &ts).expect("alpha validated");
        let tree = tree_of_config(&cfg, &ts, caps);
        if tree.truncation().is_some() {
            truncated += 1;
        }
        total += tree.size() as f64;
        trials_run = i + 1;
        let mean = total / trials_run as f64;
        for (t, slot) in thresholds.iter().zip(crossed_at.iter_mut()) {
            if slot.is_none() && mean > *t {
                *slot = Some(trials_run);
            }
        }
        if crossed_at.iter().all(|s| s.is_some()) {
            break;
        }
    }
    Ok(CrossingReport {
        alpha,
        thresholds: thresholds.to_vec(),
        crossed_at,
        trials_run,
        final_running_mean: total / trials_run.max(1) as f64,
        truncated_trees: truncated,
        seed: stream.seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gw_matches_moments_at_half() {
        let stream = RngStream::new(71, 0);
        let report = simulate_gw(0.5, 200_000, &stream, 1 << 20, 2).unwrap();
        let size = &report.rows[0];
        assert!((size.estimate - 2.0).abs() <= 3.0 * size.se, "{size:?}");
        let second = &report.rows[1];
        assert!(
            (second.estimate - 8.0).abs() <= 3.0 * second.se,
            "{second:?}"
        );
        assert_eq!(size.truncation_rate, 0.0);
    }

    #[test]
    fn bump_moments_match_formulas_at_point_three() {
        let stream = RngStream::new(72, 0);
        let report = estimate_bump_moments(0.3, 200_000, &stream, TreeCaps::default(), 2).unwrap();
        let size = &report.rows[0];
        assert!(
            (size.estimate - 1.0 / 0.7).abs() <= 3.0 * size.se,
            "{size:?}"
        );
        let leaves = &report.rows[1];
        let want = (-0.3f64).exp() / 0.7;
        assert!(
            (leaves.estimate - want).abs() <= 3.0 * leaves.se,
            "{leaves:?}"
        );
    }

    #[test]
    fn trial_values_do_not_depend_on_worker_split() {
        let stream = RngStream::new(73, 0);
        let a = estimate_bump_moments(0.4, 5_000, &stream, TreeCaps::default(), 1).unwrap();
        let b = estimate_bump_moments(0.4, 5_000, &stream, TreeCaps::default(), 4).unwrap();
        // same sample set either way; merge order may move the mean by ulps
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!(
                (ra.estimate - rb.estimate).abs() < 1e-12,
                "{} vs {}",
                ra.estimate,
                rb.estimate
            );
        }
        let c = estimate_bump_moments(0.4, 5_000, &stream, TreeCaps::default(), 4).unwrap();
        for (rb, rc) in b.rows.iter().zip(&c.rows) {
            assert_eq!(rb.estimate, rc.estimate, "same plan must be bit-identical");
        }
    }

    #[test]
    fn second_moment_label_shapes() {
        assert!(second_moment_analytic_label(0.2, 1 << 12).starts_with("[1.5625,"));
        assert!(second_moment_analytic_label(0.5, 1 << 12).ends_with("open)"));
        assert_eq!(second_moment_analytic_label(0.7, 1 << 12), "divergent");
    }

    #[test]
    fn running_mean_probe_reports_crossings() {
        let stream = RngStream::new(74, 0);
        let caps = TreeCaps {
            max_depth: 2_000,
            max_nodes: 100_000,
        };
        let report = running_mean_crossings(1.0, &[2.0], 50_000, caps, &stream).unwrap();
        assert!(report.crossed_at[0].is_some(), "{report:?}");
        assert!(report.final_running_mean > 2.0);
    }
}
