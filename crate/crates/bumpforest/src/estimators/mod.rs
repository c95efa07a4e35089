//! Monte Carlo and exact evaluators for the size and leaf-count moments of
//! random bump trees, plus the Galton-Watson baseline and diagnostics.

mod analytic;
mod depth;
mod local_limit;
mod monte_carlo;
mod stats;
mod tail;

pub use analytic::{
    expected_leaves, expected_size, gw_moments, lower_divergence_threshold, poisson_upper_tail,
    second_moment_bounds, upper_finite_threshold, AnalyticValue, SecondMomentBounds,
};
pub use depth::{exact_depth_expectations, DepthRow, DepthTable, ENUMERATION_FP_SLACK};
pub use local_limit::{local_limit_check, LocalLimitReport};
pub use monte_carlo::{estimate_bump_moments, running_mean_crossings, simulate_gw, CrossingReport};
pub use stats::{merge_all, StreamStats};
pub use tail::{hill_estimate, tail_diagnostic, TailReport};

use crate::point_process::PointProcessError;
use crate::word_engine::WordError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("alpha {0} outside (0, 1]")]
    InvalidAlpha(f64),
    #[error("alpha {0} must be strictly below 1")]
    AlphaNotSubcritical(f64),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
}

/// Estimates flagged above this truncation rate are unreliable: capped
/// samples are excluded from moments, and too many of them biases the rest.
pub const DEFAULT_UNRELIABLE_TRUNCATION_RATE: f64 = 1e-4;

pub const CSV_HEADER: &str = "alpha,statistic,estimate,se,analytic,trials,truncation_rate,seed";

/// One estimated statistic with its analytic companion where one exists.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub alpha: f64,
    pub statistic: String,
    pub estimate: f64,
    pub se: f64,
    pub analytic: String,
    pub trials: u64,
    pub truncation_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub seed: u64,
    pub workers: usize,
    pub rows: Vec<ReportRow>,
}

impl EstimateReport {
    pub fn new(seed: u64, workers: usize) -> Self {
        EstimateReport {
            seed,
            workers,
            rows: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: EstimateReport) {
        self.rows.extend(other.rows);
    }

    pub fn any_unreliable(&self, threshold: f64) -> bool {
        self.rows.iter().any(|r| r.truncation_rate > threshold)
    }

    /// Fixed-schema CSV; the leading comment line records what a rerun needs.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# seed={} workers={}\n{}\n",
            self.seed, self.workers, CSV_HEADER
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.alpha,
                r.statistic,
                r.estimate,
                r.se,
                r.analytic,
                r.trials,
                r.truncation_rate,
                r.seed
            ));
        }
        out
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
