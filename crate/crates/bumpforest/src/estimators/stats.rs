//! Streaming moments with a parallel merge.

use serde::Serialize;

/// Welford-style accumulator for count, mean, second central moment, and
/// range. Truncated samples are counted but contribute no value. Merging two
/// accumulators equals accumulating the concatenated samples, up to
/// floating-point associativity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StreamStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    truncated: u64,
}

impl Default for StreamStats {
    fn default() -> Self {
        Self::new()
    }
}

impl StreamStats {
    pub fn new() -> Self {
        StreamStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            truncated: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn record_truncated(&mut self) {
        self.truncated += 1;
    }

    pub fn merge(&mut self, other: &StreamStats) {
        self.truncated += other.truncated;
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            let t = self.truncated;
            *self = *other;
            self.truncated = t;
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        let total = na + nb;
        self.mean += delta * nb / total;
        self.m2 += other.m2 + delta * delta * na * nb / total;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn truncated(&self) -> u64 {
        self.truncated
    }

    pub fn truncation_rate(&self) -> f64 {
        let total = self.count + self.truncated;
        if total == 0 {
            0.0
        } else {
            self.truncated as f64 / total as f64
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n-1 denominator).
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn se_mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn min(&self) -> Option<f64> {
        (self.count > 0).then_some(self.min)
    }

    pub fn max(&self) -> Option<f64> {
        (self.count > 0).then_some(self.max)
    }
}

/// Merges per-worker accumulators pairwise in index order, the fixed policy
/// that keeps (seed, workers) runs reproducible.
pub fn merge_all(mut parts: Vec<StreamStats>) -> StreamStats {
    if parts.is_empty() {
        return StreamStats::new();
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.merge(&b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}
