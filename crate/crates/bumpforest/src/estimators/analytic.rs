//! Closed forms for the moments of the random bump tree and the
//! Galton-Watson comparison values.

use super::EstimatorError;
use serde::Serialize;
use std::fmt;

/// A formula value that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticValue {
    Finite(f64),
    Divergent,
}

impl AnalyticValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            AnalyticValue::Finite(v) => Some(*v),
            AnalyticValue::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, AnalyticValue::Divergent)
    }
}

impl fmt::Display for AnalyticValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticValue::Finite(v) => write!(f, "{v}"),
            AnalyticValue::Divergent => f.write_str("divergent"),
        }
    }
}

fn check_alpha_unit(alpha: f64) -> Result<(), EstimatorError> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(EstimatorError::InvalidAlpha(alpha))
    }
}

/// Expected tree size: `1/(1-alpha)`, divergent at `alpha = 1`.
pub fn expected_size(alpha: f64) -> Result<AnalyticValue, EstimatorError> {
    check_alpha_unit(alpha)?;
    Ok(if alpha == 1.0 {
        AnalyticValue::Divergent
    } else {
        AnalyticValue::Finite(1.0 / (1.0 - alpha))
    })
}

/// Expected leaf count: `e^{-alpha}/(1-alpha)`, divergent at `alpha = 1`.
pub fn expected_leaves(alpha: f64) -> Result<AnalyticValue, EstimatorError> {
    check_alpha_unit(alpha)?;
    Ok(if alpha == 1.0 {
        AnalyticValue::Divergent
    } else {
        AnalyticValue::Finite((-alpha).exp() / (1.0 - alpha))
    })
}

/// Below this intensity the second moment is provably finite:
/// `alpha/(1-alpha)^2 < 1`, i.e. `alpha < (3 - sqrt 5)/2`.
pub fn upper_finite_threshold() -> f64 {
    (3.0 - 5.0_f64.sqrt()) / 2.0
}

/// At or above this intensity the second moment provably diverges:
/// `alpha^2/(1-alpha) >= 1`, i.e. `alpha >= (sqrt 5 - 1)/2`.
pub fn lower_divergence_threshold() -> f64 {
    (5.0_f64.sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMomentBounds {
    pub lower: AnalyticValue,
    pub upper: AnalyticValue,
}

const SERIES_REL_TOL: f64 = 1e-9;

/// Partial triple sum `sum_{0<=a<b, 0<=c, all <= n} C(a+c,a) alpha^{a+b+c}`
/// with the inner `b` and `c` ranges collapsed in closed form.
fn lower_series_partial(alpha: f64, n: usize) -> f64 {
    let mut partial = 0.0;
    for a in 0..=n {
        // sum over b in a+1..=n
        let b_sum = (alpha.powi(a as i32 + 1) - alpha.powi(n as i32 + 1)) / (1.0 - alpha);
        let mut coef = 1.0; // C(a+c, a) built by recurrence over c
        let mut c_sum = 0.0;
        for c in 0..=n {
            if c > 0 {
                coef *= (a + c) as f64 / c as f64;
            }
            c_sum += coef * alpha.powi(c as i32);
        }
        partial += alpha.powi(a as i32) * c_sum * b_sum;
    }
    partial
}

/// Everything the `a, b, c <= n` box misses, bounded term group by term
/// group with geometric tails. Requires `alpha^2/(1-alpha) < 1`.
fn lower_series_tail_bound(alpha: f64, n: usize) -> f64 {
    let np1 = n as i32 + 1;
    let q_diag = alpha + alpha * alpha; // (x+y) with x = alpha^2, y = alpha; < 1 here
    let r1 = alpha / (1.0 - alpha) * q_diag.powi(np1) / (1.0 - q_diag);
    let ratio = alpha / (1.0 - alpha);
    let mut geo = 0.0;
    let mut term = 1.0;
    for _ in 0..=n {
        geo += term;
        term *= ratio;
    }
    let r2 = alpha.powi(np1) / ((1.0 - alpha) * (1.0 - alpha)) * geo;
    let t = alpha * alpha / (1.0 - alpha);
    let r3 = alpha / ((1.0 - alpha) * (1.0 - alpha)) * t.powi(np1) / (1.0 - t);
    r1 + r2 + r3
}

/// Lower-bound series at `alpha = 1/2`, where the general reduction
/// degenerates: `sum_b b alpha^b / (1 - alpha)`.
fn lower_series_half(cutoff: usize) -> f64 {
    let alpha: f64 = 0.5;
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        n += 1;
        sum += n as f64 * alpha.powi(n as i32);
        // sum_{b>n} b x^b has an exact closed form, so fold it in
        let x: f64 = alpha;
        let rem =
            x.powi(n as i32 + 1) * ((n as f64 + 1.0) - n as f64 * x) / ((1.0 - x) * (1.0 - x));
        if rem < SERIES_REL_TOL * sum || n >= cutoff {
            return (sum + rem) / (1.0 - alpha);
        }
    }
}

/// Lower and upper bounds on the second moment of the tree size.
///
/// The upper bound is the geometric closed form
/// `1/(1-alpha)^2 * 1/(1 - alpha/(1-alpha)^2)` when it converges. The lower
/// bound is the double-count series evaluated by truncated summation, with
/// the cutoff grown until the geometric tail bound falls below `1e-9` of the
/// partial sum (or `series_cutoff` is reached); its divergence is decided by
/// the ratio test, not numerically.
pub fn second_moment_bounds(
    alpha: f64,
    series_cutoff: usize,
) -> Result<SecondMomentBounds, EstimatorError> {
    check_alpha_unit(alpha)?;
    let upper = if alpha < upper_finite_threshold() {
        let q = alpha / ((1.0 - alpha) * (1.0 - alpha));
        AnalyticValue::Finite(1.0 / ((1.0 - alpha) * (1.0 - alpha)) / (1.0 - q))
    } else {
        AnalyticValue::Divergent
    };
    let lower = if alpha >= lower_divergence_threshold() {
        AnalyticValue::Divergent
    } else if alpha == 0.5 {
        AnalyticValue::Finite(lower_series_half(series_cutoff))
    } else {
        let mut n = 8usize;
        loop {
            let partial = lower_series_partial(alpha, n);
            let tail = lower_series_tail_bound(alpha, n);
            if tail < SERIES_REL_TOL * partial || n >= series_cutoff {
                break AnalyticValue::Finite(partial);
            }
            n *= 2;
        }
    };
    Ok(SecondMomentBounds { lower, upper })
}

/// Mean and second moment of the total progeny of a Galton-Watson tree with
/// Poisson(`alpha`) offspring.
///
/// Conditioning on the root's offspring count gives
/// `(1-m) E[Y^2] = 1 + 2 m E[Y] + (E[X^2]-E[X]) E[Y]^2` with `m = E[X]`, so
/// `E[Y^2] = (1+m)/(1-m)^2 + (E[X^2]-E[X])/(1-m)^3`; for Poisson offspring
/// (`E[X^2]-E[X] = alpha^2`) this collapses to `1/(1-alpha)^3`. The total
/// progeny is Borel(alpha) distributed, and the tests check both values
/// against exact Borel sums.
pub fn gw_moments(alpha: f64) -> Result<(f64, f64), EstimatorError> {
    check_alpha_unit(alpha)?;
    if alpha >= 1.0 {
        return Err(EstimatorError::AlphaNotSubcritical(alpha));
    }
    let mean = 1.0 / (1.0 - alpha);
    let second = mean * mean * mean;
    Ok((mean, second))
}

/// `P(Poisson(lambda) > m)`; `m < 0` gives 1.
pub fn poisson_upper_tail(lambda: f64, m: i64) -> f64 {
    if m < 0 {
        return 1.0;
    }
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    for i in 1..=m {
        pmf *= lambda / i as f64;
        cdf += pmf;
    }
    (1.0 - cdf).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn expected_size_values() {
        assert_eq!(expected_size(0.5).unwrap(), AnalyticValue::Finite(2.0));
        assert_relative_eq!(
            expected_size(0.3).unwrap().finite().unwrap(),
            1.0 / 0.7,
            max_relative = 1e-12
        );
        assert!(expected_size(1.0).unwrap().is_divergent());
        assert_eq!(expected_size(0.0), Err(EstimatorError::InvalidAlpha(0.0)));
        assert_eq!(expected_size(1.2), Err(EstimatorError::InvalidAlpha(1.2)));
    }

    #[test]
    fn expected_leaves_values() {
        assert_relative_eq!(
            expected_leaves(0.5).unwrap().finite().unwrap(),
            1.2130613194252668,
            max_relative = 1e-12
        );
        // alpha -> 0+: a single node, which is a leaf
        assert_relative_eq!(
            expected_leaves(1e-9).unwrap().finite().unwrap(),
            1.0,
            max_relative = 1e-6
        );
        assert!(expected_leaves(1.0).unwrap().is_divergent());
    }

    #[test]
    fn thresholds_bracket_the_window() {
        assert_relative_eq!(
            upper_finite_threshold(),
            0.3819660112501051,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            lower_divergence_threshold(),
            0.6180339887498949,
            max_relative = 1e-15
        );
    }

    #[test]
    fn second_moment_upper_examples() {
        let b = second_moment_bounds(0.2, 1 << 16).unwrap();
        assert_relative_eq!(
            b.upper.finite().unwrap(),
            2.2727272727272725,
            max_relative = 1e-12
        );
        assert!(second_moment_bounds(0.39, 1 << 16)
            .unwrap()
            .upper
            .is_divergent());
        assert!(second_moment_bounds(0.382, 1 << 16)
            .unwrap()
            .upper
            .is_divergent());
        assert!(!second_moment_bounds(0.38, 1 << 16)
            .unwrap()
            .upper
            .is_divergent());
    }

    #[test]
    fn second_moment_lower_matches_closed_form() {
        // series sums to alpha / ((1-alpha)(1 - alpha - alpha^2))
        for alpha in [0.1, 0.2, 0.3, 0.45, 0.55, 0.6] {
            let got = second_moment_bounds(alpha, 1 << 16)
                .unwrap()
                .lower
                .finite()
                .unwrap();
            let want = alpha / ((1.0 - alpha) * (1.0 - alpha - alpha * alpha));
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
        // the alpha = 1/2 special-case series agrees with the same closed form
        let got = second_moment_bounds(0.5, 1 << 16)
            .unwrap()
            .lower
            .finite()
            .unwrap();
        assert_relative_eq!(got, 4.0, max_relative = 1e-8);
    }

    #[test]
    fn second_moment_divergence_sides() {
        let b = second_moment_bounds(0.62, 1 << 16).unwrap();
        assert!(b.lower.is_divergent());
        assert!(b.upper.is_divergent());
        let b = second_moment_bounds(1.0, 1 << 16).unwrap();
        assert!(b.lower.is_divergent());
    }

    #[test]
    fn gw_moment_values() {
        let (m, s) = gw_moments(0.5).unwrap();
        assert_relative_eq!(m, 2.0, max_relative = 1e-12);
        assert_relative_eq!(s, 8.0, max_relative = 1e-12);
        let (m, s) = gw_moments(0.3).unwrap();
        assert_relative_eq!(m, 1.4285714285714286, max_relative = 1e-12);
        assert_relative_eq!(s, 1.0 / (0.7f64 * 0.7 * 0.7), max_relative = 1e-12);
        let (m, s) = gw_moments(1e-9).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-6);
        assert_relative_eq!(s, 1.0, max_relative = 1e-6);
        assert!(gw_moments(1.0).is_err());
    }

    /// Exact cross-check of both Galton-Watson moments: the total progeny
    /// with Poisson(mu) offspring is Borel(mu) distributed,
    /// `P(n) = e^{-mu n} (mu n)^{n-1} / n!`, and the partial sums of
    /// `n P(n)` and `n^2 P(n)` pin the closed forms down.
    #[test]
    fn gw_moments_match_borel_sums() {
        for mu in [0.3f64, 0.5] {
            let mut ln_fact = 0.0f64;
            let (mut mass, mut m1, mut m2) = (0.0f64, 0.0f64, 0.0f64);
            for n in 1..=6_000u64 {
                let nf = n as f64;
                ln_fact += nf.ln();
                let ln_p = -mu * nf + (nf - 1.0) * (mu * nf).ln() - ln_fact;
                let p = ln_p.exp();
                mass += p;
                m1 += nf * p;
                m2 += nf * nf * p;
            }
            assert_relative_eq!(mass, 1.0, max_relative = 1e-10);
            let (mean, second) = gw_moments(mu).unwrap();
            assert_relative_eq!(m1, mean, max_relative = 1e-9);
            assert_relative_eq!(m2, second, max_relative = 1e-9);
        }
    }

    #[test]
    fn poisson_tail_behaves() {
        assert_eq!(poisson_upper_tail(1.0, -1), 1.0);
        assert_relative_eq!(
            poisson_upper_tail(1.0, 0),
            1.0 - (-1.0f64).exp(),
            max_relative = 1e-12
        );
        assert!(poisson_upper_tail(0.5, 30) < 1e-30);
        assert_eq!(poisson_upper_tail(0.0, 0), 0.0);
    }
}
