//! Classification of discriminant values with and without confidence
//! thresholds, empirical CDFs, and confusion-matrix scoring.
//!
//! The basic classifier compares the discriminant `l` against zero. The
//! extended classifier brackets zero with two thresholds fitted from
//! training ensembles so that the error rates stay at a chosen level `p`:
//! `l^-` is the `p`-quantile of the t-ensemble discriminants and `l^+` the
//! `(1-p)`-quantile of the s-ensemble ones, with everything in between
//! declared uncertain. When the ensembles separate so well that
//! `l^- >= l^+`, the band collapses to a single threshold `l*` solving
//! `cdf_s(l*) + cdf_t(l*) = 1`. Threshold fitting over a contrast grid takes
//! the most conservative band: the minimum `l^-` and maximum `l^+` across
//! contrasts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("error level must lie in (0, 1), got {0}")]
    BadErrorLevel(f64),
    #[error("no contrast levels supplied")]
    NoLevels,
}

/// Model label assigned by a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    S,
    T,
}

/// Outcome of the confidence classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    S,
    T,
    Uncertain,
}

/// The basic comparison of the two likelihood maxima: delayed if `l > 0`,
/// instantaneous otherwise.
pub fn classify_basic(l: f64) -> Label {
    if l > 0.0 {
        Label::T
    } else {
        Label::S
    }
}

// ---------------------------------------------------------------------------
// Empirical CDFs
// ---------------------------------------------------------------------------

/// Empirical cumulative distribution function with the strict convention
/// `cdf(x) = #{sample < x} / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self, ClassifyError> {
        if samples.is_empty() {
            return Err(ClassifyError::EmptySample);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFiniteSample);
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `P(xi < x)` estimated as the fraction of samples strictly below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        below as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile: the order statistic at index
    /// `ceil(p n)` (1-based, clamped to the sample).
    pub fn quantile_lower(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let k = (p * n as f64).ceil() as usize;
        self.sorted[k.clamp(1, n) - 1]
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().unwrap()
    }

    /// Sorted sample values.
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Two-sample Kolmogorov distance `sup_x |F(x) - G(x)|`.
    pub fn kolmogorov_distance(&self, other: &Self) -> f64 {
        let (a, b) = (&self.sorted, &other.sorted);
        let (n, m) = (a.len() as f64, b.len() as f64);
        let mut i = 0usize;
        let mut j = 0usize;
        let mut dist = 0.0f64;
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            dist = dist.max((i as f64 / n - j as f64 / m).abs());
        }
        dist.max((1.0 - j as f64 / m).abs().max((1.0 - i as f64 / n).abs()))
    }
}

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// Confidence thresholds of the extended classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Lower threshold `l^-` (below it: instantaneous).
    pub lower: f64,
    /// Upper threshold `l^+` (above it: delayed).
    pub upper: f64,
    /// Whether the band collapsed (`l^- >= l^+`).
    pub collapsed: bool,
    /// Single threshold `l*` used when collapsed; lies in `[l^+, l^-]`.
    pub single: Option<f64>,
    /// Error level `p` the thresholds were fitted for.
    pub error_level: f64,
}

/// Classifies with the confidence band; inside the band the outcome is
/// uncertain. A collapsed band reduces to the basic comparison against
/// `l*`.
pub fn classify_confidence(l: f64, thresholds: &Thresholds) -> Outcome {
    if thresholds.collapsed {
        let pivot = thresholds.single.unwrap_or(0.0);
        return match classify_basic(l - pivot) {
            Label::T => Outcome::T,
            Label::S => Outcome::S,
        };
    }
    if l > thresholds.upper {
        Outcome::T
    } else if l < thresholds.lower {
        Outcome::S
    } else {
        Outcome::Uncertain
    }
}

/// Fits the thresholds for one known contrast: `l^-` is the `p`-quantile of
/// the t-ensemble and `l^+` the `(1-p)`-quantile of the s-ensemble. If they
/// cross, the band collapses and `l*` solves
/// `cdf_s(l*) + cdf_t(l*) = 1` by bisection over the merged sample range.
pub fn thresholds_fixed_q(
    cdf_s: &EmpiricalCdf,
    cdf_t: &EmpiricalCdf,
    p: f64,
) -> Result<Thresholds, ClassifyError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ClassifyError::BadErrorLevel(p));
    }
    let lower = cdf_t.quantile_lower(p);
    let upper = cdf_s.quantile_lower(1.0 - p);
    finish_thresholds(lower, upper, cdf_s, cdf_t, p)
}

fn finish_thresholds(
    lower: f64,
    upper: f64,
    cdf_s: &EmpiricalCdf,
    cdf_t: &EmpiricalCdf,
    p: f64,
) -> Result<Thresholds, ClassifyError> {
    if lower < upper {
        return Ok(Thresholds { lower, upper, collapsed: false, single: None, error_level: p });
    }
    // Perfectly (or over-) separated ensembles: find l* with
    // cdf_s(l*) + cdf_t(l*) = 1. The sum is a nondecreasing step function
    // whose solution set can be a plateau; bisect for both plateau edges
    // and take the midpoint.
    let lo0 = cdf_s.min().min(cdf_t.min()) - 1.0;
    let hi0 = cdf_s.max().max(cdf_t.max()) + 1.0;
    let g = |x: f64| cdf_s.eval(x) + cdf_t.eval(x) - 1.0;
    let edge = |keep_low: fn(f64) -> bool| {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if keep_low(g(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let left = edge(|v| v < 0.0);
    let right = edge(|v| v <= 0.0);
    let single = 0.5 * (left + right);
    // Monotonicity puts the crossing inside [l^+, l^-]; clamp against
    // floating-point ties.
    let single = single.clamp(upper, lower);
    Ok(Thresholds { lower, upper, collapsed: true, single: Some(single), error_level: p })
}

/// Contrast-independent thresholds: the minimum `l^-` and maximum `l^+`
/// over per-contrast ensembles. Collapse is resolved against the pooled
/// samples of each model.
pub fn thresholds_all_q(
    per_q: &[(EmpiricalCdf, EmpiricalCdf)],
    p: f64,
) -> Result<Thresholds, ClassifyError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ClassifyError::BadErrorLevel(p));
    }
    if per_q.is_empty() {
        return Err(ClassifyError::NoLevels);
    }
    let lower = per_q
        .iter()
        .map(|(_, cdf_t)| cdf_t.quantile_lower(p))
        .fold(f64::INFINITY, f64::min);
    let upper = per_q
        .iter()
        .map(|(cdf_s, _)| cdf_s.quantile_lower(1.0 - p))
        .fold(f64::NEG_INFINITY, f64::max);
    if lower < upper {
        return Ok(Thresholds { lower, upper, collapsed: false, single: None, error_level: p });
    }
    let pool = |pick_s: bool| -> Result<EmpiricalCdf, ClassifyError> {
        let mut all = Vec::new();
        for (cdf_s, cdf_t) in per_q {
            all.extend_from_slice(if pick_s { cdf_s.samples() } else { cdf_t.samples() });
        }
        EmpiricalCdf::new(&all)
    };
    finish_thresholds(lower, upper, &pool(true)?, &pool(false)?, p)
}

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

/// A classification rule over discriminant values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classifier {
    Basic,
    Confidence(Thresholds),
}

/// Off-diagonal rates of the basic classifier's confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicRates {
    /// Fraction of s-inputs classified as t.
    pub r_s: f64,
    /// Fraction of t-inputs classified as s.
    pub r_t: f64,
    pub n_s: usize,
    pub n_t: usize,
}

/// Error and uncertain rates of the confidence classifier's confusion
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedRates {
    /// Fraction of s-inputs classified as t.
    pub r_s: f64,
    /// Fraction of s-inputs left uncertain.
    pub u_s: f64,
    /// Fraction of t-inputs classified as s.
    pub r_t: f64,
    /// Fraction of t-inputs left uncertain.
    pub u_t: f64,
    pub n_s: usize,
    pub n_t: usize,
}

/// Relative outcome frequencies per input model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConfusionMatrix {
    Basic(BasicRates),
    Extended(ExtendedRates),
}

/// Scores a classifier on discriminant samples of the two generating
/// models.
pub fn confusion(
    l_s: &[f64],
    l_t: &[f64],
    classifier: &Classifier,
) -> Result<ConfusionMatrix, ClassifyError> {
    if l_s.is_empty() || l_t.is_empty() {
        return Err(ClassifyError::EmptySample);
    }
    let n_s = l_s.len();
    let n_t = l_t.len();
    match classifier {
        Classifier::Basic => {
            let wrong_s = l_s.iter().filter(|&&l| classify_basic(l) == Label::T).count();
            let wrong_t = l_t.iter().filter(|&&l| classify_basic(l) == Label::S).count();
            Ok(ConfusionMatrix::Basic(BasicRates {
                r_s: wrong_s as f64 / n_s as f64,
                r_t: wrong_t as f64 / n_t as f64,
                n_s,
                n_t,
            }))
        }
        Classifier::Confidence(th) => {
            let mut wrong_s = 0usize;
            let mut unc_s = 0usize;
            for &l in l_s {
                match classify_confidence(l, th) {
                    Outcome::T => wrong_s += 1,
                    Outcome::Uncertain => unc_s += 1,
                    Outcome::S => {}
                }
            }
            let mut wrong_t = 0usize;
            let mut unc_t = 0usize;
            for &l in l_t {
                match classify_confidence(l, th) {
                    Outcome::S => wrong_t += 1,
                    Outcome::Uncertain => unc_t += 1,
                    Outcome::T => {}
                }
            }
            Ok(ConfusionMatrix::Extended(ExtendedRates {
                r_s: wrong_s as f64 / n_s as f64,
                u_s: unc_s as f64 / n_s as f64,
                r_t: wrong_t as f64 / n_t as f64,
                u_t: unc_t as f64 / n_t as f64,
                n_s,
                n_t,
            }))
        }
    }
}

// ===========================================================================
// Tests
// ===========================================================================
