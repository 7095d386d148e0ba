//! Gaussian likelihood of sampled coordinate-delay images, constrained
//! maximization over the scatterer weights, and the model discriminant.
//!
//! The sampled image is Gaussian line by line, with lines independent, so
//!
//! ```text
//! log p(Q; w) = sum_m [ -N_m log(2 pi) - 1/2 log det M_m(w)
//!                       - 1/2 q_m' M_m(w)^{-1} q_m ],
//! ```
//!
//! where `M_m(w)` is the real 2N_m x 2N_m line covariance assembled from the
//! precomputed kernels and the three nonnegative weights. The fit maximizes
//! this over `w >= 0` in log-space (`w = floor + exp(u)`, with a floor of
//! 1e-12 times the mean data power standing in for exact zeros) using
//! multi-start simplex descent. The discriminant is
//! `l = log p_t - log p_s` for the two model hypotheses; positive values
//! favor the delayed-scatterer explanation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::montecarlo::ImageDataset;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::statmodel::{
    weights_from_contrast, ContrastSpec, DelayProfile, LineGrid, LineKernels,
    ModelKernels, ModelKind, StatModelError, WeightVector,
};

/// Weight floor relative to the mean data power: `w = 0` is represented as
/// `w = floor`, which keeps every covariance strictly positive definite.
pub const WEIGHT_FLOOR_REL: f64 = 1e-12;

/// A fitted weight below this fraction of the total is reported as sitting
/// at the nonnegativity boundary.
pub const BOUNDARY_REL: f64 = 1e-6;

/// Number of simplex starts: two moment-matched guesses and three random
/// perturbations.
pub const FIT_STARTS: usize = 5;

#[derive(Debug, Error)]
pub enum MleError {
    #[error("dataset has {got} lines but the kernel stack has {expected}")]
    LineCountMismatch { expected: usize, got: usize },
    #[error("line {line}: dataset has {got} samples but the grid has {expected}")]
    SampleCountMismatch { line: usize, expected: usize, got: usize },
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("dataset power is zero; the likelihood has no finite maximizer")]
    ZeroPower,
    #[error(transparent)]
    Model(#[from] StatModelError),
}

// ---------------------------------------------------------------------------
// Likelihood evaluation
// ---------------------------------------------------------------------------

/// Reusable evaluator of `log p(Q; w)` for one dataset against one kernel
/// stack. Construction validates shapes and interleaves the data; each
/// evaluation then runs without allocations.
pub struct LikelihoodEvaluator<'a> {
    kernels: &'a ModelKernels,
    data: Vec<DVector<f64>>,
    scratch_m: Vec<DMatrix<f64>>,
    scratch_v: Vec<DVector<f64>>,
}

impl<'a> LikelihoodEvaluator<'a> {
    pub fn new(kernels: &'a ModelKernels, dataset: &ImageDataset) -> Result<Self, MleError> {
        let sizes = kernels.line_sizes();
        if dataset.lines.len() != sizes.len() {
            return Err(MleError::LineCountMismatch {
                expected: sizes.len(),
                got: dataset.lines.len(),
            });
        }
        let mut data = Vec::with_capacity(sizes.len());
        let mut scratch_m = Vec::with_capacity(sizes.len());
        let mut scratch_v = Vec::with_capacity(sizes.len());
        for (li, (&n, line)) in sizes.iter().zip(&dataset.lines).enumerate() {
            if line.len() != n {
                return Err(MleError::SampleCountMismatch {
                    line: li,
                    expected: n,
                    got: line.len(),
                });
            }
            data.push(DVector::from_iterator(
                2 * n,
                line.iter().flat_map(|z| [z.re, z.im]),
            ));
            scratch_m.push(DMatrix::zeros(2 * n, 2 * n));
            scratch_v.push(DVector::zeros(2 * n));
        }
        if data.iter().map(|v| v.len()).sum::<usize>() == 0 {
            return Err(MleError::EmptyDataset);
        }
        Ok(Self { kernels, data, scratch_m, scratch_v })
    }

    /// `log p(Q; w)`. Returns `f64::NEG_INFINITY` if some line covariance is
    /// singular beyond the jitter repair.
    pub fn log_likelihood(&mut self, w: &WeightVector) -> f64 {
        let mut total = 0.0;
        for ((kernels, m), (q, v)) in self
            .kernels
            .lines()
            .iter()
            .zip(&mut self.scratch_m)
            .zip(self.data.iter().zip(&mut self.scratch_v))
        {
            match line_log_likelihood(kernels, w, m, q, v) {
                Some(ll) => total += ll,
                None => return f64::NEG_INFINITY,
            }
        }
        total
    }
}

/// Fills `m` with the real line covariance for weights `w`.
fn fill_line_covariance(kernels: &LineKernels, w: &WeightVector, m: &mut DMatrix<f64>) {
    let n = kernels.background.nrows();
    for j in 0..n {
        for k in 0..n {
            let mut re = w.background * kernels.background[(j, k)].re
                + w.target * kernels.target[(j, k)].re;
            let im = w.background * kernels.background[(j, k)].im
                + w.target * kernels.target[(j, k)].im;
            if j == k {
                re += w.noise;
            }
            m[(2 * j, 2 * k)] = 0.5 * re;
            m[(2 * j, 2 * k + 1)] = -0.5 * im;
            m[(2 * j + 1, 2 * k)] = 0.5 * im;
            m[(2 * j + 1, 2 * k + 1)] = 0.5 * re;
        }
    }
}

/// One line's contribution `-N log(2 pi) - 1/2 log det M - 1/2 q' M^{-1} q`.
/// A Cholesky failure triggers one jitter retry; a second failure means the
/// covariance is singular beyond repair and yields `None`.
fn line_log_likelihood(
    kernels: &LineKernels,
    w: &WeightVector,
    m: &mut DMatrix<f64>,
    q: &DVector<f64>,
    v: &mut DVector<f64>,
) -> Option<f64> {
    fill_line_covariance(kernels, w, m);
    if !cholesky_in_place(m) {
        fill_line_covariance(kernels, w, m);
        let jitter = crate::statmodel::PSD_JITTER * m.trace();
        for d in 0..m.nrows() {
            m[(d, d)] += jitter;
        }
        if !cholesky_in_place(m) {
            return None;
        }
    }
    let dim = m.nrows();
    let mut log_det = 0.0;
    for d in 0..dim {
        log_det += m[(d, d)].ln();
    }
    log_det *= 2.0;

    // Forward substitution L v = q; the quadratic form is |v|^2.
    v.copy_from(q);
    for i in 0..dim {
        let mut x = v[i];
        for k in 0..i {
            x -= m[(i, k)] * v[k];
        }
        v[i] = x / m[(i, i)];
    }
    let quad = v.norm_squared();

    let n_complex = (dim / 2) as f64;
    Some(-n_complex * std::f64::consts::TAU.ln() - 0.5 * log_det - 0.5 * quad)
}

/// In-place lower Cholesky factorization; returns false on a non-positive
/// pivot. Only the lower triangle of the result is meaningful.
fn cholesky_in_place(m: &mut DMatrix<f64>) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= m[(j, k)] * m[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let s = d.sqrt();
        m[(j, j)] = s;
        for i in (j + 1)..n {
            let mut x = m[(i, j)];
            for k in 0..j {
                x -= m[(i, k)] * m[(j, k)];
            }
            m[(i, j)] = x / s;
        }
    }
    true
}

/// One-shot log-likelihood of a dataset under `(grid, w, model, profile)`.
/// Returns `f64::NEG_INFINITY` when some line covariance is singular beyond
/// jitter. Repeated evaluation should go through [`LikelihoodEvaluator`].
pub fn log_likelihood(
    dataset: &ImageDataset,
    grid: &LineGrid,
    w: &WeightVector,
    model: ModelKind,
    profile: &DelayProfile,
) -> Result<f64, MleError> {
    let kernels = ModelKernels::compute(grid, model, profile);
    let mut eval = LikelihoodEvaluator::new(&kernels, dataset)?;
    Ok(eval.log_likelihood(w))
}

// ---------------------------------------------------------------------------
// Likelihood maximization
// ---------------------------------------------------------------------------

/// Optimizer bookkeeping attached to a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Simplex starts performed.
    pub starts: usize,
    /// Total objective evaluations across starts.
    pub evaluations: usize,
    /// Total simplex iterations across starts.
    pub iterations: usize,
    /// Whether the winning start converged by function tolerance.
    pub converged: bool,
    /// Largest gap between the winning log-likelihood and the other starts'
    /// bests; large values mean the starts disagree.
    pub start_spread: f64,
    /// Which weights ended at the nonnegativity boundary (below
    /// [`BOUNDARY_REL`] of the total): background, noise, target.
    pub floored: [bool; 3],
}

/// A maximized likelihood under one model hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub log_likelihood: f64,
    pub weights: WeightVector,
    pub diagnostics: FitDiagnostics,
}

/// Maximizes the log-likelihood over nonnegative weights for the kernel
/// stack's model. Multi-start simplex descent in log-space; the returned
/// maximum is at least the objective value at every point the optimizer
/// probed.
pub fn maximize_likelihood_with(
    kernels: &ModelKernels,
    dataset: &ImageDataset,
) -> Result<FitResult, MleError> {
    let mut evaluator = LikelihoodEvaluator::new(kernels, dataset)?;
    let power = dataset.mean_power();
    if !(power > 0.0) {
        return Err(MleError::ZeroPower);
    }
    let floor = WEIGHT_FLOOR_REL * power;

    // Moment-matched starts: split the sample power at the default noise
    // ratio and two contrast guesses.
    let mut starts: Vec<WeightVector> = [0.1, 0.5]
        .iter()
        .map(|&q| {
            weights_from_contrast(
                &ContrastSpec { noise_ratio: 0.1, contrast: q },
                power,
            )
            .expect("valid moment guess")
        })
        .collect();
    // Random log-normal perturbations of the first guess; fixed seed keeps
    // fits deterministic.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CD5A);
    let base = starts[0];
    while starts.len() < FIT_STARTS {
        let jiggle = |v: f64, rng: &mut ChaCha8Rng| {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            v * (0.8 * z).exp()
        };
        starts.push(WeightVector {
            background: jiggle(base.background, &mut rng),
            noise: jiggle(base.noise, &mut rng),
            target: jiggle(base.target, &mut rng),
        });
    }

    let to_u = |w: f64| w.max(floor).ln();
    let to_w = |u: f64| floor + u.exp();

    let mut best: Option<(f64, [f64; 3], bool)> = None;
    let mut other_bests: Vec<f64> = Vec::with_capacity(FIT_STARTS);
    let mut evaluations = 0usize;
    let mut iterations = 0usize;

    for start in &starts {
        let u0 = [to_u(start.background), to_u(start.noise), to_u(start.target)];
        // Track the best probe directly so the reported maximum dominates
        // every evaluated point even if the simplex discards it.
        let mut probe_best = f64::NEG_INFINITY;
        let mut probe_arg = u0;
        let result = nelder_mead(
            |u| {
                let w = WeightVector {
                    background: to_w(u[0]),
                    noise: to_w(u[1]),
                    target: to_w(u[2]),
                };
                let ll = evaluator.log_likelihood(&w);
                if ll > probe_best {
                    probe_best = ll;
                    probe_arg = [u[0], u[1], u[2]];
                }
                -ll
            },
            &u0,
            &NelderMeadOptions::default(),
        );
        evaluations += result.evaluations;
        iterations += result.iterations;
        other_bests.push(probe_best);
        let replace = match &best {
            None => true,
            Some((ll, _, _)) => probe_best > *ll,
        };
        if replace {
            best = Some((probe_best, probe_arg, result.converged));
        }
    }

    let (ll, u, converged) = best.expect("at least one start");
    let weights = WeightVector {
        background: to_w(u[0]),
        noise: to_w(u[1]),
        target: to_w(u[2]),
    };
    let spread = other_bests
        .iter()
        .map(|b| ll - b)
        .fold(0.0f64, f64::max);
    let boundary = BOUNDARY_REL * weights.total();
    let floored = [
        weights.background <= boundary,
        weights.noise <= boundary,
        weights.target <= boundary,
    ];
    Ok(FitResult {
        model: kernels.model(),
        log_likelihood: ll,
        weights,
        diagnostics: FitDiagnostics {
            starts: starts.len(),
            evaluations,
            iterations,
            converged,
            start_spread: spread,
            floored,
        },
    })
}

/// One-shot maximization under `(grid, model, profile)`.
pub fn maximize_likelihood(
    dataset: &ImageDataset,
    grid: &LineGrid,
    model: ModelKind,
    profile: &DelayProfile,
) -> Result<FitResult, MleError> {
    let kernels = ModelKernels::compute(grid, model, profile);
    maximize_likelihood_with(&kernels, dataset)
}

// ---------------------------------------------------------------------------
// Discrimination
// ---------------------------------------------------------------------------

/// Both model fits and the discriminant `l = log p_t - log p_s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscriminationResult {
    pub s_fit: FitResult,
    pub t_fit: FitResult,
    /// `t_fit.log_likelihood - s_fit.log_likelihood`, exactly.
    pub discriminant: f64,
}

/// Discriminates datasets against both model hypotheses. The two kernel
/// stacks are computed once and shared across all datasets of one
/// experiment.
pub struct Discriminator {
    s_kernels: ModelKernels,
    t_kernels: ModelKernels,
}

impl Discriminator {
    pub fn new(grid: &LineGrid, profile: &DelayProfile) -> Self {
        Self {
            s_kernels: ModelKernels::compute(grid, ModelKind::S, profile),
            t_kernels: ModelKernels::compute(grid, ModelKind::T, profile),
        }
    }

    /// Builds a discriminator from explicit kernel stacks (the stack passed
    /// as `s_kernels` plays the instantaneous hypothesis).
    pub fn from_kernels(s_kernels: ModelKernels, t_kernels: ModelKernels) -> Self {
        Self { s_kernels, t_kernels }
    }

    pub fn discriminate(&self, dataset: &ImageDataset) -> Result<DiscriminationResult, MleError> {
        let s_fit = maximize_likelihood_with(&self.s_kernels, dataset)?;
        let t_fit = maximize_likelihood_with(&self.t_kernels, dataset)?;
        let discriminant = t_fit.log_likelihood - s_fit.log_likelihood;
        Ok(DiscriminationResult { s_fit, t_fit, discriminant })
    }
}

/// One-shot discrimination of a dataset on `(grid, profile)`.
pub fn discriminant(
    dataset: &ImageDataset,
    grid: &LineGrid,
    profile: &DelayProfile,
) -> Result<DiscriminationResult, MleError> {
    Discriminator::new(grid, profile).discriminate(dataset)
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{mix_seed, simulate_dataset, DatasetMeta, DatasetSampler};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid_5pi() -> LineGrid {
        LineGrid::standard(2.5, 3.0 * PI, 5.0 * PI).unwrap()
    }

    fn indicator_5pi() -> DelayProfile {
        DelayProfile::indicator(5.0 * PI).unwrap()
    }

    fn zero_dataset(grid: &LineGrid) -> ImageDataset {
        ImageDataset {
            lines: grid
                .lines()
                .iter()
                .map(|l| vec![Complex64::new(0.0, 0.0); l.psi.len()])
                .collect(),
            meta: DatasetMeta { model: ModelKind::S, contrast: None, seed: 0 },
        }
    }

    #[test]
    fn closed_form_noise_likelihood() {
        // Single line, w = (0, 1, 0), q = 0:
        // ll = -N log(2 pi) - 1/2 log det(I/2) = -N log(2 pi) + N log 2.
        let grid = LineGrid::custom(
            2.5,
            vec![crate::statmodel::LineSamples {
                zeta: 3.0 * PI,
                psi: vec![3.0 * PI, -3.0 * PI],
            }],
        )
        .unwrap();
        let ds = zero_dataset(&grid);
        let w = WeightVector { background: 0.0, noise: 1.0, target: 0.0 };
        let ll = log_likelihood(&ds, &grid, &w, ModelKind::T, &indicator_5pi()).unwrap();
        let n = 2.0;
        let expected = -n * std::f64::consts::TAU.ln() + n * 2f64.ln();
        assert_abs_diff_eq!(ll, expected, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_scaling_identity() {
        // Scaling data by s and weights by s^2 changes the log-likelihood by
        // -sum_m 2 N_m log s.
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = WeightVector { background: 0.7, noise: 0.1, target: 0.4 };
        let ds = simulate_dataset(&grid, &w, ModelKind::T, &f, 11).unwrap();
        let ll = log_likelihood(&ds, &grid, &w, ModelKind::T, &f).unwrap();

        let s = 3.0;
        let scaled = ImageDataset {
            lines: ds
                .lines
                .iter()
                .map(|l| l.iter().map(|z| z * s).collect())
                .collect(),
            meta: ds.meta,
        };
        let w2 = WeightVector {
            background: w.background * s * s,
            noise: w.noise * s * s,
            target: w.target * s * s,
        };
        let ll2 = log_likelihood(&scaled, &grid, &w2, ModelKind::T, &f).unwrap();
        let n_total: usize = grid.lines().iter().map(|l| l.psi.len()).sum();
        assert_abs_diff_eq!(
            ll2 - ll,
            -2.0 * n_total as f64 * s.ln(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn shape_mismatch_reported() {
        let grid = grid_5pi();
        let f = indicator_5pi();
        let kernels = ModelKernels::compute(&grid, ModelKind::S, &f);
        let mut ds = zero_dataset(&grid);
        ds.lines.pop();
        assert!(matches!(
            LikelihoodEvaluator::new(&kernels, &ds),
            Err(MleError::LineCountMismatch { .. })
        ));
        let mut ds = zero_dataset(&grid);
        ds.lines[1].pop();
        assert!(matches!(
            LikelihoodEvaluator::new(&kernels, &ds),
            Err(MleError::SampleCountMismatch { line: 1, .. })
        ));
    }

    #[test]
    fn zero_power_rejected() {
        let grid = grid_5pi();
        let kernels = ModelKernels::compute(&grid, ModelKind::S, &indicator_5pi());
        let ds = zero_dataset(&grid);
        assert!(matches!(
            maximize_likelihood_with(&kernels, &ds),
            Err(MleError::ZeroPower)
        ));
    }

    #[test]
    fn likelihood_invariant_under_line_permutation() {
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = WeightVector { background: 0.6, noise: 0.06, target: 0.5 };
        let ds = simulate_dataset(&grid, &w, ModelKind::T, &f, 7).unwrap();

        // Permute both the grid lines and the dataset lines consistently.
        let perm = [2usize, 0, 1];
        let grid_p = LineGrid::custom(
            grid.kappa(),
            perm.iter().map(|&i| grid.lines()[i].clone()).collect(),
        )
        .unwrap();
        let ds_p = ImageDataset {
            lines: perm.iter().map(|&i| ds.lines[i].clone()).collect(),
            meta: ds.meta,
        };
        let ll = log_likelihood(&ds, &grid, &w, ModelKind::T, &f).unwrap();
        let ll_p = log_likelihood(&ds_p, &grid_p, &w, ModelKind::T, &f).unwrap();
        assert_abs_diff_eq!(ll, ll_p, epsilon = 1e-10);
    }

    #[test]
    fn finite_difference_continuity() {
        // Directional derivative from central differences matches the
        // one-sided slope to ~1e-4 relative at interior points.
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w0 = WeightVector { background: 0.8, noise: 0.15, target: 0.6 };
        let ds = simulate_dataset(&grid, &w0, ModelKind::S, &f, 21).unwrap();
        let kernels = ModelKernels::compute(&grid, ModelKind::S, &f);
        let mut ev = LikelihoodEvaluator::new(&kernels, &ds).unwrap();

        let h = 1e-6;
        for dim in 0..3 {
            let shift = |w: &WeightVector, d: f64| {
                let mut v = [w.background, w.noise, w.target];
                v[dim] += d;
                WeightVector { background: v[0], noise: v[1], target: v[2] }
            };
            let f_p = ev.log_likelihood(&shift(&w0, h));
            let f_m = ev.log_likelihood(&shift(&w0, -h));
            let f_2p = ev.log_likelihood(&shift(&w0, 2.0 * h));
            let central = (f_p - f_m) / (2.0 * h);
            let forward = (f_2p - f_p) / h;
            assert!(
                (central - forward).abs() <= 1e-4 * central.abs().max(1.0),
                "dim {dim}: central {central} vs forward {forward}"
            );
        }
    }

    #[test]
    fn fit_recovers_total_power() {
        // Median fitted total power over 100 trials within 20% of truth on a
        // 200-line grid.
        let grid = LineGrid::standard(2.5, 3.0 * PI, 202.0 * PI).unwrap();
        assert_eq!(grid.line_count(), 200);
        let f = DelayProfile::indicator(202.0 * PI).unwrap();
        let w_true = weights_from_contrast(
            &ContrastSpec { noise_ratio: 0.1, contrast: 0.5 },
            1.0,
        )
        .unwrap();
        let kernels = ModelKernels::compute(&grid, ModelKind::T, &f);
        let sampler = DatasetSampler::from_kernels(&kernels, &w_true).unwrap();

        let mut ratios: Vec<f64> = (0..100)
            .map(|i| {
                let ds = sampler.sample(mix_seed(&[1000, i]));
                let fit = maximize_likelihood_with(&kernels, &ds).unwrap();
                fit.weights.total() / w_true.total()
            })
            .collect();
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ratios[ratios.len() / 2];
        assert!((median - 1.0).abs() < 0.2, "median power ratio {median}");
    }

    #[test]
    fn zero_contrast_data_fits_boundary_target() {
        // Data generated with q = 0: the fitted target weight collapses to
        // the nonnegativity boundary in a large share of trials (for a
        // variance component at the true boundary the ML estimate is at the
        // boundary only about half the time) and l concentrates near zero.
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = weights_from_contrast(
            &ContrastSpec { noise_ratio: 0.1, contrast: 0.0 },
            1.0,
        )
        .unwrap();
        let disc = Discriminator::new(&grid, &f);
        let sampler = DatasetSampler::new(&grid, &w, ModelKind::S, &f).unwrap();

        let n = 60;
        let mut floored = 0usize;
        let mut ratios = Vec::with_capacity(n);
        let mut ls = Vec::with_capacity(n);
        for i in 0..n {
            let ds = sampler.sample(mix_seed(&[2000, i as u64]));
            let res = disc.discriminate(&ds).unwrap();
            if res.t_fit.diagnostics.floored[2] {
                floored += 1;
            }
            ratios.push(res.t_fit.weights.target / res.t_fit.weights.total());
            ls.push(res.discriminant);
        }
        assert!(floored * 5 >= n * 2, "target floored in only {floored}/{n} fits");

        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(
            ratios[n / 4] < 1e-4,
            "lower-quartile target fraction {}",
            ratios[n / 4]
        );

        ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ls[n / 2];
        let iqr = ls[3 * n / 4] - ls[n / 4];
        assert!(
            median.abs() <= iqr.max(0.5),
            "null discriminant median {median}, iqr {iqr}"
        );
    }

    #[test]
    fn high_contrast_t_data_yields_positive_discriminant() {
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = weights_from_contrast(
            &ContrastSpec { noise_ratio: 0.1, contrast: 0.8 },
            1.0,
        )
        .unwrap();
        let disc = Discriminator::new(&grid, &f);
        let sampler = DatasetSampler::new(&grid, &w, ModelKind::T, &f).unwrap();
        let n = 200;
        let positive = (0..n)
            .filter(|&i| {
                let ds = sampler.sample(mix_seed(&[3000, i as u64]));
                disc.discriminate(&ds).unwrap().discriminant > 0.0
            })
            .count();
        assert!(positive * 10 >= n * 9, "positive l in {positive}/{n} trials");
    }

    #[test]
    fn swapping_kernel_roles_negates_discriminant() {
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = weights_from_contrast(
            &ContrastSpec { noise_ratio: 0.1, contrast: 0.5 },
            1.0,
        )
        .unwrap();
        let ds = simulate_dataset(&grid, &w, ModelKind::T, &f, 5).unwrap();

        let forward = Discriminator::new(&grid, &f);
        let swapped = Discriminator::from_kernels(
            ModelKernels::compute(&grid, ModelKind::T, &f),
            ModelKernels::compute(&grid, ModelKind::S, &f),
        );
        let a = forward.discriminate(&ds).unwrap();
        let b = swapped.discriminate(&ds).unwrap();
        assert_abs_diff_eq!(a.discriminant, -b.discriminant, epsilon = 1e-12);
    }

    #[test]
    fn fitted_weights_are_nonnegative() {
        let grid = grid_5pi();
        let f = indicator_5pi();
        let w = weights_from_contrast(
            &ContrastSpec { noise_ratio: 0.1, contrast: 0.3 },
            2.0,
        )
        .unwrap();
        for i in 0..10 {
            let ds = simulate_dataset(&grid, &w, ModelKind::S, &f, 100 + i).unwrap();
            let fit = maximize_likelihood(&ds, &grid, ModelKind::S, &f).unwrap();
            assert!(fit.weights.background >= 0.0);
            assert!(fit.weights.noise >= 0.0);
            assert!(fit.weights.target >= 0.0);
            assert!(fit.log_likelihood.is_finite());
        }
    }
}
