//! Seedable Monte-Carlo generation of sampled coordinate-delay SAR images.
//!
//! Datasets are drawn line by line: the real interleaved (Re, Im) vector of
//! each ambiguity line is a zero-mean Gaussian with the assembled line
//! covariance, sampled through a symmetric eigendecomposition (robust to
//! semidefinite covariances — eigenvalues within tolerance are clipped to
//! zero). Everything is deterministic given the seeds: ensemble member `i`
//! uses `mix_seed([master_seed, model code, i])`, so members can be
//! generated concurrently without affecting the values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statmodel::{
    kernel_h_s, weights_from_contrast, ContrastSpec, CovarianceModel, DelayProfile,
    LineGrid, LineSamples, ModelKernels, ModelKind, StatModelError, WeightVector,
    PSD_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error(transparent)]
    Model(#[from] StatModelError),
    #[error("ensemble size must be at least 1")]
    EmptySize,
    #[error("contrast distribution needs at least one level")]
    NoContrastLevels,
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("requested range [{0}, {1}] contains no grid points")]
    EmptyRange(f64, f64),
}

// ---------------------------------------------------------------------------
// Seed derivation
// ---------------------------------------------------------------------------

/// Stable 64-bit mix of an ordered list of values (splitmix64 chain).
/// Used to derive independent per-trial seeds from a master seed so that
/// results do not depend on scheduling.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

/// Provenance of a simulated dataset. The discrimination procedure never
/// reads this; it exists so experiments can score classifier outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub model: ModelKind,
    pub contrast: Option<ContrastSpec>,
    pub seed: u64,
}

/// Complex image samples organized per ambiguity line, aligned with the
/// generating [`LineGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageDataset {
    pub lines: Vec<Vec<Complex64>>,
    pub meta: DatasetMeta,
}

impl ImageDataset {
    pub fn sample_count(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }

    /// Mean per-sample power `|I|^2` across all lines.
    pub fn mean_power(&self) -> f64 {
        let n = self.sample_count();
        if n == 0 {
            return 0.0;
        }
        self.lines
            .iter()
            .flat_map(|l| l.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / n as f64
    }
}

/// Samples datasets from a fixed covariance. The eigendecomposition of each
/// line is done once at construction; sampling is then a matrix-vector
/// product per line.
#[derive(Debug, Clone)]
pub struct DatasetSampler {
    transforms: Vec<DMatrix<f64>>,
    model: ModelKind,
    contrast: Option<ContrastSpec>,
}

impl DatasetSampler {
    /// Builds a sampler from an assembled covariance.
    pub fn from_covariance(
        cov: &CovarianceModel,
        model: ModelKind,
        contrast: Option<ContrastSpec>,
    ) -> Result<Self, MonteCarloError> {
        let mut transforms = Vec::with_capacity(cov.lines.len());
        for (idx, m) in cov.lines.iter().enumerate() {
            transforms.push(factor_psd(m, idx)?);
        }
        Ok(Self { transforms, model, contrast })
    }

    /// Assembles the covariance for `(grid, w, model, profile)` and builds
    /// the sampler.
    pub fn new(
        grid: &LineGrid,
        w: &WeightVector,
        model: ModelKind,
        profile: &DelayProfile,
    ) -> Result<Self, MonteCarloError> {
        let kernels = ModelKernels::compute(grid, model, profile);
        Self::from_kernels(&kernels, w)
    }

    /// Builds the sampler from precomputed kernels.
    pub fn from_kernels(
        kernels: &ModelKernels,
        w: &WeightVector,
    ) -> Result<Self, MonteCarloError> {
        let cov = kernels.covariance(w)?;
        let contrast = crate::statmodel::contrast_from_weights(w);
        Self::from_covariance(&cov, kernels.model(), contrast)
    }

    /// Draws one dataset. Deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> ImageDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines = self
            .transforms
            .iter()
            .map(|t| draw_line(t, &mut rng))
            .collect();
        ImageDataset {
            lines,
            meta: DatasetMeta { model: self.model, contrast: self.contrast, seed },
        }
    }
}

fn draw_line(transform: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let dim = transform.ncols();
    let z = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
    let r = transform * z;
    (0..dim / 2)
        .map(|j| Complex64::new(r[2 * j], r[2 * j + 1]))
        .collect()
}

/// Symmetric factor `V sqrt(max(Lambda, 0))` of a PSD matrix. Eigenvalues
/// below `-PSD_TOLERANCE * trace` are an error; small negatives are clipped.
fn factor_psd(m: &DMatrix<f64>, line: usize) -> Result<DMatrix<f64>, MonteCarloError> {
    let trace = m.trace();
    let eigen = m.clone().symmetric_eigen();
    let mut scaled = eigen.eigenvectors;
    for (col, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda < -PSD_TOLERANCE * trace.abs() {
            return Err(StatModelError::NotPsd { line, min_eig: lambda, trace }.into());
        }
        let s = lambda.max(0.0).sqrt();
        scaled.column_mut(col).scale_mut(s);
    }
    Ok(scaled)
}

/// One-shot dataset simulation; repeated sampling should reuse a
/// [`DatasetSampler`].
pub fn simulate_dataset(
    grid: &LineGrid,
    w: &WeightVector,
    model: ModelKind,
    profile: &DelayProfile,
    seed: u64,
) -> Result<ImageDataset, MonteCarloError> {
    Ok(DatasetSampler::new(grid, w, model, profile)?.sample(seed))
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

/// How the target contrast is chosen across ensemble members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContrastDraw {
    /// Every member uses the same contrasts.
    Fixed(ContrastSpec),
    /// Each member draws its contrast uniformly from `q_levels` (the
    /// noise-to-background ratio stays fixed).
    PerMember { noise_ratio: f64, q_levels: Vec<f64> },
}

/// Generation specification of an ensemble of sampled images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub grid: LineGrid,
    pub model: ModelKind,
    pub contrast: ContrastDraw,
    pub profile: DelayProfile,
    pub total_power: f64,
}

/// An ensemble of independently generated datasets sharing one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<ImageDataset>,
    pub master_seed: u64,
}

/// Generates `size` independent datasets. Member `i` is drawn with seed
/// `mix_seed([master_seed, model code, i])`; when the contrast is drawn per
/// member, the level choice comes from a further mix of that seed. Two calls
/// with the same spec and master seed produce identical ensembles regardless
/// of the number of worker threads.
pub fn simulate_ensemble(
    spec: &EnsembleSpec,
    size: usize,
    master_seed: u64,
) -> Result<Ensemble, MonteCarloError> {
    if size == 0 {
        return Err(MonteCarloError::EmptySize);
    }
    let kernels = ModelKernels::compute(&spec.grid, spec.model, &spec.profile);

    let samplers: Vec<DatasetSampler> = match &spec.contrast {
        ContrastDraw::Fixed(c) => {
            let w = weights_from_contrast(c, spec.total_power)?;
            vec![DatasetSampler::from_kernels(&kernels, &w)?]
        }
        ContrastDraw::PerMember { noise_ratio, q_levels } => {
            if q_levels.is_empty() {
                return Err(MonteCarloError::NoContrastLevels);
            }
            q_levels
                .iter()
                .map(|&q| {
                    let c = ContrastSpec { noise_ratio: *noise_ratio, contrast: q };
                    let w = weights_from_contrast(&c, spec.total_power)?;
                    DatasetSampler::from_kernels(&kernels, &w)
                })
                .collect::<Result<_, _>>()?
        }
    };

    let members = (0..size)
        .into_par_iter()
        .map(|i| {
            let seed = mix_seed(&[master_seed, spec.model.seed_code(), i as u64]);
            let sampler = if samplers.len() == 1 {
                &samplers[0]
            } else {
                let pick = mix_seed(&[seed, 0xC0]) as usize % samplers.len();
                &samplers[pick]
            };
            sampler.sample(seed)
        })
        .collect();

    Ok(Ensemble { members, master_seed })
}

// ---------------------------------------------------------------------------
// Expectation maps and image fields
// ---------------------------------------------------------------------------

/// Expected intensity `<|I|^2>` on a rectangular `(zeta, psi)` lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityMap {
    pub zetas: Vec<f64>,
    pub psis: Vec<f64>,
    /// `values[zi][pi]` for line `zetas[zi]` and position `psis[pi]`.
    pub values: Vec<Vec<f64>>,
}

fn lattice(range: (f64, f64), step: f64) -> Result<Vec<f64>, MonteCarloError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(MonteCarloError::BadStep(step));
    }
    let (lo, hi) = range;
    if hi < lo {
        return Err(MonteCarloError::EmptyRange(lo, hi));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as i64;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// The statistically averaged intensity `sum_a w_a H_a(zeta, psi, psi)` over
/// a `(zeta, psi)` lattice with the given step.
pub fn expectation_map(
    model: ModelKind,
    w: &WeightVector,
    profile: &DelayProfile,
    kappa: f64,
    zeta_range: (f64, f64),
    psi_range: (f64, f64),
    step: f64,
) -> Result<IntensityMap, MonteCarloError> {
    let zetas = lattice(zeta_range, step)?;
    let psis = lattice(psi_range, step)?;
    let values = zetas
        .iter()
        .map(|&zeta| {
            // The H_t overlap factor depends only on zeta; hoist it out of
            // the psi loop.
            let overlap = match model {
                ModelKind::T => crate::statmodel::profile_sinc_overlap(zeta, profile),
                ModelKind::S => 0.0,
            };
            psis.iter()
                .map(|&psi| {
                    let target = match model {
                        ModelKind::T => {
                            crate::special::phi_marginal(0.5 * kappa * (zeta + psi))
                                .norm_sqr()
                                * overlap
                        }
                        ModelKind::S => kernel_h_s(zeta, psi, psi, kappa, profile).re,
                    };
                    w.background + w.noise + w.target * target
                })
                .collect()
        })
        .collect();
    Ok(IntensityMap { zetas, psis, values })
}

/// One speckle realization of the full image on a `(zeta, psi)` lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexField {
    pub zetas: Vec<f64>,
    pub psis: Vec<f64>,
    /// `values[zi][pi]` as in [`IntensityMap`].
    pub values: Vec<Vec<Complex64>>,
}

/// Simulates speckle image fields: every ambiguity line (step `pi` in
/// `zeta`) carries a jointly Gaussian sample of all `psi` positions (step
/// `pi` as well), independent across lines. Per-line factorizations are
/// cached, so drawing many realizations is cheap.
#[derive(Debug, Clone)]
pub struct FieldSimulator {
    zetas: Vec<f64>,
    psis: Vec<f64>,
    transforms: Vec<DMatrix<f64>>,
}

impl FieldSimulator {
    pub fn new(
        model: ModelKind,
        w: &WeightVector,
        profile: &DelayProfile,
        kappa: f64,
        zeta_range: (f64, f64),
        psi_range: (f64, f64),
    ) -> Result<Self, MonteCarloError> {
        let step = std::f64::consts::PI;
        let zetas = lattice(zeta_range, step)?;
        let psis = lattice(psi_range, step)?;
        let lines = zetas
            .iter()
            .map(|&zeta| LineSamples { zeta, psi: psis.clone() })
            .collect();
        let grid = LineGrid::custom(kappa, lines)?;
        let kernels = ModelKernels::compute(&grid, model, profile);
        let cov = kernels.covariance(w)?;
        let mut transforms = Vec::with_capacity(cov.lines.len());
        for (idx, m) in cov.lines.iter().enumerate() {
            transforms.push(factor_psd(m, idx)?);
        }
        Ok(Self { zetas, psis, transforms })
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zetas
    }

    pub fn psis(&self) -> &[f64] {
        &self.psis
    }

    /// Draws one field realization; deterministic in `seed`, lines drawn in
    /// `zeta` order from one stream.
    pub fn realization(&self, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self
            .transforms
            .iter()
            .map(|t| draw_line(t, &mut rng))
            .collect();
        ComplexField { zetas: self.zetas.clone(), psis: self.psis.clone(), values }
    }
}

/// One-shot field simulation; repeated realizations should reuse a
/// [`FieldSimulator`].
pub fn simulate_image_field(
    model: ModelKind,
    w: &WeightVector,
    profile: &DelayProfile,
    kappa: f64,
    zeta_range: (f64, f64),
    psi_range: (f64, f64),
    seed: u64,
) -> Result<ComplexField, MonteCarloError> {
    Ok(FieldSimulator::new(model, w, profile, kappa, zeta_range, psi_range)?
        .realization(seed))
}

// ===========================================================================
// Tests
// ===========================================================================
