//! Second-order statistics of coordinate-delay SAR images on ambiguity
//! lines.
//!
//! Image samples are taken on a discrete set of ambiguity lines indexed by
//! the dimensionless coordinate `zeta` (spacing `pi`, which makes distinct
//! lines uncorrelated) with positions `psi` along each line. On one line the
//! covariance of the sampled image is a nonnegative combination of three
//! correlation kernels plus white noise:
//!
//! ```text
//! <I(zeta, psi) conj(I(zeta, psi'))> = w_b H_b + w_n H_n + w_x H_x,
//! ```
//!
//! where `H_b` describes the homogeneous background, `H_t` a point scatterer
//! with a distributed delay response, `H_s` an instantaneous scatterer
//! distributed along the range direction, and `H_n` is the Kronecker noise
//! kernel. The weights `w` are the products of physical intensities and the
//! kernel normalizers; only the products ever enter the statistics, so the
//! library stores and optimizes the weights directly. [`normalizers`] maps
//! back to physical intensities when a radar configuration is available.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::psf::RadarConfig;
use crate::special::{integrate_complex, phi_marginal, sinc};

/// Default lower cutoff `3 pi` of the sampling grid: close to the support
/// edge of the delay profile the kernels carry transitional effects.
pub const DEFAULT_ZETA_MIN: f64 = 3.0 * PI;

/// Relative eigenvalue tolerance below which an assembled covariance is
/// declared broken rather than repaired.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Relative jitter added to a covariance whose smallest eigenvalue is
/// negative but within [`PSD_TOLERANCE`].
pub const PSD_JITTER: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatModelError {
    #[error("delay profile support bound must be positive, got {0}")]
    BadSupport(f64),
    #[error("tabulated delay profile needs a positive step, got {0}")]
    BadStep(f64),
    #[error("delay profile values must be nonnegative and finite")]
    BadTable,
    #[error("contrast must lie in [0, 1), got {0}")]
    BadContrast(f64),
    #[error("noise-to-background ratio must be nonnegative, got {0}")]
    BadNoiseRatio(f64),
    #[error("total power must be positive, got {0}")]
    BadTotalPower(f64),
    #[error("weights must be nonnegative and finite, got ({0}, {1}, {2})")]
    BadWeights(f64, f64, f64),
    #[error("sampling grid has no lines in [{zeta_min}, {zeta_max}]")]
    EmptyGrid { zeta_min: f64, zeta_max: f64 },
    #[error("line {line} has no psi samples")]
    EmptyLine { line: usize },
    #[error("kappa must be positive and finite, got {0}")]
    BadKappa(f64),
    #[error(
        "covariance on line {line} is not positive semidefinite \
         (min eigenvalue {min_eig:.3e}, trace {trace:.3e}); \
         this indicates a kernel or quadrature bug"
    )]
    NotPsd { line: usize, min_eig: f64, trace: f64 },
}

// ---------------------------------------------------------------------------
// Delay profile
// ---------------------------------------------------------------------------

/// Reflectivity-versus-delay weight function `F(zeta)` on the dimensionless
/// delay axis (units of `B t / 2`). Causal: `F = 0` for `zeta < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DelayProfile {
    /// `F = 1` on `[0, zeta_max]`, `0` elsewhere.
    Indicator { zeta_max: f64 },
    /// Nonnegative samples on a uniform grid starting at zero, linearly
    /// interpolated, zero beyond the last sample.
    Tabulated { step: f64, values: Vec<f64> },
}

impl DelayProfile {
    /// Indicator profile on `[0, zeta_max]`.
    pub fn indicator(zeta_max: f64) -> Result<Self, StatModelError> {
        if !(zeta_max > 0.0) || !zeta_max.is_finite() {
            return Err(StatModelError::BadSupport(zeta_max));
        }
        Ok(Self::Indicator { zeta_max })
    }

    /// Tabulated profile with samples `values[k] = F(k * step)`.
    pub fn tabulated(step: f64, values: Vec<f64>) -> Result<Self, StatModelError> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(StatModelError::BadStep(step));
        }
        if values.is_empty() || values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(StatModelError::BadTable);
        }
        Ok(Self::Tabulated { step, values })
    }

    /// `F(zeta)`; zero for negative arguments and beyond the support.
    pub fn eval(&self, zeta: f64) -> f64 {
        if zeta < 0.0 {
            return 0.0;
        }
        match self {
            Self::Indicator { zeta_max } => {
                if zeta <= *zeta_max {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tabulated { step, values } => {
                let pos = zeta / step;
                let idx = pos.floor() as usize;
                if idx + 1 >= values.len() {
                    if idx + 1 == values.len() && pos <= (values.len() - 1) as f64 {
                        return values[idx];
                    }
                    return 0.0;
                }
                let frac = pos - idx as f64;
                values[idx] * (1.0 - frac) + values[idx + 1] * frac
            }
        }
    }

    /// Upper end of the support (integration limit for the kernel
    /// quadratures).
    pub fn support_end(&self) -> f64 {
        match self {
            Self::Indicator { zeta_max } => *zeta_max,
            Self::Tabulated { step, values } => step * (values.len() - 1) as f64,
        }
    }
}

// ---------------------------------------------------------------------------
// Contrasts and weights
// ---------------------------------------------------------------------------

/// Relative scatterer intensities: the noise-to-background ratio `p_n` and
/// the target contrast `q` (fraction of total averaged power attributable to
/// the inhomogeneous scatterer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastSpec {
    /// `p_n = w_n / w_b`, nonnegative.
    pub noise_ratio: f64,
    /// `q = w_x / (w_b + w_n + w_x)`, in `[0, 1)`.
    pub contrast: f64,
}

/// Nonnegative weights of the three covariance components. Each weight is
/// the product of a physical intensity `sigma^2` and the corresponding
/// kernel normalizer `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    /// Background weight `w_b`.
    pub background: f64,
    /// Noise weight `w_n`.
    pub noise: f64,
    /// Target weight `w_x` (plays `w_s` or `w_t` depending on the model).
    pub target: f64,
}

impl WeightVector {
    pub fn new(background: f64, noise: f64, target: f64) -> Result<Self, StatModelError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(background) && ok(noise) && ok(target)) {
            return Err(StatModelError::BadWeights(background, noise, target));
        }
        Ok(Self { background, noise, target })
    }

    pub fn total(&self) -> f64 {
        self.background + self.noise + self.target
    }
}

/// Splits `total_power` into weights that reproduce the requested contrasts:
/// `w_n / w_b = p_n` and `w_x / total = q`.
pub fn weights_from_contrast(
    spec: &ContrastSpec,
    total_power: f64,
) -> Result<WeightVector, StatModelError> {
    if !(spec.contrast >= 0.0 && spec.contrast < 1.0) {
        return Err(StatModelError::BadContrast(spec.contrast));
    }
    if !(spec.noise_ratio >= 0.0) || !spec.noise_ratio.is_finite() {
        return Err(StatModelError::BadNoiseRatio(spec.noise_ratio));
    }
    if !(total_power > 0.0) || !total_power.is_finite() {
        return Err(StatModelError::BadTotalPower(total_power));
    }
    let target = spec.contrast * total_power;
    let rest = total_power - target;
    let background = rest / (1.0 + spec.noise_ratio);
    let noise = rest - background;
    Ok(WeightVector { background, noise, target })
}

/// Recovers the contrasts from a weight vector with positive background.
pub fn contrast_from_weights(w: &WeightVector) -> Option<ContrastSpec> {
    if w.background <= 0.0 || w.total() <= 0.0 {
        return None;
    }
    Some(ContrastSpec {
        noise_ratio: w.noise / w.background,
        contrast: w.target / w.total(),
    })
}

/// Normalizing coefficients of the background, delayed-target and
/// range-distributed-target kernels for a physical radar configuration.
/// A physical intensity `sigma^2` corresponds to the weight
/// `w = sigma^2 * K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizers {
    /// `K_b = N^2 tau^2 (w0 / (B k0t)) (1 / (k0t phiT)) pi^2`.
    pub background: f64,
    /// `K_t = N^2 tau^2 (2 / B) pi`.
    pub target_t: f64,
    /// `K_s = N^2 tau^2 (w0 / (B k0t)) pi`.
    pub target_s: f64,
}

/// Kernel normalizers of a radar configuration. The noise normalizer has no
/// closed form; only the product `sigma_n^2 K_n` is ever represented, as the
/// noise weight.
pub fn normalizers(cfg: &RadarConfig) -> Normalizers {
    let nt = cfg.pulse_count * cfg.pulse_duration;
    let n2t2 = nt * nt;
    let k0t = cfg.k0_theta();
    let ratio = cfg.carrier_frequency / (cfg.bandwidth * k0t);
    Normalizers {
        background: n2t2 * ratio / (k0t * cfg.aperture_angle) * PI * PI,
        target_t: n2t2 * 2.0 / cfg.bandwidth * PI,
        target_s: n2t2 * ratio * PI,
    }
}

// ---------------------------------------------------------------------------
// Scatterer models and sampling grid
// ---------------------------------------------------------------------------

/// Which inhomogeneous scatterer the target hypothesis contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Instantaneous scatterer distributed along the range direction.
    S,
    /// Point scatterer with a distributed delay response.
    T,
}

impl ModelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::S => "s",
            Self::T => "t",
        }
    }

    /// Stable numeric code used in seed derivation.
    pub fn seed_code(&self) -> u64 {
        match self {
            Self::S => 0x73,
            Self::T => 0x74,
        }
    }
}

/// Sample positions on one ambiguity line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSamples {
    /// Dimensionless line coordinate `zeta_m`.
    pub zeta: f64,
    /// Positions `psi_{m j}` along the line.
    pub psi: Vec<f64>,
}

/// A discrete set of ambiguity lines with per-line sample positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    kappa: f64,
    lines: Vec<LineSamples>,
}

impl LineGrid {
    /// The standard grid: `zeta_m = pi m` for `zeta_min <= zeta_m <=
    /// zeta_max`, with two samples per line at `psi = +zeta_m` and
    /// `psi = -zeta_m`. The two positions maximize the expected intensity of
    /// one of the two candidate inhomogeneous images on each line.
    pub fn standard(kappa: f64, zeta_min: f64, zeta_max: f64) -> Result<Self, StatModelError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(StatModelError::BadKappa(kappa));
        }
        let m_lo = (zeta_min / PI - 1e-9).ceil().max(1.0) as i64;
        let m_hi = (zeta_max / PI + 1e-9).floor() as i64;
        if m_hi < m_lo {
            return Err(StatModelError::EmptyGrid { zeta_min, zeta_max });
        }
        let lines = (m_lo..=m_hi)
            .map(|m| {
                let zeta = PI * m as f64;
                LineSamples { zeta, psi: vec![zeta, -zeta] }
            })
            .collect();
        Ok(Self { kappa, lines })
    }

    /// A grid with explicit line coordinates and sample positions.
    pub fn custom(kappa: f64, lines: Vec<LineSamples>) -> Result<Self, StatModelError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(StatModelError::BadKappa(kappa));
        }
        if lines.is_empty() {
            return Err(StatModelError::EmptyGrid { zeta_min: f64::NAN, zeta_max: f64::NAN });
        }
        for (i, line) in lines.iter().enumerate() {
            if line.psi.is_empty() {
                return Err(StatModelError::EmptyLine { line: i });
            }
        }
        Ok(Self { kappa, lines })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lines(&self) -> &[LineSamples] {
        &self.lines
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Total number of complex samples across all lines.
    pub fn sample_count(&self) -> usize {
        self.lines.iter().map(|l| l.psi.len()).sum()
    }
}

// ---------------------------------------------------------------------------
// Correlation kernels
// ---------------------------------------------------------------------------

/// Background kernel `H_b = Phi(0, kappa (psi - psi') / 2)`. Independent of
/// the line coordinate, which is kept in the signature for uniformity.
pub fn kernel_h_b(zeta: f64, psi: f64, psi_p: f64, kappa: f64) -> Complex64 {
    let _ = zeta;
    phi_marginal(0.5 * kappa * (psi - psi_p))
}

/// Delayed-scatterer kernel
/// `H_t = Phi(0, kappa(zeta+psi)/2) conj(Phi(0, kappa(zeta+psi')/2))
///        * (1/pi) ∫ F^2(u) sinc^2(zeta - u) du`.
pub fn kernel_h_t(
    zeta: f64,
    psi: f64,
    psi_p: f64,
    kappa: f64,
    profile: &DelayProfile,
) -> Complex64 {
    let factor = profile_sinc_overlap(zeta, profile);
    phi_marginal(0.5 * kappa * (zeta + psi))
        * phi_marginal(0.5 * kappa * (zeta + psi_p)).conj()
        * factor
}

/// Range-distributed-scatterer kernel
/// `H_s = (1/pi) ∫ F^2(u) sinc^2(zeta - u)
///        Phi(0, kappa(zeta+psi)/2 - kappa u)
///        conj(Phi(0, kappa(zeta+psi')/2 - kappa u)) du`.
pub fn kernel_h_s(
    zeta: f64,
    psi: f64,
    psi_p: f64,
    kappa: f64,
    profile: &DelayProfile,
) -> Complex64 {
    let b = profile.support_end();
    if b <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a1 = 0.5 * kappa * (zeta + psi);
    let a2 = 0.5 * kappa * (zeta + psi_p);
    let integrand = |u: f64| {
        let f = profile.eval(u);
        if f == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = sinc(zeta - u);
        phi_marginal(a1 - kappa * u)
            * phi_marginal(a2 - kappa * u).conj()
            * (f * f * s * s)
    };
    integrate_complex(&integrand, 0.0, b, kernel_panels(b, kappa), 1e-9) / PI
}

/// Noise kernel: 1 when the two samples coincide, 0 otherwise. In covariance
/// assembly "coincide" means the same sample index on the same line; this
/// free function compares the positions themselves.
pub fn kernel_h_n(zeta: f64, psi: f64, psi_p: f64) -> f64 {
    let _ = zeta;
    if psi == psi_p {
        1.0
    } else {
        0.0
    }
}

/// The scalar overlap `(1/pi) ∫ F^2(u) sinc^2(zeta - u) du` shared by the
/// `H_t` entries of one line.
pub fn profile_sinc_overlap(zeta: f64, profile: &DelayProfile) -> f64 {
    let b = profile.support_end();
    if b <= 0.0 {
        return 0.0;
    }
    let integrand = |u: f64| {
        let f = profile.eval(u);
        let s = sinc(zeta - u);
        Complex64::new(f * f * s * s, 0.0)
    };
    integrate_complex(&integrand, 0.0, b, kernel_panels(b, 0.0), 1e-9).re / PI
}

/// Panel budget for the kernel quadratures: the sinc^2 factor oscillates
/// with period pi and the Phi factors accrue phase at rate ~kappa/4.
fn kernel_panels(b: f64, kappa: f64) -> usize {
    4 + (b / (0.5 * PI)).ceil() as usize + (kappa * b / (4.0 * PI)).ceil() as usize
}

// ---------------------------------------------------------------------------
// Covariance assembly
// ---------------------------------------------------------------------------

/// Complex kernel matrices of one line: the background kernel and the
/// model's target kernel evaluated at all sample pairs. The noise kernel is
/// the identity and is not stored.
#[derive(Debug, Clone)]
pub struct LineKernels {
    pub background: DMatrix<Complex64>,
    pub target: DMatrix<Complex64>,
}

/// Per-line kernel matrices for one model hypothesis. They depend only on
/// the grid, model and delay profile — not on the weights — so one stack
/// serves every covariance assembly and likelihood evaluation for a given
/// configuration.
#[derive(Debug, Clone)]
pub struct ModelKernels {
    model: ModelKind,
    lines: Vec<LineKernels>,
}

impl ModelKernels {
    pub fn compute(grid: &LineGrid, model: ModelKind, profile: &DelayProfile) -> Self {
        let kappa = grid.kappa();
        let lines = grid
            .lines()
            .iter()
            .map(|line| {
                let n = line.psi.len();
                let mut background = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
                let mut target = background.clone();
                for j in 0..n {
                    for k in j..n {
                        let hb = kernel_h_b(line.zeta, line.psi[j], line.psi[k], kappa);
                        let hx = match model {
                            ModelKind::T => {
                                kernel_h_t(line.zeta, line.psi[j], line.psi[k], kappa, profile)
                            }
                            ModelKind::S => {
                                kernel_h_s(line.zeta, line.psi[j], line.psi[k], kappa, profile)
                            }
                        };
                        // Hermitian by construction; diagonal entries real.
                        if j == k {
                            background[(j, j)] = Complex64::new(hb.re, 0.0);
                            target[(j, j)] = Complex64::new(hx.re, 0.0);
                        } else {
                            background[(j, k)] = hb;
                            background[(k, j)] = hb.conj();
                            target[(j, k)] = hx;
                            target[(k, j)] = hx.conj();
                        }
                    }
                }
                LineKernels { background, target }
            })
            .collect();
        Self { model, lines }
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn lines(&self) -> &[LineKernels] {
        &self.lines
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Per-line sample counts.
    pub fn line_sizes(&self) -> Vec<usize> {
        self.lines.iter().map(|l| l.background.nrows()).collect()
    }

    /// Assembles the real covariance matrices for the given weights.
    pub fn covariance(&self, w: &WeightVector) -> Result<CovarianceModel, StatModelError> {
        WeightVector::new(w.background, w.noise, w.target)?;
        let mut lines = Vec::with_capacity(self.lines.len());
        let mut jittered = false;
        for (idx, kernels) in self.lines.iter().enumerate() {
            let mut m = expand_line_covariance(kernels, w);
            match check_psd(&m) {
                PsdStatus::Ok => {}
                PsdStatus::Jitter { trace } => {
                    let eps = PSD_JITTER * trace;
                    for d in 0..m.nrows() {
                        m[(d, d)] += eps;
                    }
                    jittered = true;
                }
                PsdStatus::Broken { min_eig, trace } => {
                    return Err(StatModelError::NotPsd { line: idx, min_eig, trace });
                }
            }
            lines.push(m);
        }
        Ok(CovarianceModel { lines, jittered })
    }
}

/// Real covariance of the interleaved (Re, Im) sample vector on one line:
/// 2x2 blocks `(1/2) sum_a w_a [[Re H_a, -Im H_a], [Im H_a, Re H_a]]`.
fn expand_line_covariance(kernels: &LineKernels, w: &WeightVector) -> DMatrix<f64> {
    let n = kernels.background.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        for k in 0..n {
            let h = w.background * kernels.background[(j, k)]
                + w.target * kernels.target[(j, k)]
                + if j == k {
                    Complex64::new(w.noise, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
            m[(2 * j, 2 * k)] = 0.5 * h.re;
            m[(2 * j, 2 * k + 1)] = -0.5 * h.im;
            m[(2 * j + 1, 2 * k)] = 0.5 * h.im;
            m[(2 * j + 1, 2 * k + 1)] = 0.5 * h.re;
        }
    }
    m
}

enum PsdStatus {
    Ok,
    Jitter { trace: f64 },
    Broken { min_eig: f64, trace: f64 },
}

fn check_psd(m: &DMatrix<f64>) -> PsdStatus {
    let trace = m.trace();
    let eigen = m.clone().symmetric_eigen();
    let min_eig = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig >= 0.0 {
        PsdStatus::Ok
    } else if min_eig >= -PSD_TOLERANCE * trace.abs() {
        PsdStatus::Jitter { trace: trace.abs() }
    } else {
        PsdStatus::Broken { min_eig, trace }
    }
}

/// Per-line real covariance matrices of the sampled image under one model.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    /// One `2 N_m x 2 N_m` symmetric PSD matrix per line.
    pub lines: Vec<DMatrix<f64>>,
    /// Whether any line needed the documented jitter repair.
    pub jittered: bool,
}

/// One-shot covariance assembly: kernel computation followed by weighting.
/// Callers that assemble repeatedly with different weights should keep a
/// [`ModelKernels`] instead.
pub fn assemble_covariance(
    grid: &LineGrid,
    w: &WeightVector,
    model: ModelKind,
    profile: &DelayProfile,
) -> Result<CovarianceModel, StatModelError> {
    ModelKernels::compute(grid, model, profile).covariance(w)
}

// ===========================================================================
// Tests
// ===========================================================================
