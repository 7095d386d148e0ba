//! Closed-form coordinate-delay point spread function and ambiguity-line
//! geometry.
//!
//! For a chirped pulse and a circular-arc aperture, the imaging kernel
//! contracts to a function of coordinate differences:
//!
//! ```text
//! W = tau N exp(-2i w0 T0) Phi(k0t phiT dy1, k0t phiT^2 dy2) sinc(B T0),
//! T0 = (dy2 / c) sin(theta) + dt / 2,
//! ```
//!
//! with `k0t = (w0/c) sin(theta)`. Ambiguity lines are the loci
//! `T0 = const, dy1 = const`; along them only the `Phi(0, .)` factor varies,
//! which is what ultimately lets a delayed return be told apart from a
//! shifted instantaneous one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{phi, sinc};

/// Speed of light in m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Main-lobe constant of `|Phi(0, v2)|`: the lobe is conventionally taken as
/// `|v2| <= 20` (from `|Phi| ~ 1 - v2^2/360` near zero).
pub const PHI_MAIN_LOBE: f64 = 20.0;

#[derive(Debug, Error)]
pub enum PsfError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("incidence angle must lie in (0, pi/2], got {0}")]
    IncidenceAngle(f64),
    #[error("aperture angle must satisfy phi_T <= 0.5, got {0}")]
    ApertureTooWide(f64),
    #[error("scattering delay must be nonnegative, got {0}")]
    NegativeDelay(f64),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Physical radar and geometry parameters of the chirped-pulse system.
///
/// All angular frequencies are in rad/s, angles in radians, times in
/// seconds, and distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Carrier angular frequency `w0`.
    pub carrier_frequency: f64,
    /// Chirp bandwidth `B` (angular).
    pub bandwidth: f64,
    /// Chirp duration `tau`.
    pub pulse_duration: f64,
    /// Angular extent `phi_T` of the synthetic aperture.
    pub aperture_angle: f64,
    /// Incidence angle `theta`.
    pub incidence_angle: f64,
    /// Number of pulse transmit-receive locations `N`.
    pub pulse_count: f64,
    /// Standoff range `R` from the aperture center to the target.
    pub standoff_range: f64,
}

impl RadarConfig {
    /// Checks the hard constraints and returns advisory warnings for the
    /// asymptotic chirp inequalities (`B << w0`, `B tau >> 1`). The closed
    /// form is used regardless, so marginal violations only warn.
    pub fn validate(&self) -> Result<Vec<String>, PsfError> {
        let positive = [
            ("carrier_frequency", self.carrier_frequency),
            ("bandwidth", self.bandwidth),
            ("pulse_duration", self.pulse_duration),
            ("aperture_angle", self.aperture_angle),
            ("pulse_count", self.pulse_count),
            ("standoff_range", self.standoff_range),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(PsfError::NonPositive { name, value });
            }
        }
        if !(self.incidence_angle > 0.0
            && self.incidence_angle <= std::f64::consts::FRAC_PI_2)
        {
            return Err(PsfError::IncidenceAngle(self.incidence_angle));
        }
        if self.aperture_angle > 0.5 {
            return Err(PsfError::ApertureTooWide(self.aperture_angle));
        }

        let mut warnings = Vec::new();
        if self.bandwidth / self.carrier_frequency > 0.1 {
            warnings.push(format!(
                "B/w0 = {:.3} exceeds 0.1; the narrowband chirp assumption is marginal",
                self.bandwidth / self.carrier_frequency
            ));
        }
        if self.bandwidth * self.pulse_duration < 100.0 {
            warnings.push(format!(
                "B*tau = {:.3} is below 100; the large time-bandwidth assumption is marginal",
                self.bandwidth * self.pulse_duration
            ));
        }
        Ok(warnings)
    }

    /// `k0t = (w0/c) sin(theta)`, the effective wavenumber in the slant plane.
    pub fn k0_theta(&self) -> f64 {
        self.carrier_frequency / SPEED_OF_LIGHT * self.incidence_angle.sin()
    }

    /// `kappa = phi_T^2 w0 / B`, the ratio of the unambiguous-range scale to
    /// the standard range resolution.
    pub fn kappa(&self) -> f64 {
        self.aperture_angle * self.aperture_angle * self.carrier_frequency / self.bandwidth
    }

    /// Chirp rate `alpha = B / (2 tau)`.
    pub fn chirp_rate(&self) -> f64 {
        self.bandwidth / (2.0 * self.pulse_duration)
    }

    /// Radius `L = R sin(theta)` of the circular antenna trajectory.
    pub fn trajectory_radius(&self) -> f64 {
        self.standoff_range * self.incidence_angle.sin()
    }

    /// Elevation `H = R cos(theta)` of the trajectory above the target plane.
    pub fn trajectory_elevation(&self) -> f64 {
        self.standoff_range * self.incidence_angle.cos()
    }

    /// Peak modulus of the PSF, `tau N`, attained at zero offset.
    pub fn psf_peak(&self) -> f64 {
        self.pulse_duration * self.pulse_count
    }
}

// ---------------------------------------------------------------------------
// Image coordinates
// ---------------------------------------------------------------------------

/// A position in the target plane. Elevation enters only through the
/// incidence angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// Crossrange (azimuthal) coordinate `y1`.
    pub crossrange: f64,
    /// Downrange coordinate `y2`.
    pub downrange: f64,
}

/// A point in coordinate-delay image space: two spatial coordinates plus the
/// scattering-delay argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    /// Delay coordinate `t_y` in seconds.
    pub delay: f64,
    /// Crossrange coordinate `y1` in meters.
    pub crossrange: f64,
    /// Downrange coordinate `y2` in meters.
    pub downrange: f64,
}

impl ImagePoint {
    pub fn new(delay: f64, crossrange: f64, downrange: f64) -> Self {
        Self { delay, crossrange, downrange }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// `T0 = ((y2 - z2)/c) sin(theta) + (t_y - t_z)/2`: the residual two-way
/// timing mismatch at the aperture center. Ambiguity lines are `T0 = const`
/// together with fixed crossrange offset.
pub fn t_zero(p: &ImagePoint, q: &ImagePoint, cfg: &RadarConfig) -> f64 {
    (p.downrange - q.downrange) / SPEED_OF_LIGHT * cfg.incidence_angle.sin()
        + 0.5 * (p.delay - q.delay)
}

/// The coordinate-delay point spread function
/// `W = tau N exp(-2i w0 T0) Phi(k0t phiT dy1, k0t phiT^2 dy2) sinc(B T0)`.
///
/// `|W| <= tau N`, with equality at `p = q`.
pub fn psf_w(p: &ImagePoint, q: &ImagePoint, cfg: &RadarConfig) -> Complex64 {
    let t0 = t_zero(p, q, cfg);
    let k = cfg.k0_theta() * cfg.aperture_angle;
    let v1 = k * (p.crossrange - q.crossrange);
    let v2 = k * cfg.aperture_angle * (p.downrange - q.downrange);
    let carrier = Complex64::from_polar(1.0, -2.0 * cfg.carrier_frequency * t0);
    cfg.psf_peak() * carrier * phi(v1, v2) * sinc(cfg.bandwidth * t0)
}

/// The linear-in-aperture-angle approximation of [`psf_w`], which is exactly
/// constant along ambiguity lines:
/// `W_lin = tau N exp(-2i w0 T0) sinc(k0t phiT dy1) sinc(B T0)`.
pub fn psf_w_lin(p: &ImagePoint, q: &ImagePoint, cfg: &RadarConfig) -> Complex64 {
    let t0 = t_zero(p, q, cfg);
    let v1 = cfg.k0_theta() * cfg.aperture_angle * (p.crossrange - q.crossrange);
    let carrier = Complex64::from_polar(1.0, -2.0 * cfg.carrier_frequency * t0);
    cfg.psf_peak() * carrier * sinc(v1) * sinc(cfg.bandwidth * t0)
}

/// The instantaneous-scatterer position that shares an ambiguity line with a
/// delayed scatterer at `pos` with delay `t_d`:
/// `z' = z + (c t_d / (2 sin(theta))) e2`.
///
/// Rejects negative delays (causality).
pub fn ambiguous_instantaneous_location(
    delay: f64,
    pos: Position,
    cfg: &RadarConfig,
) -> Result<Position, PsfError> {
    if delay < 0.0 {
        return Err(PsfError::NegativeDelay(delay));
    }
    Ok(Position {
        crossrange: pos.crossrange,
        downrange: pos.downrange
            + SPEED_OF_LIGHT * delay / (2.0 * cfg.incidence_angle.sin()),
    })
}

/// Resolution scales of the imaging kernel, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolutions {
    /// Crossrange (azimuthal) resolution `pi / (k0t phiT)`.
    pub azimuth: f64,
    /// Standard range resolution `pi c / (B sin(theta))`.
    pub range: f64,
    /// Unambiguous-range scale `~20 / (k0t phiT^2)`: the main-lobe width of
    /// the `Phi(0, .)` factor along an ambiguity line.
    pub unambiguous: f64,
}

/// Azimuthal, range, and unambiguous-range resolutions of the configuration.
pub fn resolutions(cfg: &RadarConfig) -> Resolutions {
    let k0t = cfg.k0_theta();
    Resolutions {
        azimuth: std::f64::consts::PI / (k0t * cfg.aperture_angle),
        range: std::f64::consts::PI * SPEED_OF_LIGHT
            / (cfg.bandwidth * cfg.incidence_angle.sin()),
        unambiguous: PHI_MAIN_LOBE / (k0t * cfg.aperture_angle * cfg.aperture_angle),
    }
}

/// Whether a delayed return with delay `t_d` is detectable against the
/// range-delay ambiguity: `phi_T^2 w0 t_d >= 40`, equivalently
/// `kappa B t_d / 2 >= 20` (boundary inclusive).
pub fn delay_detectability(delay: f64, cfg: &RadarConfig) -> bool {
    cfg.aperture_angle * cfg.aperture_angle * cfg.carrier_frequency * delay
        >= 2.0 * PHI_MAIN_LOBE
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::phi_marginal;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// X-band-like test configuration with kappa = 2.5.
    fn sample_config() -> RadarConfig {
        RadarConfig {
            carrier_frequency: 6.0e10,
            bandwidth: 6.0e8,
            pulse_duration: 1.0e-5,
            aperture_angle: 0.158113883008419, // sqrt(2.5 * B / w0)
            incidence_angle: FRAC_PI_4,
            pulse_count: 2048.0,
            standoff_range: 2.0e4,
        }
    }

    #[test]
    fn validate_accepts_sample_config() {
        let warnings = sample_config().validate().unwrap();
        assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");
    }

    #[test]
    fn validate_warns_on_marginal_inequalities() {
        let mut cfg = sample_config();
        cfg.bandwidth = 0.2 * cfg.carrier_frequency;
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        cfg.pulse_duration = 1e-9;
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn validate_rejects_hard_violations() {
        let mut cfg = sample_config();
        cfg.bandwidth = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = sample_config();
        cfg.aperture_angle = 0.7;
        assert!(matches!(cfg.validate(), Err(PsfError::ApertureTooWide(_))));
        let mut cfg = sample_config();
        cfg.incidence_angle = 2.0;
        assert!(matches!(cfg.validate(), Err(PsfError::IncidenceAngle(_))));
    }

    #[test]
    fn kappa_of_sample_config() {
        assert_abs_diff_eq!(sample_config().kappa(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn t_zero_coincident_points() {
        let cfg = sample_config();
        let p = ImagePoint::new(1e-7, 3.0, 5.0);
        assert_eq!(t_zero(&p, &p, &cfg), 0.0);
    }

    #[test]
    fn t_zero_vanishes_on_ambiguity_line() {
        let cfg = sample_config();
        let q = ImagePoint::new(0.0, 1.0, 10.0);
        let dy2 = 4.0;
        let dt = -2.0 * dy2 * cfg.incidence_angle.sin() / SPEED_OF_LIGHT;
        let p = ImagePoint::new(q.delay + dt, 1.0, q.downrange + dy2);
        assert_abs_diff_eq!(t_zero(&p, &q, &cfg), 0.0, epsilon = 1e-24);
    }

    #[test]
    fn t_zero_direct_substitution() {
        let mut cfg = sample_config();
        cfg.incidence_angle = FRAC_PI_2;
        let p = ImagePoint::new(0.0, 0.0, SPEED_OF_LIGHT);
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        assert_abs_diff_eq!(t_zero(&p, &q, &cfg), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn psf_peak_at_coincident_points() {
        let cfg = sample_config();
        let p = ImagePoint::new(2e-8, -4.0, 7.0);
        let w = psf_w(&p, &p, &cfg);
        assert_abs_diff_eq!(w.re, cfg.psf_peak(), epsilon = 1e-9 * cfg.psf_peak());
        assert_abs_diff_eq!(w.im, 0.0, epsilon = 1e-9 * cfg.psf_peak());
    }

    #[test]
    fn psf_zero_at_first_crossrange_null() {
        let cfg = sample_config();
        let dy1 = PI / (cfg.k0_theta() * cfg.aperture_angle);
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        let p = ImagePoint::new(0.0, dy1, 0.0);
        assert!(psf_w(&p, &q, &cfg).norm() < 1e-8 * cfg.psf_peak());
    }

    #[test]
    fn psf_magnitude_composes_from_factors() {
        let cfg = sample_config();
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        let p = ImagePoint::new(3.0e-9, 0.04, 1.3);
        let t0 = t_zero(&p, &q, &cfg);
        let k = cfg.k0_theta() * cfg.aperture_angle;
        let expected = cfg.psf_peak()
            * phi(k * p.crossrange, k * cfg.aperture_angle * p.downrange).norm()
            * sinc(cfg.bandwidth * t0).abs();
        assert_abs_diff_eq!(psf_w(&p, &q, &cfg).norm(), expected, epsilon = 1e-9);
    }

    #[test]
    fn psf_bounded_by_peak() {
        let cfg = sample_config();
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        for i in 0..40 {
            let p = ImagePoint::new(
                1e-9 * i as f64,
                0.11 * i as f64 - 2.0,
                0.37 * i as f64 - 7.0,
            );
            assert!(psf_w(&p, &q, &cfg).norm() <= cfg.psf_peak() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn psf_depends_only_on_differences() {
        let cfg = sample_config();
        let p = ImagePoint::new(4.0e-9, 1.5, -2.0);
        let q = ImagePoint::new(1.0e-9, 0.3, 4.0);
        let w = psf_w(&p, &q, &cfg);
        for &(dt, dy1, dy2) in &[(3.3e-9, 100.0, -40.0), (-1.1e-8, -7.0, 2.5)] {
            let ps = ImagePoint::new(p.delay + dt, p.crossrange + dy1, p.downrange + dy2);
            let qs = ImagePoint::new(q.delay + dt, q.crossrange + dy1, q.downrange + dy2);
            let ws = psf_w(&ps, &qs, &cfg);
            assert!((w - ws).norm() < 1e-9 * cfg.psf_peak());
        }
    }

    #[test]
    fn psf_lin_peak_and_constancy_along_line() {
        let cfg = sample_config();
        let p = ImagePoint::new(0.0, 2.0, 3.0);
        assert_abs_diff_eq!(
            psf_w_lin(&p, &p, &cfg).re,
            cfg.psf_peak(),
            epsilon = 1e-12 * cfg.psf_peak()
        );

        // Two points on the same ambiguity line with equal crossrange.
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        let a = ImagePoint::new(0.0, 0.5, 2.0);
        let dy2 = 11.0;
        let dt = -2.0 * dy2 * cfg.incidence_angle.sin() / SPEED_OF_LIGHT;
        let b = ImagePoint::new(a.delay + dt, 0.5, a.downrange + dy2);
        assert_abs_diff_eq!(
            psf_w_lin(&a, &q, &cfg).norm(),
            psf_w_lin(&b, &q, &cfg).norm(),
            epsilon = 1e-9 * cfg.psf_peak()
        );
    }

    #[test]
    fn psf_lin_approximates_full_form_for_small_aperture() {
        // kappa -> 0: within one resolution cell the two forms agree to 1%.
        let mut cfg = sample_config();
        cfg.aperture_angle = (0.001 * cfg.bandwidth / cfg.carrier_frequency).sqrt();
        let res = resolutions(&cfg);
        let q = ImagePoint::new(0.0, 0.0, 0.0);
        for i in 0..10 {
            let frac = i as f64 / 10.0;
            let p = ImagePoint::new(0.0, frac * res.azimuth, frac * res.range);
            let diff = (psf_w(&p, &q, &cfg) - psf_w_lin(&p, &q, &cfg)).norm();
            assert!(diff / cfg.psf_peak() <= 0.01, "diff {diff} at frac {frac}");
        }
    }

    #[test]
    fn ambiguous_location_examples() {
        let cfg = sample_config();
        let z = Position { crossrange: 1.0, downrange: 2.0 };
        let same = ambiguous_instantaneous_location(0.0, z, &cfg).unwrap();
        assert_eq!(same, z);

        let mut vertical = sample_config();
        vertical.incidence_angle = FRAC_PI_2;
        let shifted =
            ambiguous_instantaneous_location(2.0 / SPEED_OF_LIGHT, z, &vertical).unwrap();
        assert_abs_diff_eq!(shifted.downrange - z.downrange, 1.0, epsilon = 1e-12);

        assert!(ambiguous_instantaneous_location(-1e-9, z, &cfg).is_err());
    }

    #[test]
    fn ambiguous_location_lies_on_ambiguity_line() {
        let cfg = sample_config();
        let z = Position { crossrange: 0.0, downrange: 5.0 };
        let td = 3.0e-8;
        let zp = ambiguous_instantaneous_location(td, z, &cfg).unwrap();
        let delayed = ImagePoint::new(td, z.crossrange, z.downrange);
        let instant = ImagePoint::new(0.0, zp.crossrange, zp.downrange);
        assert_abs_diff_eq!(t_zero(&delayed, &instant, &cfg), 0.0, epsilon = 1e-22);
    }

    #[test]
    fn resolution_scaling_laws() {
        let cfg = sample_config();
        let r1 = resolutions(&cfg);
        let mut cfg2 = cfg;
        cfg2.aperture_angle *= 2.0;
        let r2 = resolutions(&cfg2);
        assert_abs_diff_eq!(r2.azimuth, r1.azimuth / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2.unambiguous, r1.unambiguous / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2.range, r1.range, epsilon = 1e-12);
    }

    #[test]
    fn unambiguous_to_range_ratio() {
        // Delta_U / Delta_rng = 20 / (pi kappa).
        let cfg = sample_config();
        let r = resolutions(&cfg);
        assert_abs_diff_eq!(
            r.unambiguous / r.range,
            PHI_MAIN_LOBE / (PI * cfg.kappa()),
            epsilon = 1e-12
        );
    }

    #[test]
    fn detectability_condition() {
        let cfg = sample_config();
        assert!(!delay_detectability(0.0, &cfg));

        // Boundary inclusive: phi_T^2 w0 t_d = 40.
        let boundary = 40.0 / (cfg.aperture_angle.powi(2) * cfg.carrier_frequency);
        assert!(delay_detectability(boundary, &cfg));
        assert!(!delay_detectability(boundary * (1.0 - 1e-9), &cfg));

        // kappa B t_d / 2 = 25 -> detectable; 7.5 -> not.
        let td_25 = 2.0 * 25.0 / (cfg.kappa() * cfg.bandwidth);
        assert!(delay_detectability(td_25, &cfg));
        let td_75 = 2.0 * 7.5 / (cfg.kappa() * cfg.bandwidth);
        assert!(!delay_detectability(td_75, &cfg));
    }

    #[test]
    fn ambiguity_line_ratio_identity() {
        // |W(-t_d, c t_d/(2 sin) e2)| / |W(0,0)| = |Phi(0, k0t phiT^2 c t_d/(2 sin))|.
        let cfg = sample_config();
        let z = Position { crossrange: 0.0, downrange: 0.0 };
        for &td in &[1e-9, 8e-9, 5e-8] {
            let zp = ambiguous_instantaneous_location(td, z, &cfg).unwrap();
            let delayed = ImagePoint::new(td, 0.0, 0.0);
            let origin = ImagePoint::new(0.0, 0.0, 0.0);
            let image_at_shift = ImagePoint::new(0.0, zp.crossrange, zp.downrange);

            let ratio = psf_w(&image_at_shift, &delayed, &cfg).norm()
                / psf_w(&origin, &origin, &cfg).norm();
            let v2 = cfg.k0_theta()
                * cfg.aperture_angle.powi(2)
                * SPEED_OF_LIGHT
                * td
                / (2.0 * cfg.incidence_angle.sin());
            assert_abs_diff_eq!(ratio, phi_marginal(v2).norm(), epsilon = 1e-8);
        }
    }
}
