//! Speckled coordinate-delay SAR image simulation and maximum-likelihood
//! discrimination between instantaneous and delayed point-like targets.
//!
//! A coordinate-delay SAR image extends the usual two spatial coordinates
//! with a scattering-delay argument. Its point spread function decays slowly
//! along so-called ambiguity lines, which makes a delayed scatterer look much
//! like an instantaneous one shifted downrange. This crate provides the
//! pieces needed to study how reliably the two cases can be told apart in
//! the presence of speckle:
//!
//! - [`special`] — Fresnel integrals, sinc, and the aperture integral `Phi`;
//! - [`psf`] — the closed-form point spread function, ambiguity geometry,
//!   resolution scales, and the delay detectability condition;
//! - [`statmodel`] — correlation kernels of the background, delayed (t) and
//!   instantaneous (s) scatterer models plus noise, and covariance assembly
//!   on ambiguity lines;
//! - [`montecarlo`] — deterministic, seedable sampling of image datasets,
//!   ensembles, expectation maps, and full speckle image fields;
//! - [`mle`] — Gaussian log-likelihood, constrained maximization over the
//!   scatterer weights, and the discriminant `l`;
//! - [`classify`] — binary and confidence-interval classifiers, empirical
//!   CDFs, threshold fitting, and confusion matrices;
//! - [`optimize`] — the derivative-free simplex minimizer used by [`mle`].

pub mod classify;
pub mod mle;
pub mod montecarlo;
pub mod optimize;
pub mod psf;
pub mod special;
pub mod statmodel;

pub use num_complex::Complex64;
