//! Special functions underlying the coordinate-delay point spread function.
//!
//! The central object is the aperture integral
//!
//! ```text
//! Phi(v1, v2) = ∫_{-1/2}^{1/2} exp(2i v1 s) exp(i v2 s^2) ds,
//! ```
//!
//! evaluated either by oscillation-aware composite quadrature ([`phi`]) or,
//! for the marginal `Phi(0, v2)`, through the closed form built on the
//! Fresnel integrals ([`phi_marginal`]). The Fresnel convention used here is
//! `C(x) = ∫_0^x cos(pi t^2 / 2) dt` and `S(x) = ∫_0^x sin(pi t^2 / 2) dt`,
//! which is the one that makes
//!
//! ```text
//! Phi(0, v2) = (C(t) + i sign(v2) S(t)) / t,   t = sqrt(|v2| / 2 pi)
//! ```
//!
//! agree with the direct quadrature of the defining integral.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Unnormalized sinc: `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

// ---------------------------------------------------------------------------
// Fresnel integrals
// ---------------------------------------------------------------------------

/// Below this argument the power series is used.
const FRESNEL_SERIES_CUTOFF: f64 = 2.5;
/// Above this argument the large-argument expansion is used; in between the
/// integral is evaluated by direct panel quadrature.
const FRESNEL_ASYMPTOTIC_CUTOFF: f64 = 4.2;

/// Fresnel integrals `(C(x), S(x))`.
///
/// Both are odd functions with `C(0) = S(0) = 0` and `C, S -> 1/2` as
/// `x -> +inf`. Absolute accuracy is better than 1e-10 over the full real
/// line.
pub fn fresnel(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax <= FRESNEL_SERIES_CUTOFF {
        fresnel_series(ax)
    } else if ax < FRESNEL_ASYMPTOTIC_CUTOFF {
        fresnel_quadrature(ax)
    } else {
        fresnel_asymptotic(ax)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Power series, accurate for |x| <= 2.5 (max term ~2e3, so roundoff stays
/// below ~1e-12).
fn fresnel_series(x: f64) -> (f64, f64) {
    let m = 0.5 * PI * x * x;
    let m2 = m * m;
    // C = x * sum (-1)^n u_n / (4n+1),  u_n = m^{2n} / (2n)!
    // S = x * sum (-1)^n v_n / (4n+3),  v_n = m^{2n+1} / (2n+1)!
    let mut u = 1.0;
    let mut v = m;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut sign = 1.0;
    for n in 0..100 {
        let tc = u / (4 * n + 1) as f64;
        let ts = v / (4 * n + 3) as f64;
        c += sign * tc;
        s += sign * ts;
        if tc < 1e-18 && ts < 1e-18 {
            break;
        }
        let k = (2 * n) as f64;
        u *= m2 / ((k + 1.0) * (k + 2.0));
        v *= m2 / ((k + 2.0) * (k + 3.0));
        sign = -sign;
    }
    (x * c, x * s)
}

/// Direct panel quadrature of `∫_0^x exp(i pi t^2 / 2) dt` for the narrow
/// band where neither the series nor the expansion reaches full accuracy.
fn fresnel_quadrature(x: f64) -> (f64, f64) {
    let phase_total = 0.5 * PI * x * x;
    let panels = (phase_total / 3.0).ceil() as usize + 1;
    let z = composite_gauss(
        &|t| Complex64::from_polar(1.0, 0.5 * PI * t * t),
        0.0,
        x,
        panels,
    );
    (z.re, z.im)
}

/// Large-argument expansion obtained by repeated integration by parts of
/// `∫_x^inf exp(i pi t^2 / 2) dt`:
///
/// ```text
/// C + iS = (1+i)/2 - e^{ia}/sqrt(2 pi) * sum_k i(-i)^k c_k a^{-(k+1/2)},
/// a = pi x^2 / 2,  c_0 = 1,  c_{k+1} = c_k (2k+1)/2.
/// ```
///
/// Truncated at the smallest term; for x >= 4.2 the floor is below 1e-12.
fn fresnel_asymptotic(x: f64) -> (f64, f64) {
    let a = 0.5 * PI * x * x;
    let mut coeff = 1.0;
    let mut rot = Complex64::new(0.0, 1.0); // i (-i)^k
    let mut apow = 1.0 / a.sqrt();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 0..64u32 {
        let mag = coeff * apow;
        if mag >= prev {
            break; // divergence onset of the asymptotic series
        }
        sum += rot * mag;
        prev = mag;
        if mag < 1e-18 {
            break;
        }
        coeff *= (2 * k + 1) as f64 / 2.0;
        apow /= a;
        rot *= Complex64::new(0.0, -1.0);
    }
    let z = Complex64::new(0.5, 0.5)
        - Complex64::from_polar(1.0, a) * sum / (2.0 * PI).sqrt();
    (z.re, z.im)
}

// ---------------------------------------------------------------------------
// The aperture integral Phi
// ---------------------------------------------------------------------------

/// Closed-form marginal `Phi(0, v2)` via the Fresnel integrals.
///
/// `Phi(0, 0) = 1`, and `|Phi(0, v2)| ~ (|v2|/pi)^{-1/2}` as `|v2| -> inf`.
pub fn phi_marginal(v2: f64) -> Complex64 {
    if v2.abs() < 1e-8 {
        // Phi(0, v2) = 1 + i v2 / 12 + O(v2^2)
        return Complex64::new(1.0, v2 / 12.0);
    }
    let t = (v2.abs() / (2.0 * PI)).sqrt();
    let (c, s) = fresnel(t);
    Complex64::new(c / t, v2.signum() * s / t)
}

/// The two-argument aperture integral
/// `Phi(v1, v2) = ∫_{-1/2}^{1/2} exp(2i v1 s + i v2 s^2) ds`.
///
/// Evaluated by composite Gauss-Legendre panels with the panel count tied to
/// the total phase excursion, refined until two successive refinements agree
/// to 1e-10. Absolute error is well below 1e-8 over the ranges of interest.
pub fn phi(v1: f64, v2: f64) -> Complex64 {
    let min_panels = 1 + ((v1.abs() + v2.abs()) / PI).ceil() as usize;
    integrate_complex(
        &|s| Complex64::from_polar(1.0, 2.0 * v1 * s + v2 * s * s),
        -0.5,
        0.5,
        min_panels,
        1e-10,
    )
}

/// Location and value of the first local minimum of `|Phi(0, .)|`,
/// bracketed by a coarse scan of [15, 30] and refined by golden-section
/// search. The location is near 23.
pub fn phi_first_minimum() -> (f64, f64) {
    let f = |v: f64| phi_marginal(v).norm();
    let (lo, hi) = {
        let step = 0.05;
        let mut bracket = (15.0, 30.0);
        let mut prev2 = f(15.0);
        let mut prev1 = f(15.0 + step);
        let mut x = 15.0 + 2.0 * step;
        while x <= 30.0 {
            let cur = f(x);
            if prev1 < prev2 && prev1 < cur {
                bracket = (x - 2.0 * step, x);
                break;
            }
            prev2 = prev1;
            prev1 = cur;
            x += step;
        }
        bracket
    };
    golden_section_min(&f, lo, hi, 1e-9)
}

fn golden_section_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

// ---------------------------------------------------------------------------
// Composite Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

const GAUSS_ORDER: usize = 16;

fn gauss_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GAUSS_ORDER))
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        loop {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn composite_gauss<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
) -> Complex64 {
    let (nodes, weights) = gauss_nodes();
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in nodes.iter().zip(weights) {
            acc += f(mid + half * x) * *w;
        }
    }
    acc * (0.5 * (b - a) / panels as f64)
}

/// Composite Gauss-Legendre quadrature of a complex-valued integrand over
/// [a, b], starting from `min_panels` panels and doubling the panel count
/// until two successive refinements agree to `tol` in absolute value.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    min_panels: usize,
    tol: f64,
) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let mut panels = min_panels.max(1);
    let mut cur = composite_gauss(f, a, b, panels);
    for _ in 0..12 {
        panels *= 2;
        let next = composite_gauss(f, a, b, panels);
        let delta = (next - cur).norm();
        cur = next;
        if delta < tol {
            break;
        }
    }
    cur
}

// ===========================================================================
// Tests
// ===========================================================================
