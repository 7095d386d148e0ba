//! Derivative-free simplex (Nelder-Mead) minimization.
//!
//! Small and allocation-light; the likelihood fits call this with three
//! unknowns, so no effort is spent on high-dimensional refinements.

/// Options of the simplex descent.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Relative spread of function values at which the simplex is declared
    /// converged: `2|f_hi - f_lo| <= ftol (|f_hi| + |f_lo| + tiny)`.
    pub ftol_rel: f64,
    /// Hard cap on objective evaluations.
    pub max_evals: usize,
    /// Step added to each coordinate of the start point to build the
    /// initial simplex.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { ftol_rel: 1e-9, max_evals: 2000, initial_step: 0.7 }
    }
}

/// Result of one simplex descent.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0` with the standard reflection /
/// expansion / contraction / shrink moves (coefficients 1, 2, 1/2, 1/2).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n > 0, "empty start point");

    let mut evals = 0usize;
    let eval = |f: &mut F, x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Initial simplex: x0 and x0 + step e_i.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    values.push(eval(&mut f, x0, &mut evals));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        values.push(eval(&mut f, &x, &mut evals));
        simplex.push(x);
    }

    let mut iterations = 0usize;
    let mut converged = false;

    while evals < opts.max_evals {
        iterations += 1;

        // Order the simplex by function value.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let f_lo = values[best];
        let f_hi = values[worst];
        if 2.0 * (f_hi - f_lo).abs() <= opts.ftol_rel * (f_hi.abs() + f_lo.abs() + 1e-300) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (idx, vertex) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for (c, v) in centroid.iter_mut().zip(vertex) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };

        // Reflection.
        let reflected = blend(&centroid, &simplex[worst], -1.0);
        let f_r = eval(&mut f, &reflected, &mut evals);

        if f_r < values[best] {
            // Expansion.
            let expanded = blend(&centroid, &simplex[worst], -2.0);
            let f_e = eval(&mut f, &expanded, &mut evals);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
        } else if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
        } else {
            // Contraction (outside if the reflection improved on the worst).
            let toward = if f_r < values[worst] { -0.5 } else { 0.5 };
            let contracted = blend(&centroid, &simplex[worst], toward);
            let f_c = eval(&mut f, &contracted, &mut evals);
            if f_c < values[worst].min(f_r) {
                simplex[worst] = contracted;
                values[worst] = f_c;
            } else {
                // Shrink toward the best vertex.
                let best_point = simplex[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    simplex[idx] = blend(&best_point, &simplex[idx], 0.5);
                    values[idx] = eval(&mut f, &simplex[idx], &mut evals);
                }
            }
        }
    }

    let (mut bi, mut bv) = (0usize, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v < bv {
            bi = i;
            bv = v;
        }
    }
    NelderMeadResult {
        x: simplex.swap_remove(bi),
        fx: bv,
        iterations,
        evaluations: evals,
        converged,
    }
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let res = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2) + 5.0,
            &[0.0, 0.0],
            &NelderMeadOptions::default(),
        );
        assert!(res.converged);
        assert!((res.x[0] - 3.0).abs() < 1e-4, "x0 = {}", res.x[0]);
        assert!((res.x[1] + 1.0).abs() < 1e-4, "x1 = {}", res.x[1]);
        assert!((res.fx - 5.0).abs() < 1e-8);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let res = nelder_mead(
            |x| {
                let a = 1.0 - x[0];
                let b = x[1] - x[0] * x[0];
                a * a + 100.0 * b * b
            },
            &[-1.2, 1.0],
            &NelderMeadOptions { max_evals: 4000, ..Default::default() },
        );
        assert!(res.fx < 1e-6, "fx = {}", res.fx);
    }

    #[test]
    fn respects_evaluation_budget() {
        let mut calls = 0usize;
        let res = nelder_mead(
            |x| {
                calls += 1;
                x.iter().map(|v| v * v).sum()
            },
            &[10.0, -7.0, 3.0],
            &NelderMeadOptions { max_evals: 50, ..Default::default() },
        );
        assert!(res.evaluations <= 55); // a shrink step may finish past the cap
        assert_eq!(calls, res.evaluations);
    }

    #[test]
    fn nan_objective_treated_as_infinite() {
        let res = nelder_mead(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[2.0],
            &NelderMeadOptions::default(),
        );
        assert!((res.x[0] - 1.0).abs() < 1e-4);
    }
}
