//! Nelder-Mead simplex minimization.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
    /// Stop once the best value is at or below this.
    pub f_target: f64,
    /// Stop once every vertex is within this distance of the best one.
    pub x_tolerance: f64,
    /// Stop once the spread of values across the simplex is below this.
    pub f_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iterations: 2000,
            initial_step: 1e-2,
            f_target: f64::NEG_INFINITY,
            x_tolerance: 1e-14,
            f_tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// A stopping tolerance was met before the iteration cap.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` starting from `x0`.
///
/// The start point is a vertex of the initial simplex and the best vertex
/// never gets worse, so the returned value never exceeds `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    if dim == 0 {
        return NelderMeadResult {
            x: Vec::new(),
            f: values[0],
            iterations: 0,
            evaluations,
            converged: values[0] <= opts.f_target,
        };
    }

    let mut order: Vec<usize> = (0..=dim).collect();
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut iterations = 0;
    let mut converged = false;

    loop {
        // Stable sort keeps the earlier vertex first on ties.
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];

        if values[best] <= opts.f_target {
            converged = true;
            break;
        }
        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        if diameter <= opts.x_tolerance || spread <= opts.f_tolerance {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64, out: &mut [f64], from: &[f64]| {
            for ((o, c), x) in out.iter_mut().zip(&centroid).zip(from) {
                *o = c + t * (x - c);
            }
        };

        along(-REFLECT, &mut trial, &simplex[worst]);
        let f_reflect = eval(&trial);
        let second_worst = values[order[dim - 1]];

        if f_reflect < values[best] {
            let reflected = trial.clone();
            along(-EXPAND, &mut trial, &simplex[worst]);
            let f_expand = eval(&trial);
            if f_expand < f_reflect {
                simplex[worst].copy_from_slice(&trial);
                values[worst] = f_expand;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflect;
            }
            continue;
        }
        if f_reflect < second_worst {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_reflect;
            continue;
        }

        let outside = f_reflect < values[worst];
        if outside {
            along(-CONTRACT, &mut trial, &simplex[worst]);
        } else {
            along(CONTRACT, &mut trial, &simplex[worst]);
        }
        let f_contract = eval(&trial);
        if f_contract < values[worst].min(f_reflect) {
            simplex[worst].copy_from_slice(&trial);
            values[worst] = f_contract;
            continue;
        }

        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = order[0];
    NelderMeadResult {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &NelderMeadOptions {
                initial_step: 0.5,
                ..Default::default()
            },
        );
        assert!(r.converged);
        assert!(
            (r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 2.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions {
                initial_step: 0.1,
                max_iterations: 5000,
                ..Default::default()
            },
        );
        assert!(r.f < 1e-10, "{r:?}");
    }

    #[test]
    fn target_stops_early() {
        let r = nelder_mead(
            |x| x[0] * x[0],
            &[3.0],
            &NelderMeadOptions {
                initial_step: 1.0,
                f_target: 1e-4,
                ..Default::default()
            },
        );
        assert!(r.converged && r.f <= 1e-4);
    }

    #[test]
    fn never_worse_than_start() {
        let start = [0.3, -0.2, 1.1];
        let f = |x: &[f64]| (x[0] * 3.0).sin() + x[1].cos() * x[2];
        let f0 = f(&start);
        let r = nelder_mead(
            f,
            &start,
            &NelderMeadOptions {
                max_iterations: 7,
                ..Default::default()
            },
        );
        assert!(r.f <= f0);
    }

    #[test]
    fn zero_dimensions() {
        let r = nelder_mead(|_| 5.0, &[], &NelderMeadOptions::default());
        assert_eq!(r.f, 5.0);
        assert!(!r.converged);
        assert_eq!(r.iterations, 0);
    }
}
