//! Nelder–Mead downhill simplex minimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelderMeadOptions {
    /// Relative offset of each non-initial vertex from the starting point.
    pub initial_scale: f64,
    pub reflect: f64,
    pub expand: f64,
    pub contract: f64,
    pub shrink: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the simplex diameter (infinity norm,
    /// relative to max(1, |coordinate|)).
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_scale: 0.1,
            reflect: 1.0,
            expand: 2.0,
            contract: 0.5,
            shrink: 0.5,
            max_iterations: 5000,
            x_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)))
        .fold(0.0, f64::max)
}

/// Minimize `f` starting from `x0`. Non-finite objective values are
/// treated as +infinity so the simplex retreats from infeasible regions.
///
/// Exceeding the iteration cap returns [`Error::Convergence`] carrying the
/// best vertex found.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> Result<NelderMeadResult> {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = if v[i] != 0.0 { v[i] * (1.0 + opts.initial_scale) } else { opts.initial_scale };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let mut iterations = 0;
    loop {
        // order vertices best..worst
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < opts.x_tol {
            return Ok(NelderMeadResult { x: simplex[0].clone(), value: values[0], iterations, evaluations });
        }
        if iterations >= opts.max_iterations {
            return Err(Error::Convergence {
                context: "nelder_mead",
                detail: format!("iteration cap {} reached; best value {}", opts.max_iterations, values[0]),
                best: Some(simplex[0].clone()),
            });
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };

        let reflected = along(opts.reflect);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(opts.reflect * opts.expand);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst point
        let (candidate, fc) = if fr < values[n] {
            let c = along(opts.reflect * opts.contract);
            let v = eval(&c, &mut evaluations);
            (c, v)
        } else {
            let c = along(-opts.contract);
            let v = eval(&c, &mut evaluations);
            (c, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = best[j] + opts.shrink * (simplex[i][j] - best[j]);
            }
            values[i] = eval(&simplex[i], &mut evaluations);
        }
    }
}
