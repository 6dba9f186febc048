//! Outer searches over the shift and companion parameters.

use crate::data::WeightedSample;
use crate::distributions::{Model, ModelFamily, Params};
use crate::error::{Error, Result};
use crate::numeric::grid_then_golden;

use super::beta_prime::{gb2_shifted, nm_shifted};
use super::cutoff::cutoff_shifted;
use super::ks::ks_from_cdf_values;
use super::mixture::mixture_shifted;
use super::options::FitOptions;
use super::shifted::Shifted;
use super::{davis, inverse_gamma};

/// KS distance of `params` against `sample`.
pub(crate) fn ks_of(sample: &WeightedSample, params: &Params) -> Result<f64> {
    let model = Model::new(*params)?;
    let cdf = model.cdf_sorted(sample.incomes());
    Ok(ks_from_cdf_values(sample, &cdf))
}

/// Conditional estimate plus solver bookkeeping.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Inner {
    pub params: Params,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub inner: Inner,
    pub ks: f64,
}

/// Running record of every outer evaluation.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub evaluations: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub best: Option<Candidate>,
}

impl Tally {
    /// Score one conditional fit, keeping the best; failures become NaN.
    pub fn score(&mut self, sample: &WeightedSample, inner: Result<Inner>) -> f64 {
        self.evaluations += 1;
        let scored = inner.and_then(|inner| ks_of(sample, &inner.params).map(|ks| (inner, ks)));
        match scored {
            Ok((inner, ks)) if ks.is_finite() => {
                if self.best.as_ref().is_none_or(|b| ks < b.ks) {
                    self.best = Some(Candidate { inner, ks });
                }
                ks
            }
            Ok(_) => self.fail("KS statistic is not finite".into()),
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn fail(&mut self, msg: String) -> f64 {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(msg);
        }
        f64::NAN
    }
}

/// Conditional fit of a single-outer-parameter family at shift `c`.
pub(crate) fn conditional(family: ModelFamily, sample: &WeightedSample, c: f64, options: &FitOptions) -> Result<Inner> {
    let s = Shifted::new(sample, c)?;
    match family {
        ModelFamily::InverseGamma => {
            let (alpha, beta) = inverse_gamma::mle_shifted(&s)?;
            Ok(Inner { params: Params::InverseGamma { alpha, beta, c }, iterations: 0, residual: 0.0 })
        }
        ModelFamily::Davis => {
            let (alpha, beta) = davis::mle_shifted(&s)?;
            Ok(Inner { params: Params::Davis { alpha, beta, c }, iterations: 0, residual: 0.0 })
        }
        ModelFamily::Dagum | ModelFamily::Burr | ModelFamily::Fisk => {
            let fit = nm_shifted(family, &s, &options.nelder_mead)?;
            Ok(Inner { params: fit.params, iterations: fit.iterations, residual: 0.0 })
        }
        ModelFamily::Gb2 => {
            let est = gb2_shifted(&s, &options.nelder_mead, 1.0)?;
            Ok(Inner { params: est.params, iterations: est.outer_iterations, residual: est.inner.residual })
        }
        _ => Err(Error::Precondition(format!("{family} has companion parameters"))),
    }
}

/// Golden-section search over c after a uniform pre-scan.
pub(crate) fn search_shift(
    family: ModelFamily,
    sample: &WeightedSample,
    options: &FitOptions,
    tally: &mut Tally,
) -> Result<()> {
    let (lo, hi) = options.resolve_bracket(sample)?;
    grid_then_golden(
        |c| tally.score(sample, conditional(family, sample, c, options)),
        lo,
        hi,
        options.grid_points,
        options.tolerance_c,
        options.max_iterations,
    );
    Ok(())
}

/// Nested search for the cutoff model: golden over ln(k - c) inside golden
/// over c.
pub(crate) fn search_cutoff(sample: &WeightedSample, options: &FitOptions, tally: &mut Tally) -> Result<()> {
    let (lo, hi) = options.resolve_bracket(sample)?;
    let [q_lo, q_hi] = options.cutoff.k_quantiles;
    let (k_lo, k_hi) = (sample.weighted_quantile(q_lo), sample.weighted_quantile(q_hi));
    if !(k_lo < k_hi) {
        return Err(Error::DegenerateSplit("cutoff quantile range is empty".into()));
    }
    let outer = |c: f64, tally: &mut Tally| -> f64 {
        let s = match Shifted::new(sample, c) {
            Ok(s) => s.with_prefix_sums(),
            Err(e) => return tally.score(sample, Err(e)),
        };
        let r = grid_then_golden(
            |t| {
                let k = c + t.exp();
                let inner = cutoff_shifted(&s, k).map(|e| Inner {
                    params: Params::LognormalParetoCutoff {
                        mu: e.mu,
                        sigma2: e.sigma2,
                        alpha: e.alpha,
                        x_m: e.x_m,
                        c,
                        k,
                    },
                    iterations: 0,
                    residual: e.residual,
                });
                tally.score(sample, inner)
            },
            (k_lo - c).ln(),
            (k_hi - c).ln(),
            options.cutoff.k_grid_points,
            options.cutoff.tolerance_log_k,
            options.max_iterations,
        );
        r.value
    };
    grid_then_golden(|c| outer(c, tally), lo, hi, options.grid_points, options.tolerance_c, options.max_iterations);
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Brute-force grid over c for GB2, with optional local refinement.
pub(crate) fn brute_force_shift(sample: &WeightedSample, options: &FitOptions, tally: &mut Tally) -> Result<()> {
    let (lo, hi) = options.resolve_bracket(sample)?;
    let grid = options.brute_force;
    let mut points = linspace(lo, hi, grid.c_points);
    let mut step = (hi - lo) / (grid.c_points - 1) as f64;
    for level in 0..=grid.refinements {
        let mut best = (f64::INFINITY, f64::NAN);
        for &c in &points {
            let v = tally.score(sample, conditional(ModelFamily::Gb2, sample, c, options));
            if v < best.0 {
                best = (v, c);
            }
        }
        if level == grid.refinements || !best.1.is_finite() {
            break;
        }
        let (a, b) = ((best.1 - step).max(lo), (best.1 + step).min(hi));
        points = linspace(a, b, grid.refine_points);
        step = (b - a) / (grid.refine_points - 1) as f64;
    }
    Ok(())
}

/// Brute-force grid over (c, Pareto threshold) for the mixture. The
/// threshold grid is in income, so x_m = threshold - c.
pub(crate) fn brute_force_mixture(sample: &WeightedSample, options: &FitOptions, tally: &mut Tally) -> Result<()> {
    let (lo, hi) = options.resolve_bracket(sample)?;
    let grid = options.brute_force;
    let [q_lo, q_hi] = grid.x_m_quantiles;
    let (t_lo, t_hi) = (sample.weighted_quantile(q_lo), sample.weighted_quantile(q_hi));
    if !(t_lo < t_hi && t_lo > 0.0) {
        return Err(Error::DegenerateSplit("threshold quantile range is empty or not positive".into()));
    }
    let mut cs = linspace(lo, hi, grid.c_points);
    let mut ts: Vec<f64> = linspace(t_lo.ln(), t_hi.ln(), grid.x_m_points).into_iter().map(f64::exp).collect();
    let mut c_step = (hi - lo) / (grid.c_points - 1) as f64;
    let mut t_ratio = (t_hi / t_lo).powf(1.0 / (grid.x_m_points - 1) as f64);
    for level in 0..=grid.refinements {
        let mut best = (f64::INFINITY, f64::NAN, f64::NAN);
        for &c in &cs {
            let s = match Shifted::new(sample, c) {
                Ok(s) => s.with_prefix_sums(),
                Err(e) => {
                    tally.score(sample, Err(e));
                    continue;
                }
            };
            for &t in &ts {
                let inner = mixture_shifted(&s, t - c).map(|e| Inner {
                    params: e.params,
                    iterations: e.sweeps,
                    residual: e.gamma_residual,
                });
                let v = tally.score(sample, inner);
                if v < best.0 {
                    best = (v, c, t);
                }
            }
        }
        if level == grid.refinements || !best.1.is_finite() {
            break;
        }
        let (a, b) = ((best.1 - c_step).max(lo), (best.1 + c_step).min(hi));
        let (ta, tb) = ((best.2 / t_ratio).max(t_lo), (best.2 * t_ratio).min(t_hi));
        cs = linspace(a, b, grid.refine_points);
        ts = linspace(ta.ln(), tb.ln(), grid.refine_points).into_iter().map(f64::exp).collect();
        c_step = (b - a) / (grid.refine_points - 1) as f64;
        t_ratio = (tb / ta).powf(1.0 / (grid.refine_points - 1) as f64);
    }
    Ok(())
}
