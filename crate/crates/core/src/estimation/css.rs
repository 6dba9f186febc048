use serde::{Deserialize, Serialize};

use crate::data::WeightedSample;
use crate::distributions::{CssConstants, Params};
use crate::error::{Error, Result};
use crate::numeric::grid_then_golden;

use super::options::FitOptions;
use super::search::ks_of;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CssFit {
    pub alpha: f64,
    pub ks_stat: f64,
    pub evaluations: usize,
}

/// Open interval of shapes for which the predicted shift lies below every
/// income and the predicted scale is positive, intersected with `bracket`.
pub fn css_feasible_alpha(
    constants: &CssConstants,
    year: i32,
    min_income: f64,
    bracket: [f64; 2],
) -> Option<(f64, f64)> {
    let base = constants.psi0 + constants.psi1 * year as f64;
    let (mut lo, mut hi) = (bracket[0], bracket[1]);
    // each condition is linear in alpha: a + b * alpha > 0
    let conditions = [(min_income - base, -constants.psi2), (base / constants.phi, constants.psi2 / constants.phi)];
    for (a, b) in conditions {
        if b == 0.0 {
            if a <= 0.0 {
                return None;
            }
        } else if b > 0.0 {
            lo = lo.max(-a / b);
        } else {
            hi = hi.min(-a / b);
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// One-step fit of the constant-shift-scale model: KS minimized directly
/// over alpha on a log scale.
pub fn fit_css(sample: &WeightedSample, year: i32, constants: &CssConstants, options: &FitOptions) -> Result<CssFit> {
    constants.validate()?;
    let (lo, hi) = css_feasible_alpha(constants, year, sample.min(), options.css.alpha_bracket)
        .ok_or_else(|| Error::Fit(format!("no shape value keeps the support below the data in {year}")))?;
    // stay strictly inside the open feasible interval
    let (lo, hi) = (lo.ln() + 1e-12, hi.ln() - 1e-12);
    if !(lo < hi) {
        return Err(Error::Fit(format!("feasible shape interval for {year} is empty")));
    }
    let mut evaluations = 0;
    let r = grid_then_golden(
        |t| {
            evaluations += 1;
            let params = Params::CssInverseGamma { alpha: t.exp(), year, constants: *constants };
            ks_of(sample, &params).unwrap_or(f64::NAN)
        },
        lo,
        hi,
        options.grid_points,
        options.css.tolerance_log_alpha,
        options.max_iterations,
    );
    if !r.value.is_finite() {
        return Err(Error::Fit(format!("every shape value failed for {year}")));
    }
    Ok(CssFit { alpha: r.x.exp(), ks_stat: r.value, evaluations })
}
