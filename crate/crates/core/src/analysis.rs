//! Inequality and income-dynamics quantities under the constant-shift-scale
//! inverse-gamma model.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::WeightedSample;
use crate::distributions::CssConstants;
use crate::error::{Error, Result};
use crate::numeric::{golden_section, integrate, integrate_to_infinity};
use crate::special::{digamma_raw, log_gamma_raw};

/// Grid step used to bracket stationary points of the Gini profile.
pub const GINI_SCAN_STEP: f64 = 0.05;

/// Shape at which 1 + (alpha - 1) phi vanishes, or None for phi = 0.
pub fn gini_singularity(phi: f64) -> Option<f64> {
    (phi != 0.0).then(|| 1.0 - 1.0 / phi)
}

/// Gini coefficient of the constant-shift-scale model,
/// Gamma(alpha - 1/2) / (sqrt(pi) Gamma(alpha) (1 + (alpha - 1) phi)).
pub fn gini_css(alpha: f64, phi: f64) -> Result<f64> {
    if !(alpha > 0.5) || !alpha.is_finite() || !phi.is_finite() {
        return Err(Error::domain(
            "gini_css",
            format!("need alpha > 1/2 and finite phi, got alpha = {alpha}, phi = {phi}"),
        ));
    }
    let denom = 1.0 + (alpha - 1.0) * phi;
    if denom.abs() <= 4.0 * f64::EPSILON * (1.0 + ((alpha - 1.0) * phi).abs()) {
        return Err(Error::Singularity { alpha });
    }
    let ratio = (log_gamma_raw(alpha - 0.5) - log_gamma_raw(alpha)).exp() / PI.sqrt();
    Ok(ratio / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GiniPoint {
    pub alpha: f64,
    /// Infinite at the singular shape.
    pub gini: f64,
}

/// Closed-form Gini over a grid of shapes for fixed phi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniProfile {
    pub phi: f64,
    pub singularity: Option<f64>,
    pub points: Vec<GiniPoint>,
    /// Shapes in the grid's range where the profile turns, excluding the
    /// singularity.
    pub stationary_points: Vec<f64>,
}

impl GiniProfile {
    pub fn new(phi: f64, alphas: &[f64]) -> Result<GiniProfile> {
        let points = alphas
            .iter()
            .map(|&alpha| match gini_css(alpha, phi) {
                Ok(gini) => Ok(GiniPoint { alpha, gini }),
                Err(Error::Singularity { .. }) => Ok(GiniPoint { alpha, gini: f64::INFINITY }),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        let (lo, hi) = alphas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let stationary_points = if hi > lo { gini_stationary_points(phi, lo, hi) } else { Vec::new() };
        Ok(GiniProfile { phi, singularity: gini_singularity(phi), points, stationary_points })
    }

    /// `alpha,gini` rows; the singular row reads `inf`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Input(format!("writing gini profile: {e}"));
        w.write_record(["alpha", "gini"]).map_err(io)?;
        for p in &self.points {
            w.write_record([p.alpha.to_string(), p.gini.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Input(format!("writing gini profile: {e}")))
    }
}

/// Shapes in [lo, hi] where the Gini profile has a local extremum, found by
/// golden section inside brackets from a scan of step [`GINI_SCAN_STEP`].
/// Brackets touching the singularity are skipped.
pub fn gini_stationary_points(phi: f64, lo: f64, hi: f64) -> Vec<f64> {
    let lo = lo.max(0.5 + 1e-9);
    if !(hi > lo) {
        return Vec::new();
    }
    let n = ((hi - lo) / GINI_SCAN_STEP).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| (lo + GINI_SCAN_STEP * i as f64).min(hi)).collect();
    let g: Vec<f64> = xs.iter().map(|&a| gini_css(a, phi).unwrap_or(f64::NAN)).collect();
    let pole = gini_singularity(phi);
    let mut out = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        let (a, b, c) = (g[i - 1], g[i], g[i + 1]);
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            continue;
        }
        if pole.is_some_and(|p| p > xs[i - 1] && p < xs[i + 1]) {
            continue;
        }
        let sign = if b <= a && b <= c {
            1.0
        } else if b >= a && b >= c {
            -1.0
        } else {
            continue;
        };
        let r = golden_section(|x| sign * gini_css(x, phi).unwrap_or(f64::NAN), xs[i - 1], xs[i + 1], 1e-10, 200);
        out.push(r.x);
    }
    out
}

/// Shape minimizing the Gini profile on [lo, hi], when it has an interior
/// minimum there.
pub fn gini_minimizer(phi: f64, lo: f64, hi: f64) -> Option<f64> {
    gini_stationary_points(phi, lo, hi)
        .into_iter()
        .filter_map(|a| gini_css(a, phi).ok().map(|g| (a, g)))
        .filter(|&(a, _)| {
            let h = 1e-4;
            let at = |x: f64| gini_css(x, phi).unwrap_or(f64::NAN);
            at(a - h) >= at(a) && at(a + h) >= at(a)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(a, _)| a)
}

/// Weighted Gini from pairwise differences, sum_ij w_i w_j |x_i - x_j| /
/// (2 n^2 mean). Negative incomes may push it above one.
pub fn gini_empirical(sample: &WeightedSample) -> Result<f64> {
    let n = sample.len() as f64;
    let mean = sample.mean();
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::domain("gini_empirical", format!("mean income is {mean}")));
    }
    // incomes are sorted: each pair contributes x_hi - x_lo once
    let (mut w_below, mut wx_below, mut total) = (0.0, 0.0, 0.0);
    for (&x, &w) in sample.incomes().iter().zip(sample.weights()) {
        total += w * (x * w_below - wx_below);
        w_below += w;
        wx_below += w * x;
    }
    Ok(total / (n * n * mean))
}

/// Mean income c (1 / (phi (alpha - 1)) + 1) of the constant-shift-scale
/// model.
pub fn per_capita_css(constants: &CssConstants, year: f64, alpha: f64) -> Result<f64> {
    constants.validate()?;
    if !(alpha > 1.0) {
        return Err(Error::domain("per_capita_css", format!("the mean is undefined for alpha = {alpha}")));
    }
    Ok(constants.shift(year, alpha) * mean_factor(constants.phi, alpha))
}

/// Change in mean income from one year to the next at fixed shape,
/// psi1 (1 / (phi (alpha - 1)) + 1).
pub fn per_capita_increment(constants: &CssConstants, alpha: f64) -> Result<f64> {
    constants.validate()?;
    if !(alpha > 1.0) {
        return Err(Error::domain("per_capita_increment", format!("the mean is undefined for alpha = {alpha}")));
    }
    Ok(constants.psi1 * mean_factor(constants.phi, alpha))
}

fn mean_factor(phi: f64, alpha: f64) -> f64 {
    1.0 / (phi * (alpha - 1.0)) + 1.0
}

/// Which scale increment the linear percent change divides by the scale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearIncrement {
    /// beta grows by psi1 per year.
    #[default]
    Psi1,
    /// beta grows by psi1 / phi per year, as the linear law implies at
    /// fixed shape.
    Psi1OverPhi,
}

/// Year-over-year relative change in incomes when the scale grows
/// linearly.
pub fn percent_change_linear(beta_t: f64, psi1: f64, phi: f64, increment: LinearIncrement) -> Result<f64> {
    if !(beta_t > 0.0) {
        return Err(Error::domain("percent_change_linear", format!("beta_t = {beta_t} must be positive")));
    }
    Ok(match increment {
        LinearIncrement::Psi1 => psi1 / beta_t,
        LinearIncrement::Psi1OverPhi => psi1 / (phi * beta_t),
    })
}

/// Relative change when the scale grows as exp(psi1 t).
pub fn percent_change_exponential(psi1: f64) -> f64 {
    psi1.exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMomentCheck {
    /// ln beta - digamma(alpha)
    pub expected: f64,
    pub measured: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseMomentCheck {
    /// alpha / beta
    pub analytic: f64,
    /// beta / alpha
    pub stated: f64,
    pub measured: f64,
    pub residual_analytic: f64,
    pub residual_stated: f64,
}

/// Maximum-entropy constraints of the shifted inverse gamma, E ln(X - c)
/// and E 1/(X - c), measured against their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxentCheck {
    pub log_moment: LogMomentCheck,
    pub inverse_moment: InverseMomentCheck,
}

fn maxent_report(alpha: f64, beta: f64, log_measured: f64, inv_measured: f64) -> MaxentCheck {
    let expected = beta.ln() - digamma_raw(alpha);
    let (analytic, stated) = (alpha / beta, beta / alpha);
    MaxentCheck {
        log_moment: LogMomentCheck { expected, measured: log_measured, residual: log_measured - expected },
        inverse_moment: InverseMomentCheck {
            analytic,
            stated,
            measured: inv_measured,
            residual_analytic: inv_measured - analytic,
            residual_stated: inv_measured - stated,
        },
    }
}

fn check_shape_scale(alpha: f64, beta: f64) -> Result<()> {
    if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("need alpha, beta > 0, got {alpha}, {beta}")))
    }
}

/// Moments by quadrature over the density. With y = beta / (x - c) the
/// shifted variable is beta / Y with Y ~ Gamma(alpha, 1), so the shift
/// drops out.
pub fn maxent_check_model(alpha: f64, beta: f64) -> Result<MaxentCheck> {
    check_shape_scale(alpha, beta)?;
    let lg = log_gamma_raw(alpha);
    let density = |y: f64| {
        if y <= 0.0 {
            0.0
        } else {
            ((alpha - 1.0) * y.ln() - y - lg).exp()
        }
    };
    let moment = |g: &dyn Fn(f64) -> f64| {
        let head = integrate(|y| g(y) * density(y), 0.0, 1.0, 1e-14, 1e-12).value;
        head + integrate_to_infinity(|y| g(y) * density(y), 1.0, 1e-14, 1e-12).value
    };
    let mean_ln_y = moment(&|y: f64| y.ln());
    let mean_y = moment(&|y: f64| y);
    Ok(maxent_report(alpha, beta, beta.ln() - mean_ln_y, mean_y / beta))
}

/// Sample moments of the shifted incomes.
pub fn maxent_check_sample(sample: &WeightedSample, alpha: f64, beta: f64, c: f64) -> Result<MaxentCheck> {
    check_shape_scale(alpha, beta)?;
    if !(c < sample.min()) {
        return Err(Error::Precondition(format!("shift {c} must lie below the smallest income {}", sample.min())));
    }
    let n = sample.len() as f64;
    let (mut sl, mut si) = (0.0, 0.0);
    for (&x, &w) in sample.incomes().iter().zip(sample.weights()) {
        let u = x - c;
        sl += w * u.ln();
        si += w / u;
    }
    Ok(maxent_report(alpha, beta, sl / n, si / n))
}
