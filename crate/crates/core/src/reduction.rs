//! Reduction of per-year shifted inverse-gamma estimates to the
//! constant-shift-scale model: c_t = phi * beta_t = psi0 + psi1 t + psi2 alpha_t.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::WeightedSample;
use crate::distributions::{CssConstants, ModelFamily, Params};
use crate::error::{Error, Result};
use crate::estimation::{fit, fit_css, FitOptions};

/// Inverse-gamma estimates for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub year: i32,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

/// Per-year parameter estimates, years strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SeriesEntry>", into = "Vec<SeriesEntry>")]
pub struct ParamSeries {
    entries: Vec<SeriesEntry>,
}

impl TryFrom<Vec<SeriesEntry>> for ParamSeries {
    type Error = Error;
    fn try_from(entries: Vec<SeriesEntry>) -> Result<Self> {
        ParamSeries::new(entries)
    }
}

impl From<ParamSeries> for Vec<SeriesEntry> {
    fn from(s: ParamSeries) -> Self {
        s.entries
    }
}

impl ParamSeries {
    pub fn new(entries: Vec<SeriesEntry>) -> Result<ParamSeries> {
        if entries.is_empty() {
            return Err(Error::DegenerateSeries("no years".into()));
        }
        for w in entries.windows(2) {
            if w[1].year <= w[0].year {
                return Err(Error::Precondition(format!(
                    "years must be strictly increasing: {} then {}",
                    w[0].year, w[1].year
                )));
            }
        }
        for e in &entries {
            if !(e.alpha.is_finite() && e.alpha > 0.0 && e.beta.is_finite() && e.beta > 0.0 && e.c.is_finite()) {
                return Err(Error::Parameter(format!("year {}: need alpha > 0, beta > 0, finite c", e.year)));
            }
        }
        Ok(ParamSeries { entries })
    }

    pub fn entries(&self) -> &[SeriesEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Read `year,alpha,beta,c` rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<ParamSeries> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let entries = rdr
            .deserialize()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| Error::Input(format!("series row {}: {e}", i + 1))))
            .collect::<Result<Vec<SeriesEntry>>>()?;
        ParamSeries::new(entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.entries {
            w.serialize(e).map_err(|e| Error::Input(format!("writing series: {e}")))?;
        }
        w.flush().map_err(|e| Error::Input(format!("writing series: {e}")))
    }
}

/// Each parameter divided by its sum over years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedEntry {
    pub year: i32,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

pub fn normalize_series(series: &ParamSeries) -> Result<Vec<NormalizedEntry>> {
    let sums = series.entries.iter().fold([0.0; 3], |s, e| [s[0] + e.alpha, s[1] + e.beta, s[2] + e.c]);
    for (name, s) in ["alpha", "beta", "c"].iter().zip(sums) {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::DegenerateSeries(format!("{name} sums to {s}")));
        }
    }
    Ok(series
        .entries
        .iter()
        .map(|e| NormalizedEntry { year: e.year, alpha: e.alpha / sums[0], beta: e.beta / sums[1], c: e.c / sums[2] })
        .collect())
}

/// Differences and quotients of normalized scale and shift against the
/// normalized shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedContrast {
    pub year: i32,
    pub beta_minus_alpha: f64,
    pub c_minus_alpha: f64,
    pub beta_over_alpha: f64,
    pub c_over_alpha: f64,
}

pub fn normalized_contrasts(normalized: &[NormalizedEntry]) -> Vec<NormalizedContrast> {
    normalized
        .iter()
        .map(|e| NormalizedContrast {
            year: e.year,
            beta_minus_alpha: e.beta - e.alpha,
            c_minus_alpha: e.c - e.alpha,
            beta_over_alpha: e.beta / e.alpha,
            c_over_alpha: e.c / e.alpha,
        })
        .collect()
}

/// Ratio estimator sum(c) / sum(beta).
pub fn estimate_phi(series: &ParamSeries) -> Result<f64> {
    let sb: f64 = series.entries.iter().map(|e| e.beta).sum();
    let sc: f64 = series.entries.iter().map(|e| e.c).sum();
    if sb == 0.0 {
        return Err(Error::DegenerateSeries("beta sums to zero".into()));
    }
    Ok(sc / sb)
}

/// Least squares by Householder QR after scaling columns to unit norm.
fn least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(Error::Precondition(format!("{rows} rows cannot determine {cols} coefficients")));
    }
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::SingularDesign("a design column is zero or not finite".into()));
    }
    let mut scaled = a;
    for (j, &n) in norms.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(n);
    }
    let qr = scaled.qr();
    let r = qr.r();
    let diag_max = (0..cols).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..cols).any(|i| r[(i, i)].abs() <= 1e-10 * diag_max) {
        return Err(Error::SingularDesign("design matrix is rank deficient".into()));
    }
    let qtb = qr.q().transpose() * b;
    let x = r.solve_upper_triangular(&qtb).ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;
    Ok(DVector::from_iterator(cols, x.iter().zip(&norms).map(|(v, n)| v / n)))
}

/// Whether years enter the design centered on their mean. The returned
/// psi0 always refers to raw calendar years.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsiOptions {
    pub center_years: bool,
}

/// psi minimizing ||C - A psi||^2 + ||phi B - A psi||^2 with A = [1, t, alpha].
pub fn estimate_psi(series: &ParamSeries, phi: f64) -> Result<[f64; 3]> {
    estimate_psi_with(series, phi, PsiOptions::default())
}

pub fn estimate_psi_with(series: &ParamSeries, phi: f64, options: PsiOptions) -> Result<[f64; 3]> {
    let n = series.len();
    if n < 3 {
        return Err(Error::Precondition(format!("need at least 3 years, got {n}")));
    }
    let t0 =
        if options.center_years { series.entries.iter().map(|e| e.year as f64).sum::<f64>() / n as f64 } else { 0.0 };
    let a = DMatrix::from_fn(n, 3, |i, j| {
        let e = &series.entries[i];
        match j {
            0 => 1.0,
            1 => e.year as f64 - t0,
            _ => e.alpha,
        }
    });
    let b = DVector::from_iterator(n, series.entries.iter().map(|e| 0.5 * (phi * e.beta + e.c)));
    let x = least_squares(a, b)?;
    Ok([x[0] - x[1] * t0, x[1], x[2]])
}

/// The two-term objective at `psi`.
pub fn psi_objective(series: &ParamSeries, phi: f64, psi: [f64; 3]) -> f64 {
    series
        .entries
        .iter()
        .map(|e| {
            let fit = psi[0] + psi[1] * e.year as f64 + psi[2] * e.alpha;
            (e.c - fit).powi(2) + (phi * e.beta - fit).powi(2)
        })
        .sum()
}

/// (beta, c) predicted for a year and shape. beta is negative wherever
/// the predicted shift has the same sign as phi.
pub fn predict_scale_shift(constants: &CssConstants, year: f64, alpha: f64) -> (f64, f64) {
    constants.scale_shift(year, alpha)
}

/// Whether the predicted scale is positive.
pub fn prediction_feasible(constants: &CssConstants, year: f64, alpha: f64) -> bool {
    let (beta, c) = predict_scale_shift(constants, year, alpha);
    beta > 0.0 && beta.is_finite() && c.is_finite()
}

/// Change in predicted scale split into a time part and a shape part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleChange {
    pub time_effect: f64,
    pub shape_effect: f64,
}

impl ScaleChange {
    pub fn total(&self) -> f64 {
        self.time_effect + self.shape_effect
    }
}

pub fn decompose_scale_change(constants: &CssConstants, from: (f64, f64), to: (f64, f64)) -> ScaleChange {
    ScaleChange {
        time_effect: constants.psi1 / constants.phi * (to.0 - from.0),
        shape_effect: constants.psi2 / constants.phi * (to.1 - from.1),
    }
}

/// Coefficients of c_t = phi beta_t = alpha_t (psi0 + psi1 t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionalVariant {
    pub phi: f64,
    pub psi0: f64,
    pub psi1: f64,
}

impl ProportionalVariant {
    pub fn scale_shift(&self, year: f64, alpha: f64) -> (f64, f64) {
        let c = alpha * (self.psi0 + self.psi1 * year);
        (c / self.phi, c)
    }
}

pub fn estimate_proportional_variant(series: &ParamSeries) -> Result<ProportionalVariant> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Precondition(format!("need at least 2 years, got {n}")));
    }
    let phi = estimate_phi(series)?;
    let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { series.entries[i].year as f64 });
    let b = DVector::from_iterator(n, series.entries.iter().map(|e| 0.5 * (e.c + phi * e.beta) / e.alpha));
    let x = least_squares(a, b)?;
    Ok(ProportionalVariant { phi, psi0: x[0], psi1: x[1] })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearResidual {
    pub year: i32,
    /// observed minus predicted scale
    pub beta: f64,
    /// observed minus predicted shift
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub constants: CssConstants,
    pub residuals: Vec<YearResidual>,
    pub objective: f64,
}

/// phi, psi, residuals and objective for a series.
pub fn regress(series: &ParamSeries, options: PsiOptions) -> Result<RegressionResult> {
    let phi = estimate_phi(series)?;
    let [psi0, psi1, psi2] = estimate_psi_with(series, phi, options)?;
    let constants = CssConstants { phi, psi0, psi1, psi2 };
    constants.validate()?;
    let residuals = series
        .entries
        .iter()
        .map(|e| {
            let (beta, c) = constants.scale_shift(e.year as f64, e.alpha);
            YearResidual { year: e.year, beta: e.beta - beta, c: e.c - c }
        })
        .collect();
    Ok(RegressionResult { constants, residuals, objective: psi_objective(series, phi, [psi0, psi1, psi2]) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct ReductionOptions {
    /// Used for the per-year three-parameter fits and, through its `css`
    /// block, for the one-parameter refits.
    pub fit: FitOptions,
    pub psi: PsiOptions,
}

/// Outcome for one year of the panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearOutcome {
    pub year: i32,
    pub inverse_gamma: Option<SeriesEntry>,
    pub ks_inverse_gamma: Option<f64>,
    pub css_alpha: Option<f64>,
    pub ks_css: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionResult {
    pub regression: RegressionResult,
    pub series: ParamSeries,
    pub years: Vec<YearOutcome>,
}

/// Fit the shifted inverse-gamma model to each year, regress the estimates
/// onto the constant-shift-scale law, then refit each year's shape with the
/// learned constants. Years are processed concurrently and reported in
/// ascending order.
pub fn reduction_pipeline(panel: &[(i32, WeightedSample)], options: &ReductionOptions) -> Result<ReductionResult> {
    if panel.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 years, got {}", panel.len())));
    }
    let mut order: Vec<usize> = (0..panel.len()).collect();
    order.sort_by_key(|&i| panel[i].0);
    if order.windows(2).any(|w| panel[w[0]].0 == panel[w[1]].0) {
        return Err(Error::Precondition("duplicate year in panel".into()));
    }
    options.fit.validate()?;

    let fits: Vec<Result<(SeriesEntry, f64)>> = order
        .par_iter()
        .map(|&i| {
            let (year, sample) = &panel[i];
            let f = fit(ModelFamily::InverseGamma, sample, &options.fit)?;
            match f.parameters {
                Params::InverseGamma { alpha, beta, c } => Ok((SeriesEntry { year: *year, alpha, beta, c }, f.ks_stat)),
                _ => unreachable!("inverse-gamma fit returned another family"),
            }
        })
        .collect();

    let entries: Vec<SeriesEntry> = fits.iter().filter_map(|r| r.as_ref().ok().map(|(e, _)| *e)).collect();
    if entries.len() < 3 {
        let first = fits.iter().find_map(|r| r.as_ref().err()).map(|e| e.to_string()).unwrap_or_default();
        return Err(Error::Fit(format!(
            "only {} of {} years fitted; first failure: {first}",
            entries.len(),
            panel.len()
        )));
    }
    let series = ParamSeries::new(entries)?;
    let regression = regress(&series, options.psi)?;
    let constants = regression.constants;

    let years = order
        .par_iter()
        .zip(&fits)
        .map(|(&i, three)| {
            let (year, sample) = &panel[i];
            let mut out = YearOutcome {
                year: *year,
                inverse_gamma: None,
                ks_inverse_gamma: None,
                css_alpha: None,
                ks_css: None,
                failure: None,
            };
            match three {
                Ok((e, ks)) => {
                    out.inverse_gamma = Some(*e);
                    out.ks_inverse_gamma = Some(*ks);
                }
                Err(e) => out.failure = Some(format!("inverse-gamma: {e}")),
            }
            match fit_css(sample, *year, &constants, &options.fit) {
                Ok(r) => {
                    out.css_alpha = Some(r.alpha);
                    out.ks_css = Some(r.ks_stat);
                }
                Err(e) => {
                    let msg = format!("one-parameter: {e}");
                    out.failure = Some(match out.failure.take() {
                        Some(prev) => format!("{prev}; {msg}"),
                        None => msg,
                    });
                }
            }
            out
        })
        .collect();

    Ok(ReductionResult { regression, series, years })
}
