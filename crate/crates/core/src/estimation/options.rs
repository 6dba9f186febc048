use serde::{Deserialize, Serialize};

use crate::data::WeightedSample;
use crate::distributions::CssConstants;
use crate::error::{Error, Result};
use crate::numeric::NelderMeadOptions;

/// Grid for the brute-force shift searches (GB2 and mixture).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BruteForceGrid {
    pub c_points: usize,
    /// Pareto thresholds for the mixture, log-spaced between two weighted
    /// quantiles of income.
    pub x_m_points: usize,
    pub x_m_quantiles: [f64; 2],
    /// Extra passes, each a `refine_points` grid spanning the neighbours of
    /// the best point so far.
    pub refinements: usize,
    pub refine_points: usize,
}

impl Default for BruteForceGrid {
    fn default() -> Self {
        BruteForceGrid { c_points: 200, x_m_points: 50, x_m_quantiles: [0.5, 0.999], refinements: 0, refine_points: 9 }
    }
}

/// Search range for the cutoff income, in weighted quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSearch {
    pub k_quantiles: [f64; 2],
    pub k_grid_points: usize,
    /// Golden-section tolerance on ln(k - c).
    pub tolerance_log_k: f64,
}

impl Default for CutoffSearch {
    fn default() -> Self {
        CutoffSearch { k_quantiles: [0.3, 0.995], k_grid_points: 25, tolerance_log_k: 1e-5 }
    }
}

/// Settings for the one-parameter model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CssOptions {
    pub year: Option<i32>,
    pub constants: CssConstants,
    pub alpha_bracket: [f64; 2],
    /// Golden-section tolerance on ln(alpha).
    pub tolerance_log_alpha: f64,
}

impl Default for CssOptions {
    fn default() -> Self {
        CssOptions {
            year: None,
            constants: CssConstants::US_INCOME,
            alpha_bracket: [0.5, 30.0],
            tolerance_log_alpha: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Shift search interval; `None` picks
    /// [min - 5 (median - min), min - 1].
    pub c_bracket: Option<[f64; 2]>,
    pub tolerance_c: f64,
    pub max_iterations: usize,
    /// Uniform pre-scan points before each golden-section search.
    pub grid_points: usize,
    pub cutoff: CutoffSearch,
    pub brute_force: BruteForceGrid,
    /// Simplex settings; `x_tol` is the inner relative tolerance.
    pub nelder_mead: NelderMeadOptions,
    pub css: CssOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            c_bracket: None,
            tolerance_c: 1.0,
            max_iterations: 200,
            grid_points: 41,
            cutoff: CutoffSearch::default(),
            brute_force: BruteForceGrid::default(),
            nelder_mead: NelderMeadOptions::default(),
            css: CssOptions::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} = {v} must be positive")))
    }
}

fn quantile_pair(name: &str, q: [f64; 2]) -> Result<()> {
    if 0.0 < q[0] && q[0] < q[1] && q[1] < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{name} {q:?} must satisfy 0 < lo < hi < 1")))
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        positive("tolerance_c", self.tolerance_c)?;
        positive("nelder_mead.x_tol", self.nelder_mead.x_tol)?;
        positive("nelder_mead.initial_scale", self.nelder_mead.initial_scale)?;
        positive("cutoff.tolerance_log_k", self.cutoff.tolerance_log_k)?;
        positive("css.tolerance_log_alpha", self.css.tolerance_log_alpha)?;
        quantile_pair("cutoff.k_quantiles", self.cutoff.k_quantiles)?;
        quantile_pair("brute_force.x_m_quantiles", self.brute_force.x_m_quantiles)?;
        if let Some([lo, hi]) = self.c_bracket {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::Precondition(format!("c_bracket [{lo}, {hi}] must be increasing and finite")));
            }
        }
        let [a_lo, a_hi] = self.css.alpha_bracket;
        if !(a_lo > 0.0 && a_lo < a_hi && a_hi.is_finite()) {
            return Err(Error::Precondition(format!("css.alpha_bracket [{a_lo}, {a_hi}] invalid")));
        }
        let counts = [
            ("grid_points", self.grid_points, 3),
            ("max_iterations", self.max_iterations, 1),
            ("cutoff.k_grid_points", self.cutoff.k_grid_points, 3),
            ("brute_force.c_points", self.brute_force.c_points, 2),
            ("brute_force.x_m_points", self.brute_force.x_m_points, 2),
            ("brute_force.refine_points", self.brute_force.refine_points, 3),
        ];
        for (name, v, min) in counts {
            if v < min {
                return Err(Error::Precondition(format!("{name} = {v} must be at least {min}")));
            }
        }
        self.css.constants.validate()
    }

    /// The shift interval for `sample`, checked to lie below every income.
    pub fn resolve_bracket(&self, sample: &WeightedSample) -> Result<(f64, f64)> {
        let min = sample.min();
        let (lo, hi) = match self.c_bracket {
            Some([lo, hi]) => (lo, hi),
            None => {
                let spread = 5.0 * (sample.weighted_quantile(0.5) - min);
                let spread = if spread > 0.0 { spread } else { min.abs().max(1.0) };
                (min - spread, min - 1.0)
            }
        };
        if !(hi < min) {
            return Err(Error::Precondition(format!(
                "shift bracket upper end {hi} must lie below the smallest income {min}"
            )));
        }
        Ok((lo, hi))
    }
}
