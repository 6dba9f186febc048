use std::path::{Path, PathBuf};

use incomefit::analysis::LinearIncrement;
use incomefit::data::BinScheme;
use incomefit::distributions::CssConstants;
use incomefit::estimation::FitOptions;
use incomefit::reduction::PsiOptions;
use serde::{Deserialize, Serialize};

/// Everything a run depends on. Read from TOML, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct RunConfig {
    pub seed: u64,
    /// Not echoed: outputs must not depend on where they are written.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub fit: FitOptions,
    pub bins: BinScheme,
    pub density: DensityConfig,
    pub bootstrap: BootstrapConfig,
    pub reduce: ReduceConfig,
    pub gini: GiniConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub income_column: String,
    /// Without a weight column every row weighs 1.
    pub weight_column: Option<String>,
    pub trim_lower: usize,
    pub trim_upper: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { income_column: "income".into(), weight_column: None, trim_lower: 0, trim_upper: 0 }
    }
}

/// Evaluation grid for fitted densities beyond the binned range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DensityConfig {
    pub tail_points: usize,
    /// The tail grid runs from the largest bin edge to this multiple of it.
    pub tail_factor: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { tail_points: 40, tail_factor: 20.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapConfig {
    /// 0 disables the bootstrap.
    pub replicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct ReduceConfig {
    pub psi: PsiOptions,
    pub percent_change: LinearIncrement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GiniConfig {
    pub phi: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_step: f64,
}

impl Default for GiniConfig {
    fn default() -> Self {
        GiniConfig { phi: CssConstants::US_INCOME.phi, alpha_min: 0.6, alpha_max: 12.0, alpha_step: 0.05 }
    }
}

const MAX_GRID: f64 = 1e6;

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Range checks beyond what the types enforce.
    pub fn validate(&self) -> Result<(), String> {
        self.fit.validate().map_err(|e| format!("fit: {e}"))?;
        self.bins.validate().map_err(|e| format!("bins: {e}"))?;
        self.fit.css.constants.validate().map_err(|e| format!("fit.css.constants: {e}"))?;
        if self.data.income_column.is_empty() {
            return Err("data.income_column must not be empty".into());
        }
        let d = &self.density;
        if !(1..=100_000).contains(&d.tail_points) || !(d.tail_factor > 1.0 && d.tail_factor.is_finite()) {
            return Err("density: need 1 <= tail_points <= 100000 and finite tail_factor > 1".into());
        }
        if self.bootstrap.replicates == 1 || self.bootstrap.replicates > 100_000 {
            return Err("bootstrap.replicates must be 0 or between 2 and 100000".into());
        }
        let g = &self.gini;
        if !g.phi.is_finite() {
            return Err("gini.phi must be finite".into());
        }
        if !(g.alpha_min > 0.5 && g.alpha_max > g.alpha_min && g.alpha_max.is_finite()) {
            return Err(format!("gini: need 0.5 < alpha_min < alpha_max, got [{}, {}]", g.alpha_min, g.alpha_max));
        }
        if !(g.alpha_step > 0.0) || (g.alpha_max - g.alpha_min) / g.alpha_step > MAX_GRID {
            return Err(format!("gini.alpha_step {} is not positive or gives too many points", g.alpha_step));
        }
        Ok(())
    }
}
