use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_sf;

/// Identifies one of the nine shifted model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    InverseGamma,
    CssInverseGamma,
    Davis,
    Gb2,
    Dagum,
    Burr,
    Fisk,
    LognormalParetoCutoff,
    LognormalParetoMixture,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 9] = [
        ModelFamily::InverseGamma,
        ModelFamily::CssInverseGamma,
        ModelFamily::Davis,
        ModelFamily::Gb2,
        ModelFamily::Dagum,
        ModelFamily::Burr,
        ModelFamily::Fisk,
        ModelFamily::LognormalParetoCutoff,
        ModelFamily::LognormalParetoMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::InverseGamma => "inverse-gamma",
            ModelFamily::CssInverseGamma => "css-inverse-gamma",
            ModelFamily::Davis => "davis",
            ModelFamily::Gb2 => "gb2",
            ModelFamily::Dagum => "dagum",
            ModelFamily::Burr => "burr",
            ModelFamily::Fisk => "fisk",
            ModelFamily::LognormalParetoCutoff => "lognormal-pareto-cutoff",
            ModelFamily::LognormalParetoMixture => "lognormal-pareto-mixture",
        }
    }

    /// Number of parameters as listed for the family. The CSS model has a
    /// single free parameter; year and constants are supplied externally.
    pub fn arity(self) -> usize {
        match self {
            ModelFamily::InverseGamma | ModelFamily::Davis | ModelFamily::Fisk => 3,
            ModelFamily::CssInverseGamma => 1,
            ModelFamily::Gb2 => 5,
            ModelFamily::Dagum | ModelFamily::Burr => 4,
            ModelFamily::LognormalParetoCutoff | ModelFamily::LognormalParetoMixture => 6,
        }
    }

    /// Parameter names in positional order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            ModelFamily::InverseGamma | ModelFamily::Davis | ModelFamily::Fisk => &["alpha", "beta", "c"],
            ModelFamily::CssInverseGamma => &["alpha"],
            ModelFamily::Gb2 => &["alpha", "beta", "p", "q", "c"],
            ModelFamily::Dagum => &["alpha", "beta", "p", "c"],
            ModelFamily::Burr => &["alpha", "beta", "q", "c"],
            ModelFamily::LognormalParetoCutoff => &["mu", "sigma2", "alpha", "x_m", "c", "k"],
            ModelFamily::LognormalParetoMixture => &["mu", "sigma2", "alpha", "x_m", "c", "lambda"],
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let family = match s.to_ascii_lowercase().as_str() {
            "inverse-gamma" | "invgamma" | "inv-gamma" => ModelFamily::InverseGamma,
            "css-inverse-gamma" | "css" => ModelFamily::CssInverseGamma,
            "davis" => ModelFamily::Davis,
            "gb2" => ModelFamily::Gb2,
            "dagum" => ModelFamily::Dagum,
            "burr" | "singh-maddala" => ModelFamily::Burr,
            "fisk" | "log-logistic" => ModelFamily::Fisk,
            "lognormal-pareto-cutoff" | "cutoff" => ModelFamily::LognormalParetoCutoff,
            "lognormal-pareto-mixture" | "mixture" => ModelFamily::LognormalParetoMixture,
            other => return Err(Error::Parameter(format!("unknown family '{other}'"))),
        };
        Ok(family)
    }
}

/// The four constants linking scale and shift to shape and year:
/// `c = phi * beta = psi0 + psi1 * year + psi2 * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CssConstants {
    pub phi: f64,
    /// dollars
    pub psi0: f64,
    /// dollars per year
    pub psi1: f64,
    /// dollars per unit of shape
    pub psi2: f64,
}

impl CssConstants {
    /// Constants estimated from U.S. personal income, 1967–2023.
    pub const US_INCOME: CssConstants = CssConstants { phi: -0.133, psi0: 727_800.0, psi1: -366.0, psi2: -2194.0 };

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.phi, self.psi0, self.psi1, self.psi2].iter().all(|v| v.is_finite());
        if !all_finite || self.phi == 0.0 {
            return Err(Error::Parameter(format!("CSS constants must be finite with phi != 0: {self:?}")));
        }
        Ok(())
    }

    /// Predicted shift `psi0 + psi1 * year + psi2 * alpha`.
    pub fn shift(&self, year: f64, alpha: f64) -> f64 {
        self.psi0 + self.psi1 * year + self.psi2 * alpha
    }

    /// Predicted (scale, shift) for a year and shape.
    pub fn scale_shift(&self, year: f64, alpha: f64) -> (f64, f64) {
        let c = self.shift(year, alpha);
        (c / self.phi, c)
    }
}

/// Parameter values for one family.
///
/// Units: `beta`, `c`, `x_m` and `k` are dollars; `mu` is log-dollars and
/// `sigma2` squared log-dollars; everything else is dimensionless.
/// For the two log-normal/Pareto models `x_m` is the Pareto scale on the
/// shifted axis (the Pareto part lives on `x - c >= x_m`), and `k` is the
/// cutoff on the income axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Params {
    InverseGamma { alpha: f64, beta: f64, c: f64 },
    CssInverseGamma { alpha: f64, year: i32, constants: CssConstants },
    Davis { alpha: f64, beta: f64, c: f64 },
    Gb2 { alpha: f64, beta: f64, p: f64, q: f64, c: f64 },
    Dagum { alpha: f64, beta: f64, p: f64, c: f64 },
    Burr { alpha: f64, beta: f64, q: f64, c: f64 },
    Fisk { alpha: f64, beta: f64, c: f64 },
    LognormalParetoCutoff { mu: f64, sigma2: f64, alpha: f64, x_m: f64, c: f64, k: f64 },
    LognormalParetoMixture { mu: f64, sigma2: f64, alpha: f64, x_m: f64, c: f64, lambda: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be positive and finite")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be finite")))
    }
}

/// Pareto scale that makes the cutoff density integrate to one.
pub fn cutoff_pareto_scale(mu: f64, sigma2: f64, alpha: f64, c: f64, k: f64) -> f64 {
    let k_shifted = k - c;
    let z = (k_shifted.ln() - mu) / sigma2.sqrt();
    k_shifted * normal_sf(z).powf(1.0 / alpha)
}

impl Params {
    pub fn family(&self) -> ModelFamily {
        match self {
            Params::InverseGamma { .. } => ModelFamily::InverseGamma,
            Params::CssInverseGamma { .. } => ModelFamily::CssInverseGamma,
            Params::Davis { .. } => ModelFamily::Davis,
            Params::Gb2 { .. } => ModelFamily::Gb2,
            Params::Dagum { .. } => ModelFamily::Dagum,
            Params::Burr { .. } => ModelFamily::Burr,
            Params::Fisk { .. } => ModelFamily::Fisk,
            Params::LognormalParetoCutoff { .. } => ModelFamily::LognormalParetoCutoff,
            Params::LognormalParetoMixture { .. } => ModelFamily::LognormalParetoMixture,
        }
    }

    /// Cutoff parameters with `x_m` derived from the unit-mass condition.
    pub fn cutoff(mu: f64, sigma2: f64, alpha: f64, c: f64, k: f64) -> Params {
        Params::LognormalParetoCutoff { mu, sigma2, alpha, x_m: cutoff_pareto_scale(mu, sigma2, alpha, c, k), c, k }
    }

    /// Build from positional values in the order of
    /// [`ModelFamily::parameter_names`]. The cutoff family also accepts five
    /// values `(mu, sigma2, alpha, c, k)`, deriving `x_m`. CSS parameters
    /// need a year and constants and are not constructible here.
    pub fn from_values(family: ModelFamily, v: &[f64]) -> Result<Params> {
        let expect = |n: usize| -> Result<()> {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{family} takes {n} parameters ({}), got {}",
                    family.parameter_names().join(", "),
                    v.len()
                )))
            }
        };
        let params = match family {
            ModelFamily::InverseGamma => {
                expect(3)?;
                Params::InverseGamma { alpha: v[0], beta: v[1], c: v[2] }
            }
            ModelFamily::CssInverseGamma => {
                return Err(Error::Parameter("css-inverse-gamma parameters need a year and constants".into()))
            }
            ModelFamily::Davis => {
                expect(3)?;
                Params::Davis { alpha: v[0], beta: v[1], c: v[2] }
            }
            ModelFamily::Gb2 => {
                expect(5)?;
                Params::Gb2 { alpha: v[0], beta: v[1], p: v[2], q: v[3], c: v[4] }
            }
            ModelFamily::Dagum => {
                expect(4)?;
                Params::Dagum { alpha: v[0], beta: v[1], p: v[2], c: v[3] }
            }
            ModelFamily::Burr => {
                expect(4)?;
                Params::Burr { alpha: v[0], beta: v[1], q: v[2], c: v[3] }
            }
            ModelFamily::Fisk => {
                expect(3)?;
                Params::Fisk { alpha: v[0], beta: v[1], c: v[2] }
            }
            ModelFamily::LognormalParetoCutoff => {
                if v.len() == 5 {
                    Params::cutoff(v[0], v[1], v[2], v[3], v[4])
                } else {
                    expect(6)?;
                    Params::LognormalParetoCutoff { mu: v[0], sigma2: v[1], alpha: v[2], x_m: v[3], c: v[4], k: v[5] }
                }
            }
            ModelFamily::LognormalParetoMixture => {
                expect(6)?;
                Params::LognormalParetoMixture { mu: v[0], sigma2: v[1], alpha: v[2], x_m: v[3], c: v[4], lambda: v[5] }
            }
        };
        params.validate()?;
        Ok(params)
    }

    /// Named parameter values in positional order.
    pub fn named_values(&self) -> Vec<(&'static str, f64)> {
        let names = self.family().parameter_names();
        names.iter().copied().zip(self.values()).collect()
    }

    /// Positional values (for CSS, only `alpha`).
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Params::InverseGamma { alpha, beta, c }
            | Params::Davis { alpha, beta, c }
            | Params::Fisk { alpha, beta, c } => {
                vec![alpha, beta, c]
            }
            Params::CssInverseGamma { alpha, .. } => vec![alpha],
            Params::Gb2 { alpha, beta, p, q, c } => vec![alpha, beta, p, q, c],
            Params::Dagum { alpha, beta, p, c } => vec![alpha, beta, p, c],
            Params::Burr { alpha, beta, q, c } => vec![alpha, beta, q, c],
            Params::LognormalParetoCutoff { mu, sigma2, alpha, x_m, c, k } => vec![mu, sigma2, alpha, x_m, c, k],
            Params::LognormalParetoMixture { mu, sigma2, alpha, x_m, c, lambda } => {
                vec![mu, sigma2, alpha, x_m, c, lambda]
            }
        }
    }

    /// Left endpoint of the support.
    pub fn shift(&self) -> f64 {
        match *self {
            Params::CssInverseGamma { alpha, year, constants } => constants.shift(year as f64, alpha),
            Params::InverseGamma { c, .. }
            | Params::Davis { c, .. }
            | Params::Gb2 { c, .. }
            | Params::Dagum { c, .. }
            | Params::Burr { c, .. }
            | Params::Fisk { c, .. }
            | Params::LognormalParetoCutoff { c, .. }
            | Params::LognormalParetoMixture { c, .. } => c,
        }
    }

    /// Copy with the shift replaced (for CSS, unchanged).
    pub fn with_shift(&self, new_c: f64) -> Params {
        let mut p = *self;
        match &mut p {
            Params::CssInverseGamma { .. } => {}
            Params::InverseGamma { c, .. }
            | Params::Davis { c, .. }
            | Params::Gb2 { c, .. }
            | Params::Dagum { c, .. }
            | Params::Burr { c, .. }
            | Params::Fisk { c, .. }
            | Params::LognormalParetoCutoff { c, .. }
            | Params::LognormalParetoMixture { c, .. } => *c = new_c,
        }
        if let Params::LognormalParetoCutoff { k, c, .. } = &mut p {
            // keep the cutoff at the same distance above the shift
            *k += *c - self.shift();
        }
        p
    }

    /// Check the family's parameter invariants.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Params::InverseGamma { alpha, beta, c } | Params::Fisk { alpha, beta, c } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                finite("c", c)
            }
            Params::Davis { alpha, beta, c } => {
                if !(alpha.is_finite() && alpha > 1.0) {
                    return Err(Error::Parameter(format!("Davis alpha = {alpha} must exceed 1")));
                }
                positive("beta", beta)?;
                finite("c", c)
            }
            Params::CssInverseGamma { alpha, year, constants } => {
                positive("alpha", alpha)?;
                constants.validate()?;
                let (beta, c) = constants.scale_shift(year as f64, alpha);
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::Parameter(format!(
                        "CSS scale is not positive at year {year}, alpha {alpha}: beta = {beta}, c = {c}"
                    )));
                }
                Ok(())
            }
            Params::Gb2 { alpha, beta, p, q, c } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("p", p)?;
                positive("q", q)?;
                finite("c", c)
            }
            Params::Dagum { alpha, beta, p, c } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("p", p)?;
                finite("c", c)
            }
            Params::Burr { alpha, beta, q, c } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("q", q)?;
                finite("c", c)
            }
            Params::LognormalParetoCutoff { mu, sigma2, alpha, x_m, c, k } => {
                finite("mu", mu)?;
                positive("sigma2", sigma2)?;
                positive("alpha", alpha)?;
                positive("x_m", x_m)?;
                finite("c", c)?;
                finite("k", k)?;
                if k <= c {
                    return Err(Error::Parameter(format!("cutoff k = {k} must exceed shift c = {c}")));
                }
                let expected = cutoff_pareto_scale(mu, sigma2, alpha, c, k);
                if ((x_m - expected) / expected).abs() > 1e-9 {
                    return Err(Error::Parameter(format!(
                        "cutoff x_m = {x_m} violates the unit-mass condition (expected {expected})"
                    )));
                }
                Ok(())
            }
            Params::LognormalParetoMixture { mu, sigma2, alpha, x_m, c, lambda } => {
                finite("mu", mu)?;
                positive("sigma2", sigma2)?;
                positive("alpha", alpha)?;
                positive("x_m", x_m)?;
                finite("c", c)?;
                if !(lambda > 0.0 && lambda < 1.0) {
                    return Err(Error::Parameter(format!("mixture lambda = {lambda} must lie in (0, 1)")));
                }
                Ok(())
            }
        }
    }
}
