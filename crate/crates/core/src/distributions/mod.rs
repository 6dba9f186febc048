//! Densities, distribution functions, quantiles, samplers and means for
//! the shifted income models.
//!
//! Every family is a translate of a distribution on `[0, ∞)`: evaluation
//! works with the shifted variable `u = x - c` and returns zero density
//! (and zero probability) for `u <= 0`.

mod davis;
mod params;
mod sampling;

pub use params::{cutoff_pareto_scale, CssConstants, ModelFamily, Params};

use crate::error::{Error, Result};
use crate::numeric::roots::bisect_increasing;
use crate::special::{
    beta_reg_raw, gamma_p_raw, gamma_q_raw, log_beta_raw, log_gamma_raw, normal_cdf, normal_cdf_inverse_raw, normal_sf,
    zeta_pair_raw,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// ln(1 + e^t) without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// 1 / (1 + e^-t)
pub(crate) fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Kernel {
    /// Inverse-gamma on u: ln f = ln_norm - beta/u - (1+alpha) ln u
    InverseGamma {
        alpha: f64,
        beta: f64,
        ln_norm: f64,
    },
    Davis {
        alpha: f64,
        beta: f64,
        ln_norm: f64,
    },
    /// GB2 on u with Dagum, Burr and Fisk as closed-form special cases.
    BetaPrime {
        alpha: f64,
        beta: f64,
        p: f64,
        q: f64,
        ln_norm: f64,
        form: BetaPrimeForm,
    },
    Cutoff {
        mu: f64,
        sigma: f64,
        alpha: f64,
        x_m: f64,
        k_shifted: f64,
        mass_below: f64,
    },
    Mixture {
        mu: f64,
        sigma: f64,
        alpha: f64,
        x_m: f64,
        lambda: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BetaPrimeForm {
    Gb2,
    Dagum,
    Burr,
    Fisk,
}

/// A validated model ready for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Model {
    params: Params,
    c: f64,
    kernel: Kernel,
}

impl Model {
    pub fn new(params: Params) -> Result<Model> {
        params.validate()?;
        let (c, kernel) = match params {
            Params::InverseGamma { alpha, beta, c } => (c, inverse_gamma_kernel(alpha, beta)),
            Params::CssInverseGamma { alpha, year, constants } => {
                let (beta, c) = constants.scale_shift(year as f64, alpha);
                (c, inverse_gamma_kernel(alpha, beta))
            }
            Params::Davis { alpha, beta, c } => {
                let (zeta, _) = zeta_pair_raw(alpha);
                let ln_norm = alpha * beta.ln() - log_gamma_raw(alpha) - zeta.ln();
                (c, Kernel::Davis { alpha, beta, ln_norm })
            }
            Params::Gb2 { alpha, beta, p, q, c } => (c, beta_prime_kernel(alpha, beta, p, q, BetaPrimeForm::Gb2)),
            Params::Dagum { alpha, beta, p, c } => (c, beta_prime_kernel(alpha, beta, p, 1.0, BetaPrimeForm::Dagum)),
            Params::Burr { alpha, beta, q, c } => (c, beta_prime_kernel(alpha, beta, 1.0, q, BetaPrimeForm::Burr)),
            Params::Fisk { alpha, beta, c } => (c, beta_prime_kernel(alpha, beta, 1.0, 1.0, BetaPrimeForm::Fisk)),
            Params::LognormalParetoCutoff { mu, sigma2, alpha, x_m, c, k } => {
                let sigma = sigma2.sqrt();
                let k_shifted = k - c;
                let mass_below = normal_cdf((k_shifted.ln() - mu) / sigma);
                (c, Kernel::Cutoff { mu, sigma, alpha, x_m, k_shifted, mass_below })
            }
            Params::LognormalParetoMixture { mu, sigma2, alpha, x_m, c, lambda } => {
                (c, Kernel::Mixture { mu, sigma: sigma2.sqrt(), alpha, x_m, lambda })
            }
        };
        Ok(Model { params, c, kernel })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn family(&self) -> ModelFamily {
        self.params.family()
    }

    /// Left endpoint of the support.
    pub fn shift(&self) -> f64 {
        self.c
    }

    /// Natural log of the density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let u = x - self.c;
        if !(u > 0.0) {
            return f64::NEG_INFINITY;
        }
        let ln_u = u.ln();
        match self.kernel {
            Kernel::InverseGamma { alpha, beta, ln_norm } => ln_norm - beta / u - (1.0 + alpha) * ln_u,
            Kernel::Davis { alpha, beta, ln_norm } => {
                let y = beta / u;
                // ln(e^y - 1) = y + ln(1 - e^-y)
                ln_norm - (y + (-(-y).exp_m1()).ln()) - (1.0 + alpha) * ln_u
            }
            Kernel::BetaPrime { alpha, beta, p, q, ln_norm, .. } => {
                let t = alpha * (ln_u - beta.ln());
                ln_norm + (alpha * p - 1.0) * ln_u - (p + q) * softplus(t)
            }
            Kernel::Cutoff { mu, sigma, alpha, x_m, k_shifted, .. } => {
                if u < k_shifted {
                    ln_lognormal(ln_u, mu, sigma)
                } else {
                    alpha.ln() + alpha * x_m.ln() - (1.0 + alpha) * ln_u
                }
            }
            Kernel::Mixture { .. } => self.pdf(x).ln(),
        }
    }

    /// Density at `x` (per dollar).
    pub fn pdf(&self, x: f64) -> f64 {
        if let Kernel::Mixture { mu, sigma, alpha, x_m, lambda } = self.kernel {
            let u = x - self.c;
            if !(u > 0.0) {
                return 0.0;
            }
            let ln_u = u.ln();
            let mut v = lambda * ln_lognormal(ln_u, mu, sigma).exp();
            if u >= x_m {
                v += (1.0 - lambda) * (alpha.ln() + alpha * x_m.ln() - (1.0 + alpha) * ln_u).exp();
            }
            return v;
        }
        self.ln_pdf(x).exp()
    }

    /// Distribution function P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        let u = x - self.c;
        if !(u > 0.0) {
            return 0.0;
        }
        if u.is_infinite() {
            return 1.0;
        }
        match self.kernel {
            Kernel::InverseGamma { alpha, beta, .. } => gamma_q_raw(alpha, beta / u),
            Kernel::Davis { alpha, beta, .. } => davis::cdf(alpha, beta, u),
            Kernel::BetaPrime { alpha, beta, p, q, form, .. } => {
                let t = alpha * (u.ln() - beta.ln());
                match form {
                    BetaPrimeForm::Fisk => logistic(t),
                    BetaPrimeForm::Dagum => logistic(t).powf(p),
                    BetaPrimeForm::Burr => -(-q * softplus(t)).exp_m1(),
                    BetaPrimeForm::Gb2 => beta_reg_raw(p, q, logistic(t), logistic(-t)),
                }
            }
            Kernel::Cutoff { mu, sigma, alpha, x_m, k_shifted, .. } => {
                if u < k_shifted {
                    normal_cdf((u.ln() - mu) / sigma)
                } else {
                    1.0 - (x_m / u).powf(alpha)
                }
            }
            Kernel::Mixture { mu, sigma, alpha, x_m, lambda } => {
                let mut v = lambda * normal_cdf((u.ln() - mu) / sigma);
                if u >= x_m {
                    v += (1.0 - lambda) * (1.0 - (x_m / u).powf(alpha));
                }
                v
            }
        }
    }

    /// Survival function P(X > x), accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let u = x - self.c;
        if !(u > 0.0) {
            return 1.0;
        }
        match self.kernel {
            Kernel::InverseGamma { alpha, beta, .. } => gamma_p_raw(alpha, beta / u),
            Kernel::BetaPrime { alpha, beta, p, q, form, .. } => {
                let t = alpha * (u.ln() - beta.ln());
                match form {
                    BetaPrimeForm::Fisk => logistic(-t),
                    BetaPrimeForm::Burr => (-q * softplus(t)).exp(),
                    BetaPrimeForm::Gb2 => beta_reg_raw(q, p, logistic(-t), logistic(t)),
                    BetaPrimeForm::Dagum => -(p * (-softplus(-t))).exp_m1(),
                }
            }
            Kernel::Cutoff { mu, sigma, alpha, x_m, k_shifted, .. } => {
                if u < k_shifted {
                    normal_sf((u.ln() - mu) / sigma)
                } else {
                    (x_m / u).powf(alpha)
                }
            }
            _ => 1.0 - self.cdf(x),
        }
    }

    /// CDF at every point of an ascending slice. Families without a closed
    /// form accumulate the integral between neighbouring points.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        match self.kernel {
            Kernel::Davis { alpha, beta, .. } => davis::cdf_sorted(alpha, beta, self.c, xs),
            _ => xs.iter().map(|&x| self.cdf(x)).collect(),
        }
    }

    /// Quantile function; `cdf(quantile(u)) = u`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::domain("quantile", format!("probability {prob} outside (0, 1)")));
        }
        Ok(self.quantile_raw(prob))
    }

    pub(crate) fn quantile_raw(&self, prob: f64) -> f64 {
        let c = self.c;
        match self.kernel {
            Kernel::BetaPrime { alpha, beta, p, q, form, .. } if form != BetaPrimeForm::Gb2 => {
                let r = match form {
                    BetaPrimeForm::Fisk => prob / (1.0 - prob),
                    BetaPrimeForm::Dagum => 1.0 / (prob.powf(-1.0 / p) - 1.0),
                    BetaPrimeForm::Burr => (-(-prob).ln_1p() / q).exp_m1(),
                    BetaPrimeForm::Gb2 => unreachable!(),
                };
                c + beta * r.powf(1.0 / alpha)
            }
            Kernel::Cutoff { mu, sigma, alpha, x_m, mass_below, .. } => {
                if prob < mass_below {
                    c + (mu + sigma * normal_cdf_inverse_raw(prob)).exp()
                } else {
                    c + x_m * (1.0 - prob).powf(-1.0 / alpha)
                }
            }
            _ => self.quantile_by_bisection(prob),
        }
    }

    /// Bisection on ln(x - c) between bracketing points found by doubling.
    fn quantile_by_bisection(&self, prob: f64) -> f64 {
        let c = self.c;
        let cdf_at = |t: f64| self.cdf(c + t.exp());
        let scale = self.typical_scale().ln();
        let mut lo = scale - 1.0;
        let mut hi = scale + 1.0;
        let mut step = 1.0;
        while cdf_at(lo) > prob && lo > -700.0 {
            step *= 2.0;
            lo -= step;
        }
        step = 1.0;
        while cdf_at(hi) < prob && hi < 700.0 {
            step *= 2.0;
            hi += step;
        }
        let t = bisect_increasing(cdf_at, prob, lo, hi, 1e-13);
        c + t.exp()
    }

    fn typical_scale(&self) -> f64 {
        match self.kernel {
            Kernel::InverseGamma { beta, .. } | Kernel::Davis { beta, .. } | Kernel::BetaPrime { beta, .. } => beta,
            Kernel::Cutoff { mu, .. } | Kernel::Mixture { mu, .. } => mu.exp(),
        }
    }

    /// Mean income, or `None` when the tail is too heavy for it to exist.
    pub fn mean(&self) -> Option<f64> {
        let c = self.c;
        match self.kernel {
            Kernel::InverseGamma { alpha, beta, .. } => (alpha > 1.0).then(|| beta / (alpha - 1.0) + c),
            Kernel::Davis { alpha, beta, .. } => (alpha > 2.0).then(|| {
                let (z, _) = zeta_pair_raw(alpha);
                let (z1, _) = zeta_pair_raw(alpha - 1.0);
                c + beta * z1 / ((alpha - 1.0) * z)
            }),
            Kernel::BetaPrime { alpha, beta, p, q, .. } => (alpha * q > 1.0).then(|| {
                let inv = 1.0 / alpha;
                c + beta * (log_beta_raw(p + inv, q - inv) - log_beta_raw(p, q)).exp()
            }),
            Kernel::Cutoff { mu, sigma, alpha, x_m, k_shifted, .. } => (alpha > 1.0).then(|| {
                let s2 = sigma * sigma;
                let below = (mu + 0.5 * s2).exp() * normal_cdf((k_shifted.ln() - mu - s2) / sigma);
                let above = alpha * x_m.powf(alpha) * k_shifted.powf(1.0 - alpha) / (alpha - 1.0);
                c + below + above
            }),
            Kernel::Mixture { mu, sigma, alpha, x_m, lambda } => (alpha > 1.0)
                .then(|| c + lambda * (mu + 0.5 * sigma * sigma).exp() + (1.0 - lambda) * alpha * x_m / (alpha - 1.0)),
        }
    }

    /// Magnitude of the asymptotic log-log slope of the density.
    pub fn tail_exponent(&self) -> f64 {
        match self.kernel {
            Kernel::InverseGamma { alpha, .. } => 1.0 + alpha,
            Kernel::Davis { alpha, .. } => alpha,
            Kernel::BetaPrime { alpha, q, .. } => 1.0 + alpha * q,
            Kernel::Cutoff { alpha, .. } | Kernel::Mixture { alpha, .. } => 1.0 + alpha,
        }
    }

    /// Draw `n` incomes deterministically from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Precondition("sample size must be at least 1".into()));
        }
        Ok(sampling::draw(self, n, seed))
    }

    pub(crate) fn kernel(&self) -> Kernel {
        self.kernel
    }
}

fn inverse_gamma_kernel(alpha: f64, beta: f64) -> Kernel {
    Kernel::InverseGamma { alpha, beta, ln_norm: alpha * beta.ln() - log_gamma_raw(alpha) }
}

fn beta_prime_kernel(alpha: f64, beta: f64, p: f64, q: f64, form: BetaPrimeForm) -> Kernel {
    Kernel::BetaPrime { alpha, beta, p, q, ln_norm: alpha.ln() - alpha * p * beta.ln() - log_beta_raw(p, q), form }
}

fn ln_lognormal(ln_u: f64, mu: f64, sigma: f64) -> f64 {
    let z = (ln_u - mu) / sigma;
    -0.5 * z * z - ln_u - sigma.ln() - LN_SQRT_2PI
}

/// Density of `params` at `x`.
pub fn pdf(params: &Params, x: f64) -> Result<f64> {
    Ok(Model::new(*params)?.pdf(x))
}

/// Distribution function of `params` at `x`.
pub fn cdf(params: &Params, x: f64) -> Result<f64> {
    Ok(Model::new(*params)?.cdf(x))
}

/// Quantile of `params` at probability `u`.
pub fn quantile(params: &Params, u: f64) -> Result<f64> {
    Model::new(*params)?.quantile(u)
}

/// `n` deterministic draws from `params`.
pub fn sample(params: &Params, n: usize, seed: u64) -> Result<Vec<f64>> {
    Model::new(*params)?.sample(n, seed)
}

/// Mean of `params`, `None` when infinite.
pub fn mean(params: &Params) -> Result<Option<f64>> {
    Ok(Model::new(*params)?.mean())
}
