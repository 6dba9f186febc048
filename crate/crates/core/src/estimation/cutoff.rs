use crate::data::WeightedSample;
use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::special::{normal_pdf, normal_sf};

use super::shifted::Shifted;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEstimate {
    pub mu: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub x_m: f64,
    /// Residual of the mu equation in its summed (unnormalized) form.
    pub residual: f64,
}

/// phi(z) / (1 - Phi(z)), with the asymptotic form once the tail underflows.
fn hazard(z: f64) -> f64 {
    let sf = normal_sf(z);
    if sf > 1e-300 {
        normal_pdf(z) / sf
    } else {
        z + 1.0 / z
    }
}

/// Conditional maximum-likelihood estimate of the cutoff model for a fixed
/// shift `c` and absolute cutoff income `k`.
pub fn mle_cutoff_conditional(sample: &WeightedSample, c: f64, k: f64) -> Result<CutoffEstimate> {
    cutoff_shifted(&Shifted::new(sample, c)?.with_prefix_sums(), k)
}

struct Split {
    n_down: f64,
    n_up: f64,
    mean_y: f64,
    p0: f64,
    p1: f64,
    ell: f64,
    sum_up_y: f64,
}

fn split(s: &Shifted, k: f64) -> Result<Split> {
    if !(k > s.c) {
        return Err(Error::Precondition(format!("cutoff {k} must exceed the shift {}", s.c)));
    }
    let j = s.count_below(k);
    let len = s.ln_u.len();
    if j == 0 || j == len {
        return Err(Error::DegenerateSplit(format!("cutoff {k} leaves all weight on one side")));
    }
    let [n_down, sy, syy] = s.sums(0, j);
    let [n_up, sum_up_y, _] = s.sums(j, len);
    let ell = (k - s.c).ln();
    let mean_y = sy / n_down;
    Ok(Split { n_down, n_up, mean_y, p0: syy / n_down - ell * mean_y, p1: ell - mean_y, ell, sum_up_y })
}

impl Split {
    fn sigma(&self, mu: f64) -> f64 {
        (self.p0 + self.p1 * mu).sqrt()
    }

    /// The mu equation divided by the weight below the cutoff.
    fn equation(&self, mu: f64) -> f64 {
        let sigma = self.sigma(mu);
        let z = (self.ell - mu) / sigma;
        self.mean_y - mu + self.n_up / self.n_down * sigma * hazard(z)
    }
}

pub(crate) fn cutoff_shifted(s: &Shifted, k: f64) -> Result<CutoffEstimate> {
    let sp = split(s, k)?;
    let denom = sp.sum_up_y - sp.n_up * sp.ell;
    if !(denom > 0.0) {
        return Err(Error::Infeasible(format!("no spread above the cutoff {k}")));
    }
    let alpha = sp.n_up / denom;

    // positive at the below-cutoff mean, negative for large mu
    let lo = sp.mean_y;
    let mut step = (sp.p0 + sp.p1 * lo).max(0.0).sqrt() + sp.p1;
    let mut hi = lo + step;
    let mut tries = 0;
    while sp.equation(hi) > 0.0 {
        step *= 2.0;
        hi = lo + step;
        tries += 1;
        if tries > 80 {
            return Err(Error::convergence("mle_cutoff_conditional", "mu equation not bracketed"));
        }
    }
    let mu = brent(|m| sp.equation(m), lo, hi, 0.0, 500)?;
    let sigma2 = sp.p0 + sp.p1 * mu;
    if !(sigma2 > 0.0) {
        return Err(Error::Infeasible(format!("sigma^2 = {sigma2} at mu = {mu}")));
    }
    let z = (sp.ell - mu) / sigma2.sqrt();
    let x_m = (k - s.c) * (normal_sf(z).ln() / alpha).exp();
    Ok(CutoffEstimate { mu, sigma2, alpha, x_m, residual: sp.n_down * sp.equation(mu) })
}

/// Summed mu-equation residual at an arbitrary `mu`.
pub fn cutoff_mu_residual(sample: &WeightedSample, c: f64, k: f64, mu: f64) -> Result<f64> {
    let s = Shifted::new(sample, c)?.with_prefix_sums();
    let sp = split(&s, k)?;
    Ok(sp.n_down * sp.equation(mu))
}
