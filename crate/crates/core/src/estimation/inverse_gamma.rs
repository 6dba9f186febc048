use crate::data::WeightedSample;
use crate::error::{Error, Result};
use crate::numeric::newton_safeguarded;
use crate::special::{digamma_raw, trigamma_raw};

use super::shifted::Shifted;

/// Conditional maximum-likelihood (alpha, beta) of the shifted
/// inverse-gamma model for a fixed shift `c`.
pub fn mle_invgamma_conditional(sample: &WeightedSample, c: f64) -> Result<(f64, f64)> {
    mle_shifted(&Shifted::new(sample, c)?)
}

pub(crate) fn mle_shifted(s: &Shifted) -> Result<(f64, f64)> {
    let mean_inv = s.mean_of(|y| (-y).exp());
    let mean_ln = s.mean_of(|y| y);
    // ln(mean 1/u) - mean ln(1/u) >= 0 by Jensen; zero only for a point mass
    let k = mean_inv.ln() + mean_ln;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::convergence(
            "mle_invgamma_conditional",
            format!("score equation has no finite root (log-moment gap {k})"),
        ));
    }
    let alpha = solve_alpha(k)?;
    Ok((alpha, alpha / mean_inv))
}

/// Root of ln a - psi(a) = k. Since 1/(2a) < ln a - psi(a) < 1/a the root
/// lies in (1/(2k), 1/k).
pub(crate) fn solve_alpha(k: f64) -> Result<f64> {
    newton_safeguarded(
        |a| (a.ln() - digamma_raw(a) - k, 1.0 / a - trigamma_raw(a)),
        0.45 / k,
        1.05 / k,
        1e-14,
        0.0,
        200,
    )
}

/// Residual of the alpha score equation; used to check solutions.
pub fn invgamma_score_residual(sample: &WeightedSample, c: f64, alpha: f64) -> f64 {
    let mean_inv: f64 =
        sample.incomes().iter().zip(sample.weights()).map(|(x, w)| w / (x - c)).sum::<f64>() / sample.len() as f64;
    let mean_ln: f64 =
        sample.incomes().iter().zip(sample.weights()).map(|(x, w)| w * (x - c).ln()).sum::<f64>() / sample.len() as f64;
    alpha.ln() - digamma_raw(alpha) - mean_inv.ln() - mean_ln
}
