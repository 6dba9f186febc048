use crate::data::WeightedSample;
use crate::error::{Error, Result};
use crate::numeric::{brent, expand_bracket};
use crate::special::{digamma_raw, zeta_pair_raw};

use super::inverse_gamma;
use super::shifted::Shifted;

pub(crate) const ALPHA_MIN: f64 = 1.0 + 1e-6;
pub(crate) const ALPHA_MAX: f64 = 60.0;

/// Conditional maximum-likelihood (alpha, beta) of the shifted Davis model
/// for a fixed shift `c`.
///
/// Alpha is solved from the log-moment equation for each trial beta, and
/// beta is then chosen to satisfy the beta score equation.
pub fn mle_davis_conditional(sample: &WeightedSample, c: f64) -> Result<(f64, f64)> {
    mle_shifted(&Shifted::new(sample, c)?)
}

/// psi(a) + zeta'(a)/zeta(a), increasing in a.
fn log_moment(a: f64) -> f64 {
    let (z, dz) = zeta_pair_raw(a);
    digamma_raw(a) + dz / z
}

/// Alpha solving psi(a) + zeta'(a)/zeta(a) = target.
pub(crate) fn alpha_given(target: f64) -> Result<f64> {
    let lo = log_moment(ALPHA_MIN);
    let hi = log_moment(ALPHA_MAX);
    if !(target > lo && target < hi) {
        return Err(Error::convergence(
            "mle_davis_conditional",
            format!("shape root outside ({ALPHA_MIN}, {ALPHA_MAX})"),
        ));
    }
    brent(|a| log_moment(a) - target, ALPHA_MIN, ALPHA_MAX, 1e-14, 300)
}

pub(crate) fn mle_shifted(s: &Shifted) -> Result<(f64, f64)> {
    let mean_ln = s.mean_of(|y| y);
    let inv_u: Vec<f64> = s.ln_u.iter().map(|y| (-y).exp()).collect();
    let n = s.n();
    // beta score: mean of y / (1 - e^-y) with y = beta / u equals alpha
    let score = |beta: f64| -> f64 {
        let alpha = match alpha_given(beta.ln() - mean_ln) {
            Ok(a) => a,
            Err(_) => return f64::NAN,
        };
        let m = inv_u
            .iter()
            .zip(s.weights())
            .map(|(&iu, &w)| {
                let y = beta * iu;
                w * y / -(-y).exp_m1()
            })
            .sum::<f64>()
            / n;
        m - alpha
    };
    let (_, beta_ig) = inverse_gamma::mle_shifted(s)?;
    let bracket = expand_bracket(&score, beta_ig / 20.0, beta_ig * 20.0, 25)
        .or_else(|| expand_bracket(&score, beta_ig * 1e-4, beta_ig * 1e4, 60))
        .ok_or_else(|| Error::convergence("mle_davis_conditional", "no sign change of the beta score"))?;
    let beta =
        if bracket.0 == bracket.1 { bracket.0 } else { brent(&score, bracket.0, bracket.1, 1e-13 * bracket.1, 300)? };
    let alpha = alpha_given(beta.ln() - mean_ln)?;
    Ok((alpha, beta))
}

/// Residuals of the two score equations at (alpha, beta): the log-moment
/// equation and the beta equation scaled by beta.
pub fn davis_score_residuals(sample: &WeightedSample, c: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let n = sample.len() as f64;
    let pairs = || sample.incomes().iter().zip(sample.weights());
    let mean_ln = pairs().map(|(x, w)| w * (x - c).ln()).sum::<f64>() / n;
    let m = pairs()
        .map(|(x, w)| {
            let y = beta / (x - c);
            w * y / -(-y).exp_m1()
        })
        .sum::<f64>()
        / n;
    (log_moment(alpha) + mean_ln - beta.ln(), m - alpha)
}
