//! Dagum, Burr and Fisk by direct Nelder–Mead likelihood maximization,
//! and GB2 by an inner (p, q) solve nested in Nelder–Mead over (alpha, beta).

use std::f64::consts::PI;

use crate::data::WeightedSample;
use crate::distributions::{softplus, ModelFamily, Params};
use crate::error::{Error, Result};
use crate::numeric::{nelder_mead, NelderMeadOptions};
use crate::special::{digamma_raw, log_beta_raw, trigamma_raw};

use super::shifted::Shifted;

/// Fisk method-of-moments guess (alpha, beta) from the mean and variance
/// of ln(x - c).
pub fn fisk_moment_guess(sample: &WeightedSample, c: f64) -> Result<(f64, f64)> {
    Ok(moment_guess(&Shifted::new(sample, c)?))
}

pub(crate) fn moment_guess(s: &Shifted) -> (f64, f64) {
    let m = s.mean_of(|y| y);
    let v = s.mean_of(|y| (y - m) * (y - m));
    (PI / (3.0 * v).sqrt(), m.exp())
}

/// Weighted mean over the sample of (softplus(-t), softplus(t)) with
/// t = alpha (ln u - ln beta).
fn tail_means(s: &Shifted, alpha: f64, beta: f64) -> (f64, f64) {
    let lb = beta.ln();
    let (mut r1, mut r2) = (0.0, 0.0);
    for (&y, &w) in s.ln_u.iter().zip(s.weights()) {
        let t = alpha * (y - lb);
        let sp = softplus(t);
        r1 += w * (sp - t);
        r2 += w * sp;
    }
    (r1 / s.n(), r2 / s.n())
}

/// Mean log-likelihood per unit weight of the GB2 kernel.
fn mean_loglik(mean_ln: f64, alpha: f64, p: f64, q: f64, r1: f64, r2: f64) -> f64 {
    alpha.ln() - mean_ln - log_beta_raw(p, q) - p * r1 - q * r2
}

/// Free parameters of a Nelder–Mead family, in simplex order.
fn unpack(family: ModelFamily, v: &[f64], c: f64) -> Option<Params> {
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return None;
    }
    Some(match family {
        ModelFamily::Fisk => Params::Fisk { alpha: v[0], beta: v[1], c },
        ModelFamily::Dagum => Params::Dagum { alpha: v[0], beta: v[1], p: v[2], c },
        ModelFamily::Burr => Params::Burr { alpha: v[0], beta: v[1], q: v[2], c },
        _ => return None,
    })
}

pub(crate) struct NmFit {
    pub params: Params,
    pub iterations: usize,
}

/// Conditional maximum-likelihood fit of Dagum, Burr or Fisk for a fixed
/// shift, starting Nelder–Mead at the Fisk moment guess with p = q = 1.
pub fn mle_nelder_mead(
    family: ModelFamily,
    sample: &WeightedSample,
    c: f64,
    opts: &NelderMeadOptions,
) -> Result<Params> {
    Ok(nm_shifted(family, &Shifted::new(sample, c)?, opts)?.params)
}

pub(crate) fn nm_shifted(family: ModelFamily, s: &Shifted, opts: &NelderMeadOptions) -> Result<NmFit> {
    if !matches!(family, ModelFamily::Fisk | ModelFamily::Dagum | ModelFamily::Burr) {
        return Err(Error::Precondition(format!("{family} is not fitted by Nelder–Mead")));
    }
    let (a0, b0) = moment_guess(s);
    let x0: Vec<f64> = if family == ModelFamily::Fisk { vec![a0, b0] } else { vec![a0, b0, 1.0] };
    let mean_ln = s.mean_of(|y| y);
    let objective = |v: &[f64]| -> f64 {
        let Some(params) = unpack(family, v, s.c) else {
            return f64::INFINITY;
        };
        let (p, q) = match params {
            Params::Dagum { p, .. } => (p, 1.0),
            Params::Burr { q, .. } => (1.0, q),
            _ => (1.0, 1.0),
        };
        let (r1, r2) = tail_means(s, v[0], v[1]);
        -mean_loglik(mean_ln, v[0], p, q, r1, r2)
    };
    let r = nelder_mead(objective, &x0, opts)?;
    let params =
        unpack(family, &r.x, s.c).ok_or_else(|| Error::convergence("mle_nelder_mead", "left the parameter domain"))?;
    Ok(NmFit { params, iterations: r.iterations })
}

/// Maximizer of -p r1 - q r2 - ln B(p, q), the GB2 (p, q) likelihood
/// conditions for fixed (alpha, beta, c).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqSolution {
    pub p: f64,
    pub q: f64,
    pub iterations: usize,
    /// Largest absolute score-equation residual.
    pub residual: f64,
}

pub fn solve_pq(r1: f64, r2: f64) -> Result<PqSolution> {
    let f = |p: f64, q: f64| -p * r1 - q * r2 - log_beta_raw(p, q);
    let (mut p, mut q) = (1.0, 1.0);
    let mut fv = f(p, q);
    for it in 0..200 {
        let dpq = digamma_raw(p + q);
        let gp = dpq - digamma_raw(p) - r1;
        let gq = dpq - digamma_raw(q) - r2;
        let residual = gp.abs().max(gq.abs());
        if residual < 1e-12 {
            return Ok(PqSolution { p, q, iterations: it, residual });
        }
        let t = trigamma_raw(p + q);
        let (hpp, hqq, hpq) = (t - trigamma_raw(p), t - trigamma_raw(q), t);
        let det = hpp * hqq - hpq * hpq;
        // Newton direction -H^{-1} g; H is negative definite
        let (mut dp, mut dq) = (-(hqq * gp - hpq * gq) / det, -(hpp * gq - hpq * gp) / det);
        let mut accepted = false;
        for _ in 0..60 {
            let (np, nq) = (p + dp, q + dq);
            if np > 0.0 && nq > 0.0 {
                let nf = f(np, nq);
                if nf >= fv - 1e-15 * fv.abs() {
                    p = np;
                    q = nq;
                    fv = nf;
                    accepted = true;
                    break;
                }
            }
            dp *= 0.5;
            dq *= 0.5;
        }
        if !accepted || p > 1e8 || q > 1e8 {
            return Err(Error::Convergence {
                context: "gb2 (p, q) solve",
                detail: format!("stalled at p = {p}, q = {q} with residual {residual}"),
                best: Some(vec![p, q]),
            });
        }
    }
    Err(Error::convergence("gb2 (p, q) solve", "iteration cap reached"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gb2Estimate {
    pub params: Params,
    pub inner: PqSolution,
    pub outer_iterations: usize,
}

/// Conditional GB2 estimate for a fixed shift.
pub fn mle_gb2_conditional(sample: &WeightedSample, c: f64, opts: &NelderMeadOptions) -> Result<Gb2Estimate> {
    gb2_shifted(&Shifted::new(sample, c)?, opts, 1.0)
}

/// `perturb` scales the starting alpha; 1 gives the prescribed start.
pub(crate) fn gb2_shifted(s: &Shifted, opts: &NelderMeadOptions, perturb: f64) -> Result<Gb2Estimate> {
    let (a0, b0) = moment_guess(s);
    let mean_ln = s.mean_of(|y| y);
    let objective = |v: &[f64]| -> f64 {
        if !(v[0] > 0.0 && v[1] > 0.0) {
            return f64::INFINITY;
        }
        let (r1, r2) = tail_means(s, v[0], v[1]);
        match solve_pq(r1, r2) {
            Ok(pq) => -mean_loglik(mean_ln, v[0], pq.p, pq.q, r1, r2),
            Err(_) => f64::INFINITY,
        }
    };
    let r = nelder_mead(objective, &[a0 * perturb, b0], opts)?;
    if !r.value.is_finite() {
        return Err(Error::convergence("mle_gb2_conditional", "no finite likelihood found"));
    }
    let (alpha, beta) = (r.x[0], r.x[1]);
    let (r1, r2) = tail_means(s, alpha, beta);
    let inner = solve_pq(r1, r2)?;
    Ok(Gb2Estimate {
        params: Params::Gb2 { alpha, beta, p: inner.p, q: inner.q, c: s.c },
        inner,
        outer_iterations: r.iterations,
    })
}

/// Residuals of the two GB2 (p, q) score equations at `params`.
pub fn gb2_score_residuals(sample: &WeightedSample, params: &Params) -> Result<(f64, f64)> {
    let Params::Gb2 { alpha, beta, p, q, c } = *params else {
        return Err(Error::Precondition("expected GB2 parameters".into()));
    };
    let s = Shifted::new(sample, c)?;
    let (r1, r2) = tail_means(&s, alpha, beta);
    let dpq = digamma_raw(p + q);
    Ok((dpq - digamma_raw(p) - r1, dpq - digamma_raw(q) - r2))
}
