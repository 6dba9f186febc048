use crate::data::WeightedSample;
use crate::distributions::{logistic, Model, Params};
use crate::error::{Error, Result};
use crate::numeric::{brent, expand_bracket};
use crate::special::normal_cdf_inverse_raw;

use super::shifted::Shifted;

/// Grid points over (eta, 1) used to bracket fixed points of the sweep.
const LAMBDA_GRID: usize = 24;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureEstimate {
    pub params: Params,
    /// Root residual of the appendix equation in the odds gamma = lambda / (1 - lambda).
    pub gamma_residual: f64,
    /// Evaluations of the (mu, sigma) / alpha / lambda update.
    pub sweeps: usize,
}

/// Conditional estimate of the mixture model for a fixed shift `c` and
/// Pareto scale `x_m` (so the Pareto part starts at income `x_m + c`).
///
/// One sweep takes (mu, sigma) from the truncated-normal conditions at
/// a mixing weight, maximizes the likelihood in alpha, and solves the
/// mixing-weight score equation for an updated weight. The estimate is the
/// fixed point of that update with the highest likelihood.
pub fn mle_mixture_conditional(sample: &WeightedSample, c: f64, x_m: f64) -> Result<MixtureEstimate> {
    mixture_shifted(&Shifted::new(sample, c)?.with_prefix_sums(), x_m)
}

struct Setup<'s> {
    n_down: f64,
    /// ln x_m
    ell: f64,
    p1: f64,
    /// weighted mean of (ln u - ln x_m)^2 below the threshold
    q: f64,
    above_y: &'s [f64],
    above_w: &'s [f64],
}

impl Setup<'_> {
    /// (mu, sigma^2) given the share of the log-normal mass below x_m.
    fn lognormal(&self, share: f64) -> (f64, f64) {
        let z = normal_cdf_inverse_raw(share);
        let z2 = z * z;
        let disc = (z2 * z2 * self.p1 * self.p1 + 4.0 * z2 * self.q).sqrt();
        // d = ln x_m - mu has the sign of z
        let d = if z > 0.0 { 2.0 * z2 * self.q / (z2 * self.p1 + disc) } else { -0.5 * (z2 * self.p1 + disc) };
        (self.ell - d, self.q - self.p1 * d)
    }

    /// Derivative in alpha of the above-threshold log-likelihood.
    fn alpha_score(&self, alpha: f64, log_odds: f64, ln_ln: &[f64]) -> f64 {
        let ln_a = alpha.ln();
        self.above_y
            .iter()
            .zip(self.above_w)
            .zip(ln_ln)
            .map(|((&y, &w), &lln)| {
                let r = logistic(log_odds + ln_a + alpha * self.ell - (1.0 + alpha) * y - lln);
                w * r * (1.0 / alpha + self.ell - y)
            })
            .sum()
    }

    /// Score in lambda; `ln_l` holds ln(Pareto / log-normal) above x_m.
    fn lambda_score(&self, lambda: f64, ln_l: &[f64]) -> f64 {
        let mut s = self.n_down / lambda;
        for (&w, &ll) in self.above_w.iter().zip(ln_l) {
            s += w * if ll > 0.0 {
                let inv = (-ll).exp();
                (inv - 1.0) / (lambda * inv + 1.0 - lambda)
            } else {
                let l = ll.exp();
                (1.0 - l) / (lambda + (1.0 - lambda) * l)
            };
        }
        s
    }
}

struct SweepResult {
    mu: f64,
    sigma2: f64,
    alpha: f64,
    next: f64,
    gamma_residual: f64,
}

struct Sweeper<'a> {
    setup: &'a Setup<'a>,
    eta: f64,
    /// last alpha, reused to bracket the next alpha root
    alpha: f64,
    ln_ln: Vec<f64>,
    ln_l: Vec<f64>,
    sweeps: usize,
}

impl Sweeper<'_> {
    /// One (mu, sigma) / alpha / lambda cycle starting from `lambda`.
    fn sweep(&mut self, lambda: f64) -> Result<SweepResult> {
        self.sweeps += 1;
        let setup = self.setup;
        if !(lambda > self.eta) {
            return Err(Error::Infeasible(format!(
                "mixing weight {lambda} does not exceed the weight share {} below x_m",
                self.eta
            )));
        }
        let (mu, sigma2) = setup.lognormal(self.eta / lambda);
        if !(sigma2 > 0.0) {
            return Err(Error::Infeasible(format!("sigma^2 = {sigma2}")));
        }
        let sigma = sigma2.sqrt();
        for (lln, &y) in self.ln_ln.iter_mut().zip(setup.above_y) {
            let z = (y - mu) / sigma;
            *lln = -0.5 * z * z - y - sigma.ln() - LN_SQRT_2PI;
        }

        let log_odds = ((1.0 - lambda) / lambda).ln();
        let ln_ln = &self.ln_ln;
        let score = |a: f64| setup.alpha_score(a, log_odds, ln_ln);
        let bracket =
            if self.alpha.is_finite() { expand_bracket(score, self.alpha / 1.5, self.alpha * 1.5, 4) } else { None }
                .or_else(|| expand_bracket(score, 0.02, 200.0, 40))
                .ok_or_else(|| Error::convergence("mle_mixture_conditional", "alpha score not bracketed"))?;
        let alpha = if bracket.0 == bracket.1 {
            bracket.0
        } else {
            brent(score, bracket.0, bracket.1, 1e-12 * bracket.1, 300)?
        };
        self.alpha = alpha;

        let ln_a = alpha.ln();
        for ((ll, &y), &lln) in self.ln_l.iter_mut().zip(setup.above_y).zip(&self.ln_ln) {
            *ll = ln_a + alpha * setup.ell - (1.0 + alpha) * y - lln;
        }
        let hi = 1.0 - 1e-15;
        let ln_l = &self.ln_l;
        if setup.lambda_score(hi, ln_l) >= 0.0 {
            return Err(Error::convergence("mle_mixture_conditional", "mixing-weight score has no interior root"));
        }
        let next = brent(|l| setup.lambda_score(l, ln_l), 1e-12, hi, 1e-15, 300)?;
        Ok(SweepResult { mu, sigma2, alpha, next, gamma_residual: setup.lambda_score(next, ln_l) * (1.0 - next) })
    }
}

pub(crate) fn mixture_shifted(s: &Shifted, x_m: f64) -> Result<MixtureEstimate> {
    if !(x_m > 0.0) {
        return Err(Error::Precondition(format!("x_m = {x_m} must be positive")));
    }
    let j = s.count_below(x_m + s.c);
    let len = s.ln_u.len();
    if j == 0 || j == len {
        return Err(Error::DegenerateSplit(format!("threshold {} leaves all weight on one side", x_m + s.c)));
    }
    let [n_down, sy, syy] = s.sums(0, j);
    let ell = x_m.ln();
    let mean_y = sy / n_down;
    let setup = Setup {
        n_down,
        ell,
        p1: ell - mean_y,
        q: syy / n_down - 2.0 * ell * mean_y + ell * ell,
        above_y: &s.ln_u[j..],
        above_w: &s.weights()[j..],
    };
    let eta = n_down / s.n();

    let mut sweeper =
        Sweeper { setup: &setup, eta, alpha: f64::NAN, ln_ln: vec![0.0; len - j], ln_l: vec![0.0; len - j], sweeps: 0 };
    // the sweep map can have several fixed points: bracket every sign
    // change of g(lambda) - lambda on a grid over (eta, 1), solve each,
    // and keep the one with the highest likelihood
    let grid: Vec<f64> = (1..=LAMBDA_GRID).map(|i| eta + (1.0 - eta) * i as f64 / (LAMBDA_GRID + 1) as f64).collect();
    let gaps: Vec<f64> = grid.iter().map(|&l| sweeper.sweep(l).map(|r| r.next - l).unwrap_or(f64::NAN)).collect();
    let mut best: Option<(f64, SweepResult, f64)> = None;
    let mut first_error = None;
    for i in 1..grid.len() {
        let (a, b) = (gaps[i - 1], gaps[i]);
        if !(a.is_finite() && b.is_finite()) || a.signum() == b.signum() {
            continue;
        }
        let root =
            brent(|l| sweeper.sweep(l).map(|r| r.next - l).unwrap_or(f64::NAN), grid[i - 1], grid[i], 1e-13, 200);
        let settled = match root.and_then(|l| sweeper.sweep(l).map(|r| (l, r))) {
            Ok(v) => v,
            Err(e) => {
                first_error.get_or_insert(e);
                continue;
            }
        };
        let (l, r) = settled;
        let params =
            Params::LognormalParetoMixture { mu: r.mu, sigma2: r.sigma2, alpha: r.alpha, x_m, c: s.c, lambda: l };
        let Ok(model) = Model::new(params) else { continue };
        let ll: f64 = s.sample.incomes().iter().zip(s.weights()).map(|(&x, &w)| w * model.ln_pdf(x)).sum();
        if ll.is_finite() && best.as_ref().is_none_or(|b| ll > b.2) {
            best = Some((l, r, ll));
        }
    }
    let Some((lambda, settled, _)) = best else {
        return Err(first_error.unwrap_or_else(|| {
            Error::convergence("mle_mixture_conditional", "the mixing-weight update has no fixed point")
        }));
    };
    let (mu, sigma2, alpha, gamma_residual, sweeps) =
        (settled.mu, settled.sigma2, settled.alpha, settled.gamma_residual, sweeper.sweeps);
    let params = Params::LognormalParetoMixture { mu, sigma2, alpha, x_m, c: s.c, lambda };
    params.validate()?;
    Ok(MixtureEstimate { params, gamma_residual, sweeps })
}
