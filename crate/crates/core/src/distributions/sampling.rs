use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal, Zeta};

use super::{BetaPrimeForm, Kernel, Model};

pub(super) fn draw(model: &Model, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = model.shift();
    match model.kernel() {
        Kernel::InverseGamma { alpha, beta, .. } => {
            let g = Gamma::new(alpha, 1.0).expect("validated shape");
            (0..n).map(|_| c + beta / g.sample(&mut rng)).collect()
        }
        Kernel::Davis { alpha, beta, .. } => {
            // beta / (X - c) is a Gamma(alpha, rate K) variate with K ~ Zeta(alpha)
            let g = Gamma::new(alpha, 1.0).expect("validated shape");
            let zeta = Zeta::new(alpha).expect("validated shape");
            (0..n)
                .map(|_| {
                    let k: f64 = zeta.sample(&mut rng);
                    c + beta * k / g.sample(&mut rng)
                })
                .collect()
        }
        Kernel::BetaPrime { alpha, beta, p, q, form: BetaPrimeForm::Gb2, .. } => {
            let gp = Gamma::new(p, 1.0).expect("validated shape");
            let gq = Gamma::new(q, 1.0).expect("validated shape");
            (0..n)
                .map(|_| {
                    let ratio = gp.sample(&mut rng) / gq.sample(&mut rng);
                    c + beta * ratio.powf(1.0 / alpha)
                })
                .collect()
        }
        Kernel::Mixture { mu, sigma, alpha, x_m, lambda } => (0..n)
            .map(|_| {
                if rng.random::<f64>() < lambda {
                    let z: f64 = rng.sample(StandardNormal);
                    c + (mu + sigma * z).exp()
                } else {
                    let v: f64 = rng.sample(Open01);
                    c + x_m * v.powf(-1.0 / alpha)
                }
            })
            .collect(),
        _ => (0..n).map(|_| model.quantile_raw(rng.sample(Open01))).collect(),
    }
}
