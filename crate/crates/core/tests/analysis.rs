mod common;

use common::*;
use incomefit::analysis::*;
use incomefit::distributions::{CssConstants, Model, Params};
use proptest::prelude::*;

const K: CssConstants = CssConstants::US_INCOME;

fn unshifted_gini(alpha: f64) -> f64 {
    (ln_gamma_stirling(alpha - 0.5) - ln_gamma_stirling(alpha)).exp() / std::f64::consts::PI.sqrt()
}

fn sorted_draws(alpha: f64, beta: f64, c: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut xs = Model::new(Params::InverseGamma { alpha, beta, c }).unwrap().sample(n, seed).unwrap();
    xs.sort_by(f64::total_cmp);
    xs
}

#[test]
fn css_gini_unshifted_limit() {
    assert!((gini_css(1.0, 0.0).unwrap() - 1.0).abs() < 1e-14);
    for alpha in [0.75, 1.5, 2.0, 3.0, 7.5, 20.0] {
        assert!(rel_err(gini_css(alpha, 0.0).unwrap(), unshifted_gini(alpha)) < 1e-12);
    }
    assert_eq!(gini_css(0.5, 0.0).unwrap_err().kind(), "domain");
    assert_eq!(gini_css(0.3, -0.133).unwrap_err().kind(), "domain");
}

#[test]
fn css_gini_formula() {
    for phi in [-0.5, -0.133, 0.2, 1.0] {
        for alpha in [1.2, 2.0, 3.3, 6.0] {
            let expected = unshifted_gini(alpha) / (1.0 + (alpha - 1.0) * phi);
            assert!(rel_err(gini_css(alpha, phi).unwrap(), expected) < 1e-12);
        }
    }
}

#[test]
fn singularity_location_and_divergence() {
    let star = gini_singularity(-0.133).unwrap();
    assert!((star - 8.519).abs() < 1e-3, "{star}");
    assert_eq!(star, 1.0 - 1.0 / -0.133);
    for d in [1e-3, 5e-4, 1e-5] {
        assert!(gini_css(star - d, -0.133).unwrap().abs() > 1e3);
        assert!(gini_css(star + d, -0.133).unwrap().abs() > 1e3);
    }
    assert!(gini_css(star - 1e-4, -0.133).unwrap() > 0.0);
    assert!(gini_css(star + 1e-4, -0.133).unwrap() < 0.0);
    assert_eq!(gini_css(3.0, -0.5).unwrap_err().kind(), "singularity");
    assert!(gini_singularity(0.0).is_none());
}

#[test]
fn minimizer_below_singularity() {
    let m = gini_minimizer(-0.133, 0.5, 8.0).unwrap();
    assert!(m > 3.0 && m < 4.0, "{m}");
    let g = |a: f64| gini_css(a, -0.133).unwrap();
    for a in [m - 0.5, m - 0.05, m + 0.05, m + 0.5] {
        assert!(g(a) > g(m));
    }
    assert!(central_difference(g, m, 1e-4).abs() < 1e-6);
    let stationary = gini_stationary_points(-0.133, 0.6, 8.0);
    assert_eq!(stationary.len(), 1);
    assert!((stationary[0] - m).abs() < 1e-6);
}

#[test]
fn unshifted_profile_is_monotone() {
    let alphas: Vec<f64> = (0..=380).map(|i| 1.0 + 0.05 * i as f64).collect();
    let profile = GiniProfile::new(0.0, &alphas).unwrap();
    assert!(profile.singularity.is_none());
    assert!(profile.points.windows(2).all(|w| w[1].gini < w[0].gini));
    assert!(profile.stationary_points.is_empty());
}

#[test]
fn profile_continuous_away_from_singularity() {
    let star = gini_singularity(-0.133).unwrap();
    let h = 1e-6;
    for i in 0..200 {
        let a = 0.6 + 0.05 * i as f64;
        if (a - star).abs() < 0.1 {
            continue;
        }
        let (g0, g1) = (gini_css(a, -0.133).unwrap(), gini_css(a + h, -0.133).unwrap());
        assert!((g1 - g0).abs() < 1e-3 * g0.abs().max(1.0), "jump at {a}");
    }
}

#[test]
fn profile_csv() {
    let star = gini_singularity(-0.133).unwrap();
    let profile = GiniProfile::new(-0.133, &[2.0, 3.5, star, 10.0]).unwrap();
    assert_eq!(profile.singularity, Some(star));
    let mut buf = Vec::new();
    profile.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,gini");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].ends_with(",inf"));
    assert!(lines[4].split(',').nth(1).unwrap().parse::<f64>().unwrap() < 0.0);
}

#[test]
fn css_gini_matches_monte_carlo() {
    for (i, alpha) in [1.5, 2.5, 3.5, 4.5, 6.0].into_iter().enumerate() {
        let xs = sorted_draws(alpha, 1.0, 0.0, 400_000, 11 + i as u64);
        let g = gini_lorenz(&xs, &vec![1.0; xs.len()]);
        // heavy tails near 1.5 slow the sampler's convergence
        assert!((g - gini_css(alpha, 0.0).unwrap()).abs() < 0.01, "alpha {alpha}: {g}");
    }
}

#[test]
fn empirical_gini_examples() {
    assert_eq!(gini_empirical(&unit_sample(&[4.0; 7])).unwrap(), 0.0);
    let two = unit_sample(&[1e-12, 2.0]);
    assert!((gini_empirical(&two).unwrap() - 0.5).abs() < 1e-10);
    let xs = sorted_draws(3.0, 10_000.0, 0.0, 200_000, 3);
    let g = gini_empirical(&unit_sample(&xs)).unwrap();
    assert!((g - gini_css(3.0, 0.0).unwrap()).abs() < 0.01, "{g}");
}

#[test]
fn empirical_gini_negative_incomes() {
    let g = gini_empirical(&unit_sample(&[-50.0, -20.0, 1.0, 2.0, 90.0])).unwrap();
    assert!(g > 1.0, "{g}");
    assert!((g - gini_pairs(&[-50.0, -20.0, 1.0, 2.0, 90.0], &[1.0; 5])).abs() < 1e-12);
    assert_eq!(gini_empirical(&unit_sample(&[-1.0, 1.0])).unwrap_err().kind(), "domain");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn empirical_gini_matches_oracles(pairs in prop::collection::vec((1.0f64..1e5, 0.1f64..5.0), 1..60)) {
        let sample = weighted_sample(&pairs);
        let g = gini_empirical(&sample).unwrap();
        let w_total: f64 = pairs.iter().map(|p| p.1).sum();
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ws: Vec<f64> = pairs.iter().map(|p| p.1 / w_total).collect();
        prop_assert!((g - gini_pairs(&xs, &ws)).abs() < 1e-10);
        let mut sorted: Vec<(f64, f64)> = xs.iter().copied().zip(ws.iter().copied()).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (sx, sw): (Vec<f64>, Vec<f64>) = sorted.into_iter().unzip();
        prop_assert!((g - gini_lorenz(&sx, &sw)).abs() < 1e-10);
    }

    #[test]
    fn empirical_gini_scale_invariant(xs in prop::collection::vec(1.0f64..1e4, 2..40), k in 0.01f64..100.0) {
        let a = gini_empirical(&unit_sample(&xs)).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        prop_assert!((a - gini_empirical(&unit_sample(&scaled)).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn per_capita_ordering_and_increment() {
    let near = per_capita_css(&K, 2000.0, 1.01).unwrap();
    let far = per_capita_css(&K, 2000.0, 5.0).unwrap();
    assert!(near.abs() > far.abs());
    for alpha in [1.5, 3.0, 4.0, 7.0] {
        let inc = per_capita_increment(&K, alpha).unwrap();
        let diff = per_capita_css(&K, 2001.0, alpha).unwrap() - per_capita_css(&K, 2000.0, alpha).unwrap();
        assert!((diff - inc).abs() < 1e-9 * inc.abs());
        assert!(rel_err(inc, K.psi1 * (1.0 / (K.phi * (alpha - 1.0)) + 1.0)) < 1e-14);
    }
    assert_eq!(per_capita_css(&K, 2000.0, 1.0).unwrap_err().kind(), "domain");
    assert_eq!(per_capita_increment(&K, 0.5).unwrap_err().kind(), "domain");
}

#[test]
fn per_capita_matches_quadrature_mean() {
    for (year, alpha) in [(2000, 4.0), (1990, 3.0), (2015, 5.5)] {
        let (beta, c) = K.scale_shift(year as f64, alpha);
        assert!(beta > 0.0);
        let lg = ln_gamma_stirling(alpha);
        let pdf = |x: f64| {
            let u = x - c;
            (alpha * beta.ln() - (alpha + 1.0) * u.ln() - beta / u - lg).exp()
        };
        let mean = tanh_sinh_to_infinity(&|x: f64| x * pdf(x), c);
        let got = per_capita_css(&K, year as f64, alpha).unwrap();
        assert!(rel_err(got, mean) < 1e-4, "{year} {alpha}: {got} vs {mean}");
    }
}

#[test]
fn percent_change_examples() {
    assert_eq!(percent_change_linear(250.0, 250.0, -0.133, LinearIncrement::Psi1).unwrap(), 1.0);
    let a = percent_change_linear(1000.0, 366.0, -0.133, LinearIncrement::Psi1).unwrap();
    let b = percent_change_linear(2000.0, 366.0, -0.133, LinearIncrement::Psi1).unwrap();
    assert!((a - 2.0 * b).abs() < 1e-15);
    let c = percent_change_linear(1000.0, 366.0, -0.133, LinearIncrement::Psi1OverPhi).unwrap();
    assert!(rel_err(c, a / -0.133) < 1e-15);
    assert_eq!(percent_change_exponential(0.0), 0.0);
    assert!(rel_err(percent_change_exponential(0.03), 0.03f64.exp() - 1.0) < 1e-13);
    assert!(percent_change_linear(0.0, 1.0, 1.0, LinearIncrement::Psi1).is_err());
}

#[test]
fn percent_change_linear_tracks_scale_path() {
    // beta_{t+1} = beta_t + psi1 / phi under the linear law at fixed shape
    let alpha = 4.0;
    let (b0, _) = K.scale_shift(2000.0, alpha);
    let (b1, _) = K.scale_shift(2001.0, alpha);
    let rate = percent_change_linear(b0, K.psi1, K.phi, LinearIncrement::Psi1OverPhi).unwrap();
    assert!(rel_err(rate, b1 / b0 - 1.0) < 1e-10);
}

#[test]
fn maxent_model_moments() {
    let m = maxent_check_model(2.0, 1.0).unwrap();
    let gamma_em = 0.577_215_664_901_532_9;
    // oracle: E ln X and E 1/X for density x^-3 e^-1/x
    let pdf = |x: f64| x.powi(-3) * (-1.0 / x).exp();
    let e_ln = tanh_sinh_to_infinity(&|x: f64| x.ln() * pdf(x), 0.0);
    let e_inv = tanh_sinh_to_infinity(&|x: f64| pdf(x) / x, 0.0);
    assert!((e_ln + 0.4228).abs() < 1e-4);
    assert!((e_ln + (1.0 - gamma_em)).abs() < 1e-10);
    assert!((m.log_moment.measured - e_ln).abs() < 1e-8);
    assert!(m.log_moment.residual.abs() < 1e-8);
    assert!((m.inverse_moment.measured - 2.0).abs() < 1e-8 && (e_inv - 2.0).abs() < 1e-8);
    assert!(m.inverse_moment.residual_analytic.abs() < 1e-8);
    assert_eq!(m.inverse_moment.stated, 0.5);
    assert!((m.inverse_moment.residual_stated - 1.5).abs() < 1e-8);
    assert!(maxent_check_model(0.0, 1.0).is_err());
}

#[test]
fn maxent_sample_shift_invariance() {
    let xs = sorted_draws(3.0, 20_000.0, 0.0, 50_000, 9);
    let base = maxent_check_sample(&unit_sample(&xs), 3.0, 20_000.0, 0.0).unwrap();
    let moved: Vec<f64> = xs.iter().map(|x| x - 5000.0).collect();
    let shifted = maxent_check_sample(&unit_sample(&moved), 3.0, 20_000.0, -5000.0).unwrap();
    assert!((base.log_moment.residual - shifted.log_moment.residual).abs() < 1e-9);
    assert!((base.inverse_moment.residual_analytic - shifted.inverse_moment.residual_analytic).abs() < 1e-12);
    assert!(base.log_moment.residual.abs() < 0.02);
    assert!(base.inverse_moment.residual_analytic.abs() < 0.02 * base.inverse_moment.analytic);
    assert!(maxent_check_sample(&unit_sample(&xs), 3.0, 20_000.0, xs[0]).is_err());
}
