mod common;

use common::*;
use incomefit::data::WeightedSample;
use incomefit::distributions::{CssConstants, Model, Params};
use incomefit::reduction::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: CssConstants = CssConstants::US_INCOME;

fn entry(year: i32, alpha: f64, beta: f64, c: f64) -> SeriesEntry {
    SeriesEntry { year, alpha, beta, c }
}

/// Series lying exactly on c = phi beta = psi0 + psi1 t + psi2 alpha.
fn exact_series(k: &CssConstants, years: std::ops::Range<i32>) -> ParamSeries {
    let entries = years
        .map(|t| {
            let alpha = 4.0 + 0.02 * (t - 1967) as f64 + 0.3 * ((t as f64) * 0.7).sin();
            let c = k.psi0 + k.psi1 * t as f64 + k.psi2 * alpha;
            entry(t, alpha, c / k.phi, c)
        })
        .collect();
    ParamSeries::new(entries).unwrap()
}

fn noisy_series(rng: &mut ChaCha8Rng) -> ParamSeries {
    let n = rng.random_range(5..58);
    let start = rng.random_range(1985..2000);
    let entries = (0..n)
        .map(|i| {
            let t = start + i;
            let alpha = rng.random_range(3.0..6.0);
            let c = K.psi0 + K.psi1 * t as f64 + K.psi2 * alpha + rng.random_range(-3000.0..3000.0);
            let beta = c / K.phi + rng.random_range(-5000.0..5000.0);
            entry(t, alpha, beta, c)
        })
        .collect();
    ParamSeries::new(entries).unwrap()
}

/// psi = (1/2)(A'A)^{-1} A'(phi B + C) by normal equations, with one round
/// of iterative refinement.
fn psi_oracle(series: &ParamSeries, phi: f64) -> Vec<f64> {
    let design: Vec<Vec<f64>> = series.entries().iter().map(|e| vec![1.0, e.year as f64, e.alpha]).collect();
    let rhs: Vec<f64> = series.entries().iter().map(|e| 0.5 * (phi * e.beta + e.c)).collect();
    let x = normal_equations(&design, &rhs);
    let resid: Vec<f64> =
        design.iter().zip(&rhs).map(|(row, b)| b - row.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>()).collect();
    let dx = normal_equations(&design, &resid);
    x.iter().zip(dx).map(|(a, b)| a + b).collect()
}

#[test]
fn series_validation() {
    assert!(ParamSeries::new(vec![entry(2001, 3.0, 1.0, 0.0), entry(2000, 3.0, 1.0, 0.0)]).is_err());
    assert!(ParamSeries::new(vec![entry(2000, 3.0, 1.0, 0.0), entry(2000, 3.0, 1.0, 0.0)]).is_err());
    assert!(ParamSeries::new(vec![entry(2000, -3.0, 1.0, 0.0)]).is_err());
    assert!(ParamSeries::new(vec![entry(2000, 3.0, 0.0, 0.0)]).is_err());
    assert!(ParamSeries::new(vec![entry(2000, 3.0, 1.0, f64::NAN)]).is_err());
}

#[test]
fn normalize_examples() {
    let one = ParamSeries::new(vec![entry(2000, 3.0, 5.0, -2.0)]).unwrap();
    let n = normalize_series(&one).unwrap();
    assert_eq!((n[0].alpha, n[0].beta, n[0].c), (1.0, 1.0, 1.0));
    let two = ParamSeries::new(vec![entry(2000, 1.0, 5.0, -2.0), entry(2001, 3.0, 5.0, -2.0)]).unwrap();
    let n = normalize_series(&two).unwrap();
    assert_eq!((n[0].alpha, n[1].alpha), (0.25, 0.75));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = normalize_series(&noisy_series(&mut rng)).unwrap();
        for col in [|e: &NormalizedEntry| e.alpha, |e: &NormalizedEntry| e.beta, |e: &NormalizedEntry| e.c] {
            assert!((n.iter().map(col).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
    let zero = ParamSeries::new(vec![entry(2000, 1.0, 5.0, -2.0), entry(2001, 3.0, 5.0, 2.0)]).unwrap();
    assert_eq!(normalize_series(&zero).unwrap_err().kind(), "degenerate_series");
}

#[test]
fn contrasts_are_differences_and_quotients() {
    let s = ParamSeries::new(vec![entry(2000, 1.0, 2.0, -4.0), entry(2001, 3.0, 6.0, -4.0)]).unwrap();
    let c = normalized_contrasts(&normalize_series(&s).unwrap());
    assert_eq!(c[0].beta_minus_alpha, 0.0);
    assert_eq!(c[1].beta_over_alpha, 1.0);
    assert_eq!(c[0].c_minus_alpha, 0.25);
    assert_eq!(c[0].c_over_alpha, 2.0);
}

#[test]
fn phi_examples() {
    let s = exact_series(&K, 1967..2024);
    assert!((estimate_phi(&s).unwrap() + 0.133).abs() < 1e-12);
    let s = ParamSeries::new(vec![entry(2000, 1.0, 10.0, -1.0), entry(2001, 1.0, 10.0, -3.0)]).unwrap();
    assert!((estimate_phi(&s).unwrap() + 0.2).abs() < 1e-15);
}

#[test]
fn psi_exact_recovery() {
    let s = exact_series(&K, 1967..2024);
    let psi = estimate_psi(&s, K.phi).unwrap();
    assert!(rel_err(psi[0], 727800.0) < 1e-6, "{psi:?}");
    assert!(rel_err(psi[1], -366.0) < 1e-6);
    assert!(rel_err(psi[2], -2194.0) < 1e-6);
    let r = regress(&s, PsiOptions::default()).unwrap();
    let scale = s.entries().iter().map(|e| e.beta.abs()).fold(0.0, f64::max);
    for res in &r.residuals {
        assert!(res.beta.abs() < 1e-9 * scale && res.c.abs() < 1e-9 * scale, "{res:?}");
    }
    assert!(r.objective < 1e-12 * scale * scale);
}

#[test]
fn psi_consistency_for_arbitrary_psi() {
    let target = CssConstants { phi: 0.4, psi0: -1234.5, psi1: 17.25, psi2: 99.0 };
    let s = exact_series(&target, 2000..2012);
    let psi = estimate_psi(&s, target.phi).unwrap();
    for (a, b) in psi.iter().zip([target.psi0, target.psi1, target.psi2]) {
        assert!(rel_err(*a, b) < 1e-8, "{psi:?}");
    }
}

#[test]
fn psi_matches_normal_equations_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let s = noisy_series(&mut rng);
        let phi = estimate_phi(&s).unwrap();
        let psi = estimate_psi(&s, phi).unwrap();
        let oracle = psi_oracle(&s, phi);
        for (a, b) in psi.iter().zip(&oracle) {
            assert!(rel_err(*a, *b) < 1e-8, "{psi:?} vs {oracle:?}");
        }
        let centered = estimate_psi_with(&s, phi, PsiOptions { center_years: true }).unwrap();
        for (a, b) in centered.iter().zip(&oracle) {
            assert!(rel_err(*a, *b) < 1e-8);
        }
    }
}

#[test]
fn psi_is_a_stationary_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let s = noisy_series(&mut rng);
        let phi = estimate_phi(&s).unwrap();
        let psi = estimate_psi(&s, phi).unwrap();
        let l0 = psi_objective(&s, phi, psi);
        for j in 0..3 {
            let h = 1e-5 * psi[j].abs();
            let at = |d: f64| {
                let mut p = psi;
                p[j] += d;
                psi_objective(&s, phi, p)
            };
            let grad = (at(h) - at(-h)) / (2.0 * h);
            assert!((grad * psi[j]).abs() < 1e-4 * l0, "component {j}: {grad}");
        }
        for _ in 0..20 {
            let delta: [f64; 3] =
                [rng.random_range(-50.0..50.0), rng.random_range(-0.5..0.5), rng.random_range(-5.0..5.0)];
            let moved = [psi[0] + delta[0], psi[1] + delta[1], psi[2] + delta[2]];
            assert!(psi_objective(&s, phi, moved) >= l0);
        }
    }
}

#[test]
fn psi_symmetric_in_scale_and_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = noisy_series(&mut rng);
    let phi = estimate_phi(&s).unwrap();
    let swapped =
        ParamSeries::new(s.entries().iter().map(|e| entry(e.year, e.alpha, e.c / phi, phi * e.beta)).collect())
            .unwrap();
    assert!(rel_err(estimate_phi(&swapped).unwrap(), phi) < 1e-12);
    let a = estimate_psi(&s, phi).unwrap();
    let b = estimate_psi(&swapped, phi).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(rel_err(*x, *y) < 1e-10);
    }
}

#[test]
fn psi_needs_three_years_and_full_rank() {
    let s = exact_series(&K, 2000..2002);
    assert_eq!(estimate_psi(&s, K.phi).unwrap_err().kind(), "precondition");
    let flat = ParamSeries::new((2000..2006).map(|t| entry(t, 3.0, 1000.0, -100.0)).collect()).unwrap();
    assert_eq!(estimate_psi(&flat, -0.1).unwrap_err().kind(), "singular_design");
}

#[test]
fn prediction_examples() {
    let (beta, c) = predict_scale_shift(&K, 1967.0, 5.0);
    assert!((c - (727800.0 - 366.0 * 1967.0 - 2194.0 * 5.0)).abs() < 1e-9);
    assert!((c + 3092.0).abs() < 1e-9);
    assert!((beta - 3092.0 / 0.133).abs() < 1e-6);
    assert!(prediction_feasible(&K, 1967.0, 5.0));
    // a shape large enough to push the predicted shift above zero has no valid scale
    assert!(!prediction_feasible(&K, 1967.0, 1.0));
    let zero = CssConstants { phi: -0.133, psi0: 0.0, psi1: 0.0, psi2: 0.0 };
    assert_eq!(predict_scale_shift(&zero, 2000.0, 3.0), (0.0, 0.0));
    let (b0, c0) = predict_scale_shift(&K, 2000.0, 3.0);
    let (b2, c2) = predict_scale_shift(&K, 2002.0, 3.0);
    assert!((c2 - c0 - 2.0 * K.psi1).abs() < 1e-9);
    assert!((b2 - b0 - 2.0 * K.psi1 / K.phi).abs() < 1e-8);
}

#[test]
fn decomposition_examples() {
    let d = decompose_scale_change(&K, (2000.0, 3.0), (2000.0, 4.0));
    assert_eq!(d.time_effect, 0.0);
    let d = decompose_scale_change(&K, (1960.0, 3.0), (2000.0, 3.0));
    assert_eq!(d.shape_effect, 0.0);
    let d = decompose_scale_change(&K, (1963.0, 5.0), (2023.0, 3.5));
    assert!((d.shape_effect + 25_000.0).abs() < 1000.0, "{}", d.shape_effect);
    assert!((d.shape_effect + 24_744.36).abs() < 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let from = (rng.random_range(1960.0..2030.0), rng.random_range(1.5..8.0));
        let to = (rng.random_range(1960.0..2030.0), rng.random_range(1.5..8.0));
        let d = decompose_scale_change(&K, from, to);
        let diff = predict_scale_shift(&K, to.0, to.1).0 - predict_scale_shift(&K, from.0, from.1).0;
        assert!((d.total() - diff).abs() < 1e-9 * diff.abs().max(1.0));
    }
}

#[test]
fn proportional_variant_recovery() {
    let (a, b, phi) = (500.0, -0.3, -0.2);
    let entries = (1990..2000)
        .map(|t| {
            let alpha = 2.0 + 0.1 * (t - 1990) as f64;
            let c = alpha * (a + b * t as f64);
            entry(t, alpha, c / phi, c)
        })
        .collect();
    let s = ParamSeries::new(entries).unwrap();
    let v = estimate_proportional_variant(&s).unwrap();
    assert!(rel_err(v.phi, phi) < 1e-12);
    assert!(rel_err(v.psi0, a) < 1e-8 && rel_err(v.psi1, b) < 1e-8, "{v:?}");
    let (beta, c) = v.scale_shift(1995.0, 2.5);
    assert!(rel_err(c, 2.5 * (a + b * 1995.0)) < 1e-8 && rel_err(beta, c / phi) < 1e-12);
}

#[test]
fn proportional_variant_constant_shape_is_a_line_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alpha = 3.0;
    let entries: Vec<SeriesEntry> = (2000..2015)
        .map(|t| {
            let c = -800.0 - 20.0 * (t - 2000) as f64 + rng.random_range(-50.0..50.0);
            entry(t, alpha, c / -0.15, c)
        })
        .collect();
    let s = ParamSeries::new(entries).unwrap();
    let v = estimate_proportional_variant(&s).unwrap();
    let design: Vec<Vec<f64>> = s.entries().iter().map(|e| vec![1.0, e.year as f64]).collect();
    let y: Vec<f64> = s.entries().iter().map(|e| e.c / alpha).collect();
    let line = normal_equations(&design, &y);
    assert!(rel_err(v.psi0, line[0]) < 1e-6 && rel_err(v.psi1, line[1]) < 1e-6, "{v:?} {line:?}");
}

#[test]
fn proportional_variant_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let s = noisy_series(&mut rng);
        let v = estimate_proportional_variant(&s).unwrap();
        let design: Vec<Vec<f64>> = s.entries().iter().map(|e| vec![1.0, e.year as f64]).collect();
        let y: Vec<f64> = s.entries().iter().map(|e| 0.5 * (e.c + v.phi * e.beta) / e.alpha).collect();
        let x = normal_equations(&design, &y);
        let resid: Vec<f64> = design.iter().zip(&y).map(|(r, b)| b - r[0] * x[0] - r[1] * x[1]).collect();
        let dx = normal_equations(&design, &resid);
        assert!(rel_err(v.psi0, x[0] + dx[0]) < 1e-8 && rel_err(v.psi1, x[1] + dx[1]) < 1e-8);
    }
    let one = ParamSeries::new(vec![entry(2000, 3.0, 1.0, -1.0)]).unwrap();
    assert!(estimate_proportional_variant(&one).is_err());
}

#[test]
fn series_csv_round_trip() {
    let s = exact_series(&K, 2000..2005);
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("year,alpha,beta,c\n"));
    assert_eq!(ParamSeries::read_csv(buf.as_slice()).unwrap(), s);
    let r = regress(&s, PsiOptions::default()).unwrap();
    let json = serde_json::to_string(&r).unwrap();
    assert_eq!(serde_json::from_str::<RegressionResult>(&json).unwrap(), r);
}

fn css_panel(years: &[i32], n: usize) -> Vec<(i32, WeightedSample)> {
    years
        .iter()
        .map(|&t| {
            let alpha = 3.5 + 0.5 * ((t - years[0]) as f64 * 0.4).sin();
            let p = Params::CssInverseGamma { alpha, year: t, constants: K };
            let xs = Model::new(p).unwrap().sample(n, t as u64).unwrap();
            (t, unit_sample(&xs))
        })
        .collect()
}

#[test]
fn pipeline_small_panel() {
    let panel = css_panel(&[2000, 2003, 2006, 2009], 5000);
    let r = reduction_pipeline(&panel, &ReductionOptions::default()).unwrap();
    assert_eq!(r.years.iter().map(|y| y.year).collect::<Vec<_>>(), vec![2000, 2003, 2006, 2009]);
    assert_eq!(r.series.len(), 4);
    for y in &r.years {
        assert!(y.failure.is_none());
        assert!(y.ks_css.unwrap() <= y.ks_inverse_gamma.unwrap() + 0.05);
    }
    assert!(r.regression.constants.phi < 0.0);
}

#[test]
fn pipeline_preconditions() {
    let panel = css_panel(&[2000, 2001], 500);
    assert_eq!(reduction_pipeline(&panel, &ReductionOptions::default()).unwrap_err().kind(), "precondition");
    let mut dup = css_panel(&[2000, 2001, 2002], 500);
    dup[2].0 = 2000;
    assert_eq!(reduction_pipeline(&dup, &ReductionOptions::default()).unwrap_err().kind(), "precondition");
}

#[test]
fn identical_years_have_singular_design() {
    let xs =
        Model::new(Params::InverseGamma { alpha: 3.0, beta: 40000.0, c: -2000.0 }).unwrap().sample(3000, 1).unwrap();
    let s = unit_sample(&xs);
    let panel: Vec<(i32, WeightedSample)> = (2000..2004).map(|t| (t, s.clone())).collect();
    assert_eq!(reduction_pipeline(&panel, &ReductionOptions::default()).unwrap_err().kind(), "singular_design");
}

#[test]
fn stationary_panel_has_no_time_trend() {
    // every year drawn afresh from one distribution: the time slope is noise
    let p = Params::InverseGamma { alpha: 3.0, beta: 40000.0, c: -2000.0 };
    let m = Model::new(p).unwrap();
    let panel: Vec<(i32, WeightedSample)> =
        (2000..2008).map(|t| (t, unit_sample(&m.sample(20_000, 100 + t as u64).unwrap()))).collect();
    let r = reduction_pipeline(&panel, &ReductionOptions::default()).unwrap();
    let k = r.regression.constants;
    let design: Vec<Vec<f64>> = r.series.entries().iter().map(|e| vec![1.0, e.year as f64, e.alpha]).collect();
    let rhs: Vec<f64> = r.series.entries().iter().map(|e| 0.5 * (k.phi * e.beta + e.c)).collect();
    let resid: Vec<f64> =
        design.iter().zip(&rhs).map(|(row, b)| b - k.psi0 - k.psi1 * row[1] - k.psi2 * row[2]).collect();
    let s2 = resid.iter().map(|v| v * v).sum::<f64>() / (resid.len() - 3) as f64;
    // variance of the slope from the inverse of A'A
    let mut unit = vec![0.0; 3];
    unit[1] = 1.0;
    let mut ata = vec![vec![0.0; 3]; 3];
    for row in &design {
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let col = solve_dense(ata, unit);
    let se = (s2 * col[1]).sqrt();
    assert!(k.psi1.abs() < 3.0 * se, "psi1 {} se {}", k.psi1, se);
}
