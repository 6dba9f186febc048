mod common;

use common::*;
use incomefit::data::{bin_density, clean, load_csv, read_csv, BinScheme, Observation};
use proptest::prelude::*;
use std::io::Write;

fn obs(pairs: &[(f64, f64)]) -> Vec<Observation> {
    pairs.iter().map(|&(income, weight)| Observation { income, weight }).collect()
}

#[test]
fn load_well_formed_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "id,income,wt\n1,100,1.5\n2,-20,2\n3,0,1").unwrap();
    let rows = load_csv(f.path(), "income", Some("wt")).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1], Observation { income: -20.0, weight: 2.0 });
    let unweighted = load_csv(f.path(), "income", None).unwrap();
    assert!(unweighted.iter().all(|o| o.weight == 1.0));
}

#[test]
fn load_errors_name_the_problem() {
    let err = read_csv("income,w\n1,1\n2,-1\n".as_bytes(), "income", Some("w")).unwrap_err();
    assert!(err.to_string().contains("row 2"), "{err}");
    let err = read_csv("income\nNaN\n".as_bytes(), "income", None).unwrap_err();
    assert!(err.to_string().contains("row 1"), "{err}");
    let err = read_csv("income\nabc\n".as_bytes(), "income", None).unwrap_err();
    assert!(err.to_string().contains("row 1"), "{err}");
    let err = read_csv("salary\n1\n".as_bytes(), "income", None).unwrap_err();
    assert!(err.to_string().contains("income"), "{err}");
    let err = read_csv("income,w\n1,0\n".as_bytes(), "income", Some("w")).unwrap_err();
    assert_eq!(err.kind(), "input");
    assert!(load_csv(std::path::Path::new("/nonexistent/x.csv"), "income", None).is_err());
}

#[test]
fn clean_examples() {
    let s = clean(&obs(&[(0.0, 1.0), (0.0, 1.0), (5.0, 1.0), (7.0, 1.0)]), 0, 0).unwrap();
    assert_eq!(s.incomes(), &[5.0, 7.0]);
    assert!((s.weights().iter().sum::<f64>() - 2.0).abs() < 1e-15);
    let s = clean(&obs(&[(-9.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (99.0, 1.0)]), 1, 1).unwrap();
    assert_eq!(s.incomes(), &[1.0, 2.0, 3.0]);
    let s = clean(&obs(&[(10.0, 2.0), (20.0, 2.0)]), 0, 0).unwrap();
    assert_eq!(s.weights(), &[1.0, 1.0]);
    assert_eq!(clean(&obs(&[(0.0, 1.0)]), 0, 0).unwrap_err().kind(), "empty_sample");
}

#[test]
fn negative_incomes_survive() {
    let s = clean(&obs(&[(-5000.0, 1.0), (100.0, 1.0), (0.0, 3.0)]), 0, 0).unwrap();
    assert_eq!(s.incomes(), &[-5000.0, 100.0]);
}

#[test]
fn trim_ties_keep_input_order() {
    let raw = obs(&[(5.0, 1.0), (5.0, 2.0), (5.0, 3.0), (9.0, 1.0)]);
    let s = clean(&raw, 1, 0).unwrap();
    // the first 5 in input order is the one removed
    let total: f64 = 2.0 + 3.0 + 1.0;
    let w: Vec<f64> = s.weights().to_vec();
    assert!((w[0] - 2.0 * 3.0 / total).abs() < 1e-15);
    assert!((w[1] - 3.0 * 3.0 / total).abs() < 1e-15);
}

#[test]
fn ecdf_examples() {
    let s = unit_sample(&[1.0, 2.0, 3.0]);
    assert_eq!(s.ecdf(0.5), 0.0);
    assert_eq!(s.ecdf(3.0), 1.0);
    assert!((s.ecdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
    assert!((s.ecdf(1.999) - 1.0 / 3.0).abs() < 1e-15);
    let w = weighted_sample(&[(1.0, 3.0), (2.0, 1.0)]);
    assert!((w.ecdf(1.0) - 0.75).abs() < 1e-15);
}

#[test]
fn bin_examples() {
    let one = unit_sample(&[3000.0]);
    let b = bin_density(&one, BinScheme::default()).unwrap();
    let occupied: Vec<_> = b.bins.iter().filter(|x| x.density > 0.0).collect();
    assert_eq!(occupied.len(), 1);
    assert_eq!((occupied[0].lower, occupied[0].upper), (0.0, 6000.0));
    assert!((occupied[0].density - 1.0 / 6000.0).abs() < 1e-18);
}

#[test]
fn uniform_data_has_flat_density() {
    let n = 60_000;
    // a stratified uniform sample on (0, 60000)
    let xs: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    let s = unit_sample(&xs);
    let b = bin_density(&s, BinScheme::default()).unwrap();
    for bin in &b.bins {
        let lo = bin.lower.max(0.0);
        let hi = bin.upper.min(60_000.0);
        let count = xs.iter().filter(|&&x| x >= bin.lower && x < bin.upper).count() as f64;
        // the direct count over the width
        assert!((bin.density - count / n as f64 / (bin.upper - bin.lower)).abs() < 1e-15);
        if hi - lo == bin.upper - bin.lower {
            assert!((bin.density - 1.0 / 60_000.0).abs() < 1e-9);
        }
    }
}

#[test]
fn log_bins_above_boundary() {
    let s = unit_sample(&[100.0, 50_000.0, 70_000.0, 250_000.0, 3.0e6]);
    let b = bin_density(&s, BinScheme::default()).unwrap();
    let linear: Vec<_> = b.bins.iter().filter(|x| x.upper <= 60_000.0).collect();
    assert!(linear.iter().all(|x| (x.upper - x.lower - 6000.0).abs() < 1e-9));
    assert_eq!(linear.first().unwrap().lower, 0.0);
    for bin in b.bins.iter().filter(|x| x.lower >= 60_000.0) {
        assert!(bin.upper / bin.lower >= 1.2 - 1e-12, "{bin:?}");
    }
    assert!(b.bins.last().unwrap().upper >= 3.0e6);
    // one fewer log bin would need a ratio below 1.2
    let log_count = b.bins.iter().filter(|x| x.lower >= 60_000.0).count();
    let span = (3.0e6f64 / 60_000.0).ln();
    assert!((span / (log_count + 1) as f64).exp() < 1.2);
}

#[test]
fn negative_incomes_extend_bins_downward() {
    let s = unit_sample(&[-7000.0, 100.0, 20_000.0]);
    let b = bin_density(&s, BinScheme::default()).unwrap();
    assert_eq!(b.bins[0].lower, -12_000.0);
    assert!(b.bins.iter().any(|x| x.lower == 0.0));
}

#[test]
fn bins_csv_has_header() {
    let b = bin_density(&unit_sample(&[1.0, 2.0]), BinScheme::default()).unwrap();
    let mut out = Vec::new();
    b.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("lower,upper,density\n"));
}

#[test]
fn invalid_scheme_rejected() {
    let s = unit_sample(&[1.0]);
    let bad = BinScheme { log_ratio: 1.0, ..BinScheme::default() };
    assert!(bin_density(&s, bad).is_err());
    let bad = BinScheme { linear_width: 0.0, ..BinScheme::default() };
    assert!(bin_density(&s, bad).is_err());
}

fn raw_rows() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((prop_oneof![Just(0.0), -20_000.0f64..2.0e6, 1.0f64..1e8], 0.01f64..100.0), 1..300)
}

proptest! {
    #[test]
    fn clean_is_idempotent(rows in raw_rows(), lo in 0usize..3, hi in 0usize..3) {
        let raw = obs(&rows);
        if let Ok(once) = clean(&raw, lo, hi) {
            let twice = clean(&once.observations(), 0, 0).unwrap();
            prop_assert_eq!(once.incomes(), twice.incomes());
            for (a, b) in once.weights().iter().zip(twice.weights()) {
                prop_assert!((a - b).abs() <= 1e-12 * a);
            }
        }
    }

    #[test]
    fn cleaned_sample_invariants(rows in raw_rows()) {
        if let Ok(s) = clean(&obs(&rows), 0, 0) {
            prop_assert!(s.incomes().iter().all(|&x| x != 0.0));
            prop_assert!(s.weights().iter().all(|&w| w > 0.0));
            prop_assert!(s.incomes().windows(2).all(|w| w[0] <= w[1]));
            let total: f64 = s.weights().iter().sum();
            prop_assert!((total - s.len() as f64).abs() < 1e-9 * s.len() as f64);
        }
    }

    #[test]
    fn ecdf_is_a_step_function(rows in raw_rows(), probes in prop::collection::vec(-3e4f64..3e6, 1..50)) {
        if let Ok(s) = clean(&obs(&rows), 0, 0) {
            let n = s.len() as f64;
            let mut levels = vec![0.0];
            let mut acc = 0.0;
            for w in s.weights() {
                acc += w;
                levels.push(acc / n);
            }
            let mut sorted = probes.clone();
            sorted.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            for x in sorted {
                let f = s.ecdf(x);
                prop_assert!(f >= prev);
                prop_assert!(levels.iter().any(|l| (l - f).abs() < 1e-9));
                prev = f;
            }
        }
    }

    #[test]
    fn bins_cover_sample_and_carry_unit_mass(rows in raw_rows()) {
        if let Ok(s) = clean(&obs(&rows), 0, 0) {
            let b = bin_density(&s, BinScheme::default()).unwrap();
            for w in b.bins.windows(2) {
                prop_assert_eq!(w[0].upper, w[1].lower);
            }
            let mass: f64 = b.bins.iter().map(|x| x.density * (x.upper - x.lower)).sum();
            prop_assert!((mass - 1.0).abs() < 1e-12);
            for &x in s.incomes() {
                let hits = b.bins.iter().enumerate().filter(|(i, bin)| {
                    x >= bin.lower && (x < bin.upper || (*i == b.bins.len() - 1 && x <= bin.upper))
                }).count();
                prop_assert_eq!(hits, 1, "income {}", x);
            }
        }
    }
}
