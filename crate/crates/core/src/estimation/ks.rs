use crate::data::WeightedSample;

/// Kolmogorov–Smirnov distance between the weighted ECDF and `model_cdf`,
/// comparing against both the left and right limits of each ECDF step.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &WeightedSample, model_cdf: F) -> f64 {
    let values: Vec<f64> = sample.incomes().iter().map(|&x| model_cdf(x)).collect();
    ks_from_cdf_values(sample, &values)
}

/// As [`ks_statistic`] with the model CDF already evaluated at every
/// (sorted) sample point.
pub fn ks_from_cdf_values(sample: &WeightedSample, cdf: &[f64]) -> f64 {
    let xs = sample.incomes();
    let cum = sample.cumulative_weights();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut before = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // advance over ties so the right limit includes the whole atom
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let after = if j + 1 == xs.len() { 1.0 } else { cum[j] / n };
        let f = cdf[i];
        if f.is_nan() {
            return f64::NAN;
        }
        d = d.max((f - before).abs()).max((f - after).abs());
        before = after;
        i = j + 1;
    }
    d
}
