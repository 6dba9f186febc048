use crate::data::WeightedSample;
use crate::error::{Error, Result};

/// Sample viewed in shifted coordinates u = x - c, with weighted prefix
/// sums of ln u and (ln u)^2 for the threshold models.
pub(crate) struct Shifted<'a> {
    pub sample: &'a WeightedSample,
    pub c: f64,
    pub ln_u: Vec<f64>,
    /// prefix[k] = sums over the first k points: (weight, w ln u, w ln^2 u)
    prefix: Vec<[f64; 3]>,
}

impl<'a> Shifted<'a> {
    pub fn new(sample: &'a WeightedSample, c: f64) -> Result<Shifted<'a>> {
        if !(c < sample.min()) || !c.is_finite() {
            return Err(Error::Precondition(format!("shift {c} must lie below the smallest income {}", sample.min())));
        }
        let ln_u: Vec<f64> = sample.incomes().iter().map(|x| (x - c).ln()).collect();
        Ok(Shifted { sample, c, ln_u, prefix: Vec::new() })
    }

    pub fn with_prefix_sums(mut self) -> Self {
        let mut acc = [0.0; 3];
        let mut prefix = Vec::with_capacity(self.ln_u.len() + 1);
        prefix.push(acc);
        for (&y, &w) in self.ln_u.iter().zip(self.sample.weights()) {
            acc[0] += w;
            acc[1] += w * y;
            acc[2] += w * y * y;
            prefix.push(acc);
        }
        self.prefix = prefix;
        self
    }

    pub fn n(&self) -> f64 {
        self.sample.len() as f64
    }

    pub fn weights(&self) -> &[f64] {
        self.sample.weights()
    }

    /// Weighted mean of `f(ln u)`.
    pub fn mean_of<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.ln_u.iter().zip(self.weights()).map(|(&y, &w)| w * f(y)).sum::<f64>() / self.n()
    }

    /// Number of points with income strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.sample.incomes().partition_point(|&v| v < x)
    }

    /// (weight, Σ w ln u, Σ w ln² u) over points [lo, hi).
    pub fn sums(&self, lo: usize, hi: usize) -> [f64; 3] {
        let a = self.prefix[lo];
        let b = self.prefix[hi];
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }
}
