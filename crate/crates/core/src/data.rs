//! Survey-weighted income samples: ingestion, cleaning, empirical CDF and
//! binned sample density.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One unprocessed row of input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub income: f64,
    pub weight: f64,
}

/// Cleaned incomes sorted ascending, with positive weights summing to the
/// number of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    incomes: Vec<f64>,
    weights: Vec<f64>,
    /// cumulative[i] = weights[0] + ... + weights[i]
    cumulative: Vec<f64>,
}

impl WeightedSample {
    /// Build from arbitrary-order observations. Zero incomes are rejected
    /// here; use [`clean`] to drop them.
    pub fn new(observations: &[Observation]) -> Result<WeightedSample> {
        if observations.is_empty() {
            return Err(Error::EmptySample("no observations".into()));
        }
        for (i, o) in observations.iter().enumerate() {
            if !o.income.is_finite() || o.income == 0.0 {
                return Err(Error::Precondition(format!("observation {i}: income {} not allowed", o.income)));
            }
            if !(o.weight.is_finite() && o.weight > 0.0) {
                return Err(Error::Precondition(format!("observation {i}: weight {} must be positive", o.weight)));
            }
        }
        let mut sorted = observations.to_vec();
        // stable, so ties keep input order
        sorted.sort_by(|a, b| a.income.total_cmp(&b.income));
        let n = sorted.len() as f64;
        let total: f64 = sorted.iter().map(|o| o.weight).sum();
        let incomes: Vec<f64> = sorted.iter().map(|o| o.income).collect();
        let weights: Vec<f64> = sorted.iter().map(|o| o.weight * n / total).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(WeightedSample { incomes, weights, cumulative })
    }

    /// Unit-weight sample from raw incomes.
    pub fn from_incomes(incomes: &[f64]) -> Result<WeightedSample> {
        let obs: Vec<Observation> = incomes.iter().map(|&income| Observation { income, weight: 1.0 }).collect();
        WeightedSample::new(&obs)
    }

    pub fn len(&self) -> usize {
        self.incomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incomes.is_empty()
    }

    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Running weight totals; the last entry equals `len()` up to rounding.
    pub fn cumulative_weights(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn min(&self) -> f64 {
        self.incomes[0]
    }

    pub fn max(&self) -> f64 {
        self.incomes[self.incomes.len() - 1]
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.incomes.iter().zip(&self.weights).map(|(&income, &weight)| Observation { income, weight }).collect()
    }

    /// Weighted mean income.
    pub fn mean(&self) -> f64 {
        self.incomes.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>() / self.len() as f64
    }

    /// Right-continuous weighted empirical CDF.
    pub fn ecdf(&self, x: f64) -> f64 {
        let k = self.incomes.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else if k == self.len() {
            1.0
        } else {
            self.cumulative[k - 1] / self.len() as f64
        }
    }

    /// Smallest income at which the ECDF reaches `p`.
    pub fn weighted_quantile(&self, p: f64) -> f64 {
        let target = p.clamp(0.0, 1.0) * self.len() as f64;
        let k = self.cumulative.partition_point(|&c| c < target);
        self.incomes[k.min(self.len() - 1)]
    }

    /// Same incomes with every value multiplied by `s` and shifted by `d`.
    pub fn affine(&self, s: f64, d: f64) -> Result<WeightedSample> {
        let obs: Vec<Observation> = self
            .observations()
            .into_iter()
            .map(|o| Observation { income: s * o.income + d, weight: o.weight })
            .collect();
        WeightedSample::new(&obs)
    }
}

/// Read observations from a headed CSV. Without a weight column every
/// weight is 1.
pub fn load_csv(path: &Path, income_column: &str, weight_column: Option<&str>) -> Result<Vec<Observation>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    read_csv(file, income_column, weight_column)
}

/// As [`load_csv`] for any reader.
pub fn read_csv<R: Read>(reader: R, income_column: &str, weight_column: Option<&str>) -> Result<Vec<Observation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Input(format!("header: {e}")))?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Input(format!("missing column '{name}'")))
    };
    let income_idx = find(income_column)?;
    let weight_idx = weight_column.map(find).transpose()?;
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // row 1 is the first data row
        let row = i + 1;
        let record = record.map_err(|e| Error::Input(format!("row {row}: {e}")))?;
        let field = |idx: usize, what: &str| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::Input(format!("row {row}: cannot parse {what} '{raw}'")))?;
            if !v.is_finite() {
                return Err(Error::Input(format!("row {row}: {what} '{raw}' is not finite")));
            }
            Ok(v)
        };
        let income = field(income_idx, "income")?;
        let weight = match weight_idx {
            Some(idx) => field(idx, "weight")?,
            None => 1.0,
        };
        if weight <= 0.0 {
            return Err(Error::Input(format!("row {row}: weight {weight} must be positive")));
        }
        out.push(Observation { income, weight });
    }
    Ok(out)
}

/// Drop zero incomes, then the `trim_lower` smallest and `trim_upper`
/// largest observations, and renormalize weights to sum to the count.
pub fn clean(raw: &[Observation], trim_lower: usize, trim_upper: usize) -> Result<WeightedSample> {
    let mut kept: Vec<Observation> = raw.iter().copied().filter(|o| o.income != 0.0).collect();
    if trim_lower + trim_upper >= kept.len() {
        return Err(Error::EmptySample(format!(
            "{} nonzero observations cannot absorb trims ({trim_lower}, {trim_upper})",
            kept.len()
        )));
    }
    kept.sort_by(|a, b| a.income.total_cmp(&b.income));
    let end = kept.len() - trim_upper;
    WeightedSample::new(&kept[trim_lower..end])
}

/// Binning parameters for the sample density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BinScheme {
    pub linear_boundary: f64,
    pub linear_width: f64,
    pub log_ratio: f64,
}

impl Default for BinScheme {
    fn default() -> Self {
        BinScheme { linear_boundary: 60_000.0, linear_width: 6_000.0, log_ratio: 1.2 }
    }
}

impl BinScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.linear_width > 0.0 && self.linear_width.is_finite()) {
            return Err(Error::Precondition(format!("linear width {} must be positive", self.linear_width)));
        }
        if !(self.log_ratio > 1.0 && self.log_ratio.is_finite()) {
            return Err(Error::Precondition(format!("log ratio {} must exceed 1", self.log_ratio)));
        }
        if !(self.linear_boundary > 0.0 && self.linear_boundary.is_finite()) {
            return Err(Error::Precondition(format!("linear boundary {} must be positive", self.linear_boundary)));
        }
        Ok(())
    }

    /// Bin edges covering [min, max]: width-multiples from the one at or
    /// below `min` up to the boundary, then equal-ratio bins to `max`.
    pub fn edges(&self, min: f64, max: f64) -> Vec<f64> {
        let w = self.linear_width;
        let mut edges = Vec::new();
        let mut log_start = min;
        if min < self.linear_boundary {
            let mut k = (min / w).floor();
            loop {
                let e = k * w;
                edges.push(e);
                if e > max || e >= self.linear_boundary {
                    break;
                }
                k += 1.0;
            }
            let last = *edges.last().expect("at least one edge");
            if last > max {
                return edges;
            }
            log_start = last;
        }
        if edges.is_empty() || max > log_start {
            let span = (max / log_start).ln();
            let count = ((span / self.log_ratio.ln()).floor() as usize).max(1);
            let ratio = (span / count as f64).exp().max(self.log_ratio);
            if edges.is_empty() {
                edges.push(log_start);
            }
            for i in 1..=count {
                edges.push(if i == count && ratio > self.log_ratio { max } else { log_start * ratio.powi(i as i32) });
            }
        }
        edges
    }
}

/// One bin of the sample density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedDensity {
    pub scheme: BinScheme,
    pub bins: Vec<Bin>,
}

impl BinnedDensity {
    /// Midpoints of the occupied bins.
    pub fn midpoints(&self) -> Vec<f64> {
        self.bins.iter().map(|b| 0.5 * (b.lower + b.upper)).collect()
    }

    /// Write `lower,upper,density` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Input(format!("writing bins: {e}"));
        w.write_record(["lower", "upper", "density"]).map_err(io)?;
        for b in &self.bins {
            w.write_record([b.lower.to_string(), b.upper.to_string(), b.density.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Input(format!("writing bins: {e}")))?;
        Ok(())
    }
}

/// Histogram density: weight fraction in each bin over the bin width.
pub fn bin_density(sample: &WeightedSample, scheme: BinScheme) -> Result<BinnedDensity> {
    scheme.validate()?;
    let edges = scheme.edges(sample.min(), sample.max());
    let nbins = edges.len() - 1;
    let mut mass = vec![0.0; nbins];
    for (&x, &w) in sample.incomes().iter().zip(sample.weights()) {
        let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(nbins - 1);
        mass[i] += w;
    }
    let n = sample.len() as f64;
    let bins = edges
        .windows(2)
        .zip(&mass)
        .map(|(e, &m)| Bin { lower: e[0], upper: e[1], density: m / n / (e[1] - e[0]) })
        .collect();
    Ok(BinnedDensity { scheme, bins })
}
