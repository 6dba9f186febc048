use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Observation, WeightedSample};
use crate::distributions::ModelFamily;
use crate::error::{Error, Result};

use super::fit;
use super::options::FitOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub parameter_names: Vec<String>,
    pub standard_errors: Vec<f64>,
    pub replicates: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

/// Resample `sample` with replacement, using its weights as selection
/// probabilities; the replicate has unit weights. Replicate `r` draws from
/// stream `r` of the generator seeded with `seed`.
pub fn resample(sample: &WeightedSample, seed: u64, replicate: u64) -> Result<WeightedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let index =
        WeightedIndex::new(sample.weights()).map_err(|e| Error::Precondition(format!("resampling weights: {e}")))?;
    let xs = sample.incomes();
    let obs: Vec<Observation> =
        (0..sample.len()).map(|_| Observation { income: xs[index.sample(&mut rng)], weight: 1.0 }).collect();
    WeightedSample::new(&obs)
}

/// Standard deviation of refitted values across bootstrap replicates for
/// every parameter reported by `estimate`. Fails when more than 10% of
/// replicates fail.
pub fn bootstrap_with<F>(sample: &WeightedSample, replicates: usize, seed: u64, estimate: F) -> Result<BootstrapResult>
where
    F: Fn(&WeightedSample) -> Result<Vec<(&'static str, f64)>> + Sync,
{
    if replicates < 2 {
        return Err(Error::Precondition(format!("need at least 2 replicates, got {replicates}")));
    }
    let outcomes: Vec<Result<Vec<(&'static str, f64)>>> =
        (0..replicates as u64).into_par_iter().map(|r| resample(sample, seed, r).and_then(|s| estimate(&s))).collect();
    let mut failures = 0;
    let mut first_failure = None;
    let mut values: Vec<Vec<(&'static str, f64)>> = Vec::new();
    for o in outcomes {
        match o {
            Ok(v) => values.push(v),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failures * 10 > replicates || values.len() < 2 {
        return Err(Error::Fit(format!(
            "{failures} of {replicates} bootstrap replicates failed; first: {}",
            first_failure.unwrap_or_default()
        )));
    }
    let names: Vec<String> = values[0].iter().map(|(n, _)| n.to_string()).collect();
    let m = values.len() as f64;
    let standard_errors = (0..names.len())
        .map(|j| {
            let mean = values.iter().map(|v| v[j].1).sum::<f64>() / m;
            let ss = values.iter().map(|v| (v[j].1 - mean).powi(2)).sum::<f64>();
            (ss / (m - 1.0)).sqrt()
        })
        .collect();
    Ok(BootstrapResult { parameter_names: names, standard_errors, replicates, failures, first_failure })
}

/// Bootstrap standard errors of every parameter of `family` fitted with
/// `options`. For the one-parameter model only alpha varies.
pub fn bootstrap_se(
    family: ModelFamily,
    sample: &WeightedSample,
    options: &FitOptions,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    options.validate()?;
    bootstrap_with(sample, replicates, seed, |s| {
        let fitted = fit(family, s, options)?;
        Ok(fitted.parameters.named_values())
    })
}
