//! Shared inputs for the benchmarks.

use incomefit::data::WeightedSample;
use incomefit::distributions::{Model, Params};

pub const INVERSE_GAMMA: Params = Params::InverseGamma { alpha: 3.0, beta: 40000.0, c: -2000.0 };

/// Unit-weight draws from `params`.
pub fn synthetic(params: Params, n: usize, seed: u64) -> WeightedSample {
    let draws = Model::new(params).unwrap().sample(n, seed).unwrap();
    WeightedSample::from_incomes(&draws).unwrap()
}
