#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]
pub mod analysis;
pub mod data;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod numeric;
pub mod reduction;
pub mod special;

pub use error::{Error, Result};
