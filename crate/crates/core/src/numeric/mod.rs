//! Generic numerical machinery shared by the density and estimation code.

pub mod nelder_mead;
pub mod optimize;
pub mod quadrature;
pub mod roots;

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use optimize::{golden_section, grid_then_golden, GoldenResult};
pub use quadrature::{integrate, integrate_to_infinity, Integral};
pub use roots::{bisect_increasing, brent, expand_bracket, newton_safeguarded};
