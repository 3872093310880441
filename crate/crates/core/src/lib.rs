//! Minimal points of `L(x) = x0 + x1·θ1 + x2·θ2` and empirical exponents.

pub mod cli;
pub mod error;
pub mod exponents;
pub mod forms;
pub mod gallery;
pub mod io;
pub mod ledger;
pub mod minimal_points;
pub mod numeric;
pub mod poly;
pub mod quadratic;
pub mod rational;
pub mod reduce;
pub mod structure;
pub mod theta;

pub use error::{Error, Result};
