pub mod error;
pub mod auxiliary;
pub mod expr;
pub mod metric;
pub mod piecewise;
pub mod contraction;
pub mod iteration;
pub mod scenarios;
pub mod cli;

pub use error::{Error, Result};
