// Negated float comparisons are deliberate throughout: `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherent;
pub mod error;
pub mod model;
pub mod quasiprob;
pub mod specfun;
pub mod thermal;

pub use error::{Error, Result};
