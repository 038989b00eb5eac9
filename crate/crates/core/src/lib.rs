//! Black-box context optimization for tabular in-context learners.
//!
//! A tabular foundation model conditions on a context table and predicts a
//! query set in one forward pass, but only up to a fixed number of context
//! rows and columns. When the training table is larger than that, this crate
//! picks which rows and columns to show the model. It estimates one
//! importance value per optimizable item by regressing validation
//! performance on subset membership, refining the estimates online while
//! importance-sampling new subsets, and keeps the items with the largest
//! positive values.
//!
//! The model itself is only ever reached through the [`evaluator`] module.
//! Bundled surrogates make everything runnable without a model, and a
//! line-delimited JSON bridge drives an external process.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod baselines;
pub mod data;
pub mod engine;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod rng;
pub mod stats;

pub use error::{Error, EvalError, Result};
