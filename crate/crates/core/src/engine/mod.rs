//! Value estimation and context selection.
//!
//! Each temperature run keeps one value per optimizable item. Every round it
//! samples a batch of fixed-size subsets from the softmax of the values,
//! scores them with the evaluator, and takes one least-squares gradient step
//! toward `c·φ ≈ p`. At the end the items with the largest positive values
//! form the context, and the run with the best estimate wins.

mod artifacts;
mod run;
mod sampling;
mod select;
mod sgd;
mod universe;

pub use artifacts::{write_run_json, write_trajectory_csv};
pub use run::{
    optimize, run_single, EngineConfig, Initializer, OptimizeOutcome, RoundRecord, RunFailure, RunResult,
};
pub use sampling::{
    draw_fixed_size, draw_items, draw_subset, inclusion_probabilities, max_rung, sampling_distribution,
    temperature_schedule, KindSampler, SamplingDistribution, SubsetSampler,
};
pub use select::{class_coverage_fixup, select_items};
pub use sgd::{batch_gradient, batch_loss, sgd_step, sgd_step_in_place};
pub use universe::{Item, ItemUniverse, SubsetObservation, ValueVector};
