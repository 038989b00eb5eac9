//! Tables, ingestion, splitting, and the augmentation and noising transforms.
//!
//! Every transform returns a new [`Table`]; originals are never mutated and
//! synthetic rows or columns are always appended after the original ones.

pub mod augment;
pub mod io;
pub mod noise;
pub mod split;
mod synthetic;
mod table;

pub use augment::{augment, augment_features, augment_samples, AugmentKind, AugmentSpec};
pub use io::{load_csv, read_csv, read_table, save_table, LabelColumn};
pub use noise::{inject_noise, NoiseKind, NoiseSpec};
pub use split::{split, split_indices, SplitIndices, SplitSpec};
pub use synthetic::two_gaussians;
pub use table::{Origin, Table};
