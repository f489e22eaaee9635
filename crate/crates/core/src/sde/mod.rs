//! Stochastic models and one-step snapshot data.

mod dataset;
mod model;
mod stable;

pub use dataset::{generate_dataset, BoxDomain, SnapshotDataset, CHUNK_SIZE};
pub use model::{euler_step, euler_step_into, DiffusionFn, DriftFn, SdeModel, StepScratch};
pub use stable::{
    characteristic_function, intensity_constant, positive_stable, sample_stable_increment, sphere_surface,
    StableSpec,
};
