//! Nonlocal Kramers–Moyal preprocessing: ring histograms for the jump
//! measure and per-bin local fits for drift and diffusion.

mod bins;
mod ring;
mod tail;

pub use bins::{
    component_of, default_min_occupancy, local_diffusion_fit, local_drift_fit, partition_bins, BinGrid,
    LocalMomentTraining, MomentKind, MomentOptions,
};
pub use ring::{build_ring_training, ring_edges, RingTrainingSet};
pub use tail::{stable_radial_prefactor, tail_correction, JumpTail};
