//! The three discovery stages: jump measure, drift and diffusion.

mod power_law;
mod stages;

pub use power_law::{
    infer_stable_params, learned_radial, log_spaced, power_law_fit, PowerLawFit, StableEstimate, POWER_LAW_SAMPLES,
};
pub use stages::{
    finalize_individual, run_diffusion, run_drift, run_jump, search, JumpStage, LearnedModel, MomentStage,
    OutputGroup, RingOptions, StageSettings,
};
