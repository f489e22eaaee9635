//! Design matrices, elastic-net fitting and hard-thresholding.

mod design;
mod enet;
mod prune;
mod problem;

pub use design::{design_pointwise, design_ring, DesignMatrix, RingQuadrature};
pub use enet::{elastic_net_fit, elastic_net_fit_with, least_squares_fit, mse_loss, ElasticNetOptions, SparseFit};
pub use problem::{Basis, RegressionProblem};
pub use prune::{hard_threshold_prune, hard_threshold_select, Pruned};
