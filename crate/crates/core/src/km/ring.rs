use alloc::vec::Vec;

use crate::math::powf;
use crate::sde::SnapshotDataset;
use crate::Error;

/// Ring-probability targets for the jump measure: `targets[j]` estimates
/// the rate of displacements with `edges[j] <= |x - z| < edges[j+1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RingTrainingSet {
    pub eps: f64,
    pub m: f64,
    pub rings: usize,
    /// `{ε, mε, ..., m^N ε}`.
    pub edges: Vec<f64>,
    /// `n_j / (h M)`.
    pub targets: Vec<f64>,
    pub counts: Vec<u64>,
}

impl RingTrainingSet {
    /// True when no displacement fell in any ring.
    pub fn is_empty_signal(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn outer_radius(&self) -> f64 {
        self.edges[self.rings]
    }
}

pub fn ring_edges(eps: f64, m: f64, rings: usize) -> Vec<f64> {
    (0..=rings).map(|j| eps * powf(m, j as f64)).collect()
}

pub fn build_ring_training(data: &SnapshotDataset, eps: f64, m: f64, rings: usize) -> Result<RingTrainingSet, Error> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput("ring radius eps must be positive".into()));
    }
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::InvalidInput("ring ratio m must exceed 1".into()));
    }
    if rings == 0 {
        return Err(Error::InvalidInput("at least one ring is required".into()));
    }
    if data.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    let edges = ring_edges(eps, m, rings);
    let mut counts = alloc::vec![0u64; rings];
    let n = data.dim();
    for (z, x) in data.z_flat().chunks_exact(n).zip(data.x_flat().chunks_exact(n)) {
        let mut s = 0.0;
        for (a, b) in x.iter().zip(z) {
            let d = a - b;
            s += d * d;
        }
        let r = crate::math::sqrt(s);
        if r < edges[0] || r >= edges[rings] {
            continue;
        }
        // first edge strictly above r, minus one
        let j = edges.partition_point(|e| *e <= r) - 1;
        counts[j] += 1;
    }
    let scale = 1.0 / (data.h() * data.len() as f64);
    let targets = counts.iter().map(|&c| c as f64 * scale).collect();
    Ok(RingTrainingSet { eps, m, rings, edges, targets, counts })
}
