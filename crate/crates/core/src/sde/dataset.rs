use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::model::{euler_step_into, SdeModel, StepScratch};
use crate::rng::substream;
use crate::Error;

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, Error> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidInput("box bounds must be non-empty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return Err(Error::InvalidInput("box is degenerate or not finite".into()));
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, Error> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Paired states at `t = 0` (`Z`) and `t = h` (`X`), stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotDataset {
    dim: usize,
    h: f64,
    z: Vec<f64>,
    x: Vec<f64>,
}

impl SnapshotDataset {
    pub fn new(dim: usize, h: f64, z: Vec<f64>, x: Vec<f64>) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::InvalidInput("dataset dimension must be at least 1".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput("time step must be positive".into()));
        }
        if z.len() != x.len() || z.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "Z has {} values and X has {} values for dimension {dim}",
                z.len(),
                x.len()
            )));
        }
        if let Some(p) = z.iter().chain(&x).position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry at flat position {p}")));
        }
        Ok(Self { dim, h, z, x })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.z.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn z(&self, i: usize) -> &[f64] {
        &self.z[i * self.dim..(i + 1) * self.dim]
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn z_flat(&self) -> &[f64] {
        &self.z
    }

    pub fn x_flat(&self) -> &[f64] {
        &self.x
    }

    /// `|x_i - z_i|` for every pair.
    pub fn displacement_norms(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let d: Vec<f64> = self.x(i).iter().zip(self.z(i)).map(|(a, b)| a - b).collect();
                crate::math::norm(&d)
            })
            .collect()
    }
}

/// Points per independently seeded chunk of a generated dataset.
pub const CHUNK_SIZE: usize = 8192;

const DATASET_TAG: u64 = 0x5eed_da7a;

/// Draws `m` uniform initial states in `domain` and advances each by one
/// Euler step of length `h`. Chunk `c` of [`CHUNK_SIZE`] points uses the
/// stream `(seed, c)`, so the output does not depend on thread count.
pub fn generate_dataset(
    model: &SdeModel,
    domain: &BoxDomain,
    m: usize,
    h: f64,
    seed: u64,
) -> Result<SnapshotDataset, Error> {
    let n = model.dim();
    if domain.dim() != n {
        return Err(Error::InvalidInput("domain and model dimensions differ".into()));
    }
    if m == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput("time step must be positive".into()));
    }
    let chunks = m.div_ceil(CHUNK_SIZE);
    let parts = crate::parallel::map_indexed(chunks, |c| -> Result<(Vec<f64>, Vec<f64>), Error> {
        let start = c * CHUNK_SIZE;
        let len = CHUNK_SIZE.min(m - start);
        let mut rng = substream(seed, &[DATASET_TAG, c as u64]);
        let mut scratch = StepScratch::new(n);
        let mut z = vec![0.0; len * n];
        let mut x = vec![0.0; len * n];
        for i in 0..len {
            let zi = &mut z[i * n..(i + 1) * n];
            for (k, v) in zi.iter_mut().enumerate() {
                let u: f64 = rng.random();
                *v = domain.lo[k] + u * (domain.hi[k] - domain.lo[k]);
            }
            euler_step_into(model, zi, h, &mut rng, &mut scratch, &mut x[i * n..(i + 1) * n]).map_err(|e| match e {
                Error::NonFiniteModel { point, .. } => Error::NonFiniteModel { index: Some(start + i), point },
                other => other,
            })?;
        }
        Ok((z, x))
    });
    let mut z = Vec::with_capacity(m * n);
    let mut x = Vec::with_capacity(m * n);
    for part in parts {
        let (pz, px) = part?;
        z.extend_from_slice(&pz);
        x.extend_from_slice(&px);
    }
    SnapshotDataset::new(n, h, z, x)
}
