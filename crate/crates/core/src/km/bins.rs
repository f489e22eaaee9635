use alloc::vec;
use alloc::vec::Vec;

use crate::expr::PointSet;
use crate::linalg::{lstsq_multi, Matrix};
use crate::sde::{BoxDomain, SnapshotDataset};
use crate::Error;

const OUTSIDE: u32 = u32::MAX;

/// Uniform grid over a box. Bins are `[lo, hi)` per axis except the last,
/// which is closed; bin indices are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    domain: BoxDomain,
    counts: Vec<usize>,
    membership: Vec<u32>,
    excluded: usize,
}

impl BinGrid {
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn bin_count(&self) -> usize {
        self.counts.iter().product()
    }

    /// Points of the dataset outside the box.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn bin_of(&self, point: usize) -> Option<usize> {
        match self.membership[point] {
            OUTSIDE => None,
            b => Some(b as usize),
        }
    }

    pub fn center(&self, bin: usize) -> Vec<f64> {
        let n = self.counts.len();
        let mut c = vec![0.0; n];
        let mut rem = bin;
        for k in (0..n).rev() {
            let i = rem % self.counts[k];
            rem /= self.counts[k];
            let w = (self.domain.hi()[k] - self.domain.lo()[k]) / self.counts[k] as f64;
            c[k] = self.domain.lo()[k] + (i as f64 + 0.5) * w;
        }
        c
    }

    pub fn centers(&self) -> PointSet {
        let n = self.counts.len();
        let mut data = Vec::with_capacity(self.bin_count() * n);
        for b in 0..self.bin_count() {
            data.extend(self.center(b));
        }
        PointSet::new(n, data)
    }

    /// Bin holding `x`, or `None` outside the box.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        locate(&self.domain, &self.counts, x)
    }
}

fn axis_index(lo: f64, hi: f64, count: usize, v: f64) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    let w = (hi - lo) / count as f64;
    let edge = |k: usize| lo + k as f64 * w;
    let mut i = (((v - lo) / w) as usize).min(count - 1);
    // settle rounding so that edges go to the higher bin
    while i + 1 < count && v >= edge(i + 1) {
        i += 1;
    }
    while i > 0 && v < edge(i) {
        i -= 1;
    }
    Some(i)
}

fn locate(domain: &BoxDomain, counts: &[usize], x: &[f64]) -> Option<usize> {
    let mut idx = 0;
    for k in 0..counts.len() {
        let i = axis_index(domain.lo()[k], domain.hi()[k], counts[k], x[k])?;
        idx = idx * counts[k] + i;
    }
    Some(idx)
}

/// Assigns every initial state `z_i` to its bin.
pub fn partition_bins(data: &SnapshotDataset, domain: &BoxDomain, counts: &[usize]) -> Result<BinGrid, Error> {
    if counts.len() != data.dim() || domain.dim() != data.dim() {
        return Err(Error::InvalidInput("bin counts, box and data dimensions differ".into()));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidInput("every axis needs at least one bin".into()));
    }
    let total = counts.iter().try_fold(1usize, |a, &c| a.checked_mul(c));
    if total.is_none_or(|t| t >= OUTSIDE as usize) {
        return Err(Error::InvalidInput("too many bins".into()));
    }
    let mut excluded = 0;
    let membership = data
        .z_flat()
        .chunks_exact(data.dim())
        .map(|z| match locate(domain, counts, z) {
            Some(b) => b as u32,
            None => {
                excluded += 1;
                OUTSIDE
            }
        })
        .collect();
    Ok(BinGrid { domain: domain.clone(), counts: counts.to_vec(), membership, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MomentKind {
    Drift,
    Diffusion,
}

/// Per-bin drift or diffusion values at the bin centers.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMomentTraining {
    pub kind: MomentKind,
    pub dim: usize,
    /// Indices of the bins that contributed rows.
    pub bins: Vec<usize>,
    pub inputs: PointSet,
    /// `targets[o][k]`: output `o` at used bin `k`. Drift outputs are
    /// `b_1..b_n`; diffusion outputs are `a_ij` for `i <= j`, row-major.
    pub targets: Vec<Vec<f64>>,
    pub occupancy: Vec<usize>,
    pub p: Vec<f64>,
    /// Bins that fell back to a constant fit.
    pub fallbacks: usize,
}

impl LocalMomentTraining {
    pub fn outputs(&self) -> usize {
        self.targets.len()
    }

    /// `(i, j)` component of output `o`.
    pub fn component(&self, o: usize) -> (usize, usize) {
        component_of(self.kind, self.dim, o)
    }

    /// Restricts to a subset of outputs.
    pub fn select_outputs(&self, outputs: &[usize]) -> LocalMomentTraining {
        let mut t = self.clone();
        t.targets = outputs.iter().map(|&o| self.targets[o].clone()).collect();
        t
    }
}

/// Output labels in storage order.
pub fn component_of(kind: MomentKind, dim: usize, o: usize) -> (usize, usize) {
    match kind {
        MomentKind::Drift => (o, o),
        MomentKind::Diffusion => {
            let mut k = 0;
            for i in 0..dim {
                for j in i..dim {
                    if k == o {
                        return (i, j);
                    }
                    k += 1;
                }
            }
            (dim, dim)
        }
    }
}

/// `max(20, 2(n+1))`.
pub fn default_min_occupancy(dim: usize) -> usize {
    20usize.max(2 * (dim + 1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    pub eps: f64,
    pub min_occupancy: usize,
}

impl MomentOptions {
    pub fn new(eps: f64, dim: usize) -> Self {
        Self { eps, min_occupancy: default_min_occupancy(dim) }
    }
}

struct BinAccumulator {
    total: usize,
    kept: usize,
    // normal matrix of [1, z - c], (n+1)^2
    ata: Vec<f64>,
    // [1, z - c]^T B for every output, outputs × (n+1)
    atb: Vec<f64>,
    bsum: Vec<f64>,
}

fn moment_fit(
    data: &SnapshotDataset,
    grid: &BinGrid,
    opts: &MomentOptions,
    kind: MomentKind,
    s: Option<&Matrix>,
) -> Result<LocalMomentTraining, Error> {
    let n = data.dim();
    if grid.counts().len() != n || grid.membership.len() != data.len() {
        return Err(Error::InvalidInput("bin grid was built for another dataset".into()));
    }
    if !(opts.eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let outputs = match kind {
        MomentKind::Drift => n,
        MomentKind::Diffusion => n * (n + 1) / 2,
    };
    let p1 = n + 1;
    let nb = grid.bin_count();
    let centers: Vec<Vec<f64>> = (0..nb).map(|b| grid.center(b)).collect();
    let mut acc: Vec<BinAccumulator> = (0..nb)
        .map(|_| BinAccumulator {
            total: 0,
            kept: 0,
            ata: vec![0.0; p1 * p1],
            atb: vec![0.0; outputs * p1],
            bsum: vec![0.0; outputs],
        })
        .collect();
    let eps2 = opts.eps * opts.eps;
    let inv_h = 1.0 / data.h();
    let mut row = vec![0.0; p1];
    let mut d = vec![0.0; n];
    let mut b = vec![0.0; outputs];
    for i in 0..data.len() {
        let Some(k) = grid.bin_of(i) else { continue };
        let a = &mut acc[k];
        a.total += 1;
        let (z, x) = (data.z(i), data.x(i));
        let mut r2 = 0.0;
        for t in 0..n {
            d[t] = x[t] - z[t];
            r2 += d[t] * d[t];
        }
        if r2 > eps2 {
            continue;
        }
        a.kept += 1;
        row[0] = 1.0;
        for t in 0..n {
            row[t + 1] = z[t] - centers[k][t];
        }
        match kind {
            MomentKind::Drift => {
                for t in 0..n {
                    b[t] = d[t] * inv_h;
                }
            }
            MomentKind::Diffusion => {
                let mut o = 0;
                for ii in 0..n {
                    for jj in ii..n {
                        b[o] = d[ii] * d[jj] * inv_h;
                        o += 1;
                    }
                }
            }
        }
        for r in 0..p1 {
            for c in r..p1 {
                a.ata[r * p1 + c] += row[r] * row[c];
            }
        }
        for o in 0..outputs {
            a.bsum[o] += b[o];
            for r in 0..p1 {
                a.atb[o * p1 + r] += row[r] * b[o];
            }
        }
    }

    let mut bins = Vec::new();
    let mut inputs = Vec::new();
    let mut targets = vec![Vec::new(); outputs];
    let mut occupancy = Vec::new();
    let mut ps = Vec::new();
    let mut fallbacks = 0;
    for (k, a) in acc.iter().enumerate() {
        if a.kept < opts.min_occupancy.max(1) {
            continue;
        }
        let p = a.kept as f64 / a.total as f64;
        let mut ata = Matrix::zeros(p1, p1);
        for r in 0..p1 {
            for c in r..p1 {
                ata.set(r, c, a.ata[r * p1 + c]);
                ata.set(c, r, a.ata[r * p1 + c]);
            }
        }
        let rhs: Vec<&[f64]> = (0..outputs).map(|o| &a.atb[o * p1..(o + 1) * p1]).collect();
        let sols = lstsq_multi(&ata, &rhs);
        let degenerate = a.kept < p1 || sols.iter().any(|s| s.rank_deficient);
        if degenerate {
            fallbacks += 1;
        }
        for o in 0..outputs {
            // B carries the factor p_k; it is constant in the bin so it
            // multiplies the fitted intercept
            let raw = if degenerate { a.bsum[o] / a.kept as f64 } else { sols[o].x[0] };
            let mut v = p * raw;
            if let (MomentKind::Diffusion, Some(s)) = (kind, s) {
                let (i, j) = component_of(kind, n, o);
                v -= s.get(i, j);
            }
            targets[o].push(v);
        }
        bins.push(k);
        inputs.extend_from_slice(&centers[k]);
        occupancy.push(a.kept);
        ps.push(p);
    }
    if bins.is_empty() {
        return Err(Error::InsufficientData("no bin reached the minimum occupancy".into()));
    }
    Ok(LocalMomentTraining {
        kind,
        dim: n,
        bins,
        inputs: PointSet::new(n, inputs),
        targets,
        occupancy,
        p: ps,
        fallbacks,
    })
}

/// Affine least-squares fit of `p_k h⁻¹ (x - z)` per bin, reported at the
/// bin centers.
pub fn local_drift_fit(
    data: &SnapshotDataset,
    grid: &BinGrid,
    opts: &MomentOptions,
) -> Result<LocalMomentTraining, Error> {
    moment_fit(data, grid, opts, MomentKind::Drift, None)
}

/// As [`local_drift_fit`] for the second moments `p_k h⁻¹ (x-z)_i (x-z)_j`,
/// minus the small-jump correction `s` when given.
pub fn local_diffusion_fit(
    data: &SnapshotDataset,
    grid: &BinGrid,
    opts: &MomentOptions,
    s: Option<&Matrix>,
) -> Result<LocalMomentTraining, Error> {
    if let Some(s) = s {
        if s.rows() != data.dim() || s.cols() != data.dim() {
            return Err(Error::InvalidInput("tail correction has the wrong shape".into()));
        }
    }
    moment_fit(data, grid, opts, MomentKind::Diffusion, s)
}
