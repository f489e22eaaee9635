use alloc::vec::Vec;

use super::design::DesignMatrix;
use super::enet::{least_squares_fit, mse_loss};
use crate::expr::Individual;
use crate::math::abs;

#[derive(Debug, Clone, PartialEq)]
pub struct Pruned {
    /// Surviving columns of the input design, in order.
    pub kept: Vec<usize>,
    /// Least-squares coefficients on `kept`, output-major.
    pub coefficients: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub rank_deficient: bool,
}

/// Hard-thresholding by least squares: while some column has
/// `|ξ_J| <= ρ max|ξ|` (magnitudes taken over outputs), drop the single
/// smallest one and refit. The last column is never dropped.
pub fn hard_threshold_select(design: &DesignMatrix, rho: f64) -> Pruned {
    let outputs = design.outputs();
    let mut kept: Vec<usize> = (0..design.cols()).collect();
    let mut iterations = 0;
    loop {
        let d = design.select_columns(&kept);
        let (coef, rank_deficient) = least_squares_fit(&d);
        let k = kept.len();
        let mags: Vec<f64> =
            (0..k).map(|j| (0..outputs).map(|o| abs(coef[o * k + j])).fold(0.0, f64::max)).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        let smallest = (0..k)
            .filter(|&j| mags[j] <= rho * max)
            .min_by(|&a, &b| mags[a].total_cmp(&mags[b]).then(a.cmp(&b)));
        match smallest {
            Some(j) if k > 1 => {
                kept.remove(j);
                iterations += 1;
            }
            _ => {
                let loss = mse_loss(&d, &coef);
                return Pruned { kept, coefficients: coef, loss, iterations, rank_deficient };
            }
        }
    }
}

/// Applies [`hard_threshold_select`] to an individual whose candidates
/// produced `design`; the result carries the refitted coefficients.
pub fn hard_threshold_prune(ind: &Individual, design: &DesignMatrix, rho: f64) -> (Individual, Pruned) {
    let p = hard_threshold_select(design, rho);
    let mut out = Individual::new(p.kept.iter().map(|&j| ind.candidates[j].clone()).collect());
    out.coefficients = p.coefficients.clone();
    out.outputs = design.outputs();
    out.loss = p.loss;
    (out, p)
}
