use alloc::vec::Vec;

use crate::expr::Individual;
use crate::math::{exp, ln, powf};
use crate::sde::{intensity_constant, sphere_surface};
use crate::Error;

/// Radii used when reading a power law off a learned radial function.
pub const POWER_LAW_SAMPLES: usize = 50;

/// `C r^{-p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerLawFit {
    pub prefactor: f64,
    pub exponent: f64,
}

impl PowerLawFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.prefactor * powf(r, -self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableEstimate {
    pub alpha: f64,
    pub sigma2: f64,
}

/// `n` log-spaced radii on `[lo, hi]`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (ln(lo), ln(hi));
    (0..n).map(|k| exp(a + (b - a) * k as f64 / (n - 1) as f64)).collect()
}

/// Least-squares fit of `ln f = ln C - p ln r` over `samples` log-spaced
/// radii. Radii where `f` is not positive and finite are skipped; at
/// least half must remain.
pub fn power_law_fit<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> Result<PowerLawFit, Error> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || samples < 2 {
        return Err(Error::InvalidInput("power-law fit needs 0 < lo < hi and two samples".into()));
    }
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for r in log_spaced(lo, hi, samples) {
        let v = f(r);
        if v > 0.0 && v.is_finite() {
            xs.push(ln(r));
            ys.push(ln(v));
        }
    }
    if xs.len() < 2 || 2 * xs.len() < samples {
        return Err(Error::InsufficientData("learned radial function is not positive on the ring range".into()));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    Ok(PowerLawFit { prefactor: exp(my - slope * mx), exponent: -slope })
}

/// `Σ ξ_j φ_j(r)` for the first output of a fitted one-variable individual.
pub fn learned_radial(ind: &Individual, r: f64) -> f64 {
    if !ind.is_fitted() {
        return f64::NAN;
    }
    ind.candidates.iter().zip(ind.output_coefficients(0)).map(|(c, &xi)| if xi == 0.0 { 0.0 } else { xi * c.eval(&[r]) }).sum()
}

/// Inverts `C = surface(n) c(n, α) σ₂^α`, `p = 1 + α`.
pub fn infer_stable_params(prefactor: f64, exponent: f64, dim: usize) -> Result<StableEstimate, Error> {
    let alpha = exponent - 1.0;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain("fitted exponent is outside the stable range (1, 3)"));
    }
    if !(prefactor > 0.0 && prefactor.is_finite()) {
        return Err(Error::Domain("fitted prefactor must be positive"));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::Domain("stable parameters are inferred for dimensions 1 to 3"));
    }
    let c = intensity_constant(dim, alpha)?;
    let sigma2 = powf(prefactor / (sphere_surface(dim) * c), 1.0 / alpha);
    Ok(StableEstimate { alpha, sigma2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let f = power_law_fit(|r| 1.0755 * powf(r, -2.5), 1.0, powf(1.5, 10.0), POWER_LAW_SAMPLES).unwrap();
        assert!((f.exponent - 2.5).abs() < 1e-12);
        assert!((f.prefactor - 1.0755).abs() < 1e-12);
    }

    #[test]
    fn reads_off_quoted_integrands() {
        let s = infer_stable_params(1.0755, 2.5, 2).unwrap();
        assert!((s.alpha - 1.5).abs() < 1e-12 && (s.sigma2 - 1.0).abs() < 0.01);
        let s = infer_stable_params(0.4231, 1.5, 3).unwrap();
        assert!((s.alpha - 0.5).abs() < 1e-12 && (s.sigma2 - 0.5).abs() < 0.01);
        assert!(infer_stable_params(1.0, 3.5, 2).is_err());
    }
}
