//! Rotationally symmetric α-stable Lévy motion.
//!
//! The jump kernel is `W(y) = c(n, α) |y|^{-n-α}` and the unit-intensity
//! process has characteristic function `E exp(i<u, L_t>) = exp(-t |u|^α)`.
//! Increments are drawn by Gaussian subordination: `L = sqrt(2 S) G` where
//! `G` is a standard normal vector and `S` is a positive (α/2)-stable
//! variable with Laplace transform `E exp(-λ S) = exp(-t λ^{α/2})`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::math::{gamma, powf, sin, sqrt, PI};
use crate::Error;

/// Parameters of an isotropic α-stable jump component.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableSpec {
    /// Stability index in `(0, 2]`.
    pub alpha: f64,
    /// Noise intensity multiplying the unit process.
    pub sigma2: f64,
    pub dim: usize,
}

impl StableSpec {
    pub fn new(alpha: f64, sigma2: f64, dim: usize) -> Result<Self, Error> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Domain("stability index must lie in (0, 2]"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Domain("noise intensity must be positive"));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1"));
        }
        Ok(Self { alpha, sigma2, dim })
    }

    /// Radial density of the scaled jump measure,
    /// `surface(n) σ^{-n} r^{n-1} W(r/σ) = surface(n) c(n,α) σ^α r^{-1-α}`.
    pub fn radial_prefactor(&self) -> Result<f64, Error> {
        let c = intensity_constant(self.dim, self.alpha)?;
        Ok(sphere_surface(self.dim) * c * powf(self.sigma2, self.alpha))
    }
}

/// `c(n, α) = α Γ((n+α)/2) / (2^{1-α} π^{n/2} Γ(1-α/2))`.
pub fn intensity_constant(dim: usize, alpha: f64) -> Result<f64, Error> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain("intensity constant needs 0 < alpha < 2"));
    }
    let n = dim as f64;
    let num = alpha * gamma((n + alpha) / 2.0);
    let den = powf(2.0, 1.0 - alpha) * powf(PI, n / 2.0) * gamma(1.0 - alpha / 2.0);
    Ok(num / den)
}

/// Surface area of the unit sphere in `R^n` (2, 2π, 4π for n = 1, 2, 3).
pub fn sphere_surface(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * powf(PI, n / 2.0) / gamma(n / 2.0)
}

/// Totally skewed positive stable variable of index `a ∈ (0, 1)` with
/// Laplace transform `exp(-λ^a)` (Chambers–Mallows–Stuck with β = 1, in
/// Kanter's form).
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    debug_assert!(a > 0.0 && a < 1.0);
    loop {
        // V uniform on (0, π), W standard exponential
        let v = PI * open_unit(rng);
        let w: f64 = Exp1.sample(rng);
        if w <= 0.0 {
            continue;
        }
        let sv = sin(v);
        if sv <= 0.0 {
            continue;
        }
        // Kanter: [sin(a v) / sin(v)^{1/a}] * [sin((1-a) v) / w]^{(1-a)/a}
        let part1 = sin(a * v) / powf(sv, 1.0 / a);
        let part2 = powf(sin((1.0 - a) * v) / w, (1.0 - a) / a);
        let x = part1 * part2;
        if x.is_finite() && x > 0.0 {
            return x;
        }
    }
}

#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One increment of the unit-intensity isotropic α-stable motion over `dt`,
/// written into `out` (length = `spec.dim`). Scale with `spec.sigma2` at the
/// call site.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    spec: &StableSpec,
    dt: f64,
    rng: &mut R,
    out: &mut [f64],
) {
    debug_assert!(dt > 0.0);
    debug_assert_eq!(out.len(), spec.dim);
    let alpha = spec.alpha;
    let var = if alpha >= 2.0 {
        2.0 * dt
    } else {
        let a = alpha / 2.0;
        2.0 * powf(dt, 1.0 / a) * positive_stable(a, rng)
    };
    let scale = sqrt(var);
    for o in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *o = scale * g;
    }
}

/// Closed-form unit-process characteristic function `exp(-dt |u|^α)`.
pub fn characteristic_function(alpha: f64, dt: f64, u_norm: f64) -> f64 {
    crate::math::exp(-dt * powf(u_norm, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn intensity_constant_matches_reported_integrands() {
        let c2 = intensity_constant(2, 1.5).unwrap();
        assert!((c2 - 0.17119).abs() < 1e-4, "{c2}");
        assert!((2.0 * PI * c2 - 1.0755).abs() / 1.0755 < 1e-3);
        let c3 = intensity_constant(3, 0.5).unwrap();
        assert!((c3 - 0.04763).abs() < 1e-4, "{c3}");
        assert!((4.0 * PI * sqrt(0.5) * c3 - 0.4231).abs() / 0.4231 < 1e-3);
    }

    #[test]
    fn intensity_constant_cauchy_line() {
        let c = intensity_constant(1, 1.0).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn intensity_constant_rejects_gaussian_limit() {
        assert!(intensity_constant(2, 2.0).is_err());
        assert!(intensity_constant(0, 1.0).is_err());
    }

    #[test]
    fn sphere_surfaces() {
        assert!((sphere_surface(1) - 2.0).abs() < 1e-14);
        assert!((sphere_surface(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_surface(3) - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn spec_validation() {
        assert!(StableSpec::new(0.0, 1.0, 1).is_err());
        assert!(StableSpec::new(2.5, 1.0, 1).is_err());
        assert!(StableSpec::new(1.0, 0.0, 1).is_err());
        assert!(StableSpec::new(1.0, 1.0, 0).is_err());
        assert!(StableSpec::new(2.0, 1.0, 3).is_ok());
    }

    #[test]
    fn positive_stable_laplace_transform() {
        // E exp(-λ S) = exp(-λ^a)
        let mut rng = substream(11, &[]);
        let a = 0.75;
        let n = 200_000;
        let lam = 1.3;
        let mean: f64 = (0..n).map(|_| crate::math::exp(-lam * positive_stable(a, &mut rng))).sum::<f64>()
            / n as f64;
        let want = crate::math::exp(-powf(lam, a));
        assert!((mean - want).abs() < 5e-3, "{mean} vs {want}");
    }
}
