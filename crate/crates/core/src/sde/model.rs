use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stable::{sample_stable_increment, StableSpec};
use crate::math::{exp, ln, sin, sqrt, PI};
use crate::Error;

/// Vector field `b(x)`; writes `n` components.
pub type DriftFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
/// Matrix field `σ₁(x)`; writes `n × n` entries row-major.
pub type DiffusionFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// `dx = b(x) dt + σ₁(x) dB + σ₂ dL` with `L` isotropic α-stable.
pub struct SdeModel {
    dim: usize,
    drift: Box<DriftFn>,
    diffusion: Box<DiffusionFn>,
    jump: Option<StableSpec>,
}

impl fmt::Debug for SdeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeModel").field("dim", &self.dim).field("jump", &self.jump).finish()
    }
}

impl SdeModel {
    pub fn new(
        dim: usize,
        drift: Box<DriftFn>,
        diffusion: Box<DiffusionFn>,
        jump: Option<StableSpec>,
    ) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1"));
        }
        if let Some(j) = &jump {
            if j.dim != dim {
                return Err(Error::InvalidInput("jump dimension differs from model dimension".into()));
            }
        }
        Ok(Self { dim, drift, diffusion, jump })
    }

    /// Two-dimensional Maier–Stein system with α = 1.5, σ₂ = 1 Lévy noise.
    pub fn maier_stein() -> Self {
        Self::maier_stein_with_jump(Some(StableSpec { alpha: 1.5, sigma2: 1.0, dim: 2 }))
    }

    pub fn maier_stein_with_jump(jump: Option<StableSpec>) -> Self {
        Self {
            dim: 2,
            drift: Box::new(|x, out| {
                out[0] = x[0] - x[0] * x[0] * x[0] - x[0] * x[1] * x[1];
                out[1] = -(1.0 + x[0] * x[0]) * x[1];
            }),
            diffusion: Box::new(|x, out| {
                out[0] = sin(PI * x[0] / 2.0);
                out[1] = 0.0;
                out[2] = 0.0;
                out[3] = 0.5 * x[1];
            }),
            jump,
        }
    }

    /// Three-dimensional chaotic system with α = 0.5, σ₂ = 0.5 Lévy noise.
    pub fn chaotic_3d() -> Self {
        Self::chaotic_3d_with_jump(Some(StableSpec { alpha: 0.5, sigma2: 0.5, dim: 3 }))
    }

    pub fn chaotic_3d_with_jump(jump: Option<StableSpec>) -> Self {
        Self {
            dim: 3,
            drift: Box::new(|x, out| {
                out[0] = ln(0.5 + exp(x[1] - x[0]));
                out[1] = x[0] * x[2];
                out[2] = 1.0 - x[0] * x[1];
            }),
            diffusion: Box::new(|x, out| {
                out.iter_mut().for_each(|v| *v = 0.0);
                out[0] = x[0] / sqrt(x[0] * x[0] + 1.0);
                out[4] = 0.4 * x[1];
                out[8] = 0.7 * x[2];
            }),
            jump,
        }
    }

    /// Linear drift `-θ x` with constant diagonal diffusion `σ`.
    pub fn ornstein_uhlenbeck(dim: usize, theta: f64, sigma: f64, jump: Option<StableSpec>) -> Result<Self, Error> {
        Self::new(
            dim,
            Box::new(move |x, out| {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -theta * xi;
                }
            }),
            Box::new(move |_, out| {
                let n = dim;
                out.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    out[i * n + i] = sigma;
                }
            }),
            jump,
        )
    }

    /// No drift, no Brownian part; only the stable component.
    pub fn pure_jump(spec: StableSpec) -> Self {
        Self {
            dim: spec.dim,
            drift: Box::new(|_, out| out.iter_mut().for_each(|v| *v = 0.0)),
            diffusion: Box::new(|_, out| out.iter_mut().for_each(|v| *v = 0.0)),
            jump: Some(spec),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jump(&self) -> Option<&StableSpec> {
        self.jump.as_ref()
    }

    pub fn drift(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }

    pub fn diffusion_factor(&self, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(x, out)
    }

    /// `a(x) = σ₁(x) σ₁(x)^T`, row-major.
    pub fn diffusion_matrix(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut s = vec![0.0; n * n];
        self.diffusion_factor(x, &mut s);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| s[i * n + k] * s[j * n + k]).sum();
            }
        }
        a
    }
}

/// Reusable buffers for [`euler_step_into`].
#[derive(Debug, Clone)]
pub struct StepScratch {
    drift: Vec<f64>,
    factor: Vec<f64>,
    jump: Vec<f64>,
    brownian: Vec<f64>,
}

impl StepScratch {
    pub fn new(dim: usize) -> Self {
        Self { drift: vec![0.0; dim], factor: vec![0.0; dim * dim], jump: vec![0.0; dim], brownian: vec![0.0; dim] }
    }
}

/// One Euler step from `z` over `h`. The stable increment is drawn first,
/// then the Brownian increment.
pub fn euler_step<R: Rng + ?Sized>(model: &SdeModel, z: &[f64], h: f64, rng: &mut R) -> Result<Vec<f64>, Error> {
    let mut scratch = StepScratch::new(model.dim());
    let mut out = vec![0.0; model.dim()];
    euler_step_into(model, z, h, rng, &mut scratch, &mut out)?;
    Ok(out)
}

pub fn euler_step_into<R: Rng + ?Sized>(
    model: &SdeModel,
    z: &[f64],
    h: f64,
    rng: &mut R,
    scratch: &mut StepScratch,
    out: &mut [f64],
) -> Result<(), Error> {
    let n = model.dim();
    model.drift(z, &mut scratch.drift);
    model.diffusion_factor(z, &mut scratch.factor);
    if !scratch.drift.iter().chain(&scratch.factor).all(|v| v.is_finite()) {
        return Err(Error::NonFiniteModel { index: None, point: z.to_vec() });
    }
    match model.jump() {
        Some(spec) => {
            sample_stable_increment(spec, h, rng, &mut scratch.jump);
            let s2 = spec.sigma2;
            scratch.jump.iter_mut().for_each(|v| *v *= s2);
        }
        None => scratch.jump.iter_mut().for_each(|v| *v = 0.0),
    }
    let sh = sqrt(h);
    for b in scratch.brownian.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *b = sh * g;
    }
    for i in 0..n {
        let mut noise = 0.0;
        for k in 0..n {
            noise += scratch.factor[i * n + k] * scratch.brownian[k];
        }
        out[i] = z[i] + scratch.drift[i] * h + noise + scratch.jump[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn deterministic_euler_without_noise() {
        let m = SdeModel::ornstein_uhlenbeck(1, 1.0, 0.0, None).unwrap();
        let mut rng = substream(0, &[]);
        let x = euler_step(&m, &[1.0], 0.001, &mut rng).unwrap();
        assert_eq!(x[0], 0.999);
    }

    #[test]
    fn pure_jump_step_is_the_stable_increment() {
        let spec = StableSpec::new(1.5, 1.0, 2).unwrap();
        let m = SdeModel::pure_jump(spec);
        let x = euler_step(&m, &[0.0, 0.0], 0.01, &mut substream(5, &[])).unwrap();
        let mut inc = [0.0; 2];
        sample_stable_increment(&spec, 0.01, &mut substream(5, &[]), &mut inc);
        assert_eq!(x, inc.to_vec());
    }

    #[test]
    fn maier_stein_fixed_point_has_no_drift() {
        let m = SdeModel::maier_stein();
        let mut b = [1.0; 2];
        m.drift(&[1.0, 0.0], &mut b);
        assert_eq!(b, [0.0, 0.0]);
    }

    #[test]
    fn diffusion_matrix_is_symmetric_psd() {
        let m = SdeModel::chaotic_3d();
        let a = m.diffusion_matrix(&[0.3, -1.2, 2.0]);
        for i in 0..3 {
            assert!(a[i * 3 + i] >= 0.0);
            for j in 0..3 {
                assert_eq!(a[i * 3 + j], a[j * 3 + i]);
            }
        }
        assert!((a[0] - 0.09 / 1.09).abs() < 1e-15);
    }

    #[test]
    fn non_finite_drift_is_reported() {
        let m = SdeModel::new(
            1,
            Box::new(|x, out| out[0] = 1.0 / x[0]),
            Box::new(|_, out| out[0] = 0.0),
            None,
        )
        .unwrap();
        let err = euler_step(&m, &[0.0], 0.1, &mut substream(0, &[])).unwrap_err();
        assert!(matches!(err, Error::NonFiniteModel { .. }));
    }
}
