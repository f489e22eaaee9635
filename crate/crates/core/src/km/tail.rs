use crate::linalg::Matrix;
use crate::math::powf;
use crate::sde::{sphere_surface, StableSpec};
use crate::Error;

/// Radial jump intensity used for the small-jump correction.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum JumpTail {
    Stable(StableSpec),
    /// Radial density `prefactor · r^{-exponent}` (already integrated over
    /// the sphere).
    PowerLaw { prefactor: f64, exponent: f64 },
}

impl JumpTail {
    /// `(C, p)` of the radial density `C r^{-p}`.
    pub fn power_law(&self) -> Result<(f64, f64), Error> {
        match self {
            JumpTail::Stable(spec) => Ok((spec.radial_prefactor()?, 1.0 + spec.alpha)),
            JumpTail::PowerLaw { prefactor, exponent } => Ok((*prefactor, *exponent)),
        }
    }
}

/// Small-jump second moment `S_ij = ∫_{|y|<ε} y_i y_j ν(dy)` for an
/// isotropic measure with radial density `C r^{-p}`: `S = C ε^{3-p} /
/// (n (3-p)) · I`.
pub fn tail_correction(eps: f64, dim: usize, tail: &JumpTail) -> Result<Matrix, Error> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput("eps must be non-negative".into()));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    if let JumpTail::Stable(spec) = tail {
        if spec.dim != dim {
            return Err(Error::InvalidInput("stable spec dimension differs".into()));
        }
    }
    let (c, p) = tail.power_law()?;
    if !(p < 3.0) || !c.is_finite() {
        return Err(Error::Domain("small-jump second moment diverges (exponent must be below 3)"));
    }
    let diag = if eps == 0.0 { 0.0 } else { c * powf(eps, 3.0 - p) / (dim as f64 * (3.0 - p)) };
    let mut s = Matrix::zeros(dim, dim);
    for i in 0..dim {
        s.set(i, i, diag);
    }
    Ok(s)
}

/// Radial density prefactor of a stable spec without constructing one.
pub fn stable_radial_prefactor(dim: usize, alpha: f64, sigma2: f64) -> Result<f64, Error> {
    let c = crate::sde::intensity_constant(dim, alpha)?;
    Ok(sphere_surface(dim) * c * powf(sigma2, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;
    use crate::sde::intensity_constant;

    #[test]
    fn planar_stable_tail() {
        let spec = StableSpec::new(1.5, 1.0, 2).unwrap();
        let s = tail_correction(1.0, 2, &JumpTail::Stable(spec)).unwrap();
        let want = 2.0 * PI * intensity_constant(2, 1.5).unwrap();
        assert!((s.get(0, 0) - want).abs() < 1e-12);
        assert_eq!(s.get(0, 0), s.get(1, 1));
        assert_eq!(s.get(0, 1), 0.0);
    }

    #[test]
    fn line_tail() {
        let spec = StableSpec::new(0.5, 1.0, 1).unwrap();
        let s = tail_correction(1.0, 1, &JumpTail::Stable(spec)).unwrap();
        let want = 2.0 * intensity_constant(1, 0.5).unwrap() / 1.5;
        assert!((s.get(0, 0) - want).abs() < 1e-14);
    }

    #[test]
    fn vanishing_radius() {
        let t = JumpTail::PowerLaw { prefactor: 1.0, exponent: 2.5 };
        assert_eq!(tail_correction(0.0, 2, &t).unwrap().get(0, 0), 0.0);
        assert!(tail_correction(1e-12, 2, &t).unwrap().get(0, 0) < 1e-5);
    }

    #[test]
    fn divergent_exponent_rejected() {
        let t = JumpTail::PowerLaw { prefactor: 1.0, exponent: 3.0 };
        assert!(matches!(tail_correction(1.0, 2, &t), Err(Error::Domain(_))));
    }
}
