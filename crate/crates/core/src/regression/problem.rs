use alloc::vec::Vec;

use super::design::{design_pointwise, design_ring, DesignMatrix, RingQuadrature};
use crate::expr::{Expr, PointSet};
use crate::Error;

/// How candidate functions turn into design columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    /// Evaluation at the given inputs.
    Pointwise(PointSet),
    /// Integrals of a radial function over rings.
    Rings(RingQuadrature),
}

/// Targets plus the recipe for the design matrix of any candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    basis: Basis,
    targets: Vec<Vec<f64>>,
    edit_points: PointSet,
}

impl RegressionProblem {
    pub fn pointwise(inputs: PointSet, targets: Vec<Vec<f64>>) -> Result<Self, Error> {
        if inputs.is_empty() {
            return Err(Error::InsufficientData("no training inputs".into()));
        }
        if targets.is_empty() || targets.iter().any(|t| t.len() != inputs.len()) {
            return Err(Error::InvalidInput("targets do not match the inputs".into()));
        }
        Ok(Self { edit_points: inputs.clone(), basis: Basis::Pointwise(inputs), targets })
    }

    pub fn rings(edges: &[f64], targets: Vec<f64>) -> Result<Self, Error> {
        let quad = RingQuadrature::with_default_order(edges)?;
        if targets.len() != quad.rings() {
            return Err(Error::InvalidInput("one target per ring is required".into()));
        }
        Ok(Self { edit_points: quad.points(), basis: Basis::Rings(quad), targets: alloc::vec![targets] })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    /// Points on which candidates must be admissible.
    pub fn edit_points(&self) -> &PointSet {
        &self.edit_points
    }

    pub fn n_vars(&self) -> usize {
        self.edit_points.dim()
    }

    pub fn outputs(&self) -> usize {
        self.targets.len()
    }

    pub fn design(&self, candidates: &[Expr]) -> Result<DesignMatrix, Error> {
        match &self.basis {
            Basis::Pointwise(p) => design_pointwise(candidates, p, self.targets.clone()),
            Basis::Rings(q) => design_ring(candidates, q, self.targets[0].clone()),
        }
    }
}
