use alloc::vec::Vec;

use super::tree::Expr;

/// A GP genome: candidate trees whose linear combination models one or
/// more target functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub candidates: Vec<Expr>,
    /// Output-major coefficients, `outputs × candidates.len()`; empty when
    /// the individual has not been fitted.
    pub coefficients: Vec<f64>,
    pub outputs: usize,
    /// Mean squared loss of the last fit (`+∞` when unfitted or failed).
    pub loss: f64,
    pub fitness: f64,
}

impl Individual {
    pub fn new(candidates: Vec<Expr>) -> Self {
        Self { candidates, coefficients: Vec::new(), outputs: 0, loss: f64::INFINITY, fitness: f64::INFINITY }
    }

    pub fn is_fitted(&self) -> bool {
        !self.coefficients.is_empty() && self.coefficients.len() == self.outputs * self.candidates.len()
    }

    pub fn clear_fit(&mut self) {
        self.coefficients.clear();
        self.outputs = 0;
        self.loss = f64::INFINITY;
        self.fitness = f64::INFINITY;
    }

    pub fn coefficient(&self, output: usize, candidate: usize) -> f64 {
        self.coefficients[output * self.candidates.len() + candidate]
    }

    /// Coefficients for one output.
    pub fn output_coefficients(&self, output: usize) -> &[f64] {
        let n = self.candidates.len();
        &self.coefficients[output * n..(output + 1) * n]
    }

    /// Largest coefficient magnitude of candidate `j` across outputs.
    pub fn coefficient_magnitude(&self, j: usize) -> f64 {
        (0..self.outputs).map(|o| crate::math::abs(self.coefficient(o, j))).fold(0.0, f64::max)
    }

    /// Γ: candidates with a nonzero coefficient in any output.
    pub fn active_count(&self) -> usize {
        (0..self.candidates.len()).filter(|&j| self.coefficient_magnitude(j) != 0.0).count()
    }

    /// ΣΛ: operator count summed over all candidates.
    pub fn operator_total(&self) -> usize {
        self.candidates.iter().map(Expr::operator_count).sum()
    }

    pub fn node_total(&self) -> usize {
        self.candidates.iter().map(Expr::node_count).sum()
    }

    pub fn constant_total(&self) -> usize {
        self.candidates.iter().map(Expr::constant_count).sum()
    }

    /// Candidates with a nonzero coefficient, in order.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.candidates.len()).filter(|&j| self.coefficient_magnitude(j) != 0.0).collect()
    }
}
