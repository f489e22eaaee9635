use alloc::vec::Vec;

use crate::expr::{Expr, PointSet};
use crate::linalg::Matrix;
use crate::quadrature::{GaussLegendre, RING_ORDER};
use crate::Error;

/// Candidate matrix `Φ` (rows × candidates) shared by one or more target
/// vectors. Several outputs are equivalent to stacking the outputs
/// dimension-major against a block-diagonal `Φ`; losses are normalized by
/// the stacked row count.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub phi: Matrix,
    pub targets: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(phi: Matrix, targets: Vec<Vec<f64>>) -> Result<Self, Error> {
        if targets.is_empty() {
            return Err(Error::InvalidInput("design needs at least one target vector".into()));
        }
        if targets.iter().any(|t| t.len() != phi.rows()) {
            return Err(Error::InvalidInput("target length differs from design rows".into()));
        }
        Ok(Self { phi, targets })
    }

    pub fn rows(&self) -> usize {
        self.phi.rows()
    }

    pub fn cols(&self) -> usize {
        self.phi.cols()
    }

    pub fn outputs(&self) -> usize {
        self.targets.len()
    }

    /// Rows of the stacked system.
    pub fn stacked_rows(&self) -> usize {
        self.rows() * self.outputs()
    }

    pub fn select_columns(&self, keep: &[usize]) -> DesignMatrix {
        DesignMatrix { phi: self.phi.select_columns(keep), targets: self.targets.clone() }
    }
}

fn from_columns(columns: &[Vec<f64>], rows: usize) -> Matrix {
    let cols = columns.len();
    let mut data = alloc::vec![0.0; rows * cols];
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            data[i * cols + j] = *v;
        }
    }
    Matrix::from_row_major(rows, cols, data)
}

/// `Φ[k][j] = φ_j(z_k)`.
pub fn design_pointwise(candidates: &[Expr], inputs: &PointSet, targets: Vec<Vec<f64>>) -> Result<DesignMatrix, Error> {
    let mut columns = Vec::with_capacity(candidates.len());
    for (j, c) in candidates.iter().enumerate() {
        let mut col = Vec::with_capacity(inputs.len());
        for (k, p) in inputs.iter().enumerate() {
            let v = c.eval(p);
            if !v.is_finite() {
                return Err(Error::NonFiniteDesign { candidate: j, row: k });
            }
            col.push(v);
        }
        columns.push(col);
    }
    DesignMatrix::new(from_columns(&columns, inputs.len()), targets)
}

/// Quadrature nodes and weights for the rings `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingQuadrature {
    rings: usize,
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RingQuadrature {
    pub fn new(edges: &[f64], order: usize) -> Result<Self, Error> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("ring edges must be strictly increasing".into()));
        }
        let rule = GaussLegendre::new(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in edges.windows(2) {
            for (x, wt) in rule.mapped(w[0], w[1]) {
                nodes.push(x);
                weights.push(wt);
            }
        }
        Ok(Self { rings: edges.len() - 1, order, nodes, weights })
    }

    pub fn with_default_order(edges: &[f64]) -> Result<Self, Error> {
        Self::new(edges, RING_ORDER)
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    /// All nodes of all rings, as 1-D points.
    pub fn points(&self) -> PointSet {
        PointSet::scalars(self.nodes.clone())
    }

    /// `∫` of `f` over each ring.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Vec<f64> {
        self.nodes
            .chunks_exact(self.order)
            .zip(self.weights.chunks_exact(self.order))
            .map(|(xs, ws)| xs.iter().zip(ws).map(|(x, w)| w * f(*x)).sum())
            .collect()
    }
}

/// `Φ[i][j] = ∫_{ring i} φ_j(r) dr`.
pub fn design_ring(candidates: &[Expr], quad: &RingQuadrature, targets: Vec<f64>) -> Result<DesignMatrix, Error> {
    let mut columns = Vec::with_capacity(candidates.len());
    for (j, c) in candidates.iter().enumerate() {
        // a non-finite node value makes its ring integral non-finite
        let col = quad.integrate(|r| c.eval(&[r]));
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDesign { candidate: j, row });
        }
        columns.push(col);
    }
    DesignMatrix::new(from_columns(&columns, quad.rings()), alloc::vec![targets])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_tree;

    #[test]
    fn pointwise_small() {
        let d = design_pointwise(
            &[Expr::One, Expr::Var(0)],
            &PointSet::scalars(alloc::vec![0.0, 1.0, 2.0]),
            alloc::vec![alloc::vec![0.0; 3]],
        )
        .unwrap();
        assert_eq!(d.phi, Matrix::from_rows(&[alloc::vec![1.0, 0.0], alloc::vec![1.0, 1.0], alloc::vec![1.0, 2.0]]));
        let sq = design_pointwise(&[parse_tree("(squ x1)").unwrap()], &PointSet::scalars(alloc::vec![3.0]), alloc::vec![alloc::vec![1.0]])
            .unwrap();
        assert_eq!(sq.phi.get(0, 0), 9.0);
    }

    #[test]
    fn pointwise_rejects_non_finite() {
        let e = design_pointwise(&[Expr::One, Expr::ln(Expr::Var(0))], &PointSet::scalars(alloc::vec![1.0, -1.0]), alloc::vec![alloc::vec![0.0; 2]]);
        assert_eq!(e.unwrap_err(), Error::NonFiniteDesign { candidate: 1, row: 1 });
    }

    #[test]
    fn ring_integrals() {
        let q = RingQuadrature::with_default_order(&[1.0, 1.5, 2.25]).unwrap();
        let r = Expr::Var(0);
        let p = parse_tree("(/ 1 (* (* r r) (squ (squ (exp (* c:0.125 (ln r)))))))").unwrap();
        let d = design_ring(&[Expr::One, r, p], &q, alloc::vec![0.0, 0.0]).unwrap();
        assert!((d.phi.get(0, 0) - 0.5).abs() < 1e-14);
        assert!((d.phi.get(1, 1) - 1.40625).abs() < 1e-13);
        // r^{-2.5}
        let want = (1.0 - 1.5f64.powf(-1.5)) / 1.5;
        assert!((d.phi.get(0, 2) - want).abs() < 1e-10, "{}", d.phi.get(0, 2));
        assert_eq!(q.points().len(), 32);
    }
}
