use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::tree::{BinaryOp, Expr, UnaryOp};
use crate::Error;

/// Operators available to tree generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSet {
    unary: Vec<UnaryOp>,
    binary: Vec<BinaryOp>,
}

impl FunctionSet {
    pub fn new(unary: Vec<UnaryOp>, binary: Vec<BinaryOp>) -> Result<Self, Error> {
        if unary.is_empty() && binary.is_empty() {
            return Err(Error::InvalidInput("function set is empty".into()));
        }
        let mut s = Self { unary, binary };
        s.unary.sort();
        s.unary.dedup();
        s.binary.sort();
        s.binary.dedup();
        Ok(s)
    }

    /// `{+, ×, /, exp, ln, sin, squ}`.
    pub fn full() -> Self {
        Self {
            unary: alloc::vec![UnaryOp::Exp, UnaryOp::Ln, UnaryOp::Sin, UnaryOp::Squ],
            binary: alloc::vec![BinaryOp::Add, BinaryOp::Mul, BinaryOp::Div],
        }
    }

    /// The full set minus `sin`, used for radial jump kernels.
    pub fn without_sin() -> Self {
        Self {
            unary: alloc::vec![UnaryOp::Exp, UnaryOp::Ln, UnaryOp::Squ],
            binary: alloc::vec![BinaryOp::Add, BinaryOp::Mul, BinaryOp::Div],
        }
    }

    /// Builds a set from operator names (`+ * / exp ln sin squ`).
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, Error> {
        let mut unary = Vec::new();
        let mut binary = Vec::new();
        for n in names {
            match n.as_ref() {
                "+" | "add" => binary.push(BinaryOp::Add),
                "*" | "mul" => binary.push(BinaryOp::Mul),
                "/" | "div" => binary.push(BinaryOp::Div),
                "exp" => unary.push(UnaryOp::Exp),
                "ln" | "log" => unary.push(UnaryOp::Ln),
                "sin" => unary.push(UnaryOp::Sin),
                "squ" => unary.push(UnaryOp::Squ),
                other => return Err(Error::InvalidInput(alloc::format!("unknown operator '{other}'"))),
            }
        }
        Self::new(unary, binary)
    }

    pub fn names(&self) -> Vec<String> {
        self.binary
            .iter()
            .map(|b| String::from(b.symbol()))
            .chain(self.unary.iter().map(|u| String::from(u.symbol())))
            .collect()
    }

    pub fn unary(&self) -> &[UnaryOp] {
        &self.unary
    }

    pub fn binary(&self) -> &[BinaryOp] {
        &self.binary
    }
}

/// Random tree source over a function set and the terminals
/// `{1, c, x_1..x_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGenerator {
    pub functions: FunctionSet,
    pub n_vars: usize,
    pub c_min: f64,
    pub c_max: f64,
}

impl TreeGenerator {
    pub fn new(functions: FunctionSet, n_vars: usize, c_min: f64, c_max: f64) -> Result<Self, Error> {
        if n_vars == 0 {
            return Err(Error::InvalidInput("at least one variable is required".into()));
        }
        if !(c_min.is_finite() && c_max.is_finite() && c_min <= c_max) {
            return Err(Error::InvalidInput("constant range is invalid".into()));
        }
        Ok(Self { functions, n_vars, c_min, c_max })
    }

    pub fn constant<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.c_max > self.c_min {
            rng.random_range(self.c_min..self.c_max)
        } else {
            self.c_min
        }
    }

    /// Uniform draw from the terminal set.
    pub fn terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        match rng.random_range(0..self.n_vars + 2) {
            0 => Expr::One,
            1 => Expr::Const(self.constant(rng)),
            k => Expr::Var(k - 2),
        }
    }

    /// A tree with exactly `nodes` nodes. At each internal position the
    /// operator is uniform over those that can still meet the count; binary
    /// splits are uniform. With a binary-only set an even count cannot be
    /// met and the tree comes out one node short.
    pub fn random<R: Rng + ?Sized>(&self, nodes: usize, rng: &mut R) -> Expr {
        let nodes = nodes.max(1);
        if nodes == 1 {
            return self.terminal(rng);
        }
        let nu = self.functions.unary.len();
        let nb = if nodes >= 3 && (nodes % 2 == 1 || nu > 0) { self.functions.binary.len() } else { 0 };
        if nu + nb == 0 {
            return self.random(nodes - 1, rng);
        }
        let k = rng.random_range(0..nu + nb);
        if k < nu {
            Expr::unary(self.functions.unary[k], self.random(nodes - 1, rng))
        } else {
            let op = self.functions.binary[k - nu];
            let rest = nodes - 1;
            let left = if nu == 0 {
                // only odd sizes are reachable without unary operators
                2 * rng.random_range(0..rest / 2) + 1
            } else {
                rng.random_range(1..rest)
            };
            Expr::binary(op, self.random(left, rng), self.random(rest - left, rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn exact_node_counts() {
        let g = TreeGenerator::new(FunctionSet::full(), 3, -10.0, 10.0).unwrap();
        let mut rng = substream(1, &[]);
        for n in 1..=15 {
            for _ in 0..50 {
                let t = g.random(n, &mut rng);
                assert_eq!(t.node_count(), n);
                assert!(t.max_var().is_none_or(|v| v < 3));
            }
        }
    }

    #[test]
    fn single_node_is_terminal() {
        let g = TreeGenerator::new(FunctionSet::full(), 1, -10.0, 10.0).unwrap();
        let mut rng = substream(2, &[]);
        assert!((0..100).all(|_| g.random(1, &mut rng).is_terminal()));
    }

    #[test]
    fn constants_lie_in_range() {
        let g = TreeGenerator::new(FunctionSet::full(), 2, -10.0, 10.0).unwrap();
        let mut rng = substream(3, &[]);
        for _ in 0..200 {
            let mut t = g.random(5, &mut rng);
            assert!(t.constants_mut().iter().all(|c| (-10.0..=10.0).contains(&**c)));
        }
    }

    #[test]
    fn binary_only_sets() {
        let set = FunctionSet::from_names(&["+", "*"]).unwrap();
        let g = TreeGenerator::new(set, 1, 0.0, 1.0).unwrap();
        let mut rng = substream(4, &[]);
        assert_eq!(g.random(5, &mut rng).node_count(), 5);
        assert_eq!(g.random(4, &mut rng).node_count(), 3);
    }

    #[test]
    fn same_seed_same_tree() {
        let g = TreeGenerator::new(FunctionSet::full(), 2, -10.0, 10.0).unwrap();
        let a = g.random(5, &mut substream(9, &[1]));
        let b = g.random(5, &mut substream(9, &[1]));
        assert_eq!(a, b);
    }

    #[test]
    fn names_round_trip() {
        let s = FunctionSet::without_sin();
        assert_eq!(FunctionSet::from_names(&s.names()).unwrap(), s);
        assert!(FunctionSet::from_names(&["tan"]).is_err());
    }
}
