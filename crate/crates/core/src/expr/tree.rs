use alloc::boxed::Box;

use crate::math::{abs, exp, ln, sin};

/// Unary operators of the function set; `Squ(x) = x²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Exp,
    Ln,
    Sin,
    Squ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Mul,
    Div,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Squ => "squ",
        }
    }
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

/// Expression tree over `{+, ×, /, exp, ln, sin, squ}` and `{1, c, x_i}`.
/// Variables are zero-based (`Var(0)` prints as `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    One,
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Why a candidate is not admissible at some training input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// `ln` of a non-positive argument.
    LogDomain,
    /// `|den| < 1e-12 (1 + |num|)`.
    ZeroDenominator,
    /// Intermediate overflow or NaN.
    NonFinite,
}

/// Denominators below this (relative to `1 + |num|`) count as zero.
pub const ZERO_DENOMINATOR_TOL: f64 = 1e-12;

impl Expr {
    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Self {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Add, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Self::binary(BinaryOp::Div, a, b)
    }

    pub fn exp(a: Expr) -> Self {
        Self::unary(UnaryOp::Exp, a)
    }

    pub fn ln(a: Expr) -> Self {
        Self::unary(UnaryOp::Ln, a)
    }

    pub fn sin(a: Expr) -> Self {
        Self::unary(UnaryOp::Sin, a)
    }

    pub fn squ(a: Expr) -> Self {
        Self::unary(UnaryOp::Squ, a)
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Expr::One | Expr::Const(_) | Expr::Var(_))
    }

    /// Evaluates at `x`; domain violations yield NaN.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_checked(x).unwrap_or(f64::NAN)
    }

    pub fn eval_checked(&self, x: &[f64]) -> Result<f64, Fault> {
        let v = match self {
            Expr::One => 1.0,
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Unary(op, a) => {
                let a = a.eval_checked(x)?;
                match op {
                    UnaryOp::Exp => exp(a),
                    UnaryOp::Ln => {
                        if a <= 0.0 {
                            return Err(Fault::LogDomain);
                        }
                        ln(a)
                    }
                    UnaryOp::Sin => sin(a),
                    UnaryOp::Squ => a * a,
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.eval_checked(x)?;
                let b = b.eval_checked(x)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if abs(b) < ZERO_DENOMINATOR_TOL * (1.0 + abs(a)) {
                            return Err(Fault::ZeroDenominator);
                        }
                        a / b
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Fault::NonFinite)
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::One | Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Number of non-terminal nodes.
    pub fn operator_count(&self) -> usize {
        match self {
            Expr::One | Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Unary(_, a) => 1 + a.operator_count(),
            Expr::Binary(_, a, b) => 1 + a.operator_count() + b.operator_count(),
        }
    }

    pub fn constant_count(&self) -> usize {
        match self {
            Expr::Const(_) => 1,
            Expr::One | Expr::Var(_) => 0,
            Expr::Unary(_, a) => a.constant_count(),
            Expr::Binary(_, a, b) => a.constant_count() + b.constant_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::One | Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::One | Expr::Const(_) => None,
            Expr::Unary(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Node at pre-order position `idx` (root is 0).
    pub fn node(&self, idx: usize) -> Option<&Expr> {
        if idx == 0 {
            return Some(self);
        }
        match self {
            Expr::One | Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node(idx - 1),
            Expr::Binary(_, a, b) => {
                let left = a.node_count();
                if idx <= left {
                    a.node(idx - 1)
                } else {
                    b.node(idx - 1 - left)
                }
            }
        }
    }

    pub fn node_mut(&mut self, idx: usize) -> Option<&mut Expr> {
        if idx == 0 {
            return Some(self);
        }
        match self {
            Expr::One | Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node_mut(idx - 1),
            Expr::Binary(_, a, b) => {
                let left = a.node_count();
                if idx <= left {
                    a.node_mut(idx - 1)
                } else {
                    b.node_mut(idx - 1 - left)
                }
            }
        }
    }

    /// Replaces the subtree at pre-order `idx`, returning the old one.
    pub fn replace_subtree(&mut self, idx: usize, with: Expr) -> Option<Expr> {
        let slot = self.node_mut(idx)?;
        Some(core::mem::replace(slot, with))
    }

    /// Mutable references to every constant, in pre-order.
    pub fn constants_mut(&mut self) -> alloc::vec::Vec<&mut f64> {
        let mut out = alloc::vec::Vec::new();
        fn walk<'a>(e: &'a mut Expr, out: &mut alloc::vec::Vec<&'a mut f64>) {
            match e {
                Expr::Const(c) => out.push(c),
                Expr::One | Expr::Var(_) => {}
                Expr::Unary(_, a) => walk(a, out),
                Expr::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Collapses `sin∘sin → sin`, `exp∘exp∘exp → exp∘exp` and
    /// `ln∘ln∘ln → ln∘ln` everywhere, bottom-up. `squ` chains are kept.
    pub fn collapse_chains(self) -> Expr {
        match self {
            Expr::Unary(op, a) => {
                let a = a.collapse_chains();
                let e = Expr::Unary(op, Box::new(a));
                simplify_top(e)
            }
            Expr::Binary(op, a, b) => Expr::Binary(op, Box::new(a.collapse_chains()), Box::new(b.collapse_chains())),
            leaf => leaf,
        }
    }

    /// True when a chain collapsible by [`Expr::collapse_chains`] exists.
    pub fn has_collapsible_chain(&self) -> bool {
        match self {
            Expr::Unary(op, a) => unary_run(self, *op) >= threshold(*op) || a.has_collapsible_chain(),
            Expr::Binary(_, a, b) => a.has_collapsible_chain() || b.has_collapsible_chain(),
            _ => false,
        }
    }
}

fn threshold(op: UnaryOp) -> usize {
    match op {
        UnaryOp::Sin => 2,
        UnaryOp::Exp | UnaryOp::Ln => 3,
        UnaryOp::Squ => usize::MAX,
    }
}

/// Length of the run of `op` starting at `e`.
fn unary_run(e: &Expr, op: UnaryOp) -> usize {
    match e {
        Expr::Unary(o, a) if *o == op => 1 + unary_run(a, op),
        _ => 0,
    }
}

fn simplify_top(e: Expr) -> Expr {
    let op = match &e {
        Expr::Unary(op, _) => *op,
        _ => return e,
    };
    if op == UnaryOp::Squ {
        return e;
    }
    if unary_run(&e, op) >= threshold(op) {
        // drop the outermost node; children are already collapsed so one
        // removal suffices
        match e {
            Expr::Unary(_, a) => *a,
            other => other,
        }
    } else {
        e
    }
}
