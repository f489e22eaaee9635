//! Text forms of expression trees.
//!
//! The s-expression form is `(op arg ...)` with terminals `1`, `c:VALUE`
//! and `x1..xn`. Constants are written in shortest round-trip form, so
//! `parse(format(t)) == t` bit for bit.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use super::tree::{BinaryOp, Expr, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

impl core::error::Error for ParseError {}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::One => f.write_str("1"),
            Expr::Const(c) => write!(f, "c:{c:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Unary(op, a) => write!(f, "({} {a})", op.symbol()),
            Expr::Binary(op, a, b) => write!(f, "({} {a} {b})", op.symbol()),
        }
    }
}

pub fn format_tree(e: &Expr) -> String {
    e.to_string()
}

pub fn parse_tree(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError { position: self.pos, message: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                break;
            }
            self.pos += 1;
        }
        // input came from a &str and we split on ASCII bytes only
        core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Err(self.error("unexpected end of input"));
        }
        match self.src[self.pos] {
            b'(' => {
                self.pos += 1;
                self.skip_ws();
                let at = self.pos;
                let head = self.atom().to_string();
                let e = if let Some(op) = unary_op(&head) {
                    Expr::unary(op, self.expr()?)
                } else if let Some(op) = binary_op(&head) {
                    let a = self.expr()?;
                    let b = self.expr()?;
                    Expr::binary(op, a, b)
                } else {
                    return Err(ParseError { position: at, message: format!("unknown operator '{head}'") });
                };
                self.skip_ws();
                if self.pos >= self.src.len() || self.src[self.pos] != b')' {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            b')' => Err(self.error("unexpected ')'")),
            _ => {
                let at = self.pos;
                let tok = self.atom().to_string();
                terminal(&tok).ok_or(ParseError { position: at, message: format!("bad terminal '{tok}'") })
            }
        }
    }
}

fn unary_op(s: &str) -> Option<UnaryOp> {
    Some(match s {
        "exp" => UnaryOp::Exp,
        "ln" => UnaryOp::Ln,
        "sin" => UnaryOp::Sin,
        "squ" => UnaryOp::Squ,
        _ => return None,
    })
}

fn binary_op(s: &str) -> Option<BinaryOp> {
    Some(match s {
        "+" => BinaryOp::Add,
        "*" => BinaryOp::Mul,
        "/" => BinaryOp::Div,
        _ => return None,
    })
}

fn terminal(tok: &str) -> Option<Expr> {
    if tok == "1" {
        return Some(Expr::One);
    }
    if tok == "r" {
        return Some(Expr::Var(0));
    }
    if let Some(v) = tok.strip_prefix("c:") {
        return v.parse::<f64>().ok().filter(|c| c.is_finite()).map(Expr::Const);
    }
    if let Some(i) = tok.strip_prefix('x') {
        return match i.parse::<usize>() {
            Ok(k) if k >= 1 => Some(Expr::Var(k - 1)),
            _ => None,
        };
    }
    None
}

/// `v` with `sig` significant digits, trailing zeros trimmed.
pub fn format_significant(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sig = sig.max(1);
    let e = crate::math::floor(libm::log10(crate::math::abs(v))) as i32;
    if (-4..sig as i32).contains(&e) {
        let decimals = (sig as i32 - 1 - e).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_zeros(s)
    } else {
        let s = format!("{v:.prec$e}", prec = sig - 1);
        match s.split_once('e') {
            Some((m, exp)) => format!("{}e{exp}", trim_zeros(m.to_string())),
            None => s,
        }
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Conventional infix rendering. `names[i]` labels variable `i`; missing
/// names fall back to `x{i+1}`. Constants use `sig` significant digits.
pub fn to_infix(e: &Expr, names: &[&str], sig: usize) -> String {
    infix(e, names, sig, 0)
}

// precedence: 1 sum, 2 product/quotient, 3 atom
fn infix(e: &Expr, names: &[&str], sig: usize, parent: u8) -> String {
    match e {
        Expr::One => "1".into(),
        Expr::Const(c) => {
            let s = format_significant(*c, sig);
            if *c < 0.0 && parent > 0 {
                format!("({s})")
            } else {
                s
            }
        }
        Expr::Var(i) => names.get(*i).map(|s| s.to_string()).unwrap_or_else(|| format!("x{}", i + 1)),
        Expr::Unary(UnaryOp::Squ, a) => format!("{}^2", wrap(a, names, sig)),
        Expr::Unary(op, a) => format!("{}({})", op.symbol(), infix(a, names, sig, 0)),
        Expr::Binary(op, a, b) => {
            let (prec, sym) = match op {
                BinaryOp::Add => (1, " + "),
                BinaryOp::Mul => (2, "*"),
                BinaryOp::Div => (2, "/"),
            };
            let left = infix(a, names, sig, prec);
            // right operand of '/' binds tighter than '*'
            let rp = if *op == BinaryOp::Div { 3 } else { prec };
            let right = infix(b, names, sig, rp);
            let body = format!("{left}{sym}{right}");
            if prec < parent {
                format!("({body})")
            } else {
                body
            }
        }
    }
}

fn wrap(e: &Expr, names: &[&str], sig: usize) -> String {
    match e {
        Expr::Var(_) | Expr::One => infix(e, names, sig, 3),
        Expr::Const(c) if *c >= 0.0 => infix(e, names, sig, 3),
        Expr::Unary(op, _) if *op != UnaryOp::Squ => infix(e, names, sig, 3),
        _ => format!("({})", infix(e, names, sig, 0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_fig3_trees() {
        for s in ["(+ (sin x1) (* x2 x3))", "(/ 1 (+ x1 c:2.0368))", "(/ (ln x1) (+ x1 c:-3.5))", "(+ (sin x1) 1)"] {
            let t = parse_tree(s).unwrap();
            assert_eq!(format_tree(&t), s);
        }
    }

    #[test]
    fn squ_of_variable() {
        assert_eq!(parse_tree("(squ x1)").unwrap(), Expr::squ(Expr::Var(0)));
    }

    #[test]
    fn fig4_subtree_shape() {
        let t = parse_tree("(/ 1 (+ x1 c:2.0368))").unwrap();
        assert_eq!(t, Expr::div(Expr::One, Expr::add(Expr::Var(0), Expr::Const(2.0368))));
    }

    #[test]
    fn full_precision_constants() {
        let c = 0.1 + 0.2;
        let t = Expr::mul(Expr::Const(c), Expr::Var(1));
        match parse_tree(&format_tree(&t)).unwrap() {
            Expr::Binary(_, a, _) => assert_eq!(*a, Expr::Const(c)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_tree("(tan x1)").unwrap_err().position, 1);
        assert_eq!(parse_tree("(+ x1 x0)").unwrap_err().position, 6);
        assert_eq!(parse_tree("(sin x1").unwrap_err().position, 7);
        assert!(parse_tree("x1 x2").is_err());
        assert!(parse_tree("").is_err());
        assert!(parse_tree("c:nan").is_err());
    }

    #[test]
    fn radial_variable_alias() {
        assert_eq!(parse_tree("(squ r)").unwrap(), Expr::squ(Expr::Var(0)));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(1.07354987, 6), "1.07355");
        assert_eq!(format_significant(-0.95990001, 6), "-0.9599");
        assert_eq!(format_significant(2.0, 6), "2");
        assert_eq!(format_significant(1.5e-7, 6), "1.5e-7");
        assert_eq!(format_significant(123456789.0, 6), "1.23457e8");
    }

    #[test]
    fn infix_rendering() {
        let t = parse_tree("(+ (sin x1) (* x2 x3))").unwrap();
        assert_eq!(to_infix(&t, &[], 6), "sin(x1) + x2*x3");
        let u = parse_tree("(/ (* x2 x3) (+ x1 c:2.0368))").unwrap();
        assert_eq!(to_infix(&u, &[], 6), "x2*x3/(x1 + 2.0368)");
        let v = parse_tree("(squ (sin (* c:1.55 x1)))").unwrap();
        assert_eq!(to_infix(&v, &[], 6), "sin(1.55*x1)^2");
        let w = parse_tree("(/ 1 (* r r))").unwrap();
        assert_eq!(to_infix(&w, &["r"], 6), "1/(r*r)");
    }
}
