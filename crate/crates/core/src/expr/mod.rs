//! Expression trees over `{+, ×, /, exp, ln, sin, squ}` and `{1, c, x_i}`.

mod edit;
mod generate;
mod individual;
mod sexpr;
mod tree;

pub use edit::{
    admissible_values, edit_candidates, edit_individual, fresh_candidate, linear_dependence_check, EditRules,
    PointSet,
};
pub use generate::{FunctionSet, TreeGenerator};
pub use individual::Individual;
pub use sexpr::{format_significant, format_tree, parse_tree, to_infix, ParseError};
pub use tree::{BinaryOp, Expr, Fault, UnaryOp, ZERO_DENOMINATOR_TOL};
