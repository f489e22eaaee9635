use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::generate::TreeGenerator;
use super::individual::Individual;
use super::tree::Expr;
use crate::math::{abs, dot, sqrt};

/// Flat row-major set of evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "point data does not match dimension");
        Self { dim, data }
    }

    /// One-dimensional points.
    pub fn scalars(values: Vec<f64>) -> Self {
        Self::new(1, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EditRules {
    pub max_nodes: usize,
    pub dependence_tol: f64,
    pub magnitude_limit: f64,
}

impl Default for EditRules {
    fn default() -> Self {
        Self { max_nodes: 15, dependence_tol: 1e-8, magnitude_limit: 1e50 }
    }
}

/// Values of `e` at every point, or `None` if any evaluation faults or
/// exceeds `limit` in magnitude.
pub fn admissible_values(e: &Expr, points: &PointSet, limit: f64) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    for p in points.iter() {
        match e.eval_checked(p) {
            Ok(v) if abs(v) <= limit => out.push(v),
            _ => return None,
        }
    }
    Some(out)
}

/// Greedy independence filter: column `j` is kept when its residual after
/// projection onto the kept columns has norm at least `tol * |col_j|`.
/// Zero columns are dropped. Returns kept indices in order.
pub fn linear_dependence_check(columns: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        let scale = col.iter().fold(0.0f64, |m, v| m.max(abs(*v)));
        if scale == 0.0 {
            continue;
        }
        // work on the scaled column so huge magnitudes do not overflow
        let mut r: Vec<f64> = col.iter().map(|v| v / scale).collect();
        let norm0 = sqrt(dot(&r, &r));
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= p * qi;
                }
            }
        }
        let nr = sqrt(dot(&r, &r));
        if nr >= tol * norm0 && nr > 0.0 {
            for v in r.iter_mut() {
                *v /= nr;
            }
            basis.push(r);
            kept.push(j);
        }
    }
    kept
}

/// Applies the editing rules to a candidate list: size cap, chain collapse,
/// then the ln, denominator and magnitude checks on every point, then the
/// independence filter. Candidates already passing all rules are returned
/// unchanged, so the function is idempotent.
pub fn edit_candidates(candidates: &[Expr], points: &PointSet, rules: &EditRules) -> Vec<Expr> {
    let mut kept = Vec::new();
    let mut columns = Vec::new();
    for c in candidates {
        if c.node_count() > rules.max_nodes {
            continue;
        }
        let c = c.clone().collapse_chains();
        if let Some(vals) = admissible_values(&c, points, rules.magnitude_limit) {
            kept.push(c);
            columns.push(vals);
        }
    }
    let idx = linear_dependence_check(&columns, rules.dependence_tol);
    let mut slots: Vec<Option<Expr>> = kept.into_iter().map(Some).collect();
    idx.into_iter().filter_map(|i| slots[i].take()).collect()
}

/// Attempts at drawing a valid replacement before falling back to `1`.
const FRESH_ATTEMPTS: usize = 100;

/// Edits an individual; if every candidate is removed it is replaced by one
/// fresh random candidate. The result is unfitted unless the candidate
/// list came through untouched.
pub fn edit_individual<R: Rng + ?Sized>(
    ind: &Individual,
    points: &PointSet,
    rules: &EditRules,
    gen: &TreeGenerator,
    rng: &mut R,
) -> Individual {
    let mut cands = edit_candidates(&ind.candidates, points, rules);
    if cands.is_empty() {
        cands = vec![fresh_candidate(points, rules, gen, rng)];
    }
    if cands == ind.candidates {
        ind.clone()
    } else {
        Individual::new(cands)
    }
}

/// A random 5-node tree that survives editing on its own.
pub fn fresh_candidate<R: Rng + ?Sized>(
    points: &PointSet,
    rules: &EditRules,
    gen: &TreeGenerator,
    rng: &mut R,
) -> Expr {
    for _ in 0..FRESH_ATTEMPTS {
        let t = gen.random(5, rng);
        let e = edit_candidates(core::slice::from_ref(&t), points, rules);
        if let Some(e) = e.into_iter().next() {
            return e;
        }
    }
    Expr::One
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::FunctionSet;
    use crate::rng::substream;

    fn x() -> Expr {
        Expr::Var(0)
    }

    fn pts(v: &[f64]) -> PointSet {
        PointSet::scalars(v.to_vec())
    }

    #[test]
    fn sin_sin_collapses() {
        let out = edit_candidates(&[Expr::sin(Expr::sin(x()))], &pts(&[0.5, 1.0]), &EditRules::default());
        assert_eq!(out, vec![Expr::sin(x())]);
    }

    #[test]
    fn duplicates_removed() {
        let out = edit_candidates(&[x(), x()], &pts(&[1.0, 2.0, 3.0]), &EditRules::default());
        assert_eq!(out, vec![x()]);
    }

    #[test]
    fn zero_denominator_removed() {
        let c = Expr::div(Expr::One, Expr::add(x(), Expr::Const(-1.0)));
        let p = pts(&[0.0, 1.0, 2.0]);
        assert!(edit_candidates(&[c.clone()], &p, &EditRules::default()).is_empty());
        assert_eq!(edit_candidates(&[c.clone()], &pts(&[0.0, 2.0]), &EditRules::default()), vec![c]);
    }

    #[test]
    fn log_and_magnitude_rules() {
        let r = EditRules::default();
        assert!(edit_candidates(&[Expr::ln(x())], &pts(&[-1.0, 1.0]), &r).is_empty());
        let big = Expr::exp(Expr::exp(x()));
        assert!(edit_candidates(&[big], &pts(&[5.0]), &r).is_empty());
        // e^{e^{4.8}} ≈ 1.1e53 is finite but over the cap
        let b2 = Expr::exp(Expr::exp(Expr::Const(4.8)));
        assert!(edit_candidates(&[b2], &pts(&[0.0]), &r).is_empty());
    }

    #[test]
    fn size_cap() {
        let mut t = x();
        for _ in 0..15 {
            t = Expr::squ(t);
        }
        assert_eq!(t.node_count(), 16);
        assert!(edit_candidates(&[t], &pts(&[1.0]), &EditRules::default()).is_empty());
    }

    #[test]
    fn dependence_examples() {
        let p = [1.0, 2.0, 3.0];
        let col = |f: &dyn Fn(f64) -> f64| p.iter().map(|v| f(*v)).collect::<Vec<_>>();
        assert_eq!(linear_dependence_check(&[col(&|v| v), col(&|v| 2.0 * v)], 1e-8), vec![0]);
        assert_eq!(linear_dependence_check(&[col(&|v| v), col(&|v| v * v)], 1e-8), vec![0, 1]);
        let third = linear_dependence_check(&[col(&|_| 1.0), col(&|v| v * v), col(&|v| v * v + 1e-15)], 1e-8);
        assert_eq!(third, vec![0, 1]);
        assert_eq!(linear_dependence_check(&[vec![0.0, 0.0], vec![1.0, 0.0]], 1e-8), vec![1]);
    }

    #[test]
    fn empty_individual_gets_fresh_candidate() {
        let g = TreeGenerator::new(FunctionSet::full(), 1, -10.0, 10.0).unwrap();
        let p = pts(&[-1.0, 0.0, 1.0]);
        let ind = Individual::new(vec![Expr::ln(x())]);
        let mut rng = substream(5, &[]);
        let e = edit_individual(&ind, &p, &EditRules::default(), &g, &mut rng);
        assert_eq!(e.candidates.len(), 1);
        let again = edit_individual(&e, &p, &EditRules::default(), &g, &mut rng);
        assert_eq!(again.candidates, e.candidates);
    }
}
