use alloc::vec::Vec;

use rand::Rng;

use crate::expr::{Expr, Individual, TreeGenerator};

/// Node-pair draws before crossover falls back to whole-tree exchange.
pub const CROSSOVER_ATTEMPTS: usize = 20;

/// Swaps the subtree at pre-order `n1` of `t1` with the one at `n2` of `t2`.
pub fn crossover_trees(t1: &Expr, n1: usize, t2: &Expr, n2: usize) -> Option<(Expr, Expr)> {
    let s1 = t1.node(n1)?.clone();
    let s2 = t2.node(n2)?.clone();
    let mut a = t1.clone();
    let mut b = t2.clone();
    a.replace_subtree(n1, s2)?;
    b.replace_subtree(n2, s1)?;
    Some((a, b))
}

/// Subtree crossover between one uniformly chosen candidate of each
/// parent. Node pairs that are both terminals are redrawn.
pub fn crossover<R: Rng + ?Sized>(p1: &Individual, p2: &Individual, rng: &mut R) -> (Individual, Individual) {
    let i = rng.random_range(0..p1.candidates.len());
    let j = rng.random_range(0..p2.candidates.len());
    let (t1, t2) = (&p1.candidates[i], &p2.candidates[j]);
    let mut swapped = None;
    for _ in 0..CROSSOVER_ATTEMPTS {
        let n1 = rng.random_range(0..t1.node_count());
        let n2 = rng.random_range(0..t2.node_count());
        let both_terminal = t1.node(n1).is_some_and(Expr::is_terminal) && t2.node(n2).is_some_and(Expr::is_terminal);
        if !both_terminal {
            swapped = crossover_trees(t1, n1, t2, n2);
            break;
        }
    }
    let (a, b) = swapped.unwrap_or_else(|| (t2.clone(), t1.clone()));
    let mut c1 = p1.candidates.clone();
    let mut c2 = p2.candidates.clone();
    c1[i] = a;
    c2[j] = b;
    (Individual::new(c1), Individual::new(c2))
}

/// Replaces a uniformly chosen subtree of a uniformly chosen candidate with
/// a fresh tree of `1..=max_nodes` nodes.
pub fn mutate_subtree<R: Rng + ?Sized>(
    parent: &Individual,
    gen: &TreeGenerator,
    max_nodes: usize,
    rng: &mut R,
) -> Individual {
    let i = rng.random_range(0..parent.candidates.len());
    let mut t = parent.candidates[i].clone();
    let at = rng.random_range(0..t.node_count());
    let size = rng.random_range(1..=max_nodes.max(1));
    let fresh = gen.random(size, rng);
    t.replace_subtree(at, fresh);
    let mut c = parent.candidates.clone();
    c[i] = t;
    Individual::new(c)
}

/// `c + (2κ - ϑ)/(ϑ + G)`.
pub fn perturb_constant(c: f64, kappa: f64, generation: usize, vartheta: f64) -> f64 {
    c + (2.0 * kappa - vartheta) / (vartheta + generation as f64)
}

/// Perturbs one constant chosen uniformly over all candidates, with
/// `κ ~ U[0, ϑ)`. Returns `None` when the parent has no constants.
pub fn mutate_constant<R: Rng + ?Sized>(
    parent: &Individual,
    generation: usize,
    vartheta: f64,
    rng: &mut R,
) -> Option<Individual> {
    let total = parent.constant_total();
    if total == 0 {
        return None;
    }
    let mut pick = rng.random_range(0..total);
    let kappa = rng.random_range(0.0..vartheta);
    let mut cands: Vec<Expr> = parent.candidates.clone();
    for t in cands.iter_mut() {
        let mut consts = t.constants_mut();
        if pick < consts.len() {
            let c = &mut *consts[pick];
            *c = perturb_constant(*c, kappa, generation, vartheta);
            break;
        }
        pick -= consts.len();
    }
    Some(Individual::new(cands))
}
