use crate::expr::Individual;
use crate::math::powf;

use super::config::GpConfig;

/// Maxima over the best set used to normalize fitness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestStats {
    pub max_loss: f64,
    pub max_active: f64,
    pub max_operators: f64,
}

impl BestStats {
    /// Maxima over the fitted, finite-loss members of `members`.
    pub fn from_members<'a, I: IntoIterator<Item = &'a Individual>>(members: I) -> Option<Self> {
        let mut s = BestStats { max_loss: 0.0, max_active: 0.0, max_operators: 0.0 };
        let mut any = false;
        for m in members {
            if !m.loss.is_finite() {
                continue;
            }
            any = true;
            s.max_loss = s.max_loss.max(m.loss);
            s.max_active = s.max_active.max(complexity(m.active_count()));
            s.max_operators = s.max_operators.max(complexity(m.operator_total()));
        }
        any.then_some(s)
    }
}

// Counts of zero would zero out (or blow up) the power terms, so they are
// floored at one.
fn complexity(n: usize) -> f64 {
    (n as f64).max(1.0)
}

/// `𝓛/max𝓛_b · (Γ/maxΓ_b)^τ₁ · (ΣΛ/maxΛ_b)^τ₂`; non-finite losses map to
/// `+∞`, and a zero normalizer falls back to the raw loss.
pub fn fitness(ind: &Individual, stats: &BestStats, tau1: f64, tau2: f64) -> f64 {
    if !ind.loss.is_finite() {
        return f64::INFINITY;
    }
    if !(stats.max_loss > 0.0) {
        return ind.loss;
    }
    let g = complexity(ind.active_count()) / stats.max_active.max(1.0);
    let l = complexity(ind.operator_total()) / stats.max_operators.max(1.0);
    let f = ind.loss / stats.max_loss * powf(g, tau1) * powf(l, tau2);
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// τ₁ schedule state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitnessState {
    pub tau1: f64,
    pub delta_tau: f64,
    /// Loss of the previous generation's best individual.
    pub prev_best_loss: f64,
    /// Lowest best-individual loss seen so far.
    pub best_so_far: f64,
    pub pending_extra_decrease: bool,
}

impl FitnessState {
    pub fn new(config: &GpConfig) -> Self {
        Self {
            tau1: 0.0,
            delta_tau: config.delta_tau0,
            prev_best_loss: f64::INFINITY,
            best_so_far: f64::INFINITY,
            pending_extra_decrease: false,
        }
    }
}

/// Advances the schedule after generation `g` whose best individual has
/// loss `best_loss`; the returned τ₁ applies to the next generation.
pub fn update_tau1(state: FitnessState, g: usize, best_loss: f64, config: &GpConfig) -> FitnessState {
    let mut s = state;
    let prev = s.prev_best_loss;
    let optimum = s.best_so_far;
    s.prev_best_loss = best_loss;
    s.best_so_far = s.best_so_far.min(best_loss);
    if g < config.n_thre {
        s.tau1 = 0.0;
        s.pending_extra_decrease = false;
        return s;
    }
    if s.pending_extra_decrease {
        s.pending_extra_decrease = false;
        if best_loss > optimum {
            s.tau1 -= 20.0 * s.delta_tau;
            return s;
        }
    }
    if prev.is_finite() && best_loss > 1.2 * prev {
        s.tau1 -= 3.0 * s.delta_tau;
        s.delta_tau /= 2.0;
        s.pending_extra_decrease = true;
    } else if best_loss > config.schedule_loss {
        s.tau1 = 1.0;
    } else {
        s.tau1 += s.delta_tau;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn fitted(loss: f64, coef: alloc::vec::Vec<f64>) -> Individual {
        let cands = coef.iter().map(|_| Expr::Var(0)).collect();
        let mut i = Individual::new(cands);
        i.coefficients = coef;
        i.outputs = 1;
        i.loss = loss;
        i
    }

    #[test]
    fn exponents_zero_gives_loss_ratio() {
        let a = fitted(0.5, alloc::vec![1.0]);
        let b = fitted(2.0, alloc::vec![1.0, 1.0]);
        let s = BestStats::from_members([&a, &b]).unwrap();
        assert_eq!(fitness(&a, &s, 0.0, 0.0), 0.25);
    }

    #[test]
    fn sole_member_is_one() {
        let a = fitted(0.3, alloc::vec![1.0, 2.0]);
        let s = BestStats::from_members([&a]).unwrap();
        assert_eq!(fitness(&a, &s, 1.3, 0.1), 1.0);
    }

    #[test]
    fn gamma_ratio_is_linear() {
        let a = fitted(1.0, alloc::vec![1.0]);
        let b = fitted(1.0, alloc::vec![1.0, 1.0]);
        let s = BestStats::from_members([&a, &b]).unwrap();
        assert_eq!(fitness(&a, &s, 1.0, 0.0) * 2.0, fitness(&b, &s, 1.0, 0.0));
    }

    #[test]
    fn zero_max_loss_falls_back() {
        let a = fitted(0.0, alloc::vec![1.0]);
        let s = BestStats::from_members([&a]).unwrap();
        let b = fitted(0.7, alloc::vec![1.0]);
        assert_eq!(fitness(&b, &s, 1.0, 0.1), 0.7);
        let mut c = b.clone();
        c.loss = f64::INFINITY;
        assert_eq!(fitness(&c, &s, 1.0, 0.1), f64::INFINITY);
    }

    #[test]
    fn schedule_phases() {
        let cfg = GpConfig { n_thre: 50, schedule_loss: 0.1, delta_tau0: 0.08, ..GpConfig::default() };
        let s0 = FitnessState::new(&cfg);
        assert_eq!(update_tau1(s0, 10, 0.5, &cfg).tau1, 0.0);
        assert_eq!(update_tau1(s0, 60, 0.5, &cfg).tau1, 1.0);
        let s1 = FitnessState { tau1: 1.0, prev_best_loss: 0.05, best_so_far: 0.05, ..s0 };
        assert!((update_tau1(s1, 60, 0.05, &cfg).tau1 - 1.08).abs() < 1e-15);
    }
}
