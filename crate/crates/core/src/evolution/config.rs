use crate::expr::EditRules;
use crate::Error;

/// Hyperparameters of one evolutionary run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GpConfig {
    /// `N_P`.
    pub population: usize,
    /// `G_max`.
    pub generations: usize,
    pub init_candidates: usize,
    pub init_nodes: usize,
    /// Largest replacement subtree in subtree mutation.
    pub mutation_max_nodes: usize,
    /// `N_thre`.
    pub n_thre: usize,
    /// `E_thre`, the loss level that switches the τ₁ schedule to increments.
    pub schedule_loss: f64,
    /// `e_thre`, the termination loss.
    pub e_thre: f64,
    pub tau2: f64,
    pub delta_tau0: f64,
    /// `ε₁`, percent of the population kept as elites.
    pub elite_pct: f64,
    /// `ε₂`, percent kept by tournament.
    pub tourney_pct: f64,
    pub crossover_ratio: f64,
    pub subtree_ratio: f64,
    pub constant_ratio: f64,
    pub tournament_size: usize,
    /// `ϑ` of constant mutation.
    pub vartheta: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// `ρ` of hard-thresholding.
    pub rho: f64,
    pub lambda: f64,
    pub beta: f64,
    pub max_nodes: usize,
    pub dependence_tol: f64,
    pub magnitude_limit: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            population: 200,
            generations: 100,
            init_candidates: 5,
            init_nodes: 5,
            mutation_max_nodes: 5,
            n_thre: 50,
            schedule_loss: 1e-3,
            e_thre: 1e-12,
            tau2: 0.05,
            delta_tau0: 0.08,
            elite_pct: 2.0,
            tourney_pct: 18.0,
            crossover_ratio: 0.6,
            subtree_ratio: 0.35,
            constant_ratio: 0.05,
            tournament_size: 2,
            vartheta: 10.0,
            c_min: -10.0,
            c_max: 10.0,
            rho: 1e-4,
            lambda: 0.001,
            beta: 0.8,
            max_nodes: 15,
            dependence_tol: 1e-8,
            magnitude_limit: 1e50,
        }
    }
}

impl GpConfig {
    pub fn edit_rules(&self) -> EditRules {
        EditRules { max_nodes: self.max_nodes, dependence_tol: self.dependence_tol, magnitude_limit: self.magnitude_limit }
    }

    /// `round((ε₁+ε₂)% · N_P)`, at least 1.
    pub fn best_set_size(&self) -> usize {
        let n = crate::math::round((self.elite_pct + self.tourney_pct) / 100.0 * self.population as f64) as usize;
        n.clamp(1, self.population)
    }

    /// `round(ε₁% · N_P)`, at least 1.
    pub fn elite_count(&self) -> usize {
        let n = crate::math::round(self.elite_pct / 100.0 * self.population as f64) as usize;
        n.clamp(1, self.best_set_size())
    }

    /// Probabilities of (crossover, subtree mutation) for one operator
    /// draw; the remainder is constant mutation. Crossover takes
    /// `ratio / (1 - reproduced fraction)`, the other two split what is
    /// left in their ratio.
    pub fn operator_thresholds(&self) -> (f64, f64) {
        let offspring = (1.0 - (self.elite_pct + self.tourney_pct) / 100.0).max(f64::MIN_POSITIVE);
        let pc = (self.crossover_ratio / offspring).clamp(0.0, 1.0);
        let rest = self.subtree_ratio + self.constant_ratio;
        let ps = if rest > 0.0 { (1.0 - pc) * self.subtree_ratio / rest } else { 0.0 };
        (pc, pc + ps)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::InvalidInput(m.into()));
        if self.population < 2 {
            return bad("population must be at least 2");
        }
        if self.init_candidates == 0 || self.init_nodes == 0 || self.mutation_max_nodes == 0 {
            return bad("candidate and node counts must be positive");
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive");
        }
        if !(self.elite_pct >= 0.0 && self.tourney_pct >= 0.0 && self.elite_pct + self.tourney_pct < 100.0) {
            return bad("elite and tournament percentages must be non-negative and sum below 100");
        }
        if !(self.crossover_ratio >= 0.0 && self.subtree_ratio >= 0.0 && self.constant_ratio >= 0.0)
            || self.crossover_ratio + self.subtree_ratio + self.constant_ratio <= 0.0
        {
            return bad("operator ratios must be non-negative and not all zero");
        }
        if !(self.c_min.is_finite() && self.c_max.is_finite() && self.c_min <= self.c_max) {
            return bad("constant range is invalid");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.lambda >= 0.0 && (0.0..=1.0).contains(&self.beta)) {
            return bad("lambda must be non-negative and beta in [0, 1]");
        }
        if !(self.vartheta > 0.0) {
            return bad("vartheta must be positive");
        }
        if self.max_nodes == 0 || !(self.dependence_tol > 0.0) || !(self.magnitude_limit > 0.0) {
            return bad("editing limits must be positive");
        }
        if self.e_thre.is_nan() || self.schedule_loss.is_nan() || !self.tau2.is_finite() || !self.delta_tau0.is_finite() {
            return bad("thresholds must be numbers");
        }
        Ok(())
    }
}
