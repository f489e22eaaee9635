use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use super::config::GpConfig;
use super::fitness::{fitness, update_tau1, BestStats, FitnessState};
use super::operators::{crossover, mutate_constant, mutate_subtree};
use crate::expr::{edit_individual, EditRules, FunctionSet, Individual, PointSet, TreeGenerator};
use crate::regression::{elastic_net_fit, hard_threshold_prune, RegressionProblem};
use crate::rng::{substream, StreamRng};
use crate::Error;

const INIT_TAG: u64 = 0x1417;
const SELECT_TAG: u64 = 0x5e1e;
const OFFSPRING_TAG: u64 = 0x0ff5;

/// Summary of one generation, taken after fitting and fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenerationRecord {
    pub generation: usize,
    /// Loss of the lowest-fitness individual.
    pub best_loss: f64,
    pub best_fitness: f64,
    pub candidate_count: usize,
    pub node_count: usize,
    /// Individuals evaluated in this generation.
    pub population: usize,
    /// Lowest loss in the population.
    pub min_loss: f64,
    /// τ₁ used for this generation's fitness.
    pub tau1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    /// Lowest-fitness individual of the final generation (restricted to
    /// individuals under the termination loss when that ended the run).
    pub best: Individual,
    /// Lowest-loss individual seen in any generation.
    pub lowest_loss: Individual,
    pub history: Vec<GenerationRecord>,
    /// Index of the last generation evaluated.
    pub generations: usize,
    pub reached_target: bool,
}

/// `N_P` individuals of `init_candidates` random `init_nodes`-node trees,
/// edited once.
pub fn init_population(config: &GpConfig, gen: &TreeGenerator, points: &PointSet, seed: u64) -> Vec<Individual> {
    let rules = config.edit_rules();
    crate::parallel::map_indexed(config.population, |k| {
        let mut rng = substream(seed, &[INIT_TAG, k as u64]);
        random_individual(config, gen, points, &rules, &mut rng)
    })
}

fn random_individual(
    config: &GpConfig,
    gen: &TreeGenerator,
    points: &PointSet,
    rules: &EditRules,
    rng: &mut StreamRng,
) -> Individual {
    let cands = (0..config.init_candidates).map(|_| gen.random(config.init_nodes, rng)).collect();
    edit_individual(&Individual::new(cands), points, rules, gen, rng)
}

/// Elastic-net fit with least-squares refit; failures leave `loss = +∞`.
pub fn evaluate_individual(ind: &Individual, problem: &RegressionProblem, config: &GpConfig) -> Individual {
    let mut out = ind.clone();
    out.clear_fit();
    let fit = problem.design(&ind.candidates).and_then(|d| elastic_net_fit(&d, config.lambda, config.beta));
    if let Ok(f) = fit {
        if f.loss.is_finite() && f.refit.iter().all(|v| v.is_finite()) {
            out.coefficients = f.refit;
            out.outputs = f.outputs;
            out.loss = f.loss;
        }
    }
    out
}

/// Fits every individual that is not fitted yet.
pub fn evaluate_population(pop: Vec<Individual>, problem: &RegressionProblem, config: &GpConfig) -> Vec<Individual> {
    let todo: Vec<usize> = (0..pop.len()).filter(|&i| !pop[i].is_fitted()).collect();
    let fitted = crate::parallel::map_indexed(todo.len(), |k| evaluate_individual(&pop[todo[k]], problem, config));
    let mut pop = pop;
    for (k, ind) in todo.into_iter().zip(fitted) {
        pop[k] = ind;
    }
    pop
}

fn rank_cmp(pop: &[Individual], a: usize, b: usize) -> Ordering {
    pop[a]
        .fitness
        .total_cmp(&pop[b].fitness)
        .then(pop[a].loss.total_cmp(&pop[b].loss))
        .then(a.cmp(&b))
}

/// Indices sorted by (fitness, loss, index).
pub fn rank_population(pop: &[Individual]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pop.len()).collect();
    idx.sort_by(|&a, &b| rank_cmp(pop, a, b));
    idx
}

/// Elites (lowest fitness) then tournament winners drawn from the
/// individuals not yet in the set. Non-finite losses never enter.
pub fn build_best_set<R: Rng + ?Sized>(pop: &[Individual], config: &GpConfig, rng: &mut R) -> Vec<usize> {
    let target = config.best_set_size();
    let order: Vec<usize> = rank_population(pop).into_iter().filter(|&i| pop[i].loss.is_finite()).collect();
    let elites = config.elite_count().min(order.len());
    let mut members: Vec<usize> = order[..elites].to_vec();
    let mut eligible: Vec<usize> = order[elites..].to_vec();
    eligible.sort_unstable();
    while members.len() < target && !eligible.is_empty() {
        let mut winner = eligible[rng.random_range(0..eligible.len())];
        for _ in 1..config.tournament_size {
            let c = eligible[rng.random_range(0..eligible.len())];
            if rank_cmp(pop, c, winner) == Ordering::Less {
                winner = c;
            }
        }
        members.push(winner);
        eligible.retain(|&i| i != winner);
    }
    members
}

fn tournament<'a, R: Rng + ?Sized>(members: &'a [Individual], fit: &[f64], size: usize, rng: &mut R) -> &'a Individual {
    let mut w = rng.random_range(0..members.len());
    for _ in 1..size {
        let c = rng.random_range(0..members.len());
        if fit[c].total_cmp(&fit[w]).then(c.cmp(&w)) == Ordering::Less {
            w = c;
        }
    }
    &members[w]
}

/// Runs the evolutionary search on `problem`.
pub fn evolve(
    problem: &RegressionProblem,
    functions: &FunctionSet,
    config: &GpConfig,
    seed: u64,
) -> Result<EvolutionResult, Error> {
    config.validate()?;
    let gen = TreeGenerator::new(functions.clone(), problem.n_vars(), config.c_min, config.c_max)?;
    let points = problem.edit_points();
    let rules = config.edit_rules();
    let mut pop = init_population(config, &gen, points, seed);
    let mut state = FitnessState::new(config);
    let mut carried = 0usize;
    let mut history = Vec::new();
    let mut lowest: Option<Individual> = None;

    let mut g = 0usize;
    loop {
        pop = evaluate_population(pop, problem, config);
        let stats = if carried > 0 { BestStats::from_members(&pop[..carried]) } else { None }
            .or_else(|| BestStats::from_members(pop.iter()));
        for ind in pop.iter_mut() {
            ind.fitness = match &stats {
                Some(s) => fitness(ind, s, state.tau1, config.tau2),
                None => f64::INFINITY,
            };
        }
        let order = rank_population(&pop);
        let best = &pop[order[0]];
        let min_idx = (0..pop.len()).min_by(|&a, &b| pop[a].loss.total_cmp(&pop[b].loss).then(a.cmp(&b))).unwrap_or(0);
        history.push(GenerationRecord {
            generation: g,
            best_loss: best.loss,
            best_fitness: best.fitness,
            candidate_count: best.candidates.len(),
            node_count: best.node_total(),
            population: pop.len(),
            min_loss: pop[min_idx].loss,
            tau1: state.tau1,
        });
        if lowest.as_ref().is_none_or(|l| pop[min_idx].loss < l.loss) {
            lowest = Some(pop[min_idx].clone());
        }
        let reached = pop[min_idx].loss <= config.e_thre;
        if reached || g >= config.generations {
            let chosen = if reached {
                order.iter().copied().find(|&i| pop[i].loss <= config.e_thre).unwrap_or(min_idx)
            } else {
                order[0]
            };
            return Ok(EvolutionResult {
                best: pop[chosen].clone(),
                lowest_loss: lowest.unwrap_or_else(|| pop[chosen].clone()),
                history,
                generations: g,
                reached_target: reached,
            });
        }
        state = update_tau1(state, g, best.loss, config);

        let mut sel_rng = substream(seed, &[SELECT_TAG, g as u64]);
        let member_idx = build_best_set(&pop, config, &mut sel_rng);
        let member_fit: Vec<f64> = member_idx.iter().map(|&i| pop[i].fitness).collect();
        let members: Vec<Individual> = crate::parallel::map_indexed(member_idx.len(), |k| {
            let ind = &pop[member_idx[k]];
            match problem.design(&ind.candidates) {
                Ok(d) => {
                    let (pruned, _) = hard_threshold_prune(ind, &d, config.rho);
                    if pruned.candidates == ind.candidates {
                        ind.clone()
                    } else {
                        Individual::new(pruned.candidates)
                    }
                }
                Err(_) => ind.clone(),
            }
        });

        let mut next = members.clone();
        let (p_cross, p_sub) = config.operator_thresholds();
        let mut slot = next.len();
        while slot < config.population {
            let mut rng = substream(seed, &[OFFSPRING_TAG, g as u64, slot as u64]);
            if members.is_empty() {
                next.push(random_individual(config, &gen, points, &rules, &mut rng));
                slot += 1;
                continue;
            }
            let u: f64 = rng.random();
            let pick = |rng: &mut StreamRng| tournament(&members, &member_fit, config.tournament_size, rng);
            let mut children = Vec::with_capacity(2);
            if u < p_cross && slot + 1 < config.population {
                let a = pick(&mut rng);
                let b = pick(&mut rng);
                let (c1, c2) = crossover(a, b, &mut rng);
                children.push(c1);
                children.push(c2);
            } else if u < p_sub || u < p_cross {
                let a = pick(&mut rng);
                children.push(mutate_subtree(a, &gen, config.mutation_max_nodes, &mut rng));
            } else {
                let a = pick(&mut rng);
                children.push(mutate_constant(a, g, config.vartheta, &mut rng).unwrap_or_else(|| a.clone()));
            }
            for c in children {
                next.push(edit_individual(&c, points, &rules, &gen, &mut rng));
                slot += 1;
            }
        }
        carried = members.len();
        pop = next;
        g += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square_problem() -> RegressionProblem {
        let xs: Vec<f64> = (0..50).map(|i| -2.0 + 4.0 * i as f64 / 49.0).collect();
        let y = xs.iter().map(|x| x * x).collect();
        RegressionProblem::pointwise(PointSet::scalars(xs), vec![y]).unwrap()
    }

    fn small_config() -> GpConfig {
        GpConfig { population: 60, generations: 30, init_candidates: 3, n_thre: 10, e_thre: 1e-10, ..GpConfig::default() }
    }

    #[test]
    fn recovers_square() {
        let r = evolve(&square_problem(), &FunctionSet::full(), &small_config(), 11).unwrap();
        assert!(r.reached_target, "min loss {}", r.lowest_loss.loss);
        assert!(r.best.loss <= 1e-10);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = GpConfig { generations: 5, e_thre: 0.0, ..small_config() };
        let a = evolve(&square_problem(), &FunctionSet::full(), &cfg, 5).unwrap();
        let b = evolve(&square_problem(), &FunctionSet::full(), &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.history.len(), a.generations + 1);
        assert!(a.generations <= 5);
    }

    #[test]
    fn best_set_is_distinct_and_sized() {
        let cfg = small_config();
        let problem = square_problem();
        let gen = TreeGenerator::new(FunctionSet::full(), 1, -10.0, 10.0).unwrap();
        let pop = evaluate_population(init_population(&cfg, &gen, problem.edit_points(), 1), &problem, &cfg);
        assert_eq!(pop.len(), cfg.population);
        let stats = BestStats::from_members(pop.iter()).unwrap();
        let mut pop = pop;
        for p in pop.iter_mut() {
            p.fitness = fitness(p, &stats, 0.0, cfg.tau2);
        }
        let mut rng = substream(1, &[SELECT_TAG, 0]);
        let set = build_best_set(&pop, &cfg, &mut rng);
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), set.len());
        assert!(set.len() <= cfg.best_set_size());
        assert_eq!(set[0], rank_population(&pop)[0]);
    }
}
