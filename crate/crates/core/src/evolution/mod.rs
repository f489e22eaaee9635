//! Genetic-programming search over individuals of candidate trees.

mod config;
mod engine;
mod fitness;
mod operators;

pub use config::GpConfig;
pub use engine::{
    build_best_set, evaluate_individual, evaluate_population, evolve, init_population, rank_population,
    EvolutionResult, GenerationRecord,
};
pub use fitness::{fitness, update_tau1, BestStats, FitnessState};
pub use operators::{
    crossover, crossover_trees, mutate_constant, mutate_subtree, perturb_constant, CROSSOVER_ATTEMPTS,
};
