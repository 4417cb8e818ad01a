//! The genetic programming engine.
//!
//! Programs are scored on a fitness set of problem instances (lower is
//! better, 0 means every instance solved), and each generation is rebuilt
//! from fitness-proportionate reproduction, subtree crossover and subtree
//! mutation. The best all-solving program and its total step count are
//! archived across runs; that total also caps how many steps later
//! candidates may spend on the fitness set.

mod engine;
mod fitness;
mod operators;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::program::{InitMethod, DEFAULT_MAX_DEPTH};
use crate::simulator::DEFAULT_COMM_RADIUS;

pub use engine::{
    evolve, evolve_observed, write_history_csv, EvolutionOutcome, GenerationStats, GenerationView,
    HISTORY_CSV_HEADER,
};
pub use fitness::{compute_fitness, EvaluationResult};
pub use operators::{
    asexual_reproduction, crossover, mutate, operator_counts, selection_weights, try_crossover,
    MAX_OPERATOR_ATTEMPTS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("operator rates must sum to 1, got {0}")]
    RatesSum(f64),
    #[error("{name} rate {value} outside [0, 1]")]
    RateRange { name: &'static str, value: f64 },
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("initial depth {init} exceeds maximum depth {max}")]
    InitDepth { init: usize, max: usize },
    #[error("the fitness set is empty")]
    EmptyFitnessSet,
}

// f64 rates are never NaN after validation.
impl Eq for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub population_size: usize,
    pub runs: usize,
    pub generations: usize,
    pub reproduction_rate: f64,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Depth bound for initial programs and for subtrees grown by mutation.
    pub init_max_depth: usize,
    pub max_depth: usize,
    pub comm_radius: usize,
    pub init_method: InitMethod,
    pub seed: u64,
}

impl Default for GpConfig {
    /// Full-scale settings: 2000 programs, 5 runs of 400 generations.
    fn default() -> Self {
        GpConfig {
            population_size: 2000,
            runs: 5,
            generations: 400,
            reproduction_rate: 0.1,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            init_max_depth: 2,
            max_depth: DEFAULT_MAX_DEPTH,
            comm_radius: DEFAULT_COMM_RADIUS,
            init_method: InitMethod::Grow,
            seed: 0,
        }
    }
}

impl GpConfig {
    /// Desk-scale settings: 300 programs, 2 runs of 60 generations.
    pub fn desk() -> Self {
        GpConfig {
            population_size: 300,
            runs: 2,
            generations: 60,
            ..GpConfig::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, value) in [
            ("reproduction", self.reproduction_rate),
            ("crossover", self.crossover_rate),
            ("mutation", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::RateRange { name, value });
            }
        }
        let sum = self.reproduction_rate + self.crossover_rate + self.mutation_rate;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ConfigError::RatesSum(sum));
        }
        for (name, value) in [
            ("population size", self.population_size),
            ("runs", self.runs),
            ("generations", self.generations),
            ("initial depth", self.init_max_depth),
            ("communication radius", self.comm_radius),
        ] {
            if value == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        if self.init_max_depth > self.max_depth {
            return Err(ConfigError::InitDepth {
                init: self.init_max_depth,
                max: self.max_depth,
            });
        }
        Ok(())
    }
}
